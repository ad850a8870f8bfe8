"""
Symmetry-projected product states.

Projection is done by masking amplitudes in the product basis: a parity
sector keeps the configurations whose level-count parities match sigma, an
occupation sector keeps those with the given level counts. Empty projections
raise EmptySectorError instead of returning a zero vector.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.entanglement import occupations
from nlevel_factor.errors import ConfigError, EmptySectorError
from nlevel_factor.factorization import product_state
from nlevel_factor.model import (
    SectorKind,
    SectorLabel,
    enumerate_sectors,
    level_counts,
    parity_labels,
)

logger = logging.getLogger(__name__)

EMPTY_WEIGHT = 1e-14
UNITARY_TOLERANCE = 1e-10


class SplittingMethod(str, Enum):
    AUTO = "auto"
    CLOSED_FORM = "closed_form"
    BRUTE_FORCE = "brute_force"


@dataclass(frozen=True, eq=False)
class ProjectedState:
    """Unit-norm state of definite parity or occupation."""

    vector: NDArray[np.generic]
    label: SectorLabel
    source_f: NDArray[np.generic] | None = None
    weight: float = 1.0

    @property
    def n(self) -> int:
        return len(self.label.values)

    def to_dict(self) -> dict[str, Any]:
        return {"sector": str(self.label), "kind": self.label.kind.value, "weight": self.weight}


def _parity_label(sigma: SectorLabel | Sequence[int], n_sites: int) -> SectorLabel:
    if isinstance(sigma, SectorLabel):
        if sigma.kind is not SectorKind.PARITY:
            raise ConfigError(f"expected a parity sector, got {sigma.kind.value}")
        return SectorLabel.parity(sigma.values, n_sites)
    return SectorLabel.parity(tuple(int(s) for s in sigma), n_sites)


def _mask_and_normalize(
    psi: NDArray[np.generic], mask: NDArray[np.bool_], label: SectorLabel
) -> tuple[NDArray[np.generic], float]:
    kept = psi[mask]
    weight = float(np.sum(np.abs(kept) ** 2))
    if weight < EMPTY_WEIGHT:
        raise EmptySectorError(f"projection onto sector {label} is empty (weight {weight:.3e})")
    vector = np.zeros_like(psi)
    vector[mask] = kept / np.sqrt(weight)
    return vector, weight


def parity_project(f: ArrayLike, n_sites: int, sigma: SectorLabel | Sequence[int]) -> ProjectedState:
    """Definite-parity component of product_state(f, N), renormalized.

    Raises:
        ConfigError: If sigma is inconsistent with N.
        EmptySectorError: If the product state has no weight in the sector.
    """
    amplitudes = np.asarray(f)
    label = _parity_label(sigma, n_sites)
    if len(label.values) != amplitudes.size:
        raise ConfigError(f"sigma has {len(label.values)} entries for n={amplitudes.size} levels")
    psi = product_state(amplitudes, n_sites)
    mask = np.all(parity_labels(amplitudes.size, n_sites) == np.array(label.values), axis=1)
    vector, weight = _mask_and_normalize(psi, mask, label)
    return ProjectedState(vector=vector, label=label, source_f=amplitudes, weight=weight)


def projection_weights(f: ArrayLike, n_sites: int) -> dict[SectorLabel, float]:
    """Unnormalized weight of product_state(f, N) in every parity sector (sums to 1)."""
    amplitudes = np.asarray(f)
    probabilities = np.abs(product_state(amplitudes, n_sites)) ** 2
    labels = parity_labels(amplitudes.size, n_sites)
    weights: dict[SectorLabel, float] = {}
    for label in enumerate_sectors(amplitudes.size, n_sites, SectorKind.PARITY):
        mask = np.all(labels == np.array(label.values), axis=1)
        weights[label] = float(probabilities[mask].sum())
    return weights


def projected_occupations_n3(f: ArrayLike, n_sites: int, sigma: SectorLabel | Sequence[int]) -> NDArray[np.float64]:
    """Closed-form site occupations of a parity-projected three-level product state.

    With u_j = 1 - 2|f_j|^2:

        <n_i> = |f_i|^2 (1 + sum_j (-1)^[i=j] sigma_j u_j^(N-1)) / (1 + sum_j sigma_j u_j^N)

    Raises:
        ConfigError: Unless n = 3.
        EmptySectorError: If the denominator vanishes.
    """
    f2 = np.abs(np.asarray(f)) ** 2
    if f2.size != 3:
        raise ConfigError(f"the closed form holds for n=3 only, got n={f2.size}")
    label = _parity_label(sigma, n_sites)
    s = np.array(label.values, dtype=np.float64)
    u = 1.0 - 2.0 * f2
    denominator = 1.0 + float(np.sum(s * u**n_sites))
    if abs(denominator) < EMPTY_WEIGHT:
        raise EmptySectorError(f"projection onto sector {label} is empty (closed form denominator vanishes)")
    signs = np.where(np.eye(3, dtype=bool), -1.0, 1.0)
    numerator = 1.0 + signs @ (s * u ** (n_sites - 1))
    return np.asarray(f2 * numerator / denominator, dtype=np.float64)


def symmetric_state(occupation: Sequence[int], n_sites: int) -> ProjectedState:
    """Equal-amplitude superposition of all configurations with the given level counts.

    Raises:
        ConfigError: If the counts do not sum to N.
    """
    label = SectorLabel.occupation(tuple(int(c) for c in occupation), n_sites)
    n = len(label.values)
    mask = np.all(level_counts(n, n_sites) == np.array(label.values), axis=1)
    vector = mask / np.sqrt(np.count_nonzero(mask))
    return ProjectedState(vector=vector.astype(np.float64), label=label)


def number_project(f: ArrayLike, n_sites: int, occupation: Sequence[int]) -> ProjectedState:
    """Fixed-occupation component of product_state(f, N) with a real positive phase.

    Raises:
        EmptySectorError: If some occupied level has f_i = 0.
    """
    amplitudes = np.asarray(f)
    label = SectorLabel.occupation(tuple(int(c) for c in occupation), n_sites)
    if len(label.values) != amplitudes.size:
        raise ConfigError(f"occupation has {len(label.values)} entries for n={amplitudes.size} levels")
    psi = product_state(amplitudes, n_sites)
    mask = np.all(level_counts(amplitudes.size, n_sites) == np.array(label.values), axis=1)
    vector, weight = _mask_and_normalize(psi, mask, label)
    # every amplitude in the sector is prod_i f_i^{n_i}
    phase = vector[np.flatnonzero(mask)[0]]
    vector = vector * (np.conj(phase) / abs(phase))
    if np.iscomplexobj(vector) and float(np.max(np.abs(vector.imag))) < EMPTY_WEIGHT:
        vector = vector.real
    return ProjectedState(vector=vector, label=label, source_f=amplitudes, weight=weight)


def number_projected_family(f: ArrayLike, n_sites: int) -> list[ProjectedState]:
    """All nonempty occupation-sector projections of product_state(f, N)."""
    amplitudes = np.asarray(f)
    family: list[ProjectedState] = []
    for label in enumerate_sectors(amplitudes.size, n_sites, SectorKind.OCCUPATION):
        try:
            family.append(number_project(amplitudes, n_sites, label.values))
        except EmptySectorError:
            logger.debug("occupation sector %s has no weight", label)
    return family


def perturbative_splitting(
    f: ArrayLike,
    n_sites: int,
    sigma: SectorLabel | Sequence[int],
    delta_eps: ArrayLike,
    *,
    method: SplittingMethod | str = SplittingMethod.AUTO,
    site_total: float | None = None,
) -> float:
    """First-order shift of a parity-projected level under eps -> eps + delta_eps.

    delta_E = site_total * sum_i delta_eps_i <n_i>, where site_total is the
    sum of the site multipliers of eps (N on a ring). Constant shifts from
    perturbing the couplings themselves are not included.
    """
    amplitudes = np.asarray(f)
    shift = np.asarray(delta_eps, dtype=np.float64)
    if shift.shape != (amplitudes.size,):
        raise ConfigError(f"delta_eps must have {amplitudes.size} entries, got shape {shift.shape}")
    chosen = SplittingMethod(method)
    if chosen is SplittingMethod.AUTO:
        chosen = SplittingMethod.CLOSED_FORM if amplitudes.size == 3 else SplittingMethod.BRUTE_FORCE
    if chosen is SplittingMethod.CLOSED_FORM:
        average = projected_occupations_n3(amplitudes, n_sites, sigma)
    else:
        state = parity_project(amplitudes, n_sites, sigma).vector
        average = occupations(state, amplitudes.size)[0]
    total = float(n_sites) if site_total is None else float(site_total)
    return total * float(shift @ average)


def global_rotation(state: ArrayLike, u: ArrayLike, n_sites: int) -> NDArray[np.complex128]:
    """Apply u to every site of a product-basis state.

    Raises:
        ConfigError: If u is not unitary or does not match the state.
    """
    matrix = np.asarray(u, dtype=np.complex128)
    n = matrix.shape[0]
    if matrix.shape != (n, n) or float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(n)))) > UNITARY_TOLERANCE:
        raise ConfigError("global rotation needs a square unitary matrix")
    psi = np.asarray(state, dtype=np.complex128)
    if psi.size != n**n_sites:
        raise ConfigError(f"state length {psi.size} does not match n={n}, N={n_sites}")
    tensor = psi.reshape((n,) * n_sites)
    for axis in range(n_sites):
        tensor = np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(-1)
