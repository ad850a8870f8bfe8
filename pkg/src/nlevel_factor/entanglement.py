"""
Reduced density matrices and the entanglement observables built on them.

States are vectors in the little-endian product basis. A reduced matrix over
`sites` uses a local index that is little-endian over the listed sites, so
the first listed site is the least significant digit.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.config import get_dim_cap
from nlevel_factor.errors import ConfigError, InvariantError, check_cap

logger = logging.getLogger(__name__)

TRACE_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-12
NEGATIVE_EIGENVALUE_TOLERANCE = 1e-10
ENTROPY_CUTOFF = 1e-12
NEGATIVITY_IDENTITY_TOLERANCE = 1e-10
STATE_NORM_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced state of a site subset.

    Construction checks unit trace, Hermiticity and positivity up to noise
    and caches the ascending spectrum.
    """

    sites: tuple[int, ...]
    n: int
    data: NDArray[np.generic]
    eigenvalues: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        dim = self.n ** len(self.sites)
        if self.data.shape != (dim, dim):
            raise ConfigError(f"density matrix for {len(self.sites)} sites must be {dim}x{dim}, got {self.data.shape}")
        asymmetry = float(np.max(np.abs(self.data - self.data.conj().T)))
        if asymmetry > HERMITIAN_TOLERANCE:
            raise InvariantError(f"density matrix is not Hermitian (deviation {asymmetry:.3e})")
        hermitian = 0.5 * (self.data + self.data.conj().T)
        trace = float(np.real(np.trace(hermitian)))
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise InvariantError(f"density matrix trace is {trace:.15g}, expected 1")
        eigenvalues = np.linalg.eigvalsh(hermitian)
        if eigenvalues[0] < -NEGATIVE_EIGENVALUE_TOLERANCE:
            raise InvariantError(f"density matrix has a negative eigenvalue {eigenvalues[0]:.3e}")
        object.__setattr__(self, "data", hermitian)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    @property
    def purity(self) -> float:
        return float(np.sum(self.eigenvalues**2))


def _check_state(state: ArrayLike, n: int) -> tuple[NDArray[np.generic], int]:
    psi = np.asarray(state)
    if psi.ndim != 1:
        raise ConfigError(f"state must be a vector, got shape {psi.shape}")
    n_sites = round(np.log(psi.size) / np.log(n)) if psi.size > 1 else 0
    if n_sites < 1 or n**n_sites != psi.size:
        raise ConfigError(f"state length {psi.size} is not a power of n={n}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise ConfigError(f"state must have unit norm, got {norm:.15g}")
    return psi, int(n_sites)


def _check_sites(sites: Sequence[int], n_sites: int) -> tuple[int, ...]:
    chosen = tuple(int(p) for p in sites)
    if not chosen:
        raise ConfigError("site subset must not be empty")
    if len(set(chosen)) != len(chosen):
        raise ConfigError(f"site subset has repeated sites: {chosen}")
    for p in chosen:
        if not 0 <= p < n_sites:
            raise ConfigError(f"site {p} out of range [0, {n_sites})")
    return chosen


def _split(psi: NDArray[np.generic], n: int, n_sites: int, sites: tuple[int, ...]) -> NDArray[np.generic]:
    """Reshape psi into a (n**k, rest) matrix with the listed sites as rows."""
    # C-order axis a is site N-1-a; flip so axis p is site p
    tensor = psi.reshape((n,) * n_sites).transpose(tuple(range(n_sites - 1, -1, -1)))
    front = np.moveaxis(tensor, list(reversed(sites)), list(range(len(sites))))
    return front.reshape(n ** len(sites), -1)


def reduce(state: ArrayLike, sites: Sequence[int], n: int, *, cap: int | None = None) -> DensityMatrix:
    """Partial trace of |psi><psi| over the complement of `sites`.

    Raises:
        ConfigError: For a bad state or site subset.
        DimensionCapError: If n**(2k) exceeds the cap.
    """
    psi, n_sites = _check_state(state, n)
    chosen = _check_sites(sites, n_sites)
    check_cap(f"reduced density matrix over {len(chosen)} sites", n ** (2 * len(chosen)), get_dim_cap(cap))
    matrix = _split(psi, n, n_sites, chosen)
    return DensityMatrix(sites=chosen, n=n, data=matrix @ matrix.conj().T)


def _entropy_of(probabilities: NDArray[np.float64]) -> float:
    if np.any(probabilities < -NEGATIVE_EIGENVALUE_TOLERANCE):
        raise InvariantError(f"negative probability {probabilities.min():.3e} in entropy")
    kept = probabilities[probabilities > ENTROPY_CUTOFF]
    return max(0.0, float(-np.sum(kept * np.log2(kept))))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    return _entropy_of(rho.eigenvalues)


def partial_transpose(rho: DensityMatrix, site: int = 0) -> NDArray[np.generic]:
    """Transpose the indices of one listed site (0 = first listed) of a pair matrix."""
    if len(rho.sites) != 2:
        raise ConfigError(f"partial transpose needs a two-site matrix, got sites {rho.sites}")
    n = rho.n
    # axes: (row second, row first, col second, col first)
    tensor = rho.data.reshape(n, n, n, n)
    if site == 0:
        swapped = tensor.transpose(0, 3, 2, 1)
    elif site == 1:
        swapped = tensor.transpose(2, 1, 0, 3)
    else:
        raise ConfigError(f"site must be 0 or 1, got {site}")
    return swapped.reshape(n * n, n * n)


def negativity(rho: DensityMatrix, *, site: int = 0) -> float:
    """Sum of the negative eigenvalues of the partial transpose (as a positive number).

    Raises:
        ConfigError: For a matrix that is not over two sites.
        InvariantError: If it disagrees with (trace norm - 1)/2.
    """
    spectrum = np.linalg.eigvalsh(partial_transpose(rho, site))
    from_negatives = float(np.sum(np.clip(-spectrum, 0.0, None)))
    from_trace_norm = 0.5 * (float(np.sum(np.abs(spectrum))) - 1.0)
    if abs(from_negatives - from_trace_norm) > NEGATIVITY_IDENTITY_TOLERANCE:
        raise InvariantError(
            f"negativity {from_negatives:.15g} disagrees with trace-norm form {from_trace_norm:.15g}"
        )
    return from_negatives


def mutual_information(state: ArrayLike, p: int, q: int, n: int, *, cap: int | None = None) -> float:
    """I_pq = S(rho_p) + S(rho_q) - S(rho_pq) in bits.

    Raises:
        ConfigError: If p == q.
    """
    if p == q:
        raise ConfigError(f"mutual information needs two different sites, got p=q={p}")
    return (
        entropy(reduce(state, [p], n, cap=cap))
        + entropy(reduce(state, [q], n, cap=cap))
        - entropy(reduce(state, [p, q], n, cap=cap))
    )


def occupations(state: ArrayLike, n: int) -> NDArray[np.float64]:
    """Average level occupations <n_i> of every site, shape (N, n)."""
    psi, n_sites = _check_state(state, n)
    probabilities = (np.abs(psi) ** 2).reshape((n,) * n_sites)
    out = np.empty((n_sites, n))
    for p in range(n_sites):
        axis = n_sites - 1 - p
        others = tuple(a for a in range(n_sites) if a != axis)
        out[p] = probabilities.sum(axis=others)
    return out


def max_offdiagonal(rho: DensityMatrix) -> float:
    """Largest off-diagonal magnitude in the product basis."""
    off = rho.data - np.diag(np.diag(rho.data))
    return float(np.max(np.abs(off))) if off.size else 0.0


def block_entropy(state: ArrayLike, sites: Sequence[int], n: int) -> float:
    """Entropy of a block from its Schmidt values; the block matrix is never formed."""
    psi, n_sites = _check_state(state, n)
    chosen = _check_sites(sites, n_sites)
    singular = np.linalg.svd(_split(psi, n, n_sites, chosen), compute_uv=False)
    return _entropy_of(singular**2)


def pair_spectrum(state: ArrayLike, p: int, q: int, n: int, *, cap: int | None = None) -> NDArray[np.float64]:
    """All n**2 eigenvalues of rho_pq, descending."""
    return reduce(state, [p, q], n, cap=cap).eigenvalues[::-1].copy()


@dataclass
class EntanglementProfile:
    """Observables of one state seen from site 0."""

    site_entropy: float
    negativities: list[float]
    mutual_informations: list[float]
    occupations: NDArray[np.float64]
    pair_spectrum: NDArray[np.float64]

    def row(self, spectrum_size: int = 4) -> list[Any]:
        spectrum = list(self.pair_spectrum[:spectrum_size])
        spectrum += [float("nan")] * (spectrum_size - len(spectrum))
        return [
            self.site_entropy,
            *self.negativities,
            *self.mutual_informations,
            *self.occupations.tolist(),
            *spectrum,
        ]


def entanglement_profile(
    state: ArrayLike, n: int, distances: Sequence[int] = (1, 2, 3), *, cap: int | None = None
) -> EntanglementProfile:
    """Site entropy, pair negativity and mutual information at each distance.

    Distances that do not reach a distinct site give nan.
    """
    psi, n_sites = _check_state(state, n)
    rho_0 = reduce(psi, [0], n, cap=cap)
    negativities: list[float] = []
    informations: list[float] = []
    spectrum = np.array([])
    for d in distances:
        q = int(d) % n_sites
        if d <= 0 or q == 0 or d >= n_sites:
            negativities.append(float("nan"))
            informations.append(float("nan"))
            continue
        rho_pair = reduce(psi, [0, q], n, cap=cap)
        negativities.append(negativity(rho_pair))
        informations.append(entropy(rho_0) + entropy(reduce(psi, [q], n, cap=cap)) - entropy(rho_pair))
        if spectrum.size == 0:
            spectrum = rho_pair.eigenvalues[::-1].copy()
    return EntanglementProfile(
        site_entropy=entropy(rho_0),
        negativities=negativities,
        mutual_informations=informations,
        occupations=np.real(np.diag(rho_0.data)).astype(np.float64),
        pair_spectrum=spectrum,
    )
