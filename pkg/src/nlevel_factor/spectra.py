"""
Dense symmetric eigensolution and sector-resolved spectra.

Sector-first diagonalization is the default: each parity (or occupation)
block is solved on its own and the results are merged, so every level keeps
the label of the block it came from. Full-space solves are kept as a
cross-check mode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from nlevel_factor.config import get_dim_cap
from nlevel_factor.errors import ConfigError, InvariantError, SymmetryError, check_cap
from nlevel_factor.hamiltonian import HamiltonianMatrix, build_full, build_sector
from nlevel_factor.model import (
    ModelSpec,
    SectorKind,
    SectorLabel,
    enumerate_sectors,
    parity_labels,
)

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-7
RESIDUAL_TOLERANCE = 1e-10
RECONSTRUCTION_TOLERANCE = 1e-9
ORTHONORMALITY_TOLERANCE = 1e-10
LABEL_TOLERANCE = 1e-8
SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Ascending eigenvalues with their sector labels.

    Eigenvectors, when kept, are columns in the full product basis.
    """

    eigenvalues: NDArray[np.float64]
    sectors: tuple[SectorLabel | None, ...]
    eigenvectors: NDArray[np.float64] | None = None
    gs_band: tuple[int, ...] = ()

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gap(self) -> float:
        """E_1 - E_0 (nan for a single level)."""
        if self.eigenvalues.size < 2:
            return float("nan")
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    def energy_tolerance(self, relative: float = DEGENERACY_TOLERANCE) -> float:
        return relative * max(1.0, abs(self.ground_energy))

    def ground_multiplicity(self, relative: float = DEGENERACY_TOLERANCE) -> int:
        """Number of levels within tolerance of E_0."""
        return int(np.count_nonzero(self.eigenvalues - self.ground_energy <= self.energy_tolerance(relative)))

    def with_band(self, size: int) -> SpectrumResult:
        return replace(self, gs_band=tuple(range(min(size, len(self)))))

    def sector_strings(self) -> list[str]:
        return ["" if label is None else str(label) for label in self.sectors]


def distinct_levels(
    eigenvalues: NDArray[np.float64], relative: float = DEGENERACY_TOLERANCE
) -> list[tuple[float, int]]:
    """Group an ascending spectrum into (mean value, multiplicity) clusters."""
    if eigenvalues.size == 0:
        return []
    groups: list[list[float]] = [[float(eigenvalues[0])]]
    for value in eigenvalues[1:]:
        value = float(value)
        if value - groups[-1][-1] <= relative * max(1.0, abs(value)):
            groups[-1].append(value)
        else:
            groups.append([value])
    return [(float(np.mean(g)), len(g)) for g in groups]


def parity_expectations(vectors: NDArray[np.generic], n: int, n_sites: int) -> NDArray[np.float64]:
    """<v|P_i|v> for each column v (full basis), shape (k, n)."""
    weights = np.abs(vectors) ** 2
    return np.asarray(weights.T @ parity_labels(n, n_sites), dtype=np.float64)


def _check_symmetric(H: HamiltonianMatrix) -> None:
    scale = max(1.0, float(np.max(np.abs(H.data)))) if H.data.size else 1.0
    deviation = float(np.max(np.abs(H.data - H.data.T))) if H.data.size else 0.0
    if deviation > SYMMETRY_TOLERANCE * scale:
        raise SymmetryError(f"eigensolve needs a symmetric matrix (max asymmetry {deviation:.3e})")


def _self_check(
    H: HamiltonianMatrix, values: NDArray[np.float64], vectors: NDArray[np.float64], *, full: bool
) -> None:
    residuals = np.linalg.norm(H.data @ vectors - vectors * values[None, :], axis=0)
    limits = RESIDUAL_TOLERANCE * np.maximum(1.0, np.abs(values))
    if np.any(residuals > limits):
        worst = int(np.argmax(residuals / limits))
        raise InvariantError(f"eigenpair {worst} residual {residuals[worst]:.3e} exceeds tolerance")
    overlap = vectors.T @ vectors
    orthogonality = float(np.max(np.abs(overlap - np.eye(overlap.shape[0]))))
    if orthogonality > ORTHONORMALITY_TOLERANCE:
        raise InvariantError(f"eigenvectors not orthonormal (max deviation {orthogonality:.3e})")
    if full:
        scale = max(1.0, float(np.max(np.abs(H.data))))
        rebuilt = (vectors * values[None, :]) @ vectors.T
        error = float(np.max(np.abs(rebuilt - H.data)))
        if error > RECONSTRUCTION_TOLERANCE * scale:
            raise InvariantError(f"eigen reconstruction error {error:.3e} exceeds tolerance")


def eigensolve(
    H: HamiltonianMatrix,
    *,
    want_vectors: bool = False,
    k: int | None = None,
    cap: int | None = None,
) -> SpectrumResult:
    """Dense symmetric eigendecomposition of one block.

    With `k`, only the lowest k levels are computed and kept. Eigenpairs are
    checked (residual, orthonormality, and reconstruction for full solves).
    Full-space vectors that are nondegenerate and of definite parity get a
    parity label.

    Raises:
        SymmetryError: If H is not symmetric.
        DimensionCapError: If H exceeds the cap.
    """
    check_cap("eigensolve", H.dim, get_dim_cap(cap))
    _check_symmetric(H)
    subset = None
    if k is not None:
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        if k < H.dim:
            subset = [0, k - 1]
    if want_vectors:
        values, vectors = scipy.linalg.eigh(H.data, subset_by_index=subset)
        _self_check(H, values, vectors, full=subset is None)
    else:
        values = scipy.linalg.eigh(H.data, eigvals_only=True, subset_by_index=subset)
        vectors = None

    sectors: list[SectorLabel | None] = [H.sector] * values.size
    global_vectors = None
    if vectors is not None:
        global_vectors = np.asarray(H.to_global(vectors), dtype=np.float64)
        if H.sector is None:
            sectors = _label_full_space(values, global_vectors, H.n, H.n_sites)
    return SpectrumResult(
        eigenvalues=np.asarray(values, dtype=np.float64),
        sectors=tuple(sectors),
        eigenvectors=global_vectors,
    )


def _label_full_space(
    values: NDArray[np.float64], vectors: NDArray[np.float64], n: int, n_sites: int
) -> list[SectorLabel | None]:
    expectations = parity_expectations(vectors, n, n_sites)
    labels: list[SectorLabel | None] = []
    for index, value in enumerate(values):
        tolerance = DEGENERACY_TOLERANCE * max(1.0, abs(float(value)))
        neighbors = np.abs(values - value) <= tolerance
        if np.count_nonzero(neighbors) == 1 and np.all(np.abs(expectations[index]) > 1 - LABEL_TOLERANCE):
            labels.append(SectorLabel(SectorKind.PARITY, tuple(int(np.sign(x)) for x in expectations[index])))
        else:
            labels.append(None)
    return labels


def solve_sectors(
    spec: ModelSpec,
    kind: SectorKind | str,
    *,
    want_vectors: bool = False,
    k: int | None = None,
    cap: int | None = None,
) -> list[tuple[SectorLabel, SpectrumResult]]:
    """Eigensolve every nonempty sector of one kind, in sector order."""
    kind = SectorKind(kind)
    if kind is SectorKind.NONE:
        raise ConfigError("solve_sectors needs a parity or occupation sector kind")
    if kind is SectorKind.OCCUPATION and not spec.v_zero:
        raise SymmetryError("occupation sectors are only conserved when V = 0")
    results = []
    for label in enumerate_sectors(spec.n, spec.n_sites, kind):
        block = build_sector(spec, label, cap=cap)
        results.append((label, eigensolve(block, want_vectors=want_vectors, k=k, cap=cap)))
    return results


def merge_spectra(
    parts: list[tuple[SectorLabel, SpectrumResult]], k: int | None = None
) -> SpectrumResult:
    """Merge sector spectra into one ascending spectrum (stable in sector order)."""
    values = np.concatenate([res.eigenvalues for _, res in parts])
    labels: list[SectorLabel | None] = [label for label, res in parts for _ in range(len(res))]
    order = np.argsort(values, kind="stable")
    if k is not None:
        order = order[:k]
    vectors = None
    if all(res.eigenvectors is not None for _, res in parts):
        stacked = np.hstack([res.eigenvectors for _, res in parts if res.eigenvectors is not None])
        vectors = stacked[:, order]
    return SpectrumResult(
        eigenvalues=values[order],
        sectors=tuple(labels[i] for i in order),
        eigenvectors=vectors,
    )


def sector_spectrum(
    spec: ModelSpec,
    kind: SectorKind | str = SectorKind.PARITY,
    *,
    want_vectors: bool = False,
    k: int | None = None,
    cap: int | None = None,
    band_size: int | None = None,
) -> SpectrumResult:
    """Spectrum of a spec, block by block (`kind="none"` solves the full space).

    Raises:
        SymmetryError: For occupation sectors when V is nonzero.
    """
    kind = SectorKind(kind)
    if kind is SectorKind.NONE:
        result = eigensolve(build_full(spec, cap=cap), want_vectors=want_vectors, k=k, cap=cap)
    else:
        result = merge_spectra(solve_sectors(spec, kind, want_vectors=want_vectors, k=k, cap=cap), k)
    if band_size is not None:
        result = result.with_band(band_size)
    logger.debug("spectrum (%s): E0=%.12g, %d levels", kind.value, result.ground_energy, len(result))
    return result


def excitation_energies(spectrum: SpectrumResult, count: int) -> NDArray[np.float64]:
    """E_i - E_0 for i = 1..count.

    Raises:
        ConfigError: If count is not smaller than the number of levels.
    """
    if not 0 <= count < len(spectrum):
        raise ConfigError(f"count must be in [0, {len(spectrum)}), got {count}")
    return spectrum.eigenvalues[1 : count + 1] - spectrum.ground_energy


def ground_state(
    spec: ModelSpec, kind: SectorKind | str = SectorKind.PARITY, *, cap: int | None = None
) -> tuple[float, NDArray[np.float64], SectorLabel | None]:
    """Lowest eigenpair and its sector (sector order breaks exact ties)."""
    result = sector_spectrum(spec, kind, want_vectors=True, k=1, cap=cap)
    assert result.eigenvectors is not None
    return result.ground_energy, result.eigenvectors[:, 0], result.sectors[0]


def lowest_in_sector(spec: ModelSpec, label: SectorLabel, *, cap: int | None = None) -> float:
    """Lowest eigenvalue of one sector."""
    return eigensolve(build_sector(spec, label, cap=cap), k=1, cap=cap).ground_energy
