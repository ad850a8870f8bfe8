"""
Dense Hamiltonian construction in the product basis.

Each unordered coupled pair p<q contributes once with weight r_pq:

    diagonal     sum_p eps^p_{i_p} - sum_{p<q} r_pq U_{i_p i_q}
    V term       -r_pq V_ij   between (j, j) and (i, i) at sites p, q
    W term       -r_pq W_ij   between (i, j) and (j, i) at sites p, q

The same assembly serves the full space and every symmetry sector; a sector
build only enumerates the configurations inside the sector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from nlevel_factor.config import get_dim_cap
from nlevel_factor.errors import ConfigError, InvariantError, SymmetryError, check_cap
from nlevel_factor.model import (
    ModelSpec,
    SectorKind,
    SectorLabel,
    all_configs,
    level_counts,
    parity_labels,
    sector_indices,
)
from nlevel_factor.storage import atomic_write_text, render_matrix_dump

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Real symmetric Hamiltonian block."""

    data: NDArray[np.float64]
    n: int
    n_sites: int
    sector: SectorLabel | None = None
    basis_map: NDArray[np.int64] | None = None

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    @property
    def full_dim(self) -> int:
        return int(self.n) ** int(self.n_sites)

    def to_global(self, vectors: NDArray[np.generic]) -> NDArray[np.generic]:
        """Embed sector-local vectors (dim or dim x k) into the full basis."""
        if self.basis_map is None:
            return vectors
        shape = (self.full_dim, *vectors.shape[1:])
        out = np.zeros(shape, dtype=vectors.dtype)
        out[self.basis_map] = vectors
        return out


def _assemble(spec: ModelSpec, indices: NDArray[np.int64]) -> NDArray[np.float64]:
    n, n_sites = spec.n, spec.n_sites
    configs = all_configs(n, n_sites)[indices]
    local = np.full(spec.dim, -1, dtype=np.int64)
    local[indices] = np.arange(indices.size)
    strides = n ** np.arange(n_sites, dtype=np.int64)
    rows = np.arange(indices.size)

    data = np.zeros((indices.size, indices.size))
    eps = spec.site_energies()
    diag = eps[np.arange(n_sites)[None, :], configs].sum(axis=1)
    use_v, use_w = bool(np.any(spec.V)), bool(np.any(spec.W))

    def couple(src: NDArray[np.int64], shift: NDArray[np.int64], values: NDArray[np.float64]) -> None:
        keep = values != 0
        target = local[indices[src[keep]] + shift[keep]]
        if np.any(target < 0):
            raise InvariantError("a coupling term connects configurations in different sectors")
        np.add.at(data, (target, src[keep]), values[keep])

    for p, q, weight in spec.graph.pairs():
        a, b = configs[:, p], configs[:, q]
        diag -= weight * spec.U[a, b]
        if use_v:
            same = rows[a == b]
            for level in range(n):
                src = same[a[same] != level]
                shift = (level - a[src]) * (strides[p] + strides[q])
                couple(src, shift, -weight * spec.V[level, a[src]])
        if use_w:
            src = rows[a != b]
            shift = (b[src] - a[src]) * strides[p] + (a[src] - b[src]) * strides[q]
            couple(src, shift, -weight * spec.W[a[src], b[src]])

    data[rows, rows] += diag
    asymmetry = float(np.max(np.abs(data - data.T))) if data.size else 0.0
    if asymmetry > SYMMETRY_TOLERANCE:
        raise InvariantError(f"assembled Hamiltonian is not symmetric (max deviation {asymmetry:.3e})")
    return data


def build_full(spec: ModelSpec, *, cap: int | None = None) -> HamiltonianMatrix:
    """Hamiltonian on the full n**N product space.

    Raises:
        DimensionCapError: If n**N exceeds the cap.
    """
    check_cap("full Hamiltonian", spec.dim, get_dim_cap(cap))
    indices = np.arange(spec.dim, dtype=np.int64)
    logger.debug("building full Hamiltonian n=%d N=%d dim=%d", spec.n, spec.n_sites, spec.dim)
    return HamiltonianMatrix(data=_assemble(spec, indices), n=spec.n, n_sites=spec.n_sites)


def build_sector(
    spec: ModelSpec, sector: SectorLabel, *, cap: int | None = None
) -> HamiltonianMatrix:
    """Hamiltonian restricted to one parity or occupation sector.

    Raises:
        SymmetryError: For an occupation sector when V is nonzero.
        ConfigError: For a sector with no configurations.
        DimensionCapError: If the sector exceeds the cap.
    """
    if sector.kind is SectorKind.OCCUPATION and not spec.v_zero:
        raise SymmetryError("occupation sectors are only conserved when V = 0")
    if sector.kind is SectorKind.NONE:
        return build_full(spec, cap=cap)
    indices = sector_indices(sector, spec.n, spec.n_sites)
    if indices.size == 0:
        raise ConfigError(f"sector {sector} is empty for n={spec.n}, N={spec.n_sites}")
    check_cap(f"sector {sector}", int(indices.size), get_dim_cap(cap))
    return HamiltonianMatrix(
        data=_assemble(spec, indices),
        n=spec.n,
        n_sites=spec.n_sites,
        sector=sector,
        basis_map=indices,
    )


def alternating_gauge(spec: ModelSpec, level: int) -> ModelSpec:
    """Flip the sign of V and W in one level's rows and columns.

    On a bipartite graph this is the local unitary that changes the sign of
    level `level` on one sublattice, so the spectrum is unchanged.

    Raises:
        SymmetryError: If the coupling graph has an odd cycle.
        ConfigError: If the level is out of range.
    """
    if not 0 <= level < spec.n:
        raise ConfigError(f"level {level} out of range [0, {spec.n})")
    if spec.graph.bipartition() is None:
        raise SymmetryError("alternating gauge needs a bipartite coupling graph (odd cycle found)")
    flip = np.ones((spec.n, spec.n))
    flip[level, :] *= -1.0
    flip[:, level] *= -1.0
    return spec.with_changes(V=spec.V * flip, W=spec.W * flip)


def apply(H: HamiltonianMatrix, v: NDArray[np.generic]) -> NDArray[np.generic]:
    """Matrix-vector product H v.

    Raises:
        ConfigError: On a length mismatch.
    """
    vector = np.asarray(v)
    if vector.shape != (H.dim,):
        raise ConfigError(f"state has shape {vector.shape}, Hamiltonian dimension is {H.dim}")
    result: NDArray[np.generic] = H.data @ vector
    return result


def parity_operator(n: int, n_sites: int, level: int) -> NDArray[np.int64]:
    """Diagonal of P_level = (-1)**N_level in the product basis."""
    return np.asarray(parity_labels(n, n_sites)[:, level])


def occupation_operator(n: int, n_sites: int, level: int) -> NDArray[np.int64]:
    """Diagonal of N_level in the product basis."""
    return np.asarray(level_counts(n, n_sites)[:, level])


def dump_matrix(H: HamiltonianMatrix, path: str | Path) -> Path:
    """Write the `dim` header and `row col value` triples of nonzeros."""
    return atomic_write_text(path, render_matrix_dump(H.data))
