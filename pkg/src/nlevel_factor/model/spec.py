"""Model parameters of the n-level lattice Hamiltonian."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.errors import ConfigError
from nlevel_factor.model.basis import basis_dim
from nlevel_factor.model.graph import CouplingGraph, GraphKind, make_graph


def _frozen(values: NDArray[np.float64]) -> NDArray[np.float64]:
    values.flags.writeable = False
    return values


def validate_coupling_matrix(name: str, matrix: NDArray[np.float64], n: int, *, zero_diagonal: bool) -> None:
    """Check shape, finiteness, exact symmetry and (optionally) zero diagonal.

    Raises:
        ConfigError: Naming the first offending entry.
    """
    if matrix.shape != (n, n):
        raise ConfigError(f"{name} must be {n}x{n}, got shape {matrix.shape}")
    bad = np.argwhere(~np.isfinite(matrix))
    if bad.size:
        i, j = bad[0]
        raise ConfigError(f"{name}[{i}][{j}] must be finite, got {matrix[i, j]}")
    asymmetric = np.argwhere(matrix != matrix.T)
    if asymmetric.size:
        i, j = asymmetric[0]
        raise ConfigError(f"{name}[{i}][{j}]={matrix[i, j]} differs from {name}[{j}][{i}]={matrix[j, i]}")
    if zero_diagonal:
        diag = np.nonzero(np.diag(matrix))[0]
        if diag.size:
            i = diag[0]
            raise ConfigError(f"{name}[{i}][{i}] must be zero, got {matrix[i, i]}")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """One instance of the n-level Hamiltonian.

    H = sum_p sum_i eps^p_i n_pi
        - sum_{p<q} r_pq sum_ij (U_ij n_pi n_qj + V_ij g^ij_p g^ij_q + W_ij g^ij_p g^ji_q)

    with eps^p_i = r_p eps_i when edge_scaling is set.
    """

    n: int
    n_sites: int
    epsilon: NDArray[np.float64]
    U: NDArray[np.float64]
    V: NDArray[np.float64]
    W: NDArray[np.float64]
    graph: CouplingGraph
    edge_scaling: bool = True

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be >= 2 levels, got {self.n}")
        if self.n_sites < 2:
            raise ConfigError(f"N must be >= 2 sites, got {self.n_sites}")
        if self.graph.n_sites != self.n_sites:
            raise ConfigError(f"graph has {self.graph.n_sites} sites but N={self.n_sites}")
        epsilon = np.array(self.epsilon, dtype=np.float64)
        if epsilon.shape != (self.n,):
            raise ConfigError(f"epsilon must have {self.n} entries, got shape {epsilon.shape}")
        if not np.all(np.isfinite(epsilon)):
            raise ConfigError("epsilon entries must be finite")
        object.__setattr__(self, "epsilon", _frozen(epsilon))
        for name in ("U", "V", "W"):
            matrix = np.array(getattr(self, name), dtype=np.float64)
            validate_coupling_matrix(name, matrix, self.n, zero_diagonal=name != "U")
            object.__setattr__(self, name, _frozen(matrix))

    @classmethod
    def build(
        cls,
        n: int,
        n_sites: int,
        epsilon: ArrayLike,
        *,
        U: ArrayLike | None = None,
        V: ArrayLike | None = None,
        W: ArrayLike | None = None,
        graph: CouplingGraph | str | GraphKind = GraphKind.RING,
        edge_scaling: bool = True,
    ) -> ModelSpec:
        """Convenience constructor with zero default couplings and a named graph."""
        zeros = np.zeros((n, n))
        if not isinstance(graph, CouplingGraph):
            graph = make_graph(graph, n_sites)
        return cls(
            n=n,
            n_sites=n_sites,
            epsilon=np.asarray(epsilon, dtype=np.float64),
            U=zeros if U is None else np.asarray(U, dtype=np.float64),
            V=zeros if V is None else np.asarray(V, dtype=np.float64),
            W=zeros if W is None else np.asarray(W, dtype=np.float64),
            graph=graph,
            edge_scaling=edge_scaling,
        )

    @property
    def dim(self) -> int:
        return basis_dim(self.n, self.n_sites)

    @property
    def v_zero(self) -> bool:
        """True when V vanishes, so every level occupation is conserved."""
        return not np.any(self.V)

    @property
    def J(self) -> NDArray[np.float64]:
        """Total pair coupling U + V + W seen by a uniform product state."""
        return self.U + self.V + self.W

    def site_scale(self) -> NDArray[np.float64]:
        """Per-site multiplier of epsilon: r_p with edge scaling, else 1."""
        if self.edge_scaling:
            return self.graph.r_row.copy()
        return np.ones(self.n_sites)

    def site_energies(self) -> NDArray[np.float64]:
        """eps^p_i as an (N, n) array."""
        return self.site_scale()[:, None] * self.epsilon[None, :]

    def has_negative_couplings(self) -> bool:
        return bool(np.any(self.U < 0) or np.any(self.V < 0) or np.any(self.W < 0))

    def with_changes(self, **changes: Any) -> ModelSpec:
        """Copy with some fields replaced (re-validated)."""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the model config layout (keys n, N, epsilon, U, V, W, graph)."""
        return {
            "n": self.n,
            "N": self.n_sites,
            "epsilon": self.epsilon.tolist(),
            "U": self.U.tolist(),
            "V": self.V.tolist(),
            "W": self.W.tolist(),
            "graph": self.graph.to_dict(),
            "edge_scaling": self.edge_scaling,
        }
