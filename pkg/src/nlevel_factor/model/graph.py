"""Coupling graphs r_pq between lattice sites."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.errors import ConfigError


class GraphKind(str, Enum):
    """Named coupling-graph constructors."""

    RING = "ring_first_neighbor"
    OPEN_CHAIN = "open_chain"
    ALL_TO_ALL = "all_to_all"
    CUSTOM = "custom"


GRAPH_KIND_ALIASES: dict[str, GraphKind] = {
    "ring_first_neighbor": GraphKind.RING,
    "ring": GraphKind.RING,
    "open_chain": GraphKind.OPEN_CHAIN,
    "chain": GraphKind.OPEN_CHAIN,
    "all_to_all": GraphKind.ALL_TO_ALL,
    "custom": GraphKind.CUSTOM,
}


def resolve_graph_kind(value: str | GraphKind) -> GraphKind:
    """Resolve a graph kind name or alias.

    Raises:
        ConfigError: If the name is not a known kind.
    """
    if isinstance(value, GraphKind):
        return value
    kind = GRAPH_KIND_ALIASES.get(value.strip().lower())
    if kind is None:
        valid = ", ".join(sorted(GRAPH_KIND_ALIASES))
        raise ConfigError(f"Unknown graph kind '{value}'. Valid values: {valid}")
    return kind


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    """Symmetric nonnegative pair weights with zero diagonal.

    Each unordered pair p<q enters the Hamiltonian once with weight r[p, q].
    """

    r: NDArray[np.float64]
    kind: GraphKind = GraphKind.CUSTOM
    r_row: NDArray[np.float64] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        r = np.array(self.r, dtype=np.float64)
        _validate_weights(r)
        r.flags.writeable = False
        row = r.sum(axis=1)
        row.flags.writeable = False
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "r_row", row)

    @property
    def n_sites(self) -> int:
        return int(self.r.shape[0])

    @property
    def r_total(self) -> float:
        """Total coordination r = sum_p r_p."""
        return float(self.r_row.sum())

    def pairs(self) -> list[tuple[int, int, float]]:
        """Unordered coupled pairs (p, q, r_pq) with p < q and r_pq > 0."""
        p_idx, q_idx = np.nonzero(np.triu(self.r, k=1))
        return [(int(p), int(q), float(self.r[p, q])) for p, q in zip(p_idx, q_idx)]

    def bipartition(self) -> NDArray[np.int64] | None:
        """Two-color the coupled sites, or None if an odd cycle exists."""
        color = np.full(self.n_sites, -1, dtype=np.int64)
        for start in range(self.n_sites):
            if color[start] >= 0:
                continue
            color[start] = 0
            queue = deque([start])
            while queue:
                p = queue.popleft()
                for q in np.nonzero(self.r[p] > 0)[0]:
                    if color[q] < 0:
                        color[q] = 1 - color[p]
                        queue.append(int(q))
                    elif color[q] == color[p]:
                        return None
        return color

    def to_dict(self) -> dict[str, object]:
        data: dict[str, object] = {"kind": self.kind.value}
        if self.kind is GraphKind.CUSTOM:
            data["custom"] = self.r.tolist()
        return data


def _validate_weights(r: NDArray[np.float64]) -> None:
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ConfigError(f"coupling graph must be a square matrix, got shape {r.shape}")
    if r.shape[0] < 2:
        raise ConfigError(f"coupling graph needs at least 2 sites, got {r.shape[0]}")
    if not np.all(np.isfinite(r)):
        raise ConfigError("coupling graph entries must be finite")
    asymmetric = np.argwhere(r != r.T)
    if asymmetric.size:
        p, q = asymmetric[0]
        raise ConfigError(f"coupling graph is not symmetric: r[{p}][{q}]={r[p, q]} but r[{q}][{p}]={r[q, p]}")
    diag = np.nonzero(np.diag(r))[0]
    if diag.size:
        raise ConfigError(f"coupling graph diagonal must be zero: r[{diag[0]}][{diag[0]}]={r[diag[0], diag[0]]}")
    negative = np.argwhere(r < 0)
    if negative.size:
        p, q = negative[0]
        raise ConfigError(f"coupling graph weights must be nonnegative: r[{p}][{q}]={r[p, q]}")


def make_graph(
    kind: str | GraphKind,
    n_sites: int,
    custom: ArrayLike | None = None,
) -> CouplingGraph:
    """Build a coupling graph.

    A two-site ring or all-to-all graph is a single pair with r_12 = 1. Open
    chains use r = 1/2 between neighbors, so border sites have r_p = 1/2.

    Raises:
        ConfigError: For fewer than 2 sites or an invalid custom matrix.
    """
    kind = resolve_graph_kind(kind)
    if n_sites < 2:
        raise ConfigError(f"a coupling graph needs N >= 2 sites, got {n_sites}")
    if kind is GraphKind.CUSTOM:
        if custom is None:
            raise ConfigError("graph kind 'custom' requires a 'custom' matrix")
        r = np.asarray(custom, dtype=np.float64)
        if r.shape != (n_sites, n_sites):
            raise ConfigError(f"custom graph must be {n_sites}x{n_sites}, got shape {r.shape}")
        return CouplingGraph(r=r, kind=kind)
    if custom is not None:
        raise ConfigError(f"graph kind '{kind.value}' does not take a custom matrix")

    r = np.zeros((n_sites, n_sites))
    if kind is GraphKind.ALL_TO_ALL or (kind is GraphKind.RING and n_sites == 2):
        r[:] = 1.0 / (n_sites - 1)
        np.fill_diagonal(r, 0.0)
    else:
        for p in range(n_sites - 1):
            r[p, p + 1] = r[p + 1, p] = 0.5
        if kind is GraphKind.RING:
            r[0, n_sites - 1] = r[n_sites - 1, 0] = 0.5
    return CouplingGraph(r=r, kind=kind)
