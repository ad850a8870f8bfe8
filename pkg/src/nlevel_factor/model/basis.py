"""
Product basis of the single-occupancy sector and its symmetry labels.

Configurations are indexed little-endian: index = sum_p levels[p] * n**p,
so site 0 is the fastest-varying digit. Levels are 0-based internally.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from nlevel_factor.errors import ConfigError, InvariantError


class SectorKind(str, Enum):
    """Symmetry used to block the Hamiltonian."""

    PARITY = "parity"
    OCCUPATION = "occupation"
    NONE = "none"


@dataclass(frozen=True)
class SectorLabel:
    """Parity vector (sigma_1..sigma_n) or occupation vector (N_1..N_n)."""

    kind: SectorKind
    values: tuple[int, ...]

    @classmethod
    def parity(cls, sigma: tuple[int, ...] | list[int], n_sites: int) -> SectorLabel:
        """Build a parity label, filling sigma_1 when only sigma_2..sigma_n is given.

        Raises:
            ConfigError: If an entry is not +-1 or the product rule fails.
        """
        values = tuple(int(s) for s in sigma)
        if any(s not in (1, -1) for s in values):
            raise ConfigError(f"parity entries must be +1 or -1, got {values}")
        return cls(SectorKind.PARITY, values)._checked(n_sites)

    @classmethod
    def occupation(cls, counts: tuple[int, ...] | list[int], n_sites: int) -> SectorLabel:
        """Build an occupation label.

        Raises:
            ConfigError: If counts are negative or do not sum to N.
        """
        values = tuple(int(c) for c in counts)
        if any(c < 0 for c in values):
            raise ConfigError(f"occupations must be nonnegative, got {values}")
        if sum(values) != n_sites:
            raise ConfigError(f"occupations {values} must sum to N={n_sites}")
        return cls(SectorKind.OCCUPATION, values)

    def _checked(self, n_sites: int) -> SectorLabel:
        if int(np.prod(self.values)) != (-1) ** n_sites:
            raise ConfigError(
                f"parity {self} is inconsistent with N={n_sites}: product of sigma must be {(-1) ** n_sites:+d}"
            )
        return self

    def __str__(self) -> str:
        if self.kind is SectorKind.PARITY:
            return "".join("+" if s > 0 else "-" for s in self.values)
        return "/".join(str(c) for c in self.values)


@dataclass(frozen=True)
class BasisConfig:
    """One product-basis configuration."""

    levels: tuple[int, ...]
    index: int


_SIGN_RE = re.compile(r"[+-]")


def parse_sector(text: str, kind: SectorKind | str, n: int, n_sites: int) -> SectorLabel:
    """Parse a sector label from CLI or config text.

    Parity accepts "+-+", "+,-,+" or "(+,-,+)"; n-1 signs are read as
    sigma_2..sigma_n. Occupation accepts "2,1,1" or "2/1/1".

    Raises:
        ConfigError: If the text does not describe a valid label.
    """
    kind = SectorKind(kind)
    if kind is SectorKind.PARITY:
        signs = [1 if s == "+" else -1 for s in _SIGN_RE.findall(text)]
        if len(signs) == n - 1:
            signs = [(-1) ** n_sites * int(np.prod(signs)), *signs]
        if len(signs) != n:
            raise ConfigError(f"parity label '{text}' needs {n} or {n - 1} signs")
        return SectorLabel.parity(signs, n_sites)
    if kind is SectorKind.OCCUPATION:
        parts = [p for p in re.split(r"[,/\s]+", text.strip("()[] ")) if p]
        try:
            counts = [int(p) for p in parts]
        except ValueError:
            raise ConfigError(f"occupation label '{text}' must be integers")
        if len(counts) != n:
            raise ConfigError(f"occupation label '{text}' needs {n} entries")
        return SectorLabel.occupation(counts, n_sites)
    raise ConfigError("sector kind 'none' has no labels")


def basis_dim(n: int, n_sites: int) -> int:
    return int(n) ** int(n_sites)


def index_to_config(index: int, n: int, n_sites: int) -> BasisConfig:
    """Decode a basis index.

    Raises:
        ConfigError: If index is outside [0, n**N).
    """
    dim = basis_dim(n, n_sites)
    if not 0 <= index < dim:
        raise ConfigError(f"basis index {index} out of range [0, {dim})")
    levels = []
    rest = int(index)
    for _ in range(n_sites):
        rest, level = divmod(rest, n)
        levels.append(level)
    return BasisConfig(levels=tuple(levels), index=int(index))


def config_to_index(levels: tuple[int, ...] | list[int], n: int) -> int:
    """Encode levels (site 0 least significant) as a basis index."""
    index = 0
    for level in reversed(levels):
        if not 0 <= level < n:
            raise ConfigError(f"level {level} out of range [0, {n})")
        index = index * n + int(level)
    return index


def config_roundtrip(index: int, n: int, n_sites: int) -> BasisConfig:
    """Decode an index and confirm it encodes back to itself."""
    config = index_to_config(index, n, n_sites)
    if config_to_index(config.levels, n) != index:
        raise InvariantError(f"basis round trip failed for index {index} (n={n}, N={n_sites})")
    return config


@lru_cache(maxsize=64)
def all_configs(n: int, n_sites: int) -> NDArray[np.int64]:
    """Levels of every configuration, shape (n**N, N), read-only."""
    index = np.arange(basis_dim(n, n_sites), dtype=np.int64)
    powers = n ** np.arange(n_sites, dtype=np.int64)
    levels = (index[:, None] // powers[None, :]) % n
    levels.flags.writeable = False
    return levels


@lru_cache(maxsize=64)
def level_counts(n: int, n_sites: int) -> NDArray[np.int64]:
    """Occupation count of each level per configuration, shape (n**N, n)."""
    configs = all_configs(n, n_sites)
    counts = np.stack([(configs == level).sum(axis=1) for level in range(n)], axis=1)
    counts.flags.writeable = False
    return counts


@lru_cache(maxsize=64)
def parity_labels(n: int, n_sites: int) -> NDArray[np.int64]:
    """Parity (-1)**count of each level per configuration, shape (n**N, n)."""
    parities = 1 - 2 * (level_counts(n, n_sites) % 2)
    parities.flags.writeable = False
    return parities


def sector_of(config: BasisConfig, kind: SectorKind | str, n: int) -> SectorLabel:
    """Symmetry label of a single configuration."""
    kind = SectorKind(kind)
    counts = tuple(config.levels.count(level) for level in range(n))
    if kind is SectorKind.PARITY:
        return SectorLabel(kind, tuple((-1) ** c for c in counts))
    if kind is SectorKind.OCCUPATION:
        return SectorLabel(kind, counts)
    raise ConfigError("sector kind 'none' has no labels")


def sector_indices(label: SectorLabel, n: int, n_sites: int) -> NDArray[np.int64]:
    """Global basis indices belonging to a sector, ascending."""
    if len(label.values) != n:
        raise ConfigError(f"sector label {label} has {len(label.values)} entries, expected {n}")
    table = parity_labels(n, n_sites) if label.kind is SectorKind.PARITY else level_counts(n, n_sites)
    mask = np.all(table == np.asarray(label.values)[None, :], axis=1)
    return np.nonzero(mask)[0].astype(np.int64)


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    return [
        (first, *rest)
        for first in range(total, -1, -1)
        for rest in _compositions(total - first, parts - 1)
    ]


def enumerate_sectors(n: int, n_sites: int, kind: SectorKind | str) -> list[SectorLabel]:
    """Nonempty sectors in a fixed order.

    Parity sectors run over sigma_2..sigma_n with + before -; occupation
    sectors start from (N, 0, ..., 0).
    """
    kind = SectorKind(kind)
    if kind is SectorKind.OCCUPATION:
        return [SectorLabel(kind, c) for c in _compositions(n_sites, n)]
    if kind is SectorKind.PARITY:
        sectors = []
        for tail in itertools.product((1, -1), repeat=n - 1):
            head = (-1) ** n_sites * int(np.prod(tail))
            sigma = (head, *tail)
            # a sector needs one odd count per negative sign
            if sigma.count(-1) <= n_sites:
                sectors.append(SectorLabel(kind, sigma))
        return sectors
    raise ConfigError("sector kind 'none' has no labels")


def num_occupation_sectors(n: int, n_sites: int) -> int:
    """C(N+n-1, n-1)."""
    return math.comb(n_sites + n - 1, n - 1)
