"""
One-parameter spectrum sweeps and level-crossing detection.

Sweep points are independent: they are fanned out with `parallel_map`, which
keeps results in grid order whatever the completion order. Every change of
the ground-state sector between two grid points is refined by bisection on
E_a(x) - E_b(x) and classified by how many sector ground levels coincide at
the refined point.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, TypeVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.config import get_threads
from nlevel_factor.entanglement import EntanglementProfile, entanglement_profile
from nlevel_factor.errors import ConfigError
from nlevel_factor.model import ModelSpec, SectorKind, SectorLabel
from nlevel_factor.spectra import (
    DEGENERACY_TOLERANCE,
    SpectrumResult,
    ground_state,
    lowest_in_sector,
    merge_spectra,
    sector_spectrum,
    solve_sectors,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_STEPS = 201
BISECTION_DEPTH = 40
BISECTION_RESOLUTION = 1e-8
EVENT_MERGE_TOLERANCE = 1e-6
PAIR_SPECTRUM_COLUMNS = 4

Family = Callable[[float], ModelSpec]


class EventKind(str, Enum):
    FACTORIZATION_CROSSING = "factorization_crossing"
    PARITY_TRANSITION = "parity_transition"


@dataclass(frozen=True)
class CrossingEvent:
    """A refined change of the ground-state sector."""

    param: float
    kind: EventKind
    multiplicity: int
    sectors_before: str
    sectors_after: str
    energy: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "param": self.param,
            "kind": self.kind.value,
            "multiplicity": self.multiplicity,
            "sector_before": self.sectors_before,
            "sector_after": self.sectors_after,
            "energy": self.energy,
        }


@dataclass
class SweepPoint:
    """Lowest levels at one grid point."""

    param: float
    spectrum: SpectrumResult
    ground_by_sector: dict[SectorLabel, float] = field(default_factory=dict)

    @property
    def ground_sector(self) -> SectorLabel | None:
        if not self.ground_by_sector:
            return self.spectrum.sectors[0]
        # min() keeps the first sector on exact ties
        return min(self.ground_by_sector, key=self.ground_by_sector.__getitem__)


@dataclass
class SweepResult:
    """Spectra along a grid plus the detected crossing events."""

    parameter: str
    grid: NDArray[np.float64]
    points: list[SweepPoint]
    levels: int
    events: list[CrossingEvent] = field(default_factory=list)

    def header(self) -> list[str]:
        return [
            "param",
            *(f"E{i}" for i in range(self.levels)),
            *(f"sector{i}" for i in range(self.levels)),
            "gap",
        ]

    def rows(self) -> list[list[Any]]:
        rows: list[list[Any]] = []
        for point in self.points:
            values = point.spectrum.eigenvalues.tolist()
            labels = point.spectrum.sector_strings()
            padding = self.levels - len(values)
            rows.append(
                [
                    point.param,
                    *values,
                    *([float("nan")] * padding),
                    *labels,
                    *([""] * padding),
                    point.spectrum.gap,
                ]
            )
        return rows

    def events_payload(self) -> dict[str, Any]:
        return {
            "parameter": self.parameter,
            "from": float(self.grid[0]),
            "to": float(self.grid[-1]),
            "steps": int(self.grid.size),
            "events": [event.to_dict() for event in self.events],
        }


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Map `fn` over `items` on worker threads; results keep the input order."""
    workers = get_threads(threads)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    async def _run() -> list[R]:
        slots = asyncio.Semaphore(workers)

        async def _one(item: T) -> R:
            async with slots:
                return await asyncio.to_thread(fn, item)

        return list(await asyncio.gather(*[_one(item) for item in items]))

    return asyncio.run(_run())


def make_grid(start: float, stop: float, steps: int) -> NDArray[np.float64]:
    """Strictly increasing grid from start to stop inclusive.

    Raises:
        ConfigError: For an empty range or fewer than 2 steps.
    """
    if not stop > start:
        raise ConfigError(f"sweep range is empty: from={start} must be below to={stop}")
    if steps < 2:
        raise ConfigError(f"sweep needs at least 2 steps, got {steps}")
    return np.linspace(float(start), float(stop), int(steps))


def _evaluate(
    family: Family, x: float, kind: SectorKind, levels: int, cap: int | None
) -> SweepPoint:
    spec = family(x)
    if kind is SectorKind.NONE:
        return SweepPoint(param=x, spectrum=sector_spectrum(spec, kind, k=levels, cap=cap))
    parts = solve_sectors(spec, kind, k=levels, cap=cap)
    return SweepPoint(
        param=x,
        spectrum=merge_spectra(parts, levels),
        ground_by_sector={label: result.ground_energy for label, result in parts},
    )


def scan_spectrum(
    family: Family,
    grid: ArrayLike,
    *,
    levels: int = 4,
    kind: SectorKind | str = SectorKind.PARITY,
    threads: int | None = None,
    cap: int | None = None,
    parameter: str = "param",
) -> SweepResult:
    """Lowest `levels` eigenvalues with sector labels at every grid point."""
    points_grid = np.asarray(grid, dtype=np.float64)
    if points_grid.ndim != 1 or points_grid.size < 2 or np.any(np.diff(points_grid) <= 0):
        raise ConfigError("sweep grid must be strictly increasing with at least 2 points")
    if levels < 1:
        raise ConfigError(f"levels must be >= 1, got {levels}")
    sector_kind = SectorKind(kind)
    points = parallel_map(
        lambda x: _evaluate(family, float(x), sector_kind, levels, cap),
        points_grid.tolist(),
        threads,
    )
    logger.debug("scanned %d points of %s", len(points), parameter)
    return SweepResult(parameter=parameter, grid=points_grid, points=points, levels=levels)


def _bisect(
    family: Family,
    lo: float,
    hi: float,
    left: SectorLabel,
    right: SectorLabel,
    cap: int | None,
) -> float:
    """Refine the root of E_left - E_right, which is <= 0 at lo and >= 0 at hi."""
    for depth in range(BISECTION_DEPTH):
        if hi - lo <= BISECTION_RESOLUTION * max(1.0, abs(hi)):
            logger.debug("bisection converged after %d steps at %.12g", depth, 0.5 * (lo + hi))
            break
        mid = 0.5 * (lo + hi)
        spec = family(mid)
        if lowest_in_sector(spec, left, cap=cap) - lowest_in_sector(spec, right, cap=cap) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _classify(
    family: Family,
    x: float,
    kind: SectorKind,
    band_size: int,
    cap: int | None,
    before: SectorLabel,
    after: SectorLabel,
) -> CrossingEvent:
    parts = solve_sectors(family(x), kind, k=1, cap=cap)
    energies = np.array([result.ground_energy for _, result in parts])
    ground = float(energies.min())
    multiplicity = int(np.count_nonzero(energies - ground <= DEGENERACY_TOLERANCE * max(1.0, abs(ground))))
    event_kind = (
        EventKind.FACTORIZATION_CROSSING if multiplicity >= band_size else EventKind.PARITY_TRANSITION
    )
    return CrossingEvent(
        param=x,
        kind=event_kind,
        multiplicity=multiplicity,
        sectors_before=str(before),
        sectors_after=str(after),
        energy=ground,
    )


def _merge_events(events: list[CrossingEvent]) -> list[CrossingEvent]:
    merged: list[CrossingEvent] = []
    for event in events:
        if merged and abs(event.param - merged[-1].param) <= EVENT_MERGE_TOLERANCE * max(1.0, abs(event.param)):
            previous = merged.pop()
            keep = event if event.multiplicity > previous.multiplicity else previous
            merged.append(
                CrossingEvent(
                    param=keep.param,
                    kind=keep.kind,
                    multiplicity=keep.multiplicity,
                    sectors_before=previous.sectors_before,
                    sectors_after=event.sectors_after,
                    energy=keep.energy,
                )
            )
        else:
            merged.append(event)
    return merged


def find_crossings(
    family: Family,
    start: float,
    stop: float,
    band_size: int,
    *,
    steps: int = DEFAULT_STEPS,
    levels: int | None = None,
    kind: SectorKind | str = SectorKind.PARITY,
    threads: int | None = None,
    cap: int | None = None,
    parameter: str = "param",
) -> SweepResult:
    """Scan a family on a coarse grid and refine every ground-sector change.

    An event whose coinciding sector count reaches `band_size` is a
    factorization crossing; anything smaller is a parity transition.

    Raises:
        ConfigError: For an empty range, too few steps or `kind="none"`.
    """
    sector_kind = SectorKind(kind)
    if sector_kind is SectorKind.NONE:
        raise ConfigError("crossing detection needs parity or occupation sectors")
    if band_size < 1:
        raise ConfigError(f"band size must be >= 1, got {band_size}")
    grid = make_grid(start, stop, steps)
    result = scan_spectrum(
        family,
        grid,
        levels=levels if levels is not None else band_size,
        kind=sector_kind,
        threads=threads,
        cap=cap,
        parameter=parameter,
    )

    raw: list[CrossingEvent] = []
    for left, right in zip(result.points, result.points[1:]):
        before, after = left.ground_sector, right.ground_sector
        if before is None or after is None or before == after:
            continue
        x_star = _bisect(family, left.param, right.param, before, after, cap)
        event = _classify(family, x_star, sector_kind, band_size, cap, before, after)
        logger.debug(
            "%s at %s=%.10g: %s -> %s (multiplicity %d)",
            event.kind.value, parameter, x_star, before, after, event.multiplicity,
        )
        raw.append(event)
    result.events = _merge_events(raw)
    return result


@dataclass
class EntanglementSweep:
    """Ground-state entanglement observables along a grid."""

    parameter: str
    grid: NDArray[np.float64]
    n: int
    distances: tuple[int, ...]
    profiles: list[EntanglementProfile]
    sectors: list[str]

    def header(self) -> list[str]:
        return [
            "param",
            "S_site",
            *(f"negativity_d{d}" for d in self.distances),
            *(f"mutual_info_d{d}" for d in self.distances),
            *(f"occ_{i + 1}" for i in range(self.n)),
            *(f"pair_spectrum_{i + 1}" for i in range(PAIR_SPECTRUM_COLUMNS)),
        ]

    def rows(self) -> list[list[Any]]:
        return [
            [float(x), *profile.row(PAIR_SPECTRUM_COLUMNS)]
            for x, profile in zip(self.grid, self.profiles)
        ]


def scan_entanglement(
    family: Family,
    grid: ArrayLike,
    *,
    distances: Sequence[int] = (1, 2, 3),
    kind: SectorKind | str = SectorKind.PARITY,
    threads: int | None = None,
    cap: int | None = None,
    parameter: str = "param",
) -> EntanglementSweep:
    """Entanglement of the exact ground state at every grid point.

    At exactly degenerate points the ground state is the lowest level of the
    first sector in sector order.
    """
    points_grid = np.asarray(grid, dtype=np.float64)
    if points_grid.ndim != 1 or points_grid.size < 2 or np.any(np.diff(points_grid) <= 0):
        raise ConfigError("sweep grid must be strictly increasing with at least 2 points")
    sector_kind = SectorKind(kind)

    def _point(x: float) -> tuple[EntanglementProfile, str]:
        spec = family(x)
        _, psi, label = ground_state(spec, sector_kind, cap=cap)
        return entanglement_profile(psi, spec.n, distances, cap=cap), "" if label is None else str(label)

    results = parallel_map(_point, points_grid.tolist(), threads)
    n = family(float(points_grid[0])).n
    return EntanglementSweep(
        parameter=parameter,
        grid=points_grid,
        n=n,
        distances=tuple(int(d) for d in distances),
        profiles=[profile for profile, _ in results],
        sectors=[label for _, label in results],
    )
