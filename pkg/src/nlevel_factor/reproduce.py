"""Figure reproduction harness: data files plus deterministic checks per figure."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from nlevel_factor.entanglement import block_entropy, entanglement_profile, occupations, pair_spectrum
from nlevel_factor.errors import ConfigError
from nlevel_factor.families import (
    FIG2_V_CRITICAL,
    ParameterFamily,
    fig2_epsilon,
    fig2_pair_energy,
    figure_family,
)
from nlevel_factor.factorization import solve_uniform
from nlevel_factor.meanfield import mf_solve, mf_transition_points
from nlevel_factor.model import SectorKind, SectorLabel
from nlevel_factor.projection import parity_project, perturbative_splitting, projected_occupations_n3
from nlevel_factor.protocol.types import CheckResult, FigureReport
from nlevel_factor.spectra import (
    distinct_levels,
    excitation_energies,
    ground_state,
    lowest_in_sector,
    sector_spectrum,
)
from nlevel_factor.storage import events_sidecar_path, write_csv, write_json
from nlevel_factor.sweep import (
    DEFAULT_STEPS,
    EntanglementSweep,
    EventKind,
    SweepResult,
    find_crossings,
    make_grid,
    parallel_map,
    scan_entanglement,
    scan_spectrum,
)

logger = logging.getLogger(__name__)

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6_n3", "fig6_n4", "fig7")
CHECKS_FILE = "checks.json"

FIG2_PAIR_ENERGY = -1.26
FIG2_PAIR_ENERGY_TOLERANCE = 0.005
CROSSING_TOLERANCE = 1e-6
TRANSITION_TOLERANCE = 0.01
EXACTNESS_TOLERANCE = 1e-9
SIDE_LIMIT_STEP = 1e-6
SIDE_LIMIT_TOLERANCE = 1e-4
FIG4_TRANSITIONS = (1.52, 1.74)
MF_ONSETS = (0.44, 0.65)
FIG6_GROUND_ENERGY = -10.0
FIG7_LEVELS = ((-2.0, 35), (-1.0, 110), (0.0, 60), (1.0, 50), (2.0, 1))
FIG7_TOLERANCE = 1e-10


@dataclass
class ReproduceContext:
    """Where and how a figure is reproduced."""

    out_dir: Path
    threads: int | None = None
    cap: int | None = None
    steps: int = DEFAULT_STEPS

    def figure_dir(self, figure: str) -> Path:
        path = self.out_dir / figure
        path.mkdir(parents=True, exist_ok=True)
        return path


FigureRun = tuple[list[Path], list[CheckResult]]


def _criterion(
    name: str,
    passed: bool,
    *,
    expected: Any | None = None,
    actual: Any | None = None,
    message: str | None = None,
) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), expected=expected, actual=actual, message=message)


def write_sweep_outputs(result: SweepResult, path: Path) -> list[Path]:
    """Spectrum CSV plus its `<name>.events.json` sidecar."""
    csv_path = write_csv(path, result.header(), result.rows())
    sidecar = write_json(events_sidecar_path(path), result.events_payload())
    return [csv_path, sidecar]


def write_entanglement_outputs(sweep: EntanglementSweep, path: Path) -> Path:
    return write_csv(path, sweep.header(), sweep.rows())


def _parity(n_sites: int, tail: tuple[int, ...]) -> SectorLabel:
    """Parity label from sigma_2..sigma_n."""
    head = (-1) ** n_sites * int(np.prod(tail))
    return SectorLabel.parity((head, *tail), n_sites)


def _fig2_factorized_f() -> np.ndarray:
    eps = fig2_epsilon(3)
    V = np.full((3, 3), FIG2_V_CRITICAL)
    np.fill_diagonal(V, 0.0)
    solution = solve_uniform(eps, np.zeros(3), V, n_sites=2, r_total=2.0)
    f = solution.f_real()
    if f is None:
        raise ConfigError("factorizing amplitudes of the equally spaced model are expected to be real")
    return f


def _crossing_checks(
    prefix: str, result: SweepResult, *, at: float, multiplicity: int
) -> list[CheckResult]:
    crossings = [e for e in result.events if e.kind is EventKind.FACTORIZATION_CROSSING]
    checks = [
        _criterion(
            f"{prefix}_single_factorization_crossing",
            len(crossings) == 1,
            expected=1,
            actual=len(crossings),
        )
    ]
    if crossings:
        event = crossings[0]
        checks.append(
            _criterion(
                f"{prefix}_crossing_location",
                abs(event.param - at) <= CROSSING_TOLERANCE,
                expected=at,
                actual=event.param,
                message=f"tolerance {CROSSING_TOLERANCE}",
            )
        )
        checks.append(
            _criterion(
                f"{prefix}_crossing_multiplicity",
                event.multiplicity == multiplicity,
                expected=multiplicity,
                actual=event.multiplicity,
            )
        )
    return checks


def _spectrum_sweep(
    ctx: ReproduceContext,
    family: ParameterFamily,
    start: float,
    stop: float,
    *,
    levels: int,
    kind: SectorKind,
) -> SweepResult:
    assert family.band_size is not None
    return find_crossings(
        family,
        start,
        stop,
        family.band_size,
        steps=ctx.steps,
        levels=levels,
        kind=kind,
        threads=ctx.threads,
        cap=ctx.cap,
        parameter=family.label,
    )


def _fig2(ctx: ReproduceContext) -> FigureRun:
    folder = ctx.figure_dir("fig2")
    E2c = fig2_pair_energy(fig2_epsilon(3))
    files: list[Path] = []
    checks = [
        _criterion(
            "pair_energy_at_vc",
            abs(E2c - FIG2_PAIR_ENERGY) < FIG2_PAIR_ENERGY_TOLERANCE,
            expected=FIG2_PAIR_ENERGY,
            actual=E2c,
            message=f"tolerance {FIG2_PAIR_ENERGY_TOLERANCE}",
        )
    ]
    for n_sites in (2, 4):
        family = figure_family("fig2", 3, n_sites)
        result = _spectrum_sweep(ctx, family, 0.0, 2.0, levels=6, kind=SectorKind.PARITY)
        files += write_sweep_outputs(result, folder / f"spectrum_N{n_sites}.csv")
        checks += _crossing_checks(f"N{n_sites}", result, at=1.0, multiplicity=4)
    return files, checks


def _fig3_row(family: ParameterFamily, x: float, cap: int | None) -> list[float]:
    spec = family(x)
    spectrum = sector_spectrum(spec, SectorKind.PARITY, want_vectors=True, k=4, cap=cap)
    assert spectrum.eigenvectors is not None
    profile = entanglement_profile(spectrum.eigenvectors[:, 0], spec.n, (1, 2), cap=cap)
    mf = mf_solve(spec)
    return [
        x,
        *excitation_energies(spectrum, 3).tolist(),
        mf.energy - spectrum.ground_energy,
        *profile.occupations.tolist(),
        *mf.f_squared.tolist(),
        profile.site_entropy,
        *profile.negativities,
        *profile.mutual_informations,
    ]


def _fig3(ctx: ReproduceContext) -> FigureRun:
    folder = ctx.figure_dir("fig3")
    family = figure_family("fig2", 3, 4)
    grid = make_grid(0.0, 2.0, ctx.steps)
    rows = parallel_map(lambda x: _fig3_row(family, float(x), ctx.cap), grid.tolist(), ctx.threads)
    header = [
        "param", "dE1", "dE2", "dE3", "E_mf_minus_E0",
        "occ_1", "occ_2", "occ_3", "mf_occ_1", "mf_occ_2", "mf_occ_3",
        "S_site", "negativity_d1", "negativity_d2", "mutual_info_d1", "mutual_info_d2",
    ]
    files = [write_csv(folder / "observables_N4.csv", header, rows)]

    at_vc = _fig3_row(family, 1.0, ctx.cap)
    checks = [
        _criterion(
            "excitations_vanish_at_vc",
            max(abs(v) for v in at_vc[1:4]) < EXACTNESS_TOLERANCE,
            expected=0.0,
            actual=at_vc[1:4],
        ),
        _criterion(
            "mean_field_exact_at_vc",
            abs(at_vc[4]) < EXACTNESS_TOLERANCE,
            expected=0.0,
            actual=at_vc[4],
        ),
    ]

    transitions = mf_transition_points(family, 0.0, 2.0, steps=ctx.steps)
    onsets = {t.level: t.param for t in transitions if t.kind == "onset"}
    for level, expected in zip((1, 2), MF_ONSETS):
        actual = onsets.get(level)
        checks.append(
            _criterion(
                f"mean_field_onset_level_{level + 1}",
                actual is not None and abs(actual - expected) <= TRANSITION_TOLERANCE,
                expected=expected,
                actual=actual,
            )
        )

    f = _fig2_factorized_f()
    left, right = _parity(4, (1, 1)), _parity(4, (-1, -1))
    side_limits = {}
    for name, label in (("left", left), ("right", right)):
        brute = occupations(parity_project(f, 4, label).vector, 3)[0]
        closed = projected_occupations_n3(f, 4, label)
        side_limits[name] = brute
        checks.append(
            _criterion(
                f"projected_occupations_{name}",
                float(np.max(np.abs(brute - closed))) < 1e-10,
                expected=closed.tolist(),
                actual=brute.tolist(),
            )
        )
    jump = float(np.max(np.abs(side_limits["left"] - side_limits["right"])))
    checks.append(_criterion("occupation_jump_at_vc", jump > 1e-6, actual=jump))

    _, psi, label = ground_state(family(1.0 - SIDE_LIMIT_STEP), cap=ctx.cap)
    exact = occupations(psi, 3)[0]
    checks.append(
        _criterion(
            "left_side_limit_matches_projection",
            label == left and float(np.max(np.abs(exact - side_limits["left"]))) < SIDE_LIMIT_TOLERANCE,
            expected=side_limits["left"].tolist(),
            actual=exact.tolist(),
            message=f"ground sector {label}",
        )
    )

    eps = fig2_epsilon(3)
    tails = ((1, 1), (-1, 1), (1, -1), (-1, -1))
    predicted = [perturbative_splitting(f, 4, _parity(4, t), eps) for t in tails]
    spec = family(0.99)
    exact_levels = [lowest_in_sector(spec, _parity(4, t), cap=ctx.cap) for t in tails]
    checks.append(
        _criterion(
            "splitting_order",
            all(a < b for a, b in zip(predicted, predicted[1:]))
            and list(np.argsort(exact_levels)) == list(range(4)),
            expected=["++", "-+", "+-", "--"],
            actual={"first_order": predicted, "exact": exact_levels},
        )
    )
    return files, checks


def _equal_within(values: list[float], tolerance: float) -> bool:
    return max(values) - min(values) <= tolerance


def _fig4(ctx: ReproduceContext) -> FigureRun:
    folder = ctx.figure_dir("fig4")
    family = figure_family("fig2", 3, 6)
    result = _spectrum_sweep(ctx, family, 0.0, 2.0, levels=6, kind=SectorKind.PARITY)
    files = write_sweep_outputs(result, folder / "spectrum_N6.csv")
    checks = _crossing_checks("N6", result, at=1.0, multiplicity=4)
    transitions = [e for e in result.events if e.kind is EventKind.PARITY_TRANSITION]
    for expected in FIG4_TRANSITIONS:
        match = [e for e in transitions if abs(e.param - expected) <= TRANSITION_TOLERANCE]
        checks.append(
            _criterion(
                f"parity_transition_{expected}",
                len(match) == 1 and match[0].multiplicity == 2,
                expected={"param": expected, "multiplicity": 2},
                actual=[e.to_dict() for e in match],
            )
        )

    sweep = scan_entanglement(
        family, make_grid(0.0, 2.0, ctx.steps), distances=(1, 2, 3),
        threads=ctx.threads, cap=ctx.cap, parameter=family.label,
    )
    files.append(write_entanglement_outputs(sweep, folder / "entanglement_N6.csv"))

    f = _fig2_factorized_f()
    for name, tail in (("left", (1, 1)), ("right", (-1, -1))):
        psi = parity_project(f, 6, _parity(6, tail)).vector
        profile = entanglement_profile(psi, 3, (1, 2, 3), cap=ctx.cap)
        checks.append(
            _criterion(
                f"negativities_merge_{name}",
                _equal_within(profile.negativities, EXACTNESS_TOLERANCE),
                actual=profile.negativities,
            )
        )
        blocks = [block_entropy(psi, range(m), 3) for m in range(2, 6)]
        checks.append(
            _criterion(
                f"block_entropy_bound_{name}",
                max(blocks) <= 2.0 + 1e-10,
                expected="<= 2 bits",
                actual=blocks,
            )
        )
    return files, checks


def _fig5(ctx: ReproduceContext) -> FigureRun:
    folder = ctx.figure_dir("fig5")
    family = figure_family("fig2", 3, 6)
    sweep = scan_entanglement(
        family, make_grid(0.0, 2.0, ctx.steps), distances=(1, 2, 3),
        threads=ctx.threads, cap=ctx.cap, parameter=family.label,
    )
    files = [write_entanglement_outputs(sweep, folder / "mutual_information_N6.csv")]
    checks: list[CheckResult] = []
    f = _fig2_factorized_f()
    for name, tail in (("left", (1, 1)), ("right", (-1, -1))):
        psi = parity_project(f, 6, _parity(6, tail)).vector
        profile = entanglement_profile(psi, 3, (1, 2, 3), cap=ctx.cap)
        checks.append(
            _criterion(
                f"mutual_information_merge_{name}",
                _equal_within(profile.mutual_informations, EXACTNESS_TOLERANCE),
                actual=profile.mutual_informations,
            )
        )
        spectrum = pair_spectrum(psi, 0, 1, 3, cap=ctx.cap)
        checks.append(
            _criterion(
                f"pair_spectrum_{name}",
                spectrum.size == 9 and abs(float(spectrum.sum()) - 1.0) < 1e-10,
                actual=spectrum.tolist(),
            )
        )
    return files, checks


def _fig6(ctx: ReproduceContext, n: int) -> FigureRun:
    figure = f"fig6_n{n}"
    folder = ctx.figure_dir(figure)
    family = figure_family("fig6", n, 4)
    band = family.band_size
    assert band is not None
    result = _spectrum_sweep(ctx, family, 0.0, 2.0, levels=band + 1, kind=SectorKind.OCCUPATION)
    files = write_sweep_outputs(result, folder / "spectrum_N4.csv")
    checks = _crossing_checks(figure, result, at=1.0, multiplicity=band)

    spectrum = sector_spectrum(family(1.0), SectorKind.OCCUPATION, k=band + 1, cap=ctx.cap)
    checks.append(
        _criterion(
            "ground_energy_at_wc",
            abs(spectrum.ground_energy - FIG6_GROUND_ENERGY) < EXACTNESS_TOLERANCE,
            expected=FIG6_GROUND_ENERGY,
            actual=spectrum.ground_energy,
        )
    )
    checks.append(
        _criterion(
            "ground_degeneracy_at_wc",
            spectrum.ground_multiplicity() == band,
            expected=band,
            actual=spectrum.ground_multiplicity(),
        )
    )
    crossings = [e for e in result.events if e.kind is EventKind.FACTORIZATION_CROSSING]
    if crossings:
        first = "/".join(["4", *["0"] * (n - 1)])
        last = "/".join([*["0"] * (n - 1), "4"])
        checks.append(
            _criterion(
                "ground_sector_change",
                crossings[0].sectors_before == first and crossings[0].sectors_after == last,
                expected=[first, last],
                actual=[crossings[0].sectors_before, crossings[0].sectors_after],
            )
        )
    return files, checks


def _fig7(ctx: ReproduceContext) -> FigureRun:
    folder = ctx.figure_dir("fig7")
    family = figure_family("fig7", 4, 4)
    result = scan_spectrum(
        family,
        make_grid(0.0, 1.0, ctx.steps),
        levels=40,
        kind=SectorKind.OCCUPATION,
        threads=ctx.threads,
        cap=ctx.cap,
        parameter=family.label,
    )
    files = write_sweep_outputs(result, folder / "spectrum_N4.csv")

    full = sector_spectrum(family(0.0), SectorKind.NONE, cap=ctx.cap)
    levels = distinct_levels(full.eigenvalues)
    multiplicities = [count for _, count in levels]
    expected = [count for _, count in FIG7_LEVELS]
    deviation = max(
        (
            float(np.min(np.abs(value - np.array([e for e, _ in FIG7_LEVELS]))))
            for value in full.eigenvalues
        ),
        default=float("inf"),
    )
    checks = [
        _criterion(
            "su_n_point_multiplicities",
            multiplicities == expected,
            expected=expected,
            actual=multiplicities,
        ),
        _criterion(
            "su_n_point_levels_exact",
            deviation < FIG7_TOLERANCE,
            expected=[e for e, _ in FIG7_LEVELS],
            actual=[value for value, _ in levels],
            message=f"max deviation {deviation:.3e}",
        ),
    ]
    return files, checks


_RECIPES: dict[str, Callable[[ReproduceContext], FigureRun]] = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6_n3": lambda ctx: _fig6(ctx, 3),
    "fig6_n4": lambda ctx: _fig6(ctx, 4),
    "fig7": _fig7,
}


def reproduce(figure: str, ctx: ReproduceContext) -> FigureReport:
    """Write one figure's data and its checks.json.

    Raises:
        ConfigError: For an unknown figure id.
    """
    recipe = _RECIPES.get(figure)
    if recipe is None:
        raise ConfigError(f"unknown figure '{figure}' (expected one of: {', '.join(FIGURES)}, all)")
    started = time.perf_counter()
    files, checks = recipe(ctx)
    passed = sum(1 for check in checks if check.passed)
    report = FigureReport(
        figure=figure,
        passed=passed == len(checks),
        total_checks=len(checks),
        passed_checks=passed,
        duration_ms=int((time.perf_counter() - started) * 1000),
        files=[str(path.relative_to(ctx.out_dir)) for path in files],
        checks=checks,
    )
    # timings stay out of the file so reruns are byte-identical
    payload = report.model_dump(mode="json", exclude={"duration_ms"})
    write_json(ctx.figure_dir(figure) / CHECKS_FILE, payload)
    logger.debug("%s: %d/%d checks passed", figure, passed, len(checks))
    return report


def reproduce_all(ctx: ReproduceContext) -> list[FigureReport]:
    return [reproduce(figure, ctx) for figure in FIGURES]
