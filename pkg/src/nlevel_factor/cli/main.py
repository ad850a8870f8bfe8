"""
CLI entry point for nlevel-factor.

Commands:
    nfactor factorize <config>      - Solve the uniform factorization equations
    nfactor meanfield <config>      - Uniform mean-field solution or sweep
    nfactor spectrum                - Sector-resolved spectrum sweep with crossing events
    nfactor entangle                - Ground-state entanglement sweep
    nfactor project                 - Observables of a symmetry-projected product state
    nfactor reproduce <figure|all>  - Regenerate figure data and checks
    nfactor run <file>              - Run a pipeline described by a run file
    nfactor dump-matrix <config>    - Write the Hamiltonian as `row col value` text
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Annotated, Any, NoReturn

import numpy as np
import typer
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from nlevel_factor import __version__
from nlevel_factor.config import RuntimeSettings, get_dim_cap
from nlevel_factor.entanglement import entanglement_profile, entropy, occupations, reduce
from nlevel_factor.errors import ConfigError, NFactorError
from nlevel_factor.factorization import (
    factorizing_spec,
    product_state,
    solve_uniform,
    verify_eigenstate,
)
from nlevel_factor.families import ParameterFamily, resolve_param_path
from nlevel_factor.hamiltonian import build_full, build_sector, dump_matrix
from nlevel_factor.meanfield import mf_solve, mf_sweep, mf_transition_points
from nlevel_factor.model import ModelSpec, SectorKind, enumerate_sectors, parse_sector
from nlevel_factor.projection import number_project, parity_project, projected_occupations_n3
from nlevel_factor.protocol.types import (
    CommandName,
    FactorizeReport,
    FigureReport,
    MeanFieldReport,
    OutputConfig,
    ProjectReport,
    RunConfig,
    SweepConfig,
    load_model_config,
    load_run_config,
    parse_sweep_config,
    read_structured,
)
from nlevel_factor.reproduce import (
    FIGURES,
    ReproduceContext,
    reproduce,
    reproduce_all,
    write_entanglement_outputs,
    write_sweep_outputs,
)
from nlevel_factor.storage import write_csv, write_json
from nlevel_factor.sweep import (
    DEFAULT_STEPS,
    EntanglementSweep,
    SweepResult,
    find_crossings,
    make_grid,
    scan_entanglement,
    scan_spectrum,
)

# Global state for CLI context
_cli_state: dict[str, Any] = {
    "quiet": False,
    "debug": False,
    "no_color": False,
    "out_dir": Path("."),
}

EXIT_FIGURE_FAILED = 4
NORM_WARNING = 1e-6


def _get_console(*, stderr: bool = False) -> Console:
    """Get console with current settings."""
    return Console(
        no_color=_cli_state["no_color"],
        force_terminal=None if not _cli_state["no_color"] else False,
        stderr=stderr,
    )


def _print(message: Any, **kwargs: Any) -> None:
    """Print message unless quiet mode is enabled."""
    if not _cli_state["quiet"]:
        _get_console().print(message, **kwargs)


def _warn(message: str, **kwargs: Any) -> None:
    """Print warnings to stderr so stdout stays machine-readable."""
    if not _cli_state["quiet"]:
        _get_console(stderr=True).print(message, **kwargs)


def _setup_logging() -> None:
    """Configure logging based on debug flag."""
    if _cli_state["debug"]:
        logging.basicConfig(
            level=logging.DEBUG,
            format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            stream=sys.stderr,
        )
        logging.getLogger("nlevel_factor").setLevel(logging.DEBUG)


def _version_callback(value: bool) -> None:
    """Handle --version flag."""
    if value:
        print(f"nlevel-factor v{__version__}")
        raise typer.Exit()


def _fail(error: NFactorError, *, output_json: bool) -> NoReturn:
    """Report a library error and exit with its code."""
    if output_json:
        print(json.dumps(error.to_dict()))
    else:
        _get_console(stderr=True).print(f"[red]Error:[/red] {escape(str(error))}")
    raise typer.Exit(error.exit_code)


def _emit_json(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _default_path(name: str) -> Path:
    return Path(_cli_state["out_dir"]) / name


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of integers, got '{text}'")


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of numbers, got '{text}'")


app = typer.Typer(
    name="nfactor",
    help="Exact ground-state factorization for n-level lattice models",
    no_args_is_help=True,
)


@app.callback()
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-V",
            callback=_version_callback,
            is_eager=True,
            help="Show version and exit",
        ),
    ] = False,
    quiet: Annotated[
        bool,
        typer.Option("--quiet", "-q", help="Suppress non-essential output"),
    ] = False,
    debug: Annotated[
        bool,
        typer.Option("--debug", help="Enable debug logging"),
    ] = False,
    no_color: Annotated[
        bool,
        typer.Option("--no-color", help="Disable colored output"),
    ] = False,
    cap: Annotated[
        int | None,
        typer.Option("--cap", help="Largest matrix dimension to allocate"),
    ] = None,
    threads: Annotated[
        int | None,
        typer.Option("--threads", help="Worker threads for sweeps"),
    ] = None,
    seed: Annotated[
        int | None,
        typer.Option("--seed", help="Seed for randomized utilities"),
    ] = None,
    out_dir: Annotated[
        Path,
        typer.Option("--out-dir", help="Directory for default output files"),
    ] = Path("."),
) -> None:
    """Exact ground-state factorization for n-level lattice models."""
    _cli_state["quiet"] = quiet
    _cli_state["debug"] = debug
    _cli_state["no_color"] = no_color
    _cli_state["out_dir"] = out_dir
    _setup_logging()
    try:
        RuntimeSettings.get_instance().override(dim_cap=cap, threads=threads, seed=seed)
    except NFactorError as e:
        _fail(e, output_json=False)


# --- pipelines shared by the subcommands and `run` ---


def _factorize(spec: ModelSpec) -> FactorizeReport:
    """Solve the pair equation for a config and check the product state when it fits."""
    U_offdiag = spec.U - np.diag(np.diag(spec.U))
    split = U_offdiag if np.any(U_offdiag) else None
    solution = solve_uniform(
        spec.epsilon,
        np.diag(spec.U),
        spec.V,
        U_offdiag=split,
        n_sites=spec.n_sites,
        r_total=spec.graph.r_total,
    )
    report = FactorizeReport.model_validate(solution.to_dict())
    f = solution.f_real()
    if f is None or spec.dim > get_dim_cap():
        return report
    realized = factorizing_spec(
        solution,
        np.diag(spec.U),
        spec.V,
        spec.graph,
        U_offdiag=split,
        edge_scaling=spec.edge_scaling,
    )
    energy, residual = verify_eigenstate(build_full(realized), product_state(f, spec.n_sites))
    return report.model_copy(update={"exact_energy": energy, "residual": residual})


def _meanfield(spec: ModelSpec) -> MeanFieldReport:
    return MeanFieldReport.model_validate(mf_solve(spec).to_dict())


def _family(spec: ModelSpec, sweep: SweepConfig) -> ParameterFamily:
    return resolve_param_path(sweep.param, spec)


def _meanfield_sweep(spec: ModelSpec, sweep: SweepConfig) -> tuple[list[str], list[list[float]], MeanFieldReport]:
    """CSV table of the sweep plus a report at the end point carrying the transitions."""
    family = _family(spec, sweep)
    grid = make_grid(sweep.start, sweep.stop, sweep.steps)
    table = mf_sweep(family, grid)
    header = ["param", *(f"f2_{i + 1}" for i in range(spec.n)), "energy"]
    transitions = mf_transition_points(family, sweep.start, sweep.stop, steps=sweep.steps)
    last = MeanFieldReport.model_validate(
        {**table.solutions[-1].to_dict(), "transitions": [t.to_dict() for t in transitions]}
    )
    return header, table.rows(), last


def _band_size(family: ParameterFamily, kind: SectorKind, override: int | None) -> int:
    if override is not None:
        return override
    if family.band_size is not None:
        return family.band_size
    return len(enumerate_sectors(family.base.n, family.base.n_sites, kind))


def _spectrum(
    spec: ModelSpec,
    sweep: SweepConfig,
    *,
    levels: int,
    kind: SectorKind,
    band: int | None = None,
) -> SweepResult:
    family = _family(spec, sweep)
    if kind is SectorKind.NONE:
        grid = make_grid(sweep.start, sweep.stop, sweep.steps)
        return scan_spectrum(family, grid, levels=levels, kind=kind, parameter=family.label)
    return find_crossings(
        family,
        sweep.start,
        sweep.stop,
        _band_size(family, kind, band),
        steps=sweep.steps,
        levels=levels,
        kind=kind,
        parameter=family.label,
    )


def _entangle(spec: ModelSpec, sweep: SweepConfig, *, pairs: list[int], kind: SectorKind) -> EntanglementSweep:
    family = _family(spec, sweep)
    grid = make_grid(sweep.start, sweep.stop, sweep.steps)
    return scan_entanglement(family, grid, distances=pairs, kind=kind, parameter=family.label)


def _finite_or_none(values: list[float]) -> list[float | None]:
    return [None if np.isnan(v) else float(v) for v in values]


def _project(
    f: np.ndarray,
    n_sites: int,
    sector: str,
    kind: SectorKind,
    *,
    pairs: list[int],
    spec: ModelSpec | None = None,
) -> ProjectReport:
    """Project product_state(f, N) onto a sector and measure it."""
    n = f.size
    label = parse_sector(sector, kind, n, n_sites)
    if kind is SectorKind.PARITY:
        state = parity_project(f, n_sites, label)
    else:
        state = number_project(f, n_sites, label.values)
    profile = entanglement_profile(state.vector, n, pairs)
    closed_form = None
    if kind is SectorKind.PARITY and n == 3 and not np.iscomplexobj(f):
        closed_form = projected_occupations_n3(f, n_sites, label).tolist()
    report = ProjectReport(
        sector=str(label),
        kind=kind,
        weight=state.weight,
        occupations=occupations(state.vector, n)[0].tolist(),
        closed_form_occupations=closed_form,
        entropy=entropy(reduce(state.vector, [0], n)),
        negativities=_finite_or_none(profile.negativities),
        mutual_informations=_finite_or_none(profile.mutual_informations),
    )
    if spec is None:
        return report
    if (spec.n, spec.n_sites) != (n, n_sites):
        raise ConfigError(f"model has n={spec.n}, N={spec.n_sites} but the state has n={n}, N={n_sites}")
    energy, residual = verify_eigenstate(build_full(spec), state.vector)
    return report.model_copy(update={"energy": energy, "residual": residual})


def _normalized(values: np.ndarray) -> np.ndarray:
    norm = float(np.sqrt(np.sum(np.abs(values) ** 2)))
    if norm == 0.0:
        raise ConfigError("f must have at least one nonzero entry")
    if abs(norm - 1.0) > NORM_WARNING:
        _warn(f"[yellow]Warning:[/yellow] f has norm {norm:.6g}, normalizing")
    return values / norm


def _amplitudes_from_file(path: Path) -> tuple[np.ndarray, int | None]:
    """Read f (and N when present) from a `factorize --json` output."""
    data = read_structured(path)
    raw = data.get("f")
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path} has no 'f' list")
    try:
        values = np.array(
            [complex(item["re"], item.get("im", 0.0)) if isinstance(item, dict) else complex(item) for item in raw]
        )
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{path}: 'f' entries must be numbers or {{re, im}} objects")
    if not np.any(values.imag):
        values = values.real
    n_sites = data.get("N")
    return values, int(n_sites) if n_sites is not None else None


def _write_table(path: Path, header: list[str], rows: list[list[Any]], fmt: str) -> Path:
    if fmt == "json":
        return write_json(path, {"columns": header, "rows": rows})
    return write_csv(path, header, rows)


def _select_columns(
    header: list[str], rows: list[list[Any]], observables: list[str]
) -> tuple[list[str], list[list[Any]]]:
    """Keep `param` and the columns whose names start with one of `observables` (all if empty)."""
    if not observables:
        return header, rows
    keep = [i for i, name in enumerate(header) if i == 0 or name.startswith(tuple(observables))]
    if len(keep) == 1:
        raise ConfigError(f"observables {observables} match no column of {header[1:]}")
    return [header[i] for i in keep], [[row[i] for i in keep] for row in rows]


def _render_events(result: SweepResult, path: Path) -> None:
    if not result.events:
        _print(f"[green]Wrote[/green] {path} ({result.grid.size} points, no crossings)")
        return
    table = Table(title=f"Crossings in {result.parameter}")
    table.add_column("param", style="cyan")
    table.add_column("kind")
    table.add_column("multiplicity")
    table.add_column("sectors")
    table.add_column("energy")
    for event in result.events:
        payload = event.to_dict()
        table.add_row(
            f"{event.param:.8g}",
            event.kind.value,
            str(event.multiplicity),
            f"{payload['sector_before']} -> {payload['sector_after']}",
            f"{event.energy:.10g}",
        )
    _print(table)
    _print(f"[green]Wrote[/green] {path}")


@app.command()
def factorize(
    config: Annotated[Path, typer.Argument(help="Model config (.json, .yaml or .yml)")],
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Output as JSON"),
    ] = False,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Also write the JSON report to a file"),
    ] = None,
) -> None:
    """Solve the uniform factorization equations for a model config."""
    try:
        report = _factorize(load_model_config(config).to_spec())
        payload = report.model_dump(mode="json", by_alias=True)
        if out is not None:
            write_json(out, payload)
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json:
        _emit_json(payload)
        return

    for warning in report.warnings:
        _warn(f"[yellow]Warning:[/yellow] {escape(warning)}")
    table = Table(title="Factorized ground state")
    table.add_column("level", style="cyan")
    table.add_column("f^2")
    table.add_column("f")
    for i, (f2, f) in enumerate(zip(report.f_squared, report.f), start=1):
        table.add_row(str(i), f"{f2:.10g}", f"{f.re:.10g}{f.im:+.10g}i" if f.im else f"{f.re:.10g}")
    _print(table)
    lines = [
        f"E2 = {report.E2:.12g}",
        f"total energy = {report.total_energy:.12g} (N={report.n_sites}, r_total={report.r_total:g})",
        f"ground state: {'yes' if report.is_gs else 'not guaranteed'}",
        f"degeneracy = {report.degeneracy}" + (" (continuous set)" if report.continuous_set else ""),
    ]
    if report.residual is not None:
        lines.append(f"exact check: <H> = {report.exact_energy:.12g}, residual = {report.residual:.2e}")
    _print(Panel("\n".join(lines), border_style="green" if report.is_gs else "yellow"))


@app.command()
def meanfield(
    config: Annotated[Path, typer.Argument(help="Model config (.json, .yaml or .yml)")],
    param: Annotated[
        str | None,
        typer.Option("--param", help="Sweep parameter path, e.g. scale:V or lerp:fig2"),
    ] = None,
    start: Annotated[float | None, typer.Option("--from", help="Sweep start")] = None,
    stop: Annotated[float | None, typer.Option("--to", help="Sweep end")] = None,
    steps: Annotated[int, typer.Option("--steps", help="Grid points")] = DEFAULT_STEPS,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Sweep CSV (default: <out-dir>/meanfield.csv)"),
    ] = None,
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Output as JSON"),
    ] = False,
) -> None:
    """Best uniform product state, at one point or along a sweep."""
    try:
        spec = load_model_config(config).to_spec()
        if param is None:
            report = _meanfield(spec)
            path = None
        else:
            sweep = parse_sweep_config({"param": param, "from": start, "to": stop, "steps": steps}, "--param")
            header, rows, report = _meanfield_sweep(spec, sweep)
            path = write_csv(out or _default_path("meanfield.csv"), header, rows)
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json:
        _emit_json(report.model_dump(mode="json", by_alias=True))
        return
    if report.warning:
        _warn(f"[yellow]Warning:[/yellow] {escape(report.warning)}")
    f2 = ", ".join(f"{v:.8g}" for v in report.f_squared)
    _print(
        Panel(
            f"f^2 = [{f2}]\noccupied = {report.occupied}\nenergy = {report.energy:.12g}\n"
            f"lambda = {report.lam:.12g}\nmethod = {report.method}",
            title="Mean field" if path is None else f"Mean field at {param} = {stop}",
        )
    )
    for transition in report.transitions:
        _print(f"  level {transition.level} {transition.kind} at {transition.param:.6g}")
    if path is not None:
        _print(f"[green]Wrote[/green] {path}")


@app.command()
def spectrum(
    config: Annotated[Path, typer.Option("--config", "-c", help="Model config")],
    param: Annotated[str, typer.Option("--param", help="Parameter path, e.g. scale:V or lerp:fig2")],
    start: Annotated[float, typer.Option("--from", help="Sweep start")],
    stop: Annotated[float, typer.Option("--to", help="Sweep end")],
    steps: Annotated[int, typer.Option("--steps", help="Grid points")] = DEFAULT_STEPS,
    levels: Annotated[int, typer.Option("--levels", help="Levels per grid point")] = 4,
    sectors: Annotated[
        SectorKind,
        typer.Option("--sectors", help="Symmetry resolution: parity, occupation or none"),
    ] = SectorKind.PARITY,
    band: Annotated[
        int | None,
        typer.Option("--band", help="Sector count that makes a crossing a factorization point"),
    ] = None,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="CSV path (default: <out-dir>/spectrum.csv)"),
    ] = None,
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Print the crossing events as JSON"),
    ] = False,
) -> None:
    """Lowest levels along a sweep, with refined ground-state crossings."""
    try:
        spec = load_model_config(config).to_spec()
        sweep = parse_sweep_config({"param": param, "from": start, "to": stop, "steps": steps}, "--param")
        result = _spectrum(spec, sweep, levels=levels, kind=sectors, band=band)
        path = out or _default_path("spectrum.csv")
        write_sweep_outputs(result, path)
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json:
        _emit_json(result.events_payload())
        return
    _render_events(result, path)


@app.command()
def entangle(
    config: Annotated[Path, typer.Option("--config", "-c", help="Model config")],
    param: Annotated[str, typer.Option("--param", help="Parameter path, e.g. scale:V or lerp:fig2")],
    start: Annotated[float, typer.Option("--from", help="Sweep start")],
    stop: Annotated[float, typer.Option("--to", help="Sweep end")],
    steps: Annotated[int, typer.Option("--steps", help="Grid points")] = DEFAULT_STEPS,
    pairs: Annotated[str, typer.Option("--pairs", help="Pair distances from site 0")] = "1,2,3",
    sectors: Annotated[
        SectorKind,
        typer.Option("--sectors", help="Sector resolution for the ground state"),
    ] = SectorKind.PARITY,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="CSV path (default: <out-dir>/entangle.csv)"),
    ] = None,
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Output as JSON"),
    ] = False,
) -> None:
    """Ground-state entanglement observables along a sweep."""
    try:
        spec = load_model_config(config).to_spec()
        sweep = parse_sweep_config({"param": param, "from": start, "to": stop, "steps": steps}, "--param")
        result = _entangle(spec, sweep, pairs=_parse_ints(pairs, "--pairs"), kind=sectors)
        path = write_entanglement_outputs(result, out or _default_path("entangle.csv"))
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json:
        _emit_json({"path": str(path), "columns": result.header(), "points": len(result.profiles)})
        return
    _print(f"[green]Wrote[/green] {path} ({len(result.profiles)} points)")


@app.command()
def project(
    sector: Annotated[str, typer.Argument(help="Sector label, e.g. '+-+' or '4,0,0'")],
    f: Annotated[
        str | None,
        typer.Option("--f", help="Comma-separated real amplitudes f_1..f_n"),
    ] = None,
    from_file: Annotated[
        Path | None,
        typer.Option("--from-file", help="A `factorize --json` output to take f and N from"),
    ] = None,
    n_sites: Annotated[
        int | None,
        typer.Option("--sites", "-N", help="Number of sites"),
    ] = None,
    kind: Annotated[
        SectorKind,
        typer.Option("--kind", help="parity or occupation"),
    ] = SectorKind.PARITY,
    pairs: Annotated[str, typer.Option("--pairs", help="Pair distances from site 0")] = "1,2,3",
    config: Annotated[
        Path | None,
        typer.Option("--config", "-c", help="Model config; adds <H> and the eigen residual"),
    ] = None,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Also write the JSON report to a file"),
    ] = None,
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Output as JSON"),
    ] = False,
) -> None:
    """Occupations and entanglement of a parity- or number-projected product state."""
    try:
        if (f is None) == (from_file is None):
            raise ConfigError("give exactly one of --f and --from-file")
        if f is not None:
            amplitudes, file_sites = np.array(_parse_floats(f, "--f")), None
        else:
            assert from_file is not None
            amplitudes, file_sites = _amplitudes_from_file(from_file)
        sites = n_sites or file_sites
        if sites is None:
            raise ConfigError("the number of sites is unknown; pass --sites")
        if kind is SectorKind.NONE:
            raise ConfigError("projection needs a parity or occupation sector")
        spec = load_model_config(config).to_spec() if config is not None else None
        report = _project(
            _normalized(amplitudes),
            sites,
            sector,
            kind,
            pairs=_parse_ints(pairs, "--pairs"),
            spec=spec,
        )
        payload = report.model_dump(mode="json")
        if out is not None:
            write_json(out, payload)
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json:
        _emit_json(payload)
        return
    table = Table(title=f"Projected state, sector {report.sector}")
    table.add_column("observable", style="cyan")
    table.add_column("value")
    table.add_row("weight", f"{report.weight:.10g}")
    table.add_row("<n_i>", ", ".join(f"{v:.8g}" for v in report.occupations))
    table.add_row("S_site (bits)", f"{report.entropy:.8g}")
    for label, values in (("negativity", report.negativities), ("mutual info", report.mutual_informations)):
        table.add_row(label, ", ".join("-" if v is None else f"{v:.8g}" for v in values))
    if report.residual is not None:
        table.add_row("<H>", f"{report.energy:.12g}")
        table.add_row("residual", f"{report.residual:.2e}")
    _print(table)


def _render_figure(report: FigureReport) -> None:
    style = "green" if report.passed else "red"
    duration = f", {report.duration_ms}ms" if report.duration_ms is not None else ""
    _print(
        f"[{style}]{report.figure}[/{style}]: "
        f"{report.passed_checks}/{report.total_checks} checks passed{duration}"
    )
    for check in report.checks:
        if check.passed:
            continue
        detail = check.message or f"expected {check.expected!r}, got {check.actual!r}"
        _print(f"  - {check.name}: {escape(detail)}")


@app.command("reproduce")
def reproduce_command(
    figure: Annotated[
        str,
        typer.Argument(help=f"Figure id ({', '.join(FIGURES)}) or 'all'"),
    ],
    steps: Annotated[
        int,
        typer.Option("--steps", help="Coarse grid points per sweep"),
    ] = DEFAULT_STEPS,
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Output as JSON"),
    ] = False,
) -> None:
    """Regenerate figure data under <out-dir>/<figure>/ with a checks.json."""
    settings = RuntimeSettings.get_instance()
    ctx = ReproduceContext(
        out_dir=Path(_cli_state["out_dir"]),
        threads=settings.threads,
        cap=settings.dim_cap,
        steps=steps,
    )
    try:
        reports = reproduce_all(ctx) if figure == "all" else [reproduce(figure, ctx)]
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json:
        _emit_json([report.model_dump(mode="json") for report in reports])
    else:
        for report in reports:
            _render_figure(report)
    if not all(report.passed for report in reports):
        raise typer.Exit(EXIT_FIGURE_FAILED)


def _dispatch(run: RunConfig, base_dir: Path) -> tuple[Path | None, Any]:
    """Execute a run file; returns the written path and the printable payload."""
    spec = run.resolve_model(base_dir).to_spec()
    output = run.output

    def target(default_name: str, default_format: str) -> OutputConfig:
        return output or OutputConfig(path=str(_default_path(default_name)), format=default_format)

    if run.command is CommandName.FACTORIZE:
        payload: Any = _factorize(spec).model_dump(mode="json", by_alias=True)
    elif run.command is CommandName.MEANFIELD:
        if run.sweep is None:
            payload = _meanfield(spec).model_dump(mode="json", by_alias=True)
        else:
            header, rows, last = _meanfield_sweep(spec, run.sweep)
            dest = target("meanfield.csv", "csv")
            path = _write_table(Path(dest.path), header, rows, dest.format)
            return path, last.model_dump(mode="json", by_alias=True)
    elif run.command is CommandName.SPECTRUM:
        assert run.sweep is not None
        result = _spectrum(spec, run.sweep, levels=run.levels, kind=run.sectors)
        dest = target("spectrum.csv", "csv")
        if dest.format == "csv":
            path = write_sweep_outputs(result, Path(dest.path))[0]
        else:
            path = write_json(dest.path, {"columns": result.header(), "rows": result.rows(), **result.events_payload()})
        return path, result.events_payload()
    elif run.command is CommandName.ENTANGLE:
        assert run.sweep is not None
        sweep = _entangle(spec, run.sweep, pairs=run.pairs, kind=run.sectors)
        dest = target("entangle.csv", "csv")
        header, rows = _select_columns(sweep.header(), sweep.rows(), run.observables)
        path = _write_table(Path(dest.path), header, rows, dest.format)
        return path, {"path": str(path), "points": len(sweep.profiles)}
    else:
        if run.f is None:
            raise ConfigError("project runs need an 'f' list")
        kind = SectorKind.OCCUPATION if run.occupation is not None else SectorKind.PARITY
        if kind is SectorKind.OCCUPATION:
            assert run.occupation is not None
            sector = ",".join(str(c) for c in run.occupation)
        elif run.sigma is not None:
            sector = run.sigma
        else:
            raise ConfigError("project runs need 'sigma' or 'occupation'")
        report = _project(_normalized(np.array(run.f)), spec.n_sites, sector, kind, pairs=run.pairs, spec=spec)
        payload = report.model_dump(mode="json")

    if output is None:
        return None, payload
    if output.format != "json":
        raise ConfigError(f"command '{run.command.value}' writes JSON, not {output.format}")
    return write_json(output.path, payload), payload


@app.command()
def run(
    file: Annotated[Path, typer.Argument(help="Run file (.json, .yaml or .yml)")],
    output_json: Annotated[
        bool,
        typer.Option("--json", help="Output as JSON"),
    ] = False,
) -> None:
    """Run the pipeline a run file describes."""
    try:
        config = load_run_config(file)
        RuntimeSettings.get_instance().override(dim_cap=config.cap, threads=config.threads, seed=config.seed)
        path, payload = _dispatch(config, file.parent)
    except NFactorError as e:
        _fail(e, output_json=output_json)

    if output_json or path is None:
        _emit_json(payload)
        return
    _print(f"[green]Wrote[/green] {path}")


@app.command("dump-matrix")
def dump_matrix_command(
    config: Annotated[Path, typer.Argument(help="Model config (.json, .yaml or .yml)")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Destination text file")],
    sector: Annotated[
        str | None,
        typer.Option("--sector", help="Restrict to one sector, e.g. '+-+' or '4,0,0'"),
    ] = None,
    kind: Annotated[
        SectorKind,
        typer.Option("--kind", help="Kind of --sector: parity or occupation"),
    ] = SectorKind.PARITY,
) -> None:
    """Write the Hamiltonian as a dimension line and `row col value` triples."""
    try:
        spec = load_model_config(config).to_spec()
        if sector is None:
            H = build_full(spec)
        else:
            H = build_sector(spec, parse_sector(sector, kind, spec.n, spec.n_sites))
        path = dump_matrix(H, out)
    except NFactorError as e:
        _fail(e, output_json=False)
    _print(f"[green]Wrote[/green] {path} (dimension {H.dim})")


@app.command()
def version() -> None:
    """Show version information."""
    console = _get_console()
    console.print(f"nlevel-factor v{__version__}")


if __name__ == "__main__":
    app()
