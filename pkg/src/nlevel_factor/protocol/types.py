"""
Protocol types for nlevel-factor.

Pydantic models for every file-facing structure: model and run configs read
from JSON or YAML, and the reports, events and figure checks written by the
CLI.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from nlevel_factor.errors import ConfigError
from nlevel_factor.model import GraphKind, ModelSpec, SectorKind, make_graph, resolve_graph_kind


class CommandName(str, Enum):
    """Pipelines a run file can dispatch to."""

    FACTORIZE = "factorize"
    MEANFIELD = "meanfield"
    SPECTRUM = "spectrum"
    ENTANGLE = "entangle"
    PROJECT = "project"


def _mirror_upper(matrix: list[list[float]]) -> list[list[float]]:
    """Mirror an upper-triangular matrix; anything else is returned as given."""
    array = np.asarray(matrix, dtype=np.float64)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        return matrix
    if np.any(np.tril(array, -1)):
        return matrix
    upper = np.triu(array, 1)
    return (upper + upper.T + np.diag(np.diag(array))).tolist()


class GraphConfig(BaseModel):
    """Coupling graph section of a model config."""

    model_config = ConfigDict(extra="forbid")

    kind: GraphKind = Field(
        default=GraphKind.RING,
        description="ring_first_neighbor (ring), open_chain (chain), all_to_all or custom",
    )
    custom: list[list[float]] | None = Field(
        default=None,
        description="N x N weights r_pq, required for kind=custom",
    )

    @field_validator("kind", mode="before")
    @classmethod
    def _resolve_kind(cls, value: Any) -> GraphKind:
        if not isinstance(value, str):
            raise ValueError(f"graph kind must be a string, got {value!r}")
        return resolve_graph_kind(value)


class ModelConfig(BaseModel):
    """One model instance as written in a config file."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    n: int = Field(ge=2, description="Levels per site")
    n_sites: int = Field(alias="N", ge=2, description="Number of sites")
    epsilon: list[float] = Field(description="Single-site energies eps_1..eps_n")
    U: list[list[float]] | None = None
    V: list[list[float]] | None = None
    W: list[list[float]] | None = None
    graph: GraphConfig = Field(default_factory=GraphConfig)
    edge_scaling: bool = True

    @model_validator(mode="after")
    def _check_shapes(self) -> ModelConfig:
        if len(self.epsilon) != self.n:
            raise ValueError(f"epsilon has {len(self.epsilon)} entries, expected n={self.n}")
        for name in ("U", "V", "W"):
            matrix = getattr(self, name)
            if matrix is None:
                continue
            if len(matrix) != self.n or any(len(row) != self.n for row in matrix):
                raise ValueError(f"{name} must be {self.n}x{self.n}")
            setattr(self, name, _mirror_upper(matrix))
        return self

    def to_spec(self) -> ModelSpec:
        """Build the validated ModelSpec.

        Raises:
            ConfigError: For asymmetric couplings or an invalid graph.
        """
        custom = None if self.graph.custom is None else np.asarray(self.graph.custom, dtype=np.float64)
        graph = make_graph(self.graph.kind, self.n_sites, custom)
        return ModelSpec.build(
            self.n,
            self.n_sites,
            self.epsilon,
            U=self.U,
            V=self.V,
            W=self.W,
            graph=graph,
            edge_scaling=self.edge_scaling,
        )

    @classmethod
    def from_spec(cls, spec: ModelSpec) -> ModelConfig:
        return cls.model_validate(spec.to_dict())


class SweepConfig(BaseModel):
    """One-parameter sweep: parameter path plus an inclusive grid."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    param: str = Field(description="scale:V|W|U|epsilon or lerp:fig2|fig6|fig7")
    start: float = Field(alias="from")
    stop: float = Field(alias="to")
    steps: int = Field(default=201, ge=2)

    @model_validator(mode="after")
    def _check_range(self) -> SweepConfig:
        if not self.stop > self.start:
            raise ValueError(f"sweep range is empty: from={self.start} must be below to={self.stop}")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str
    format: Literal["csv", "json"] = "csv"


class RunConfig(BaseModel):
    """A complete pipeline invocation loaded by `nfactor run`."""

    model_config = ConfigDict(extra="forbid")

    command: CommandName
    model: ModelConfig | str = Field(description="Inline model or a path relative to the run file")
    sweep: SweepConfig | None = None
    observables: list[str] = Field(default_factory=list)
    output: OutputConfig | None = None
    cap: int | None = Field(default=None, ge=1)
    seed: int | None = None
    threads: int | None = Field(default=None, ge=1)
    levels: int = Field(default=4, ge=1)
    sectors: SectorKind = SectorKind.PARITY
    pairs: list[int] = Field(default_factory=lambda: [1, 2, 3])
    sigma: str | None = None
    occupation: list[int] | None = None
    f: list[float] | None = None

    @model_validator(mode="after")
    def _check_sweep(self) -> RunConfig:
        if self.command in (CommandName.SPECTRUM, CommandName.ENTANGLE) and self.sweep is None:
            raise ValueError(f"command '{self.command.value}' needs a sweep section")
        return self

    def resolve_model(self, base_dir: Path) -> ModelConfig:
        if isinstance(self.model, ModelConfig):
            return self.model
        path = Path(self.model)
        return load_model_config(path if path.is_absolute() else base_dir / path)


class ComplexValue(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: float
    im: float = 0.0


class FactorizeReport(BaseModel):
    """Result of `nfactor factorize`."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    E2: float
    f_squared: list[float]
    f: list[ComplexValue]
    T_required: list[list[float]]
    is_gs: bool
    sufficiency: bool
    degeneracy: int
    total_energy: float
    continuous_set: bool
    n_sites: int = Field(alias="N")
    r_total: float
    warnings: list[str] = Field(default_factory=list)
    exact_energy: float | None = Field(default=None, description="<psi|H|psi> of the product state")
    residual: float | None = Field(default=None, description="||H psi - E psi|| of the product state")


class MeanFieldTransitionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    param: float
    level: int
    kind: str


class MeanFieldReport(BaseModel):
    """Result of `nfactor meanfield` at a single point."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    f_squared: list[float]
    occupied: list[int]
    energy: float
    lam: float = Field(alias="lambda")
    dropped: list[int] = Field(default_factory=list)
    method: str
    warning: str | None = None
    transitions: list[MeanFieldTransitionModel] = Field(default_factory=list)


class ProjectReport(BaseModel):
    """Observables of a projected state from `nfactor project`."""

    model_config = ConfigDict(extra="forbid")

    sector: str
    kind: SectorKind
    weight: float
    occupations: list[float]
    closed_form_occupations: list[float] | None = None
    entropy: float
    negativities: list[float | None]
    mutual_informations: list[float | None]
    energy: float | None = None
    residual: float | None = None


class CrossingEventModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    param: float
    kind: Literal["factorization_crossing", "parity_transition"]
    multiplicity: int
    sector_before: str
    sector_after: str
    energy: float


class EventsFile(BaseModel):
    """Sidecar `<out>.events.json` of a spectrum sweep."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    parameter: str
    start: float = Field(alias="from")
    stop: float = Field(alias="to")
    steps: int
    events: list[CrossingEventModel]


class CheckResult(BaseModel):
    """Outcome of one figure assertion."""

    model_config = ConfigDict(extra="forbid")

    name: str
    passed: bool
    expected: Any | None = None
    actual: Any | None = None
    message: str | None = None


class FigureReport(BaseModel):
    """checks.json of one reproduced figure."""

    model_config = ConfigDict(extra="forbid")

    figure: str
    passed: bool
    total_checks: int
    passed_checks: int
    duration_ms: int | None = None
    files: list[str] = Field(default_factory=list)
    checks: list[CheckResult]


def _describe_validation(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def read_structured(path: str | Path) -> dict[str, Any]:
    """Load a JSON or YAML object from disk.

    Raises:
        ConfigError: If the file is missing, malformed or not an object.
    """
    file_path = Path(path)
    try:
        raw = file_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {file_path}: {exc.strerror or exc}") from exc
    if file_path.suffix.lower() in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark is not None else ""
            raise ConfigError(f"invalid YAML in {file_path}{where}") from exc
    else:
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"invalid JSON in {file_path} (line {exc.lineno}, column {exc.colno}): {exc.msg}"
            ) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{file_path} must contain an object")
    return data


def parse_model_config(data: dict[str, Any], source: str = "model config") -> ModelConfig:
    try:
        return ModelConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {_describe_validation(exc)}") from exc


def load_model_config(path: str | Path) -> ModelConfig:
    """Load and validate a model config (JSON, or YAML by extension)."""
    return parse_model_config(read_structured(path), str(path))


def load_run_config(path: str | Path) -> RunConfig:
    """Load and validate a run config (JSON, or YAML by extension)."""
    data = read_structured(path)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {_describe_validation(exc)}") from exc


def parse_sweep_config(data: dict[str, Any], source: str = "sweep") -> SweepConfig:
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {_describe_validation(exc)}") from exc
