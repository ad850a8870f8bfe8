"""nlevel-factorization package."""

from __future__ import annotations

import re
from pathlib import Path

try:
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # pragma: no cover - Python 3.10 fallback
    tomllib = None

from .errors import (
    ConfigError,
    DimensionCapError,
    EmptySectorError,
    FactorizationError,
    InvariantError,
    NFactorError,
    SymmetryError,
)
from .factorization import FactorizationSolution, product_state, solve_uniform, verify_eigenstate
from .hamiltonian import HamiltonianMatrix, build_full, build_sector
from .meanfield import MeanFieldSolution, mf_solve
from .model import CouplingGraph, GraphKind, ModelSpec, SectorKind, SectorLabel, make_graph
from .spectra import SpectrumResult, sector_spectrum
from .sweep import CrossingEvent, SweepResult, find_crossings

_FALLBACK_VERSION = "0.0.0+unknown"
_DIST_NAME = "nlevel-factorization"
_PROJECT_NAME_RE = re.compile(r'^name\s*=\s*["\']([^"\']+)["\']\s*$')
_PROJECT_VERSION_RE = re.compile(r'^version\s*=\s*["\']([^"\']+)["\']\s*$')


def _scan_project_table(text: str) -> str | None:
    """Line-based fallback for interpreters without tomllib."""
    in_project = False
    name: str | None = None
    version: str | None = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("["):
            if in_project:
                break
            in_project = stripped == "[project]"
            continue
        if not in_project:
            continue
        if match := _PROJECT_NAME_RE.match(stripped):
            name = match.group(1)
        elif match := _PROJECT_VERSION_RE.match(stripped):
            version = match.group(1)
    return version if name == _DIST_NAME else None


def _read_project_version_from_toml(text: str) -> str | None:
    if tomllib is None:
        return _scan_project_table(text)
    try:
        data = tomllib.loads(text)
    except Exception:
        return None
    project = data.get("project")
    if not isinstance(project, dict) or project.get("name") != _DIST_NAME:
        return None
    version = project.get("version")
    return version if isinstance(version, str) else None


def _read_local_project_version(start: Path | None = None) -> str | None:
    """Version from the nearest pyproject.toml that declares this distribution."""
    module_path = (start or Path(__file__)).resolve()
    for parent in module_path.parents:
        pyproject = parent / "pyproject.toml"
        if not pyproject.exists():
            continue
        try:
            text = pyproject.read_text(encoding="utf-8")
        except OSError:
            continue
        version = _read_project_version_from_toml(text)
        if version is not None:
            return version
    return None


def _detect_version(module_path: Path | None = None) -> str:
    """Prefer a source checkout's version over installed metadata."""
    local_version = _read_local_project_version(module_path)
    if local_version:
        return local_version
    try:
        from importlib.metadata import version as _pkg_version

        return _pkg_version(_DIST_NAME)
    except Exception:
        return _FALLBACK_VERSION


__version__ = _detect_version()

__all__ = [
    "__version__",
    "ConfigError",
    "CouplingGraph",
    "CrossingEvent",
    "DimensionCapError",
    "EmptySectorError",
    "FactorizationError",
    "FactorizationSolution",
    "GraphKind",
    "HamiltonianMatrix",
    "InvariantError",
    "MeanFieldSolution",
    "ModelSpec",
    "NFactorError",
    "SectorKind",
    "SectorLabel",
    "SpectrumResult",
    "SweepResult",
    "SymmetryError",
    "build_full",
    "build_sector",
    "find_crossings",
    "make_graph",
    "mf_solve",
    "product_state",
    "sector_spectrum",
    "solve_uniform",
    "verify_eigenstate",
]
