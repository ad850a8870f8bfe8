"""Pytest configuration and shared fixtures for nlevel-factor tests."""

from __future__ import annotations

import json
from collections.abc import Callable, Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from nlevel_factor.config import RuntimeSettings
from nlevel_factor.config.settings import ENV_DIM_CAP, ENV_SEED, ENV_THREADS
from nlevel_factor.families import FIG2_V_CRITICAL, ParameterFamily, figure_family
from nlevel_factor.model import ModelSpec


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Every test starts from default runtime settings."""
    for name in (ENV_DIM_CAP, ENV_THREADS, ENV_SEED):
        monkeypatch.delenv(name, raising=False)
    RuntimeSettings.reset()
    yield
    RuntimeSettings.reset()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def fig2_family_n4() -> ParameterFamily:
    """Equally spaced three-level ring of four sites, factorizing at x = 1."""
    return figure_family("fig2", 3, 4)


@pytest.fixture
def fig2_family_n2() -> ParameterFamily:
    return figure_family("fig2", 3, 2)


@pytest.fixture
def fig2_point(fig2_family_n4: ParameterFamily) -> ModelSpec:
    return fig2_family_n4(1.0)


def _fig2_config(n_sites: int) -> dict[str, Any]:
    v = FIG2_V_CRITICAL
    return {
        "n": 3,
        "N": n_sites,
        "epsilon": [-0.5, 0.0, 0.5],
        "V": [[0.0, v, v], [0.0, 0.0, v], [0.0, 0.0, 0.0]],
        "graph": {"kind": "ring"},
    }


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[dict[str, Any], str], Path]:
    """Write a config dict as JSON under tmp_path."""

    def _write(data: dict[str, Any], name: str = "model.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def fig2_config(write_config: Callable[[dict[str, Any], str], Path]) -> Path:
    return write_config(_fig2_config(4), "fig2_N4.json")


@pytest.fixture
def pair_config(write_config: Callable[[dict[str, Any], str], Path]) -> Path:
    return write_config(_fig2_config(2), "fig2_N2.json")
