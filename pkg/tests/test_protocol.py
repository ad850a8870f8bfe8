"""Tests for config parsing and report models."""

from __future__ import annotations

from pathlib import Path

import pytest

from nlevel_factor.errors import ConfigError
from nlevel_factor.factorization import solve_uniform
from nlevel_factor.model import GraphKind, SectorKind
from nlevel_factor.protocol import (
    CommandName,
    EventsFile,
    FactorizeReport,
    ModelConfig,
    RunConfig,
    load_model_config,
    load_run_config,
    parse_model_config,
    parse_sweep_config,
    read_structured,
)

MODEL = {"n": 3, "N": 4, "epsilon": [-0.5, 0.0, 0.5]}


class TestModelConfig:
    """Tests for ModelConfig."""

    def test_defaults(self):
        """Missing couplings are zero and the graph is a ring."""
        config = parse_model_config(MODEL)
        assert config.n_sites == 4
        assert config.graph.kind is GraphKind.RING
        spec = config.to_spec()
        assert spec.v_zero
        assert spec.dim == 81

    def test_upper_triangle_is_mirrored(self):
        """An upper-triangular matrix is read as symmetric."""
        config = parse_model_config({**MODEL, "V": [[0, 0.4, 0.4], [0, 0, 0.4], [0, 0, 0]]})
        assert config.V == [[0.0, 0.4, 0.4], [0.4, 0.0, 0.4], [0.4, 0.4, 0.0]]

    def test_asymmetric_matrix_named(self):
        """A full asymmetric matrix is reported by entry."""
        config = parse_model_config({**MODEL, "W": [[0, 1, 0], [2, 0, 0], [0, 0, 0]]})
        with pytest.raises(ConfigError, match=r"W\[0\]\[1\]"):
            config.to_spec()

    def test_extra_keys_rejected(self):
        """Unknown keys are typos, not options."""
        with pytest.raises(ConfigError, match="epsilom"):
            parse_model_config({**MODEL, "epsilom": [0, 1, 2]})

    def test_epsilon_length(self):
        """epsilon needs n entries."""
        with pytest.raises(ConfigError, match="epsilon"):
            parse_model_config({**MODEL, "epsilon": [0.0, 1.0]})

    def test_graph_alias(self):
        """Graph kinds accept their short aliases."""
        config = parse_model_config({**MODEL, "graph": {"kind": "chain"}})
        assert config.graph.kind is GraphKind.OPEN_CHAIN

    def test_spec_roundtrip(self, fig2_point):
        """from_spec and to_spec preserve the couplings."""
        spec = ModelConfig.from_spec(fig2_point).to_spec()
        assert spec.V.tolist() == fig2_point.V.tolist()
        assert spec.graph.kind is fig2_point.graph.kind


class TestFiles:
    """Reading JSON and YAML."""

    def test_yaml_model(self, tmp_path: Path):
        """YAML is chosen by extension."""
        path = tmp_path / "model.yaml"
        path.write_text("n: 2\nN: 2\nepsilon: [0.0, 1.0]\n", encoding="utf-8")
        assert load_model_config(path).n == 2

    def test_json_error_has_location(self, tmp_path: Path):
        """Malformed JSON reports line and column."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "n": 3,\n  "N": \n}', encoding="utf-8")
        with pytest.raises(ConfigError, match="line 4"):
            read_structured(path)

    def test_yaml_error_has_location(self, tmp_path: Path):
        """Malformed YAML reports its position."""
        path = tmp_path / "bad.yaml"
        path.write_text("n: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="line"):
            read_structured(path)

    def test_missing_file(self, tmp_path: Path):
        """Unreadable files are config errors."""
        with pytest.raises(ConfigError, match="cannot read"):
            read_structured(tmp_path / "nope.json")

    def test_top_level_must_be_object(self, tmp_path: Path):
        """Lists are not configs."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="object"):
            read_structured(path)


class TestRunConfig:
    """Tests for RunConfig and SweepConfig."""

    def test_sweep_required_for_spectrum(self, tmp_path: Path):
        """Spectrum runs need a sweep section."""
        path = tmp_path / "run.json"
        path.write_text('{"command": "spectrum", "model": "model.json"}', encoding="utf-8")
        with pytest.raises(ConfigError, match="sweep"):
            load_run_config(path)

    def test_model_path_relative_to_run_file(self, fig2_config: Path):
        """A string model is resolved against the run file's directory."""
        run = RunConfig.model_validate({"command": "factorize", "model": fig2_config.name})
        assert run.command is CommandName.FACTORIZE
        assert run.resolve_model(fig2_config.parent).n_sites == 4

    def test_defaults(self):
        """Run files default to parity sectors and four levels."""
        run = RunConfig.model_validate({"command": "meanfield", "model": MODEL})
        assert run.sectors is SectorKind.PARITY
        assert run.levels == 4
        assert run.pairs == [1, 2, 3]

    def test_sweep_aliases(self):
        """from and to are the file keys."""
        sweep = parse_sweep_config({"param": "lerp:fig2", "from": 0, "to": 2, "steps": 5})
        assert (sweep.start, sweep.stop, sweep.steps) == (0.0, 2.0, 5)

    def test_sweep_range_checked(self):
        """from must be below to."""
        with pytest.raises(ConfigError, match="empty"):
            parse_sweep_config({"param": "scale:V", "from": 1, "to": 1})


class TestReports:
    """Report models built from library results."""

    def test_factorize_report(self):
        """A solution dict validates as a report."""
        solution = solve_uniform([0.0, 1.0], [0.0, 0.0], [[0.0, 0.5], [0.5, 0.0]], n_sites=2, r_total=2.0)
        report = FactorizeReport.model_validate(solution.to_dict())
        assert report.n_sites == 2
        assert report.model_dump(by_alias=True)["N"] == 2

    def test_events_file(self):
        """The sidecar layout uses from/to keys."""
        events = EventsFile.model_validate(
            {
                "parameter": "fig2",
                "from": 0.0,
                "to": 2.0,
                "steps": 3,
                "events": [
                    {
                        "param": 1.0,
                        "kind": "factorization_crossing",
                        "multiplicity": 4,
                        "sector_before": "+++",
                        "sector_after": "+--",
                        "energy": -2.5,
                    }
                ],
            }
        )
        assert events.events[0].multiplicity == 4
