"""Tests for package version detection."""

from __future__ import annotations

from pathlib import Path

import pytest

from nlevel_factor import _detect_version, _read_local_project_version, _scan_project_table


def _module_in(root: Path) -> Path:
    package_dir = root / "src" / "nlevel_factor"
    package_dir.mkdir(parents=True)
    module_file = package_dir / "__init__.py"
    module_file.write_text('"""stub"""', encoding="utf-8")
    return module_file


def _pyproject(root: Path, name: str, version: str) -> None:
    root.mkdir(parents=True, exist_ok=True)
    (root / "pyproject.toml").write_text(
        f'[project]\nname = "{name}"\nversion = "{version}"\n', encoding="utf-8"
    )


class TestVersionDetection:
    """Tests for local-source version resolution."""

    def test_reads_nearest_pyproject(self, tmp_path: Path):
        """A source checkout reports its own project version."""
        module_file = _module_in(tmp_path / "repo")
        _pyproject(tmp_path / "repo", "nlevel-factorization", "9.9.9")

        assert _read_local_project_version(module_file) == "9.9.9"

    def test_local_project_beats_installed_metadata(self, monkeypatch, tmp_path: Path):
        """Source runs ignore a stale installed wheel."""
        module_file = _module_in(tmp_path / "repo")
        _pyproject(tmp_path / "repo", "nlevel-factorization", "1.2.3")
        monkeypatch.setattr("importlib.metadata.version", lambda _dist_name: "0.1.0")

        assert _detect_version(module_file) == "1.2.3"

    def test_falls_back_to_installed_metadata(self, monkeypatch, tmp_path: Path):
        """Installed packages use distribution metadata."""
        module_file = tmp_path / "site-packages" / "nlevel_factor" / "__init__.py"
        module_file.parent.mkdir(parents=True)
        module_file.write_text('"""stub"""', encoding="utf-8")
        monkeypatch.setattr("importlib.metadata.version", lambda _dist_name: "2.0.0")

        assert _detect_version(module_file) == "2.0.0"

    def test_ignores_malformed_pyproject(self, monkeypatch, tmp_path: Path):
        """An unterminated version string is skipped."""
        module_file = _module_in(tmp_path / "repo")
        (tmp_path / "repo" / "pyproject.toml").write_text(
            '[project]\nname = "nlevel-factorization"\nversion = "1.2.3\n', encoding="utf-8"
        )
        monkeypatch.setattr("importlib.metadata.version", lambda _dist_name: "2.0.0")

        assert _detect_version(module_file) == "2.0.0"

    def test_skips_unrelated_nearest_pyproject(self, monkeypatch, tmp_path: Path):
        """A workspace pyproject of another package is passed over."""
        module_file = _module_in(tmp_path / "workspace" / "repo")
        _pyproject(tmp_path / "workspace" / "repo", "other-package", "9.9.9")
        _pyproject(tmp_path / "workspace", "nlevel-factorization", "3.4.5")
        monkeypatch.setattr("importlib.metadata.version", lambda _dist_name: "0.1.0")

        assert _detect_version(module_file) == "3.4.5"

    def test_fallback_when_everything_fails(self, monkeypatch, tmp_path: Path):
        """No checkout and no metadata gives the placeholder version."""
        module_file = tmp_path / "site-packages" / "nlevel_factor" / "__init__.py"
        module_file.parent.mkdir(parents=True)
        module_file.write_text('"""stub"""', encoding="utf-8")

        def _raise(_dist_name: str) -> str:
            raise RuntimeError("no metadata")

        monkeypatch.setattr("importlib.metadata.version", _raise)

        assert _detect_version(module_file) == "0.0.0+unknown"

    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ('[project]\nname = "nlevel-factorization"\nversion = "0.4.0"\n', "0.4.0"),
            ('[project]\nname = "other"\nversion = "0.4.0"\n', None),
            ('[tool.x]\nversion = "1"\n[project]\nname = "nlevel-factorization"\n', None),
        ],
    )
    def test_line_scanner(self, text, expected):
        """The tomllib-free scanner reads only the [project] table."""
        assert _scan_project_table(text) == expected
