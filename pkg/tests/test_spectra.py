"""Tests for sector-resolved spectra."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nlevel_factor.errors import ConfigError, DimensionCapError, SymmetryError
from nlevel_factor.families import figure_family
from nlevel_factor.hamiltonian import HamiltonianMatrix, build_full
from nlevel_factor.model import SectorKind, SectorLabel
from nlevel_factor.spectra import (
    distinct_levels,
    eigensolve,
    excitation_energies,
    ground_state,
    lowest_in_sector,
    sector_spectrum,
)


@pytest.fixture
def triangle():
    """Three sites, three levels, away from the factorization point."""
    return figure_family("fig2", 3, 3)(0.6)


class TestSectorSpectrum:
    """Tests for sector_spectrum and eigensolve."""

    def test_parity_blocks_match_full_solve(self, triangle):
        """Block-by-block and full-space eigenvalues agree."""
        blocks = sector_spectrum(triangle, SectorKind.PARITY)
        full = sector_spectrum(triangle, SectorKind.NONE)
        assert len(blocks) == 27
        assert_allclose(blocks.eigenvalues, full.eigenvalues, atol=1e-10)

    def test_lowest_k_levels(self, triangle):
        """k keeps the lowest levels of the merged spectrum."""
        full = sector_spectrum(triangle, SectorKind.PARITY)
        lowest = sector_spectrum(triangle, SectorKind.PARITY, k=5)
        assert len(lowest) == 5
        assert_allclose(lowest.eigenvalues, full.eigenvalues[:5], atol=1e-10)

    def test_full_space_labels_agree_with_blocks(self, triangle):
        """Nondegenerate full-space levels carry their parity label."""
        blocks = sector_spectrum(triangle, SectorKind.PARITY)
        full = sector_spectrum(triangle, SectorKind.NONE, want_vectors=True)
        labelled = [i for i, label in enumerate(full.sectors) if label is not None]
        assert labelled
        for i in labelled:
            assert full.sectors[i] == blocks.sectors[i]

    def test_vectors_are_eigenvectors(self, triangle):
        """Merged sector vectors live in the full basis."""
        result = sector_spectrum(triangle, SectorKind.PARITY, want_vectors=True, k=4)
        assert result.eigenvectors is not None
        H = build_full(triangle).data
        for index in range(4):
            v = result.eigenvectors[:, index]
            assert_allclose(H @ v, result.eigenvalues[index] * v, atol=1e-9)

    def test_occupation_needs_v_zero(self, triangle):
        """V mixes occupation sectors."""
        with pytest.raises(SymmetryError):
            sector_spectrum(triangle, SectorKind.OCCUPATION)

    def test_asymmetric_matrix_rejected(self):
        """eigensolve only accepts symmetric matrices."""
        H = HamiltonianMatrix(data=np.array([[0.0, 1.0], [0.0, 0.0]]), n=2, n_sites=1)
        with pytest.raises(SymmetryError):
            eigensolve(H)

    def test_cap_applies_per_block(self, fig2_point):
        """Sector blocks above the cap are refused."""
        with pytest.raises(DimensionCapError):
            sector_spectrum(fig2_point, SectorKind.PARITY, cap=10)

    def test_band(self, fig2_point):
        """with_band marks the lowest levels."""
        result = sector_spectrum(fig2_point, SectorKind.PARITY, k=6, band_size=4)
        assert result.gs_band == (0, 1, 2, 3)


class TestGroundState:
    """Ground states and degeneracies at the factorization points."""

    def test_fourfold_ground_band(self, fig2_point):
        """At x = 1 every parity sector holds one ground state."""
        result = sector_spectrum(fig2_point, SectorKind.PARITY)
        assert result.ground_multiplicity() == 4
        assert {str(label) for label in result.sectors[:4]} == {"+++", "-+-", "--+", "+--"}

    def test_ground_state_vector(self, triangle):
        """ground_state returns a unit vector and its sector."""
        energy, vector, label = ground_state(triangle)
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        assert label is not None
        assert energy == pytest.approx(lowest_in_sector(triangle, label))

    @pytest.mark.parametrize(("n", "band"), [(3, 15), (4, 35)])
    def test_v_zero_band(self, n, band):
        """With V = 0 all symmetric states are degenerate at E = -10."""
        spec = figure_family("fig6", n, 4)(1.0)
        result = sector_spectrum(spec, SectorKind.OCCUPATION, k=band + 1)
        assert result.ground_energy == pytest.approx(-10.0, abs=1e-9)
        assert result.ground_multiplicity() == band

    def test_exchange_spectrum(self):
        """At x = 0 the fig7 family is a pure exchange ring."""
        spec = figure_family("fig7", 4, 4)(0.0)
        levels = distinct_levels(sector_spectrum(spec, SectorKind.OCCUPATION).eigenvalues)
        assert [round(value, 9) for value, _ in levels] == [-2.0, -1.0, 0.0, 1.0, 2.0]
        assert [count for _, count in levels] == [35, 110, 60, 50, 1]


class TestHelpers:
    """distinct_levels, gaps and excitation energies."""

    def test_distinct_levels(self):
        """Near-equal values are grouped."""
        values = np.array([0.0, 1e-12, 1.0, 1.0, 1.0, 2.0])
        assert distinct_levels(values) == [(pytest.approx(0.0), 2), (1.0, 3), (2.0, 1)]

    def test_gap_of_single_level_is_nan(self, triangle):
        """A one-level spectrum has no gap."""
        assert np.isnan(sector_spectrum(triangle, k=1).gap)

    def test_excitation_energies(self, triangle):
        """E_i - E_0 for the first levels."""
        result = sector_spectrum(triangle, k=4)
        excitations = excitation_energies(result, 3)
        assert excitations.shape == (3,)
        assert np.all(excitations >= 0)

    def test_excitation_count_checked(self, triangle):
        """count must leave room for E_0."""
        with pytest.raises(ConfigError):
            excitation_energies(sector_spectrum(triangle, k=2), 2)

    def test_labels_on_sector_blocks(self, fig2_point):
        """Levels solved in a block carry that block's label."""
        result = sector_spectrum(fig2_point, SectorKind.PARITY, k=3)
        assert all(isinstance(label, SectorLabel) for label in result.sectors)
