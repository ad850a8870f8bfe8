"""Tests for named parameter families."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nlevel_factor.errors import ConfigError
from nlevel_factor.families import (
    FIG2_V_CRITICAL,
    fig2_epsilon,
    fig2_pair_energy,
    fig6_epsilon,
    figure_base,
    figure_family,
    resolve_param_path,
)


class TestScalePaths:
    """scale:<field> families."""

    def test_scale_v(self, fig2_point):
        """scale:V multiplies V and leaves the rest alone."""
        family = resolve_param_path("scale:V", fig2_point)
        scaled = family(2.0)
        assert_allclose(scaled.V, 2.0 * fig2_point.V)
        assert_allclose(scaled.W, fig2_point.W)
        assert family.label == "V"
        assert family.band_size is None

    def test_scale_epsilon(self, fig2_point):
        """scale:epsilon multiplies the single-site energies."""
        scaled = resolve_param_path("scale:epsilon", fig2_point)(0.5)
        assert_allclose(scaled.epsilon, [-0.25, 0.0, 0.25])

    @pytest.mark.parametrize("path", ["scale:J", "lerp:fig3", "fig2", ""])
    def test_unknown_path(self, fig2_point, path):
        """Unknown paths list the valid ones."""
        with pytest.raises(ConfigError, match="unknown parameter path"):
            resolve_param_path(path, fig2_point)


class TestRecipes:
    """lerp:<recipe> families."""

    def test_fig2_spectrum(self):
        """Equally spaced levels around zero."""
        assert_allclose(fig2_epsilon(3), [-0.5, 0.0, 0.5])
        assert_allclose(fig2_epsilon(4), [-0.75, -0.25, 0.25, 0.75])

    def test_fig2_pair_energy(self):
        """E2c at v_c = 0.4."""
        assert fig2_pair_energy(fig2_epsilon(3)) == pytest.approx(-1.2577, abs=1e-3)

    def test_fig2_family(self, fig2_family_n4):
        """V scales linearly and the crossing sits at x = 1."""
        assert fig2_family_n4.band_size == 4
        assert fig2_family_n4.critical == 1.0
        assert fig2_family_n4.label == "fig2"
        spec = fig2_family_n4(0.5)
        assert spec.V[0, 1] == pytest.approx(0.5 * FIG2_V_CRITICAL)
        assert not np.any(spec.U)

    @pytest.mark.parametrize(("n", "band"), [(3, 15), (4, 35)])
    def test_fig6_band(self, n, band):
        """V = 0 families count every symmetric state."""
        family = figure_family("fig6", n, 4)
        assert family.band_size == band
        assert family(1.0).v_zero

    def test_fig6_couplings(self):
        """U_ii = x (2 eps_i - E2) with E2 = -5."""
        spec = figure_family("fig6", 3, 4)(1.0)
        assert_allclose(np.diag(spec.U), [3.0, 5.0, 6.6])
        assert spec.W[0, 1] == pytest.approx(4.0)

    def test_fig7_scales_energies(self):
        """x multiplies eps while the exchange stays fixed."""
        family = figure_family("fig7", 4, 4)
        assert family.critical == 0.0
        spec = family(0.0)
        assert not np.any(spec.epsilon)
        assert spec.W[0, 3] == 1.0

    def test_fig6_spectrum_size(self):
        """The unequal spectrum stops at four levels."""
        with pytest.raises(ConfigError):
            fig6_epsilon(5)

    def test_unknown_recipe(self):
        """figure_base knows fig2, fig6 and fig7."""
        with pytest.raises(ConfigError, match="unknown recipe"):
            figure_base("fig9", 3, 4)
