"""Tests for the closed-form factorization of uniform product states."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from nlevel_factor.errors import ConfigError, FactorizationError
from nlevel_factor.factorization import (
    build_M,
    check_gs_conditions,
    degeneracy_count,
    factorization_v0,
    factorizing_spec,
    parity_flip_family,
    product_state,
    solve_onsite_energies_n3,
    solve_uniform,
    verify_eigenstate,
    xyz_factorizing_field,
    xyz_spec_params,
)
from nlevel_factor.families import FIG2_V_CRITICAL
from nlevel_factor.hamiltonian import build_full
from nlevel_factor.model import ModelSpec, make_graph
from nlevel_factor.projection import global_rotation

EPSILON = np.array([-0.5, 0.0, 0.5])
V_C = FIG2_V_CRITICAL * (np.ones((3, 3)) - np.eye(3))
FIG2_PAIR_ENERGY = -1.2577


@pytest.fixture
def fig2_solution():
    return solve_uniform(EPSILON, np.zeros(3), V_C, n_sites=4, r_total=4.0)


class TestSolveUniform:
    """Tests for solve_uniform on the equally spaced three-level model."""

    def test_pair_energy(self, fig2_solution):
        """E2 is the lowest eigenvalue of M."""
        assert fig2_solution.E2 == pytest.approx(FIG2_PAIR_ENERGY, abs=1e-3)
        assert fig2_solution.E2 == pytest.approx(np.linalg.eigvalsh(fig2_solution.M)[0])

    def test_squares_normalized_and_positive(self, fig2_solution):
        """Attractive V gives a positive f^2 with unit sum."""
        assert fig2_solution.f_squared.sum() == pytest.approx(1.0)
        assert np.all(fig2_solution.f_squared > 0)
        assert fig2_solution.f_real() is not None
        assert np.sum(np.abs(fig2_solution.f) ** 2) == pytest.approx(1.0)

    def test_ground_state_flags(self, fig2_solution):
        """W = T_required is nonnegative here."""
        assert fig2_solution.is_gs
        assert fig2_solution.sufficiency
        assert not fig2_solution.continuous_set
        assert fig2_solution.warnings == []

    def test_degeneracy_and_total_energy(self, fig2_solution):
        """Four parity-projected states, energy E2/2 per unit coordination."""
        assert fig2_solution.degeneracy == 4
        assert fig2_solution.total_energy == pytest.approx(2.0 * fig2_solution.E2)

    def test_required_couplings(self, fig2_solution):
        """T_ij = eps_i + eps_j - E2 with a zero diagonal."""
        T = fig2_solution.T_required
        assert T[0, 2] == pytest.approx(-fig2_solution.E2)
        assert T[1, 2] == pytest.approx(0.5 - fig2_solution.E2)
        assert_allclose(np.diag(T), 0.0)

    def test_to_dict_keys(self, fig2_solution):
        """Serialization carries every report field."""
        data = fig2_solution.to_dict()
        assert data["N"] == 4
        assert data["degeneracy"] == 4
        assert len(data["f"]) == 3
        assert set(data["f"][0]) == {"re", "im"}

    def test_zero_sum_eigenvector(self):
        """An eigenvector with zero component sum cannot be normalized."""
        with pytest.raises(FactorizationError, match="sums to zero"):
            solve_uniform([0.0, 0.0], [0.0, 0.0], [[0.0, -1.0], [-1.0, 0.0]], n_sites=2, r_total=2.0)

    def test_negative_squares_give_imaginary_amplitudes(self):
        """Repulsive V can make some f_i^2 negative."""
        solution = solve_uniform([0.0, 1.0], [0.0, 0.0], [[0.0, -0.5], [-0.5, 0.0]], n_sites=2, r_total=2.0)
        assert solution.f_squared[1] < 0
        assert solution.f_real() is None
        assert solution.f[1].real == pytest.approx(0.0)
        assert any("imaginary" in w for w in solution.warnings)

    def test_degenerate_M_is_a_continuous_set(self):
        """A degenerate lowest eigenvalue is flagged with a warning."""
        solution = solve_uniform([0.0, 0.0], [0.0, 0.0], np.zeros((2, 2)), n_sites=2, r_total=2.0)
        assert solution.continuous_set
        assert solution.degeneracy == 3
        assert solution.warnings

    def test_offdiagonal_u_changes_flags(self):
        """Putting the constraint into U can break the sufficiency bound."""
        U_off = np.zeros((3, 3))
        U_off[0, 2] = U_off[2, 0] = 5.0
        solution = solve_uniform(EPSILON, np.zeros(3), V_C, n_sites=2, r_total=2.0, U_offdiag=U_off)
        assert not solution.is_gs
        assert not solution.sufficiency

    def test_build_M_validates_v(self):
        """V must be symmetric."""
        with pytest.raises(ConfigError):
            build_M(EPSILON, np.zeros(3), [[0, 1, 0], [0, 0, 0], [0, 0, 0]])


class TestEigenstate:
    """The product state against the exact Hamiltonian."""

    def test_product_state_is_exact_eigenstate(self, fig2_solution):
        """H psi = E psi with E the closed-form total energy."""
        spec = factorizing_spec(fig2_solution, np.zeros(3), V_C, make_graph("ring", 4))
        psi = product_state(fig2_solution.f_real(), 4)
        energy, residual = verify_eigenstate(build_full(spec), psi)
        assert residual < 1e-9
        assert energy == pytest.approx(fig2_solution.total_energy, abs=1e-9)

    def test_product_state_is_ground_band(self, fig2_solution):
        """The lowest level equals the product energy, fourfold."""
        spec = factorizing_spec(fig2_solution, np.zeros(3), V_C, make_graph("ring", 4))
        values = np.linalg.eigvalsh(build_full(spec).data)
        assert values[0] == pytest.approx(fig2_solution.total_energy, abs=1e-9)
        assert int(np.sum(np.abs(values - values[0]) < 1e-8)) == 4

    def test_v_zero_makes_every_product_state_exact(self, rng):
        """With V = 0 any uniform f is an eigenstate."""
        eps = np.array([0.0, 1.0, 2.0])
        u_diag, T = factorization_v0(eps, -1.0)
        spec = ModelSpec.build(3, 3, eps, U=np.diag(u_diag), W=T)
        f = rng.normal(size=3)
        f /= np.linalg.norm(f)
        energy, residual = verify_eigenstate(build_full(spec), product_state(f, 3))
        assert residual < 1e-9
        assert energy == pytest.approx(-1.5)

    def test_verify_requires_unit_norm(self, fig2_point):
        """An unnormalized state is rejected."""
        with pytest.raises(ConfigError, match="unit norm"):
            verify_eigenstate(build_full(fig2_point), np.ones(81))


class TestHelpers:
    """Degeneracy counts, field formulas and product states."""

    @pytest.mark.parametrize(
        ("n", "n_sites", "v_zero", "expected"),
        [(3, 4, True, 15), (4, 4, True, 35), (3, 4, False, 4), (4, 4, False, 8), (4, 2, False, 7)],
    )
    def test_degeneracy_count(self, n, n_sites, v_zero, expected):
        """Symmetric-state and parity-sector counts."""
        assert degeneracy_count(n, n_sites, v_zero) == expected

    def test_gs_conditions(self):
        """Negative W breaks the ground-state flag."""
        W = np.array([[0.0, -0.1], [-0.1, 0.0]])
        assert check_gs_conditions(W, np.zeros((2, 2))) == (False, True)

    def test_onsite_energies_invert_required_couplings(self):
        """eps is recovered from T and E2 for three levels."""
        E2 = -1.2
        T = EPSILON[:, None] + EPSILON[None, :] - E2
        assert_allclose(solve_onsite_energies_n3(T, E2), EPSILON)

    def test_xyz_factorizing_field(self):
        """b = sqrt((Jy-Jz)(Jx-Jz)), cos(theta) = sqrt((Jy-Jz)/(Jx-Jz))."""
        b, cos_theta = xyz_factorizing_field(1.0, 0.5, 0.0)
        assert b == pytest.approx(math.sqrt(0.5))
        assert cos_theta == pytest.approx(math.sqrt(0.5))

    def test_xyz_order_enforced(self):
        """Jz above Jy has no factorizing field."""
        with pytest.raises(FactorizationError):
            xyz_factorizing_field(1.0, 0.0, 0.5)

    def test_xyz_spec_params(self):
        """Anisotropy enters V, the in-plane sum enters W."""
        params = xyz_spec_params(1.0, 0.5, 0.2, 0.3)
        assert params["V"][0, 1] == pytest.approx(0.25)
        assert params["W"][0, 1] == pytest.approx(0.75)
        assert_allclose(params["epsilon"], [-0.15, 0.15])

    def test_product_state_amplitudes(self):
        """Amplitudes multiply site by site."""
        assert_allclose(product_state([0.6, 0.8], 2), [0.36, 0.48, 0.48, 0.64])

    def test_product_state_requires_normalization(self):
        """sum |f_i|^2 must be 1."""
        with pytest.raises(ConfigError, match="sum"):
            product_state([0.6, 0.6], 2)

    def test_parity_flip_family(self):
        """Sign flips of nonzero levels give 2**(n-1) states."""
        assert len(parity_flip_family([0.6, 0.6, np.sqrt(0.28)])) == 4
        assert len(parity_flip_family([1.0, 0.0, 0.0])) == 1


def _mixed_couplings(n: int) -> np.ndarray:
    """Pair hopping with one repulsive entry for n >= 3."""
    V = 0.5 * (np.ones((n, n)) - np.eye(n))
    if n == 2:
        V *= 0.8
    else:
        V[0, n - 1] = V[n - 1, 0] = -0.05
    return V


class TestExactnessAcrossLattices:
    """The closed form against exact diagonalization for every size and graph."""

    @pytest.mark.parametrize("graph_kind", ["ring", "open_chain", "all_to_all"])
    @pytest.mark.parametrize("n_sites", [2, 3, 4])
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_product_state_is_degenerate_ground_state(self, n, n_sites, graph_kind):
        """Residual, ground energy and ground multiplicity match the solution."""
        graph = make_graph(graph_kind, n_sites)
        eps = np.linspace(-0.5, 0.5, n)
        V = _mixed_couplings(n)
        solution = solve_uniform(eps, np.zeros(n), V, n_sites=n_sites, r_total=graph.r_total)
        assert solution.is_gs
        f = solution.f_real()
        assert f is not None

        H = build_full(factorizing_spec(solution, np.zeros(n), V, graph))
        energy, residual = verify_eigenstate(H, product_state(f, n_sites))
        assert residual < 1e-10
        assert energy == pytest.approx(solution.total_energy, abs=1e-9)

        values = np.linalg.eigvalsh(H.data)
        assert values[0] == pytest.approx(solution.total_energy, abs=1e-9)
        assert int(np.sum(values - values[0] < 1e-8)) == solution.degeneracy

    def test_small_system_count(self):
        """Four levels on two sites give seven ground states, not eight."""
        graph = make_graph("ring", 2)
        V = _mixed_couplings(4)
        solution = solve_uniform(np.linspace(-0.5, 0.5, 4), np.zeros(4), V, n_sites=2, r_total=graph.r_total)
        assert solution.degeneracy == 7
        values = np.linalg.eigvalsh(build_full(factorizing_spec(solution, np.zeros(4), V, graph)).data)
        assert int(np.sum(values - values[0] < 1e-8)) == 7


class TestLatticeArguments:
    """solve_uniform needs the lattice size and coordination."""

    def test_lattice_arguments_are_required(self):
        """Omitting n_sites or r_total is a TypeError."""
        with pytest.raises(TypeError):
            solve_uniform(EPSILON, np.zeros(3), V_C)  # type: ignore[call-arg]
        with pytest.raises(TypeError):
            solve_uniform(EPSILON, np.zeros(3), V_C, n_sites=4)  # type: ignore[call-arg]

    @pytest.mark.parametrize(("n_sites", "r_total"), [(1, 1.0), (4, 0.0), (4, -2.0)])
    def test_invalid_lattice_rejected(self, n_sites, r_total):
        """N < 2 or a non-positive coordination sum is a config error."""
        with pytest.raises(ConfigError, match="r_total"):
            solve_uniform(EPSILON, np.zeros(3), V_C, n_sites=n_sites, r_total=r_total)

    def test_total_energy_follows_r_total(self):
        """total_energy = E2 r_total / 2 for chains and rings alike."""
        for graph_kind in ("ring", "open_chain", "all_to_all"):
            graph = make_graph(graph_kind, 4)
            solution = solve_uniform(EPSILON, np.zeros(3), V_C, n_sites=4, r_total=graph.r_total)
            assert solution.total_energy == pytest.approx(0.5 * solution.E2 * graph.r_total)
            assert solution.n_sites == 4


class TestTwoLevelXYZ:
    """The n = 2 mapping of the XYZ chain in a transverse field."""

    @staticmethod
    def _solve(Jx: float, Jy: float, Jz: float):
        b, cos_theta = xyz_factorizing_field(Jx, Jy, Jz)
        params = xyz_spec_params(Jx, Jy, Jz, b)
        U_off = params["U"].copy()
        np.fill_diagonal(U_off, 0.0)
        solution = solve_uniform(
            params["epsilon"], np.diag(params["U"]), params["V"], n_sites=2, r_total=2.0, U_offdiag=U_off
        )
        return solution, params, cos_theta

    def test_field_and_angle_for_random_couplings(self, rng):
        """At the factorizing field the constraint is U_12 + W_12 and f^2 gives cos(theta)."""
        for _ in range(100):
            Jz, Jy, Jx = np.sort(rng.uniform(-1.0, 1.0, 3))
            solution, params, cos_theta = self._solve(float(Jx), float(Jy), float(Jz))
            expected = params["U"][0, 1] + params["W"][0, 1]
            assert solution.T_required[0, 1] == pytest.approx(expected, abs=1e-10)
            assert abs(solution.f_squared[0] - solution.f_squared[1]) == pytest.approx(cos_theta, abs=1e-10)

    @pytest.mark.parametrize(
        ("couplings", "field", "cos_theta"),
        [((1.0, 1.0, 0.0), 1.0, 1.0), ((1.0, 0.5, 0.5), 0.0, 0.0)],
    )
    def test_limiting_cases(self, couplings, field, cos_theta):
        """The isotropic XX limit aligns along the field; Jy = Jz needs no field."""
        b, cos = xyz_factorizing_field(*couplings)
        assert b == pytest.approx(field)
        assert cos == pytest.approx(cos_theta)
        solution, params, _ = self._solve(*couplings)
        assert solution.T_required[0, 1] == pytest.approx(params["U"][0, 1] + params["W"][0, 1], abs=1e-10)
        assert abs(solution.f_squared[0] - solution.f_squared[1]) == pytest.approx(cos_theta, abs=1e-10)

    def test_heisenberg_form_accepts_any_aligned_state(self, rng):
        """With V = 0 every rotated, complex aligned state is an eigenstate."""
        eps = np.array([0.0, 0.6])
        u_diag, T = factorization_v0(eps, -1.0)
        spec = ModelSpec.build(2, 4, eps, U=np.diag(u_diag), W=T)
        H = build_full(spec)
        for _ in range(10):
            theta, phi = rng.uniform(0.0, math.pi), rng.uniform(0.0, 2.0 * math.pi)
            f = np.array([math.cos(theta / 2.0), np.exp(1j * phi) * math.sin(theta / 2.0)])
            energy, residual = verify_eigenstate(H, product_state(f, 4))
            assert residual < 1e-10
            assert energy == pytest.approx(-2.0, abs=1e-10)


class TestRotationInvariance:
    """Uniform single-site rotations at V = 0."""

    def test_rotated_product_state_stays_exact(self):
        """u on every site keeps a V = 0 factorized state an eigenstate."""
        eps = np.array([-0.4, 0.1, 0.7])
        u_diag, T = factorization_v0(eps, -1.5)
        spec = ModelSpec.build(3, 3, eps, U=np.diag(u_diag), W=T)
        H = build_full(spec)
        psi = product_state(np.array([0.6, 0.0, 0.8]), 3)
        for seed in range(5):
            u = unitary_group.rvs(3, random_state=seed)
            energy, residual = verify_eigenstate(H, global_rotation(psi, u, 3))
            assert residual < 1e-9
            assert energy == pytest.approx(0.5 * -1.5 * spec.graph.r_total, abs=1e-9)

    def test_su_n_point_eigenvectors_rotate_into_eigenvectors(self):
        """At eps = 0 with U_ii = W_ij every eigenvector survives a global rotation."""
        spec = ModelSpec.build(3, 3, np.zeros(3), U=np.eye(3), W=np.ones((3, 3)) - np.eye(3))
        H = build_full(spec)
        values, vectors = np.linalg.eigh(H.data)
        u = unitary_group.rvs(3, random_state=7)
        for k in (0, 5, 13, 26):
            energy, residual = verify_eigenstate(H, global_rotation(vectors[:, k], u, 3))
            assert residual < 1e-9
            assert energy == pytest.approx(values[k], abs=1e-9)
