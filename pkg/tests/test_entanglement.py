"""Tests for reduced density matrices and entanglement observables."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nlevel_factor.errors import ConfigError, DimensionCapError, InvariantError
from nlevel_factor.entanglement import (
    DensityMatrix,
    block_entropy,
    entanglement_profile,
    entropy,
    max_offdiagonal,
    mutual_information,
    negativity,
    occupations,
    pair_spectrum,
    partial_transpose,
    reduce,
)
from nlevel_factor.factorization import product_state


def _max_entangled(n: int) -> np.ndarray:
    psi = np.zeros(n * n)
    for level in range(n):
        psi[level + n * level] = 1.0
    return psi / math.sqrt(n)


class TestReducedStates:
    """Partial traces and site ordering."""

    def test_site_order(self):
        """Site 0 is the least significant digit."""
        psi = np.zeros(4)
        psi[2] = 1.0  # site 0 in level 0, site 1 in level 1
        assert_allclose(np.diag(reduce(psi, [0], 2).data), [1.0, 0.0])
        assert_allclose(np.diag(reduce(psi, [1], 2).data), [0.0, 1.0])
        assert reduce(psi, [0, 1], 2).data[2, 2] == pytest.approx(1.0)
        assert reduce(psi, [1, 0], 2).data[1, 1] == pytest.approx(1.0)

    def test_occupations_per_site(self):
        """Occupations of a basis state mark its levels."""
        psi = np.zeros(4)
        psi[1] = 1.0
        assert_allclose(occupations(psi, 2), [[0.0, 1.0], [1.0, 0.0]])

    def test_product_state_occupations(self):
        """Each site of a product state carries |f_i|^2."""
        psi = product_state([0.6, 0.8], 2)
        assert_allclose(occupations(psi, 2), [[0.36, 0.64], [0.36, 0.64]])

    def test_repeated_sites_rejected(self):
        """A site subset lists each site once."""
        with pytest.raises(ConfigError, match="repeated"):
            reduce(_max_entangled(2), [0, 0], 2)

    def test_state_length_checked(self):
        """The state length must be a power of n."""
        with pytest.raises(ConfigError, match="power"):
            reduce(np.ones(5) / math.sqrt(5), [0], 2)

    def test_state_norm_checked(self):
        """Reduced states come from normalized vectors."""
        with pytest.raises(ConfigError, match="unit norm"):
            reduce(np.ones(4), [0], 2)

    def test_cap(self):
        """Pair matrices count n**4 against the cap."""
        with pytest.raises(DimensionCapError):
            reduce(_max_entangled(3), [0, 1], 3, cap=10)

    def test_bad_trace_is_an_invariant_error(self):
        """DensityMatrix validates its trace."""
        with pytest.raises(InvariantError, match="trace"):
            DensityMatrix(sites=(0,), n=2, data=np.eye(2))


class TestObservables:
    """Entropy, negativity and mutual information."""

    def test_bell_state(self):
        """One ebit: S = 1, negativity 1/2, I = 2."""
        psi = _max_entangled(2)
        assert entropy(reduce(psi, [0], 2)) == pytest.approx(1.0)
        assert negativity(reduce(psi, [0, 1], 2)) == pytest.approx(0.5)
        assert mutual_information(psi, 0, 1, 2) == pytest.approx(2.0)

    def test_three_level_maximally_entangled(self):
        """S = log2 3 and negativity (n - 1)/2."""
        psi = _max_entangled(3)
        assert entropy(reduce(psi, [0], 3)) == pytest.approx(math.log2(3))
        assert negativity(reduce(psi, [0, 1], 3)) == pytest.approx(1.0)

    def test_product_state_is_unentangled(self):
        """Product states have no entropy and no negativity."""
        psi = product_state([0.6, 0.0, 0.8], 3)
        assert entropy(reduce(psi, [1], 3)) == pytest.approx(0.0, abs=1e-10)
        assert negativity(reduce(psi, [0, 2], 3)) == pytest.approx(0.0, abs=1e-10)
        assert mutual_information(psi, 0, 1, 3) == pytest.approx(0.0, abs=1e-10)

    def test_partial_transpose_either_site(self, rng):
        """Transposing either site gives the same spectrum."""
        psi = rng.normal(size=27)
        psi /= np.linalg.norm(psi)
        rho = reduce(psi, [0, 2], 3)
        assert_allclose(
            np.linalg.eigvalsh(partial_transpose(rho, 0)),
            np.linalg.eigvalsh(partial_transpose(rho, 1)),
            atol=1e-12,
        )

    def test_partial_transpose_needs_pair(self):
        """Only two-site matrices have a partial transpose here."""
        with pytest.raises(ConfigError, match="two-site"):
            partial_transpose(reduce(_max_entangled(2), [0], 2))

    def test_mutual_information_needs_two_sites(self):
        """p and q must differ."""
        with pytest.raises(ConfigError):
            mutual_information(_max_entangled(2), 1, 1, 2)

    def test_block_entropy_matches_reduced_matrix(self, rng):
        """Schmidt values give the same entropy as the reduced matrix."""
        psi = rng.normal(size=81)
        psi /= np.linalg.norm(psi)
        assert block_entropy(psi, [0, 1], 3) == pytest.approx(entropy(reduce(psi, [0, 1], 3)))

    def test_pair_spectrum_descending(self):
        """n**2 eigenvalues, largest first, summing to 1."""
        spectrum = pair_spectrum(_max_entangled(3), 0, 1, 3)
        assert spectrum.shape == (9,)
        assert spectrum[0] == pytest.approx(1.0)
        assert spectrum.sum() == pytest.approx(1.0)

    def test_max_offdiagonal(self):
        """The Bell pair matrix has coherences of 1/2."""
        assert max_offdiagonal(reduce(_max_entangled(2), [0, 1], 2)) == pytest.approx(0.5)


class TestProfile:
    """entanglement_profile rows."""

    def test_out_of_range_distances_are_nan(self):
        """On two sites only d = 1 reaches another site."""
        profile = entanglement_profile(_max_entangled(2), 2, (1, 2, 3))
        assert profile.negativities[0] == pytest.approx(0.5)
        assert math.isnan(profile.negativities[1])
        assert math.isnan(profile.mutual_informations[2])

    def test_row_layout(self):
        """S, negativities, informations, occupations, padded pair spectrum."""
        profile = entanglement_profile(_max_entangled(2), 2, (1,))
        row = profile.row(4)
        assert len(row) == 1 + 1 + 1 + 2 + 4
        assert row[0] == pytest.approx(1.0)
        assert row[3:5] == pytest.approx([0.5, 0.5])


class TestReducedStateProperties:
    """Consistency relations between reduced states of random pure states."""

    def test_partial_traces_agree(self, rng):
        """Tracing q out of rho_pq gives rho_p, and tracing p gives rho_q."""
        n, n_sites = 3, 4
        psi = rng.normal(size=n**n_sites) + 1j * rng.normal(size=n**n_sites)
        psi /= np.linalg.norm(psi)
        for p in range(n_sites):
            for q in range(n_sites):
                if p == q:
                    continue
                pair = reduce(psi, [p, q], n).data.reshape(n, n, n, n)
                assert_allclose(np.einsum("aiaj->ij", pair), reduce(psi, [p], n).data, atol=1e-12)
                assert_allclose(np.einsum("iaja->ij", pair), reduce(psi, [q], n).data, atol=1e-12)

    def test_entropy_subadditivity(self, rng):
        """S(rho_pq) <= S(rho_p) + S(rho_q)."""
        for _ in range(20):
            psi = rng.normal(size=81) + 1j * rng.normal(size=81)
            psi /= np.linalg.norm(psi)
            p, q = rng.choice(4, size=2, replace=False)
            joint = entropy(reduce(psi, [int(p), int(q)], 3))
            assert joint <= entropy(reduce(psi, [int(p)], 3)) + entropy(reduce(psi, [int(q)], 3)) + 1e-10
