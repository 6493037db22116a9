import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xycorr import finite, measures
from xycorr.errors import BadSites, DimensionTooLarge, NoCrossingFound
from xycorr.finite import ChainSpec
from xycorr.thermo import ModelPoint, factorization_field

import oracles


def spec(n, lam, gam):
    return ChainSpec(n, ModelPoint(lam, gam))


class TestHamiltonian:
    def test_two_sites_free(self):
        h = finite.build_hamiltonian(spec(2, 0, 0.5))
        assert np.allclose(h, np.diag([-2.0, 0, 0, 2]))

    def test_three_sites_free_spectrum(self):
        e = finite.diagonalize(spec(3, 0, 0.5)).energies
        assert np.allclose(e, [-3, -1, -1, -1, 1, 1, 1, 3], atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_matches_kronecker_oracle(self, n):
        rng = np.random.default_rng(n)
        for _ in range(3):
            lam, gam = rng.uniform(0, 3), rng.uniform(0, 1)
            ref = oracles.kron_hamiltonian(n, lam, gam)
            assert np.max(np.abs(finite.build_hamiltonian(spec(n, lam, gam)) - ref)) < 1e-12

    def test_degenerate_at_factorization_field(self):
        s = finite.diagonalize(spec(3, factorization_field(0.5), 0.5))
        assert s.gap < 1e-10
        assert s.ground_multiplicity == 2

    def test_too_large(self):
        with pytest.raises(DimensionTooLarge):
            ChainSpec(13, ModelPoint(1, 0.5))
        with pytest.raises(DimensionTooLarge):
            finite.parity_operator(13)

    def test_too_small(self):
        with pytest.raises(ValueError):
            ChainSpec(1, ModelPoint(1, 0.5))


class TestParity:
    def test_small(self):
        assert np.array_equal(finite.parity_operator(1), [-1.0, 1.0])
        assert np.array_equal(finite.parity_operator(2), [1.0, -1.0, -1.0, 1.0])

    def test_involution_against_oracle(self):
        n = 4
        p = finite.parity_operator(n)
        ref = np.real(np.diag(oracles.site_op(oracles.Z, 0, n)))
        for i in range(1, n):
            ref = ref * np.real(np.diag(oracles.site_op(oracles.Z, i, n)))
        assert np.array_equal(p, ref)
        assert np.all(p * p == 1)

    def test_commutes_with_hamiltonian(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            h = finite.build_hamiltonian(spec(n, rng.uniform(0, 3), rng.uniform(0, 1)))
            p = np.diag(finite.parity_operator(n))
            assert np.max(np.abs(h @ p - p @ h)) < 1e-10

    @pytest.mark.parametrize("lam", [0.3, 0.9, 1.05, 2.0])
    def test_ground_state_parity(self, lam):
        s = finite.diagonalize(spec(5, lam, 0.5))
        assert s.gap > 1e-6
        assert finite.ground_parity(s) in (1, -1)

    def test_opposite_parity_at_crossing(self):
        lam = factorization_field(0.5)
        fn = finite._GapFunction(3, 0.5)
        p = finite.parity_operator(3)
        lows = []
        for sign in (1.0, -1.0):
            base, coupling = fn.blocks[0 if sign > 0 else 1]
            lows.append(np.linalg.eigvalsh(base + lam * coupling)[0])
        assert abs(lows[0] - lows[1]) < 1e-10
        assert np.count_nonzero(p == 1) == 4


class TestDiagonalize:
    @settings(max_examples=15, deadline=None)
    @given(st.integers(2, 7), st.floats(0, 3), st.floats(0, 1))
    def test_eigen_residual_and_order(self, n, lam, gam):
        sp = spec(n, lam, gam)
        s = finite.diagonalize(sp)
        h = finite.build_hamiltonian(sp)
        assert np.max(np.abs(h @ s.states - s.states * s.energies)) < 1e-10
        assert np.allclose(s.states.conj().T @ s.states, np.eye(sp.dim), atol=1e-10)
        assert np.all(np.diff(s.energies) >= -1e-12)
        assert s.gap >= -1e-12


class TestThermalState:
    def test_infinite_temperature(self):
        s = finite.diagonalize(spec(4, 1.3, 0.5))
        rho = finite.thermal_state(s, 1e6)
        assert np.max(np.abs(rho - np.eye(16) / 16)) < 1e-4

    def test_ground_projector(self):
        s = finite.diagonalize(spec(5, 0.6, 0.5))
        rho = finite.thermal_state(s, 0)
        v = s.states[:, 0]
        assert np.allclose(rho, np.outer(v, v.conj()), atol=1e-12)
        assert finite.numerical_rank(rho) == 1

    def test_equal_mixture_on_degeneracy(self):
        s = finite.diagonalize(spec(3, factorization_field(0.5), 0.5))
        rho = finite.thermal_state(s, 0)
        assert np.trace(rho).real == pytest.approx(1)
        assert np.allclose(np.sort(np.linalg.eigvalsh(rho))[-2:], [0.5, 0.5], atol=1e-12)

    def test_low_temperature_near_projector(self):
        for lam in (0.4, 0.7, 2.5):
            s = finite.diagonalize(spec(6, lam, 0.5))
            if s.gap <= 0.1:
                continue
            diff = finite.thermal_state(s, 0.01) - finite.thermal_state(s, 0)
            assert 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum() < 1e-4

    def test_negative_temperature(self):
        with pytest.raises(ValueError):
            finite.thermal_state(finite.diagonalize(spec(2, 1, 0.5)), -1)


class TestReduceToPair:
    def test_two_sites_identity(self):
        rho = oracles.random_density(np.random.default_rng(0))
        assert np.allclose(np.asarray(finite.reduce_to_pair(rho, 0, 1)), rho, atol=1e-12)

    def test_product_state(self):
        rng = np.random.default_rng(1)
        singles = [oracles.random_density(rng, dim=2) for _ in range(4)]
        rho = singles[0]
        for s in singles[1:]:
            rho = np.kron(rho, s)
        got = np.asarray(finite.reduce_to_pair(rho, 1, 3))
        assert np.allclose(got, np.kron(singles[1], singles[3]), atol=1e-12)

    def test_vector_and_matrix_agree(self):
        s = finite.diagonalize(spec(5, 0.8, 0.4))
        v = s.states[:, 0]
        a = np.asarray(finite.reduce_to_pair(v, 0, 2))
        b = np.asarray(finite.reduce_to_pair(np.outer(v, v.conj()), 0, 2))
        assert np.allclose(a, b, atol=1e-12)

    def test_against_oracle_partial_trace(self):
        rho = oracles.random_density(np.random.default_rng(2), dim=8)
        t = rho.reshape(2, 2, 2, 2, 2, 2)
        ref = np.einsum("abcdec->abde", t).reshape(4, 4)
        assert np.allclose(np.asarray(finite.reduce_to_pair(rho, 0, 1)), ref, atol=1e-12)
        ref02 = np.einsum("abcdbf->acdf", t).reshape(4, 4)
        assert np.allclose(np.asarray(finite.reduce_to_pair(rho, 0, 2)), ref02, atol=1e-12)

    @pytest.mark.parametrize("sites", [(1, 1), (2, 1), (-1, 2), (0, 4)])
    def test_bad_sites(self, sites):
        with pytest.raises(BadSites):
            finite.reduce_to_pair(np.eye(16) / 16, *sites)

    def test_translation_invariance(self):
        s = finite.diagonalize(spec(6, 1.4, 0.6))
        rho = finite.thermal_state(s, 0.3)
        for r in (1, 2, 3):
            ref = np.asarray(finite.reduce_to_pair(rho, 0, r))
            for i in range(1, 6 - r):
                assert np.max(np.abs(np.asarray(finite.reduce_to_pair(rho, i, i + r)) - ref)) < 1e-10

    def test_pair_states_factorized_at_lambda_f(self):
        lam = factorization_field(0.5)
        states = finite.pair_states(finite.diagonalize(spec(5, lam, 0.5)), 0, [1, 2])
        assert np.max(np.abs(np.asarray(states[1]) - np.asarray(states[2]))) < 1e-8


class TestCrossings:
    @pytest.mark.parametrize("n,count", [(3, 1), (4, 2), (5, 2)])
    def test_counts_small(self, n, count):
        rep = finite.find_crossings(0.5, n)
        assert rep.count == count == finite.expected_crossing_count(n)
        assert rep.crossings == sorted(rep.crossings)
        assert abs(rep.crossings[0] - 2 / math.sqrt(3)) < 1e-6
        assert all(g < 1e-6 for g in rep.min_gaps)

    def test_first_crossing_gamma_08(self):
        rep = finite.find_crossings(0.8, 5)
        assert rep.crossings[0] == pytest.approx(1 / math.sqrt(1 - 0.64), abs=1e-6)

    @pytest.mark.slow
    @pytest.mark.parametrize("gam", [0.3, 0.5, 0.8])
    def test_counting_rule(self, gam):
        for n in range(3, 9):
            rep = finite.find_crossings(gam, n)
            assert rep.count == finite.expected_crossing_count(n)
            assert abs(rep.crossings[0] - factorization_field(gam)) < 1e-6

    def test_ising_line(self):
        with pytest.raises(NoCrossingFound):
            finite.find_crossings(1.0, 4)

    def test_range_without_crossings(self):
        with pytest.raises(NoCrossingFound):
            finite.find_crossings(0.5, 4, lambda_max=1.0)

    def test_levels(self):
        lv = finite.energy_levels(3, 0.5, [0.0, factorization_field(0.5)], levels=2)
        assert np.allclose(lv[0], [-3, -1])
        assert lv[1, 1] - lv[1, 0] < 1e-10


class TestRank:
    LAM_F = factorization_field(0.5)

    @pytest.mark.parametrize("temp", [0.02, 0.05, 0.08])
    def test_rank_two_at_low_temperature(self, temp):
        s = finite.diagonalize(spec(5, self.LAM_F, 0.5))
        assert finite.numerical_rank(finite.thermal_state(s, temp)) == 2

    def test_rank_grows(self):
        s = finite.diagonalize(spec(5, self.LAM_F, 0.5))
        assert finite.numerical_rank(finite.thermal_state(s, 0.2)) > 2

    def test_diagonal_examples(self):
        assert finite.numerical_rank(np.diag([0.5, 0.5, 0, 0])) == 2
        assert finite.numerical_rank(np.diag([1 - 1e-10, 1e-10])) == 1
        assert finite.numerical_rank(np.eye(8) / 8) == 8

    def test_pair_states_are_states(self):
        s = finite.diagonalize(spec(6, 1.1, 0.5))
        for r, st_ in finite.pair_states(s, 0.1, [1, 2, 3]).items():
            assert isinstance(st_, measures.TwoQubitState)
