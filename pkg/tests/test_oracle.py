import itertools

import numpy as np
import pytest

from dissipative_ssh import dynamics as dy
from dissipative_ssh import oracle as ed
from dissipative_ssh.model import site_hopping_matrix
from dissipative_ssh.thirdq import liouvillian_gap, liouvillian_spectrum, pairing_distance, rapidity_spectrum

from conftest import chain


def subset_sums(m):
    return liouvillian_spectrum(rapidity_spectrum(m)).expanded()


class TestHamiltonian:
    def test_many_body_levels_are_mode_sums(self):
        m = chain(0.5, 2)
        eps = np.linalg.eigvalsh(site_hopping_matrix(0.5, 1.0, 2))
        sums = [sum(c) for r in range(5) for c in itertools.combinations(eps, r)]
        np.testing.assert_allclose(np.linalg.eigvalsh(ed.many_body_hamiltonian(m)), np.sort(sums), atol=1e-13)

    def test_anticommutation(self):
        c = ed.fermion_operators(3)
        for a, b in itertools.product(range(3), repeat=2):
            np.testing.assert_array_equal(c[a] @ c[b].T + c[b].T @ c[a], np.eye(8) * (a == b))
            np.testing.assert_array_equal(c[a] @ c[b] + c[b] @ c[a], 0)


class TestSuperoperator:
    def test_closed_system(self):
        m = chain(0.7, 1)
        s = ed.full_liouvillian_matrix(m)
        e = np.linalg.eigvalsh(ed.many_body_hamiltonian(m))
        expected = [1j * (a - b) for a in e for b in e]
        lam = ed.ed_spectrum(s)
        assert np.abs(lam.real).max() < 1e-12
        assert pairing_distance(lam, expected) < 1e-12

    @pytest.mark.parametrize(
        "left, right",
        [(("loss", 0.2), ("loss", 0.2)), (("loss", 0.7), ("gain", 0.3)), (("gain", 1.5), None), (None, None)],
    )
    def test_matches_subset_sums_n2(self, left, right):
        m = chain(0.5, 2, left, right)
        assert pairing_distance(ed.ed_spectrum(ed.full_liouvillian_matrix(m)), subset_sums(m)) < 1e-8

    @pytest.mark.slow
    def test_matches_subset_sums_n3(self):
        m = chain(0.5, 3, ("loss", 0.2), ("gain", 0.9))
        assert pairing_distance(ed.ed_spectrum(ed.full_liouvillian_matrix(m)), subset_sums(m)) < 1e-8

    def test_gap_matches_ed(self):
        m = chain(0.5, 2, ("loss", 0.2), ("loss", 0.2))
        lam = ed.ed_spectrum(ed.full_liouvillian_matrix(m))
        re = lam.real[lam.real < -1e-10]
        assert abs(-re.max() - liouvillian_gap(rapidity_spectrum(m))) < 1e-8

    def test_trace_preserving(self):
        s = ed.full_liouvillian_matrix(chain(0.5, 2, ("loss", 0.4), ("gain", 0.8)))
        ident = np.eye(s.dim).reshape(-1)
        assert np.abs(ident @ s.l_mat).max() < 1e-12  # Tr L[rho] = 0 for every rho
        assert abs(np.trace((s.l_mat @ ident).reshape(s.dim, s.dim))) < 1e-12

    def test_unique_steady_state(self):
        lam = ed.ed_spectrum(ed.full_liouvillian_matrix(chain(0.5, 2, ("loss", 0.4), ("gain", 0.8))))
        assert np.count_nonzero(np.abs(lam) < 1e-9) == 1

    def test_dark_state_degeneracy(self):
        # t1 -> 0: the decoupled right part of the chain never feels the bath
        lam = ed.ed_spectrum(ed.full_liouvillian_matrix(chain(0.0, 2, ("loss", 1.0))))
        assert np.count_nonzero(np.abs(lam) < 1e-9) > 1

    def test_conjugation_symmetry(self):
        lam = ed.ed_spectrum(ed.full_liouvillian_matrix(chain(0.3, 2, ("loss", 1.1), ("gain", 0.2))))
        assert pairing_distance(lam, lam.conj()) < 1e-10

    def test_jump_factor_mutation_detected(self):
        m = chain(0.5, 2, ("loss", 0.7), ("gain", 0.3))
        wrong = ed.ed_spectrum(ed.full_liouvillian_matrix(m, jump_factor=1.0))
        assert pairing_distance(wrong, subset_sums(m)) > 1e-2

    def test_cap(self):
        with pytest.raises(ed.OracleCapError):
            ed.full_liouvillian_matrix(chain(0.5, 4, ("loss", 1.0)))


class TestStatesAndDynamics:
    def test_initial_correlation_matrix(self):
        rho = ed.fully_occupied_density_matrix(4)
        np.testing.assert_allclose(ed.correlation_from_density_matrix(rho, 4), dy.initial_fully_occupied(2).gamma, atol=1e-15)

    @pytest.mark.parametrize("right", [("loss", 0.2), ("gain", 0.2)])
    def test_density_matches_correlation_evolution(self, right):
        m = chain(0.5, 2, ("loss", 0.2), right)
        t = [0.0, 0.5, 1.0, 5.0]
        ref = ed.ed_evolve(ed.fully_occupied_density_matrix(4), ed.full_liouvillian_matrix(m), t)
        tr = dy.density_trajectory(m, t, profiles=True)
        np.testing.assert_allclose(tr.density, ref.density, atol=1e-6)
        np.testing.assert_allclose(tr.profiles, ref.profiles, atol=1e-6)
        assert ref.density[0] == 1.0

    def test_steady_state_matches_null_vector(self):
        m = chain(0.5, 2, ("loss", 0.5), ("gain", 0.5))
        rho = ed.ed_steady_state(ed.full_liouvillian_matrix(m))
        g = ed.correlation_from_density_matrix(rho, 4)
        assert np.abs(g - dy.steady_state(m).gamma).max() < 1e-8

    def test_long_time_density(self):
        m = chain(0.5, 2, ("loss", 0.5), ("gain", 0.5))
        ref = ed.ed_evolve(ed.fully_occupied_density_matrix(4), ed.full_liouvillian_matrix(m), [400.0])
        assert abs(ref.density[0] - dy.density(dy.steady_state(m))) < 1e-6

    def test_evolution_invariants(self):
        m = chain(0.8, 2, ("loss", 1.3), ("gain", 0.6))
        tr = ed.ed_evolve(ed.fully_occupied_density_matrix(4), ed.full_liouvillian_matrix(m), dy.log_time_grid(1e-2, 1e2, 12))
        assert np.abs(tr.traces - 1).max() < 1e-10
        assert tr.hermiticity.max() < 1e-10
        assert tr.min_eigenvalues.min() > -1e-8

    def test_rejects_descending_grid(self):
        s = ed.full_liouvillian_matrix(chain(0.5, 1, ("loss", 1.0)))
        with pytest.raises(ValueError):
            ed.ed_evolve(ed.fully_occupied_density_matrix(2), s, [1.0, 0.0])
