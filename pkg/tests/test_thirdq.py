import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dissipative_ssh.model import build_majorana_hamiltonian
from dissipative_ssh.thirdq import (
    EnumerationBudgetError,
    build_reduced_matrix,
    build_shape_matrix,
    classify_bound_states,
    gap_from_spectrum,
    liouvillian_gap,
    liouvillian_spectrum,
    pairing_distance,
    rapidities_from_shape_matrix,
    rapidity_spectrum,
    stripe_decompose,
)

from conftest import chain

# Pinned from a run of this code: non-bound rapidities at t1=0.1, N=50,
# gamma=0.2 vs 5 on both ends (measured 3.70e-4).
RAPIDITY_DUALITY_PIN = 4.0e-4

kinds = st.sampled_from(["loss", "gain"])


@st.composite
def small_models(draw, max_cells=3):
    n = draw(st.integers(1, max_cells))
    t1 = draw(st.floats(0.05, 4.0))
    gl = draw(st.floats(0.0, 6.0))
    gr = draw(st.floats(0.0, 6.0))
    return chain(t1, n, (draw(kinds), gl), (draw(kinds), gr), t2=draw(st.floats(0.2, 3.0)))


class TestShapeMatrix:
    def test_closed_system(self):
        m = chain(0.7, 3)
        x = build_shape_matrix(m).x
        np.testing.assert_allclose(x, (-2j * build_majorana_hamiltonian(m).h).real)
        assert np.abs(np.linalg.eigvals(x).real).max() < 1e-12

    def test_kind_swap_invariance(self):
        a = build_shape_matrix(chain(0.3, 4, ("loss", 0.2), ("loss", 0.2))).x
        b = build_shape_matrix(chain(0.3, 4, ("gain", 0.2), ("gain", 0.2))).x
        np.testing.assert_array_equal(a, b)

    def test_two_by_two_closed_form(self):
        # P = [[i, 1], [1, 0]] -> E = (i +- sqrt(3)) / 2; alpha = -i E / 2, each twice
        e = np.array([(1j + np.sqrt(3)) / 2, (1j - np.sqrt(3)) / 2])
        alpha = np.linalg.eigvals(build_shape_matrix(chain(1.0, 1, left=("loss", 1.0))).x)
        assert pairing_distance(alpha, np.repeat(-0.5j * e, 2)) < 1e-12

    @given(small_models(max_cells=5))
    def test_shape_matrix_route_matches_reduced(self, m):
        spec = rapidity_spectrum(m, classify=False)
        assert pairing_distance(rapidities_from_shape_matrix(m), spec.values) < 1e-8 * max(1, np.abs(spec.distinct).max())

    @given(small_models(), kinds, kinds)
    def test_invariant_under_kind_swaps(self, m, kl, kr):
        other = chain(m.t1, m.n_cells, (kl, m.gamma_left), (kr, m.gamma_right), t2=m.t2)
        np.testing.assert_array_equal(build_shape_matrix(m).x, build_shape_matrix(other).x)


class TestReducedMatrix:
    def test_single_cell(self):
        p = build_reduced_matrix(0.3, 1.0, 0.4, 0.9, 1).p
        np.testing.assert_array_equal(p, [[0.4j, 0.3], [0.3, 0.9j]])

    def test_pattern(self):
        p = build_reduced_matrix(0.5, 1.0, 0.0, 0.0, 2).p
        np.testing.assert_array_equal(np.diag(p, 1), [0.5, 1.0, 0.5])
        np.testing.assert_array_equal(p, p.conj().T)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            build_reduced_matrix(1, 1, 0, 0, 0)

    @given(st.integers(1, 30), st.floats(-4, 4), st.floats(0.1, 4), st.floats(0, 6), st.floats(0, 6))
    def test_sign_flip_doubling(self, n, t1, t2, gl, gr):
        a = np.linalg.eigvals(build_reduced_matrix(t1, t2, gl, gr, n).p)
        b = np.linalg.eigvals(build_reduced_matrix(-t1, -t2, gl, gr, n).p)
        assert pairing_distance(a, b) < 1e-10 * max(1.0, np.abs(a).max())


class TestRapidities:
    def test_symmetric_two_by_two(self):
        g = 0.8
        spec = rapidity_spectrum(chain(1.0, 1, ("loss", g), ("loss", g)), classify=False)
        assert pairing_distance(spec.distinct, [1j * g + 1, 1j * g - 1]) < 1e-14
        assert spec.values.size == 4

    def test_vectors_normalized_and_phase_fixed(self):
        spec = rapidity_spectrum(chain(0.4, 5, ("loss", 0.3), ("gain", 2.0)))
        v = spec.vectors
        np.testing.assert_allclose(np.linalg.norm(v, axis=0), 1.0, atol=1e-14)
        lead = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
        assert np.abs(lead.imag).max() < 1e-14 and (lead.real > 0).all()
        p = build_reduced_matrix(0.4, 1.0, 0.3, 2.0, 5).p
        np.testing.assert_allclose(p @ v, v * spec.distinct, atol=1e-12)

    def test_nontrivial_weak_has_degenerate_pair(self):
        spec = rapidity_spectrum(chain(0.1, 6, ("loss", 0.2), ("loss", 0.2)))
        assert spec.n_bound == 2
        e = spec.distinct[spec.bound]
        assert abs(e[0] - e[1]) < 1e-3 * abs(e[0])

    @pytest.mark.parametrize("gamma, count", [(0.2, 0), (5.0, 4)])
    def test_trivial_phase_bound_states(self, gamma, count):
        spec = rapidity_spectrum(chain(10.0, 6, ("loss", gamma), ("loss", gamma)))
        assert spec.n_bound == count

    def test_trivial_strong_has_two_groups(self):
        spec = rapidity_spectrum(chain(10.0, 6, ("loss", 5.0), ("loss", 5.0)))
        e = np.sort_complex(spec.distinct[spec.bound])
        # two near-degenerate pairs, well separated from each other
        assert abs(e[0] - e[1]) < 1e-2 and abs(e[2] - e[3]) < 1e-2
        assert abs(e[0] - e[2]) > 1.0

    def test_closed_chain_has_no_bound_states(self):
        assert rapidity_spectrum(chain(1.5, 40)).n_bound == 0

    def test_dark_state_flagged(self):
        spec = rapidity_spectrum(chain(0.5, 50, ("loss", 2.0)))
        dark = spec.bound & (np.abs(spec.distinct) < 1e-8)
        assert np.count_nonzero(dark) == 1

    def test_thresholds_configurable(self):
        spec = rapidity_spectrum(chain(10.0, 6, ("loss", 5.0), ("loss", 5.0)), classify=False)
        assert classify_bound_states(spec, ipr_threshold=1.1).n_bound == 0
        assert classify_bound_states(spec, boundary_weight=1.1).n_bound == 0

    def test_duality_of_extended_rapidities(self):
        def extended(gamma, n):
            s = rapidity_spectrum(chain(0.1, n, ("loss", gamma), ("loss", gamma)))
            return s.distinct[~s.bound]

        d50 = pairing_distance(extended(0.2, 50), extended(5.0, 50))
        d10 = pairing_distance(extended(0.2, 10), extended(5.0, 10))
        assert d50 < RAPIDITY_DUALITY_PIN
        assert d50 < d10


class TestLiouvillianSpectrum:
    def test_empty_sum_present(self):
        ls = liouvillian_spectrum(rapidity_spectrum(chain(0.5, 2, ("loss", 0.2))))
        assert ls.size == 2 ** 8
        assert np.min(np.abs(ls.values)) == 0.0

    def test_multiplicity_matches_binary_enumeration(self):
        spec = rapidity_spectrum(chain(0.6, 2, ("loss", 0.4), ("gain", 1.1)))
        ls = liouvillian_spectrum(spec)
        brute = [1j * sum(c) for r in range(9) for c in itertools.combinations(spec.values, r)]
        assert pairing_distance(ls.expanded(), brute) < 1e-12

    def test_budget_error_names_cap(self):
        spec = rapidity_spectrum(chain(0.5, 7, ("loss", 0.2)))
        with pytest.raises(EnumerationBudgetError) as exc:
            liouvillian_spectrum(spec)
        assert exc.value.required == 3 ** 14
        assert exc.value.suggested_max_terms is not None
        partial = liouvillian_spectrum(spec, max_terms=exc.value.suggested_max_terms)
        assert not partial.complete and partial.values.size <= 3 ** 12

    @given(small_models())
    def test_re_lambda_nonpositive(self, m):
        ls = liouvillian_spectrum(rapidity_spectrum(m))
        assert ls.values.real.max() <= 1e-10
        assert np.any(ls.values == 0)

    @given(small_models())
    def test_single_excitation_gap_equals_full(self, m):
        spec = rapidity_spectrum(m)
        g = liouvillian_gap(spec)
        if g > 1e-8:
            assert abs(g - gap_from_spectrum(liouvillian_spectrum(spec), zero=1e-12 * np.abs(spec.distinct.imag).max())) < 1e-10

    def test_gap_full_spectrum_n6(self):
        spec = rapidity_spectrum(chain(2.0, 6, ("loss", 0.2), ("gain", 0.2)))
        assert abs(liouvillian_gap(spec) - gap_from_spectrum(liouvillian_spectrum(spec))) < 1e-12

    def test_closed_gap_zero(self):
        assert liouvillian_gap(rapidity_spectrum(chain(0.5, 4))) == 0.0


class TestStripes:
    def test_counts(self):
        def n_stripes(t1, g):
            spec = rapidity_spectrum(chain(t1, 6, ("loss", g), ("loss", g)))
            return len(stripe_decompose(liouvillian_spectrum(spec)))

        assert n_stripes(10.0, 5.0) == 9
        assert n_stripes(10.0, 0.2) == 1
        assert n_stripes(0.1, 0.2) == n_stripes(0.1, 5.0) == 5

    def test_stripe_zero_is_rightmost(self):
        spec = rapidity_spectrum(chain(10.0, 6, ("loss", 5.0), ("loss", 5.0)))
        stripes = stripe_decompose(liouvillian_spectrum(spec))
        assert stripes[0].index == 0 and stripes[0].re_max == 0.0
        maxes = [s.re_max for s in stripes]
        assert maxes == sorted(maxes, reverse=True)
        assert sum(s.count for s in stripes) == 2 ** 24

    def test_rightmost_stripe_nearly_dual(self):
        def stripe0(g):
            spec = rapidity_spectrum(chain(0.1, 6, ("loss", g), ("loss", g)))
            return stripe_decompose(liouvillian_spectrum(spec))[0]

        a, b = stripe0(0.2), stripe0(5.0)
        assert a.count == b.count
        assert a.re_min == pytest.approx(b.re_min, rel=1e-3)
        assert a.im_max == pytest.approx(b.im_max, rel=1e-2)


def test_pairing_distance_basics():
    assert pairing_distance([1, 2, 3], [3, 1, 2]) == 0.0
    assert pairing_distance([1, 2], [1]) == np.inf
    assert pairing_distance([0, 1], [0.1, 1.0]) == pytest.approx(0.1)
