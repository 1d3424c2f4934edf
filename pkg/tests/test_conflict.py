import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conflict_volterra.conflict import (
    LimitClass,
    attractive_limit,
    closed_form_repulsive,
    difference_profile,
    iterate_conflict,
    prop1_vanishes,
    prop2_vanishes,
    sigma_rho,
)
from conflict_volterra.dynamics import conflict_compose
from conflict_volterra.errors import DegenerateProfileError, UndeterminedSupportError
from oracles import closed_form_np


def stochastic(n):
    return st.lists(st.floats(0.02, 1.0), min_size=n, max_size=n).map(lambda v: tuple(x / math.fsum(v) for x in v))


# -- difference profile and closed form -----------------------------------------------


def test_difference_profile_partition():
    prof = difference_profile((0.5, 0.3, 0.2), (0.48, 0.34, 0.18))
    np.testing.assert_allclose(prof.d, (0.02, -0.04, 0.02), atol=1e-15)
    assert prof.n_plus == {0, 2} and prof.n_minus == {1}
    assert prof.D == pytest.approx(0.04, abs=1e-15)


def test_difference_profile_identical_vectors():
    with pytest.raises(DegenerateProfileError):
        difference_profile((0.4, 0.6), (0.4, 0.6))


def test_closed_form_three_positions():
    # [DERIVED] d = (0.02, -0.04, 0.02), D = 0.04
    p_inf, r_inf = closed_form_repulsive((0.5, 0.3, 0.2), (0.48, 0.34, 0.18))
    np.testing.assert_allclose(p_inf, (0.5, 0.0, 0.5), atol=1e-12)
    np.testing.assert_allclose(r_inf, (0.0, 1.0, 0.0), atol=1e-12)


def test_closed_form_rejects_orthogonal_start():
    with pytest.raises(ValueError):
        closed_form_repulsive((1.0, 0.0), (0.0, 1.0))


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_closed_form_matches_numpy_oracle(data):
    n = data.draw(st.integers(2, 8))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    assume(max(abs(a - b) for a, b in zip(p, r)) > 1e-6)
    got = closed_form_repulsive(p, r)
    want = closed_form_np(p, r)
    np.testing.assert_allclose(got[0], want[0], atol=1e-12)
    np.testing.assert_allclose(got[1], want[1], atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_closed_form_is_fixed_by_repulsive_step(data):
    n = data.draw(st.integers(2, 6))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    assume(max(abs(a - b) for a, b in zip(p, r)) > 1e-6)
    p_inf, r_inf = closed_form_repulsive(p, r)
    p2, r2, _ = conflict_compose(p_inf, r_inf, 1.0)
    np.testing.assert_allclose(p2, p_inf, atol=1e-14)
    np.testing.assert_allclose(r2, r_inf, atol=1e-14)


# -- iteration -----------------------------------------------------------------------


def test_iterate_repulsive_reaches_closed_form():
    rep = iterate_conflict((0.5, 0.3, 0.2), (0.48, 0.34, 0.18), 1.0)
    assert rep.converged
    assert rep.classification is LimitClass.ORTHOGONAL
    np.testing.assert_allclose(rep.p_limit, (0.5, 0.0, 0.5), atol=1e-6)
    np.testing.assert_allclose(rep.r_limit, (0.0, 1.0, 0.0), atol=1e-6)
    assert rep.final_inner <= 1e-8


def test_iterate_repulsive_identical_vectors_flatten():
    # p = r stays equal and is pushed toward the uniform vector
    rep = iterate_conflict((0.4, 0.6), (0.4, 0.6), 1.0)
    assert rep.classification is LimitClass.EQUAL
    np.testing.assert_allclose(rep.p_limit, (0.5, 0.5), atol=1e-9)
    np.testing.assert_allclose(rep.r_limit, (0.5, 0.5), atol=1e-9)


def test_iterate_attractive_two_positions():
    # coordinate 0 has the larger sum and product, so coordinate 1 dies
    rep = iterate_conflict((0.6, 0.4), (0.5, 0.5), -1.0)
    assert rep.classification is LimitClass.EQUAL
    np.testing.assert_allclose(rep.p_limit, (1.0, 0.0), atol=1e-9)
    np.testing.assert_allclose(rep.r_limit, (1.0, 0.0), atol=1e-9)


def test_iterate_reports_non_convergence():
    rep = iterate_conflict((0.5, 0.3, 0.2), (0.48, 0.34, 0.18), 1.0, max_iter=3)
    assert not rep.converged and rep.iterations == 3


def test_iterate_rejects_bad_tol():
    with pytest.raises(ValueError):
        iterate_conflict((0.5, 0.5), (0.4, 0.6), 1.0, tol=0.0)


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_repulsive_invariant_difference_direction(data):
    # d / D is unchanged by every alpha = 1 step
    n = data.draw(st.integers(2, 5))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    assume(max(abs(a - b) for a, b in zip(p, r)) > 1e-3)
    prof0 = difference_profile(p, r)
    for _ in range(5):
        p, r, _ = conflict_compose(p, r, 1.0)
    prof = difference_profile(p, r)
    np.testing.assert_allclose(np.array(prof.d) / prof.D, np.array(prof0.d) / prof0.D, atol=1e-12)


# -- sigma / rho and the vanishing criteria ----------------------------------------------


def test_sigma_rho_values():
    sr = sigma_rho((0.6, 0.4), (0.5, 0.5), 0)
    assert sr.sigma == pytest.approx(1.1) and sr.rho == pytest.approx(0.3)
    with pytest.raises(IndexError):
        sigma_rho((0.6, 0.4), (0.5, 0.5), 2)


def test_prop_predicates_reject_equal_indices():
    with pytest.raises(ValueError):
        prop1_vanishes((0.6, 0.4), (0.5, 0.5), 1, 1)
    with pytest.raises(ValueError):
        prop2_vanishes((0.6, 0.4), (0.5, 0.5), 0, 0)


def test_prop1_dominance():
    p, r = (0.6, 0.4), (0.5, 0.5)
    assert prop1_vanishes(p, r, 0, 1)
    assert not prop1_vanishes(p, r, 1, 0)


def test_prop1_and_prop2_are_exclusive_on_same_pair():
    p, r = (0.6, 0.3, 0.1), (0.05, 0.3, 0.65)
    for i, k in itertools.permutations(range(3), 2):
        assert not (prop1_vanishes(p, r, i, k) and prop2_vanishes(p, r, i, k))


def _grid_prop2_instances(step=0.05):
    vals = np.round(np.arange(step, 1.0, step), 10)
    simplex = [(a, b, round(1 - a - b, 10)) for a in vals for b in vals if 1 - a - b > step / 2]
    for p in simplex:
        for r in simplex:
            for i, k in itertools.permutations(range(3), 2):
                if prop2_vanishes(p, r, i, k):
                    yield p, r, i, k


def test_prop2_instance_found_by_grid_search():
    # [DERIVED] brute-force search over a 0.05 grid; the first hit is frozen below
    first = next(_grid_prop2_instances())
    p, r, i, k = first
    assert (tuple(p), tuple(r), i, k) == ((0.05, 0.1, 0.85), (0.2, 0.75, 0.05), 1, 2)
    rep = iterate_conflict(p, r, -1.0)
    assert rep.p_limit[k] < 1e-6 and rep.r_limit[k] < 1e-6


def test_prop2_frozen_instance():
    # coordinate 0 has the larger sum but the smaller product and still vanishes
    p, r = (0.6, 0.3, 0.1), (0.05, 0.3, 0.65)
    assert prop2_vanishes(p, r, 1, 0)
    assert not prop1_vanishes(p, r, 1, 0)
    rep = iterate_conflict(p, r, -1.0)
    assert rep.p_limit[0] < 1e-6 and rep.r_limit[0] < 1e-6


def test_prop2_grid_instances_all_vanish():
    hits = list(itertools.islice(_grid_prop2_instances(0.1), 200))
    assert hits
    for p, r, i, k in hits:
        rep = iterate_conflict(p, r, -1.0)
        assert rep.p_limit[k] < 1e-6 and rep.r_limit[k] < 1e-6, (p, r, i, k)


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_prop1_coordinates_vanish(data):
    n = data.draw(st.integers(2, 6))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    rep = iterate_conflict(p, r, -1.0)
    for i, k in itertools.permutations(range(n), 2):
        if prop1_vanishes(p, r, i, k):
            assert rep.p_limit[k] < 1e-6 and rep.r_limit[k] < 1e-6


# -- ratio monotonicity ----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_rho_ratio_nondecreasing_under_attraction(data):
    # with sigma_i >= sigma_k and rho_i >= rho_k, rho_i / rho_k never shrinks
    n = data.draw(st.integers(2, 5))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    i, k = data.draw(st.sampled_from(list(itertools.permutations(range(n), 2))))
    si, sk = sigma_rho(p, r, i), sigma_rho(p, r, k)
    assume(si.sigma >= sk.sigma and si.rho >= sk.rho)
    p2, r2, _ = conflict_compose(p, r, -1.0)
    ti, tk = sigma_rho(p2, r2, i), sigma_rho(p2, r2, k)
    assert ti.rho / tk.rho >= si.rho / sk.rho * (1 - 1e-12)
    # both orderings survive the step
    assert ti.sigma >= tk.sigma * (1 - 1e-12) and ti.rho >= tk.rho * (1 - 1e-12)


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_componentwise_dominance_ratio_grows(data):
    n = data.draw(st.integers(2, 5))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    i, k = data.draw(st.sampled_from(list(itertools.permutations(range(n), 2))))
    assume(p[i] >= p[k] and r[i] >= r[k])
    p2, r2, _ = conflict_compose(p, r, -1.0)
    assert p2[i] / p2[k] >= p[i] / p[k] * (1 - 1e-12)
    assert r2[i] / r2[k] >= r[i] / r[k] * (1 - 1e-12)


def test_single_vector_ratio_can_shrink_under_sigma_rho_dominance():
    # sigma/rho dominance of i over k does not make r_i / r_k grow in one step
    p, r = (0.3, 0.4, 0.3), (0.6, 0.2, 0.2)
    assert prop1_vanishes(p, r, 0, 1)
    p2, r2, _ = conflict_compose(p, r, -1.0)
    assert r2[0] / r2[1] < r[0] / r[1]
    assert p2[0] / p2[1] > p[0] / p[1]


# -- attractive limit -------------------------------------------------------------------


def test_attractive_limit_generic_single_survivor():
    uniform, sets = attractive_limit((0.6, 0.4), (0.5, 0.5))
    assert uniform == (1.0, 0.0)
    assert sets.s0 == {1} and sets.s_inf == {0} and sets.m == 1


def test_attractive_limit_symmetric_pair_keeps_two():
    # swapping positions 0 and 1 maps the pair to itself, so neither can win
    uniform, sets = attractive_limit((0.4, 0.4, 0.2), (0.4, 0.4, 0.2))
    assert uniform == (0.5, 0.5, 0.0)
    assert sets.m == 2


def test_attractive_limit_requires_overlap():
    with pytest.raises(ValueError):
        attractive_limit((1.0, 0.0), (0.0, 1.0))


def test_attractive_limit_unconverged():
    with pytest.raises(UndeterminedSupportError):
        attractive_limit((0.6, 0.4), (0.5, 0.5), max_iter=2)


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_attractive_limit_uniform_on_support(data):
    n = data.draw(st.integers(2, 8))
    p, r = data.draw(stochastic(n)), data.draw(stochastic(n))
    uniform, sets = attractive_limit(p, r)
    rep = iterate_conflict(p, r, -1.0)
    np.testing.assert_allclose(rep.p_limit, uniform, atol=1e-8)
    np.testing.assert_allclose(rep.r_limit, uniform, atol=1e-8)
    assert sets.s0 | sets.s_inf == set(range(n)) and not sets.s0 & sets.s_inf
