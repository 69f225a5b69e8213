from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from narrative_eq import (
    BiasInterval,
    DegenerateCaseError,
    Game,
    InputError,
    ResourceLimitError,
    closed_form_bounds,
    compute_V,
    feasible_bias_interval,
    informative_set,
    lower_bound,
    make_profile,
    upper_bound,
)
from narrative_eq.bounds import union_intervals


def g(K, s, **kw):
    return Game.from_sigma(K, s, **kw)


def test_feasible_interval_examples(two_of_three):
    assert feasible_bias_interval(make_profile(two_of_three, (1,)), two_of_three) == BiasInterval(F(1, 24), F(5, 24))
    assert str(feasible_bias_interval(make_profile(two_of_three, (1, 2, 3, 4)), two_of_three)) == "(0, 1/30]"
    assert feasible_bias_interval(make_profile(two_of_three, ()), two_of_three) == BiasInterval.positive()


@pytest.mark.parametrize(
    "K, s, expected",
    [(3, 2, F(1, 30)), (3, 0, F(1, 40)), (5, 2, F(1, 70)), (20, 0, F(1, 924))],
)
def test_lower_bound_examples(K, s, expected):
    assert lower_bound(g(K, s)) == expected


def test_upper_bound_examples():
    rep = upper_bound(g(3, 2))
    assert (rep.b_lower, rep.b_upper) == (F(1, 30), F(5, 24))
    assert rep.is_interval and rep.large_conflict_certified
    assert upper_bound(g(3, 0)).b_upper == F(1, 40)


def test_all_success_threshold_depends_on_the_empty_model():
    # without the empty model the all-success threshold is 1/15 at K=3
    assert upper_bound(g(3, 3, exclude_empty=True)).b_upper == F(1, 15)
    # with it, the split {empty} | rest stays credible up to 3/20
    assert upper_bound(g(3, 3)).b_upper == F(3, 20)


@pytest.mark.parametrize("K", range(3, 13))
def test_all_success_threshold_closed_forms(K):
    full = upper_bound(g(K, K)).b_upper
    # the empty model (mean 1/2) against the all-success model (mean (K+1)/(K+2))
    assert full == (F(1, 2) + F(K + 1, K + 2)) / 2 - F(1, 2) == F(K, 4 * (K + 2))
    assert upper_bound(g(K, K, exclude_empty=True)).b_upper == closed_form_bounds(K)["b_bar_K"]


@pytest.mark.parametrize("K", range(3, 13))
def test_asymmetry(K):
    for excl in (False, True):
        top = upper_bound(g(K, K, exclude_empty=excl)).b_upper
        bottom = upper_bound(g(K, 0, exclude_empty=excl))
        assert bottom.b_upper == bottom.b_lower == closed_form_bounds(K)["b_bar_0"]
        assert top > bottom.b_upper


def test_closed_forms():
    assert closed_form_bounds(3) == {"b_bar_K": F(1, 15), "b_bar_0": F(1, 40)}
    assert closed_form_bounds(4) == {"b_bar_K": F(1, 12), "b_bar_0": F(1, 60)}
    assert closed_form_bounds(20) == {"b_bar_K": F(19, 132), "b_bar_0": F(1, 924)}
    with pytest.raises(InputError):
        closed_form_bounds(2)


def test_compute_V(two_of_three):
    assert compute_V(two_of_three, 0, F(5, 24) + F(1, 10**6)) > 0
    assert compute_V(two_of_three, 0, 0) < 0
    with pytest.raises(DegenerateCaseError):
        compute_V(two_of_three, two_of_three.n_classes - 1, F(1, 10))


@pytest.mark.parametrize("K", range(1, 7))
def test_two_step_method_agrees_with_full_union(K):
    for s in range(K + 1):
        game = g(K, s)
        union = informative_set(game)
        assert union == informative_set(game, method="two_step")
        rep = upper_bound(game)
        assert rep.b_lower <= rep.b_upper
        assert rep.is_interval and rep.large_conflict_certified


def test_parallel_union_matches():
    game = g(5, 2)
    assert informative_set(game, workers=2) == informative_set(game)


def test_union_respects_cap():
    with pytest.raises(ResourceLimitError):
        informative_set(g(6, 3, class_cap=5))
    assert informative_set(g(6, 3, class_cap=5), method="two_step")


@pytest.mark.parametrize("K", range(1, 13))
def test_symmetry_and_extreme_minimum(K):
    vals = [lower_bound(g(K, s)) for s in range(K + 1)]
    assert vals == vals[::-1]
    low = min(vals)
    assert [s for s, v in enumerate(vals) if v == low] == ([0, K] if K > 0 else [0])


@pytest.mark.parametrize("K", range(1, 16))
def test_adjacent_gap_floor(K):
    floor = F(1, (K + 1) * (K + 2))
    tight = {(F(1, K + 2), F(1, K + 1)), (F(K, K + 1), F(K + 1, K + 2))}
    for s in range(K + 1):
        means = g(K, s).means
        for a, b in zip(means, means[1:]):
            assert b - a >= floor
            if b - a == floor:
                assert (a, b) in tight


# -- interval arithmetic ------------------------------------------------------


def test_interval_normalisation():
    assert BiasInterval(F(-1), F(1, 2)) == BiasInterval(F(0), F(1, 2), False, True)
    assert BiasInterval(F(1, 2), F(1, 3)).is_empty
    assert F(1, 2) in BiasInterval(F(1, 2), F(1, 2))
    assert str(BiasInterval.empty()) == "{}"
    assert str(BiasInterval.positive()) == "(0, inf)"


fracs = st.fractions(F(-1, 4), F(1), max_denominator=12)
intervals = st.builds(BiasInterval, fracs, st.one_of(st.none(), fracs), st.booleans(), st.booleans())


@given(st.lists(intervals, max_size=6), st.lists(st.fractions(F(1, 48), F(2), max_denominator=48), max_size=20))
def test_union_membership(ivs, probes):
    merged = union_intervals(ivs)
    for x in probes:
        assert any(x in iv for iv in ivs) == any(x in iv for iv in merged)
    for a, b in zip(merged, merged[1:]):
        assert a.upper is not None and a.upper <= b.lower


@given(intervals, intervals, st.lists(st.fractions(F(1, 48), F(2), max_denominator=48), max_size=20))
def test_intersection_membership(a, b, probes):
    both = a.intersect(b)
    for x in probes:
        assert (x in a and x in b) == (x in both)
