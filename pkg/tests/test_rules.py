from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narrative_eq import BAYESIAN, MEU, MLEU, Game, History, InputError, RuleSelector
from narrative_eq.core import Model
from narrative_eq.errors import NumericError
from narrative_eq.oracle import numeric_action_oracle
from narrative_eq.rules import bayesian_mean, meu_maximizer, mleu_choice, smooth_maximizer

SMOOTH = RuleSelector("Smooth", smooth_alpha=1.0)
ALL_RULES = [MLEU, MEU, BAYESIAN, SMOOTH]


def canonical_games(rule, max_K=5):
    for K in range(1, max_K + 1):
        for s in range(K + 1):
            yield Game.from_sigma(K, s, rule=rule)


def test_mleu_examples():
    g = Game(History.from_string("101"))
    i = g.space.class_of_mean
    assert g.action(i(F(3, 5)), i(F(3, 4))) == F(3, 4)
    assert g.action(i(F(1, 2)), i(F(2, 3))) == F(2, 3)


def test_meu_examples():
    assert meu_maximizer([(F(1, 3), F(1, 18))]) == F(1, 3)
    assert meu_maximizer([(F(2, 5), F(1, 18)), (F(2, 5), F(1, 30))]) == F(2, 5)
    assert meu_maximizer([(F(1, 3), F(1, 18)), (F(2, 3), F(1, 18))]) == F(1, 2)


def test_bayesian_examples():
    assert bayesian_mean([(F(1, 3), 1)]) == F(1, 3)
    assert bayesian_mean([(F(1, 3), 1), (F(2, 3), 1)]) == F(1, 2)
    assert bayesian_mean([(F(1, 2), 1), (F(3, 4), 3)]) == F(11, 16)
    with pytest.raises(InputError):
        bayesian_mean([(F(1, 2), 0)])


def test_smooth_examples():
    assert abs(smooth_maximizer([(F(1, 3), F(1, 18), 1)], 1.0, 1e-10) - 1 / 3) < 1e-10
    sym = [(F(1, 3), F(1, 18), 1), (F(2, 3), F(1, 18), 1)]
    assert abs(smooth_maximizer(sym, 1.0, 1e-10) - 0.5) < 1e-9
    with pytest.raises(NumericError):
        smooth_maximizer([(0, 1, 1), (1, 1, 1)], 1.5e308, 1e-10)


def test_rule_selector_validation():
    assert RuleSelector("meu").kind == "MEU"
    with pytest.raises(InputError):
        RuleSelector("minimax regret")
    with pytest.raises(InputError):
        RuleSelector("Bayesian", {Model((1,)): F(0)})
    with pytest.raises(InputError):
        RuleSelector("Smooth", smooth_alpha=0.0)


def test_explicit_weights_change_the_bayesian_action():
    h = History.from_string("101")
    heavy = RuleSelector("Bayesian", {Model((1, 3)): 10})
    g0, g1 = Game(h, rule=BAYESIAN), Game(h, rule=heavy)
    C = g0.n_classes
    assert g1.action(0, C - 1) > g0.action(0, C - 1)


@pytest.mark.parametrize("rule", ALL_RULES, ids=lambda r: r.kind)
def test_singleton_consistency(rule):
    for g in canonical_games(rule):
        for c in range(g.n_classes):
            a = g.action(c, c)
            if rule.exact:
                assert a == g.means[c]
            else:
                assert abs(a - float(g.means[c])) <= 1e-9


@pytest.mark.parametrize("rule", ALL_RULES, ids=lambda r: r.kind)
def test_hedging_on_contiguous_pairs(rule):
    tol = 0 if rule.exact else 1e-9
    for g in canonical_games(rule):
        C = g.n_classes
        spans = [(lo, hi) for lo in range(C) for hi in range(lo, C)]
        for a_lo, a_hi in spans:
            for b_lo, b_hi in spans:
                if b_lo > a_hi + 1 or a_lo > b_hi + 1:
                    continue  # union not contiguous
                x, y = g.action(a_lo, a_hi), g.action(b_lo, b_hi)
                u = g.action(min(a_lo, b_lo), max(a_hi, b_hi))
                assert min(x, y) - tol <= u <= max(x, y) + tol


def test_mleu_restriction_keeps_choice():
    for g in canonical_games(MLEU):
        C = g.n_classes
        for lo in range(C):
            for hi in range(lo, C):
                chosen, _ = mleu_choice(g.feasible_set(lo, hi), g.tiebreak)
                c = g.space.class_index(chosen)
                for sub_lo in range(lo, c + 1):
                    for sub_hi in range(c, hi + 1):
                        assert mleu_choice(g.feasible_set(sub_lo, sub_hi), g.tiebreak)[0] == chosen


def test_smooth_small_alpha_matches_bayesian():
    tiny = RuleSelector("Smooth", smooth_alpha=1e-8)
    for g in canonical_games(BAYESIAN):
        s = g.replace(rule=tiny)
        C = g.n_classes
        for lo in range(C):
            for hi in range(lo, C):
                assert abs(s.action(lo, hi) - float(g.action(lo, hi))) < 1e-5


points = st.lists(
    st.tuples(st.fractions(0, 1, max_denominator=50), st.fractions(F(1, 50), F(1, 10), max_denominator=50)),
    min_size=1,
    max_size=6,
)


@settings(max_examples=30)
@given(points)
def test_meu_matches_dense_grid(pts):
    exact = meu_maximizer(pts)
    approx = numeric_action_oracle(pts, MEU, grid_size=10**6, refine=True)
    assert abs(float(exact) - approx) < 1e-9


@settings(max_examples=30)
@given(points)
def test_meu_is_a_maximum_of_the_envelope(pts):
    a = meu_maximizer(pts)
    env = lambda x: min(-(v + (m - x) ** 2) for m, v in pts)
    for m, _ in pts:
        assert env(a) >= env(m)
    assert min(m for m, _ in pts) <= a <= max(m for m, _ in pts)
