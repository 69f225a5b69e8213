import warnings
from fractions import Fraction as F

import pytest
from conftest import probe_biases

from narrative_eq import (
    BAYESIAN,
    Game,
    History,
    Model,
    Scenario,
    enumerate_equilibria,
    lower_bound,
    make_profile,
    most_informative,
    naive_best_proposal,
    naive_response,
    persuasion_sets,
    posterior_summary,
    upper_bound,
)
from narrative_eq.naive import welfare_comparison

H = History.from_string("101")


def classes_of(models, h=H):
    return {posterior_summary(m, h).mean for m in models}


def test_naive_response_examples():
    m23, m34 = Model((1,)), Model((1, 3))
    assert naive_response(m23, m23, H) == m23
    assert naive_response(m23, m34, H) == m34
    assert naive_response(m34, m23, H) == m34


def test_best_proposal_examples():
    b = F(7, 100)
    prop, gain = naive_best_proposal(Model((1, 2, 3)), H, b)  # mean 3/5
    assert posterior_summary(prop, H).mean == F(2, 3) and gain > 0
    prop, _ = naive_best_proposal(Model((1, 2)), H, b)  # mean 1/2
    assert posterior_summary(prop, H).mean == F(3, 5)
    assert naive_best_proposal(Model((1, 3)), H, b) == (Model((1, 3)), 0)  # top class


def test_persuasion_sets_at_seven_hundredths(two_of_three):
    sc = Scenario(two_of_three, F(7, 100))
    (eq,) = most_informative(sc)
    assert [two_of_three.means[lo] for lo, _ in eq.profile.cells] == [F(1, 3), F(1, 2), F(3, 5)]
    rep = persuasion_sets(sc, eq.profile)
    # a sender whose truth is 3/5 still prefers 3/5 to 3/4 here: that needs b > 3/40
    assert classes_of(rep.equilibrium_set) == {F(2, 3)}
    assert classes_of(rep.naive_set) == {F(1, 2), F(3, 5), F(2, 3)}
    # the empty model cannot move: the only model at least as likely is 3/4, too far
    assert Model(()) not in rep.naive_set
    assert rep.naive_set == {Model((1, 2)), Model((2, 3)), Model((1, 2, 3)), Model((1,)), Model((3,))}
    assert rep.subset_ok and rep.strict


def test_persuasion_sets_above_three_fortieths(two_of_three):
    sc = Scenario(two_of_three, F(2, 25))
    (eq,) = most_informative(sc)
    rep = persuasion_sets(sc, eq.profile)
    assert classes_of(rep.equilibrium_set) == {F(3, 5), F(2, 3)}
    assert rep.strict


def test_welfare_witness(two_of_three):
    sc = Scenario(two_of_three, F(7, 100))
    prof = most_informative(sc)[0].profile
    eq, naive = welfare_comparison(sc, prof, Model((1, 2, 3)))  # mean 3/5
    assert naive > eq
    eq, naive = welfare_comparison(sc, prof, Model((1, 2)))  # mean 1/2
    assert naive < eq


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_no_persuasion_below_full_revelation_threshold(K):
    for s in range(K + 1):
        g = Game.from_sigma(K, s)
        bl = lower_bound(g)
        for b in (bl, bl / 2):
            sc = Scenario(g, b)
            for r in enumerate_equilibria(sc):
                rep = persuasion_sets(sc, r.profile)
                assert not rep.naive_set and not rep.equilibrium_set


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_large_conflict_strictness(K):
    strict_seen = False
    for s in range(K + 1):
        g = Game.from_sigma(K, s)
        rep_b = upper_bound(g)
        assert rep_b.large_conflict_certified
        sc = Scenario(g, rep_b.b_upper + F(1, 100))
        (only,) = enumerate_equilibria(sc)
        rep = persuasion_sets(sc, only.profile)
        babble = only.profile.actions[0]
        witness = any(posterior_summary(m, g.history).mean >= babble for m in rep.naive_set)
        assert rep.subset_ok
        assert rep.strict == witness
        strict_seen |= rep.strict
    assert strict_seen or K < 3


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_subset_and_gain_dominance(K):
    for s in range(K + 1):
        g = Game.from_sigma(K, s)
        for b in probe_biases(g)[::2]:
            sc = Scenario(g, b)
            for r in enumerate_equilibria(sc):
                rep = persuasion_sets(sc, r.profile)
                assert rep.equilibrium_set <= rep.naive_set
                for m in rep.equilibrium_set:
                    eq_gain, naive_gain = rep.per_model_gain[m]
                    assert naive_gain >= eq_gain > 0


def test_other_rules_only_warn():
    g = Game(H, rule=BAYESIAN)
    sc = Scenario(g, F(1, 100))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        persuasion_sets(sc, make_profile(g, ()))
    assert any("MLEU" in str(w.message) for w in caught)
