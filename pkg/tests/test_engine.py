from fractions import Fraction as F
from itertools import product

import pytest
from conftest import means_of, probe_biases

from narrative_eq import (
    ContractViolation,
    Game,
    History,
    InvariantError,
    ResourceLimitError,
    Scenario,
    check_equilibrium,
    enumerate_equilibria,
    make_profile,
    max_steps,
    most_informative,
    reduce_step,
)
from narrative_eq.engine import PartitionProfile, equilibrium_cuts, profile_from_means


def test_three_message_profile_at_one_thirtieth(mild):
    prof = profile_from_means(mild.game, [["1/3"], ["1/2", "3/5", "2/3"], ["3/4"]])
    assert prof.actions == (F(1, 3), F(2, 3), F(3, 4))
    assert check_equilibrium(prof, mild).ic_ok


def test_four_message_profile_at_one_25th(moderate):
    prof = profile_from_means(moderate.game, [["1/3"], ["1/2"], ["3/5", "2/3"], ["3/4"]])
    assert prof.actions == (F(1, 3), F(1, 2), F(2, 3), F(3, 4))
    assert check_equilibrium(prof, moderate).ic_ok


def test_most_informative_at_one_25th(moderate):
    found = [means_of(moderate.game, r.profile.cells) for r in most_informative(moderate)]
    f = lambda *xs: [F(x) for x in xs]
    assert found == [
        [f("1/3"), f("1/2"), f("3/5"), f("2/3", "3/4")],
        [f("1/3"), f("1/2"), f("3/5", "2/3"), f("3/4")],
    ]
    assert max_steps(moderate) == 4


def test_babbling_always_an_equilibrium(two_of_three):
    for b in (F(1, 1000), F(1, 30), F(1, 4), F(10)):
        sc = Scenario(two_of_three, b)
        assert check_equilibrium(make_profile(two_of_three, ()), sc).ic_ok


def test_large_bias_leaves_only_babbling(two_of_three):
    sc = Scenario(two_of_three, F(1, 4))
    assert [r.profile.cuts for r in enumerate_equilibria(sc)] == [()]
    assert max_steps(sc) == 1


def test_small_bias_admits_full_revelation(mild):
    cuts = [r.profile.cuts for r in enumerate_equilibria(mild)]
    assert (1, 2, 3, 4) in cuts
    assert max_steps(mild) == 5
    assert [r.profile.cuts for r in most_informative(mild)] == [(1, 2, 3, 4)]


@pytest.mark.parametrize("h", ["0", "1"])
def test_single_observation_huge_bias(h):
    sc = Scenario(Game(History.from_string(h)), 10)
    assert len(enumerate_equilibria(sc)) == 1


def test_malformed_partitions_rejected(mild):
    g = mild.game
    with pytest.raises(ContractViolation):
        make_profile(g, (3, 1))
    with pytest.raises(ContractViolation):
        make_profile(g, (0, 2))
    with pytest.raises(ContractViolation):
        make_profile(g, cells=[(0, 1), (3, 4)])
    with pytest.raises(ContractViolation):
        check_equilibrium(PartitionProfile(5, (1,), (F(1, 3), F(1, 2))), mild)
    with pytest.raises(ContractViolation):
        profile_from_means(g, [["1/3", "3/5"], ["1/2", "2/3", "3/4"]])


def test_workers_do_not_change_results(moderate):
    assert equilibrium_cuts(moderate, workers=1) == equilibrium_cuts(moderate, workers=3)


def test_class_cap_enforced(mild):
    sc = Scenario(mild.game.replace(class_cap=3), mild.bias)
    with pytest.raises(ResourceLimitError):
        enumerate_equilibria(sc)


def test_cap_env_var(monkeypatch):
    monkeypatch.setenv("NARRATIVE_EQ_CAP", "4")
    assert Game(History.from_string("101")).class_cap == 4


# -- structure of the equilibrium set -----------------------------------------


def all_games(max_K):
    for K in range(1, max_K + 1):
        for bits in product((0, 1), repeat=K):
            yield Game(History(bits))


@pytest.mark.parametrize("K", [1, 2, 3])
def test_staircase_and_ordering(K):
    for g in all_games(K):
        for b in probe_biases(g):
            sc = Scenario(g, b)
            reports = enumerate_equilibria(sc)
            steps = {r.steps for r in reports}
            assert steps == set(range(1, max(steps) + 1))
            for r in reports:
                acts = r.profile.actions
                assert all(x < y for x, y in zip(acts, acts[1:]))
                assert r.steps <= g.n_classes <= g.space.n_models


# -- step reduction -----------------------------------------------------------


def test_reduction_trace_merge_then_shift(mild):
    g = mild.game
    start = profile_from_means(g, [["1/3"], ["1/2", "3/5", "2/3"], ["3/4"]])
    red = reduce_step(start, mild)
    layout = [(t.kind, means_of(g, t.cells), t.ic_ok) for t in red.trace]
    f = lambda *xs: [F(x) for x in xs]
    assert layout == [
        ("start", [f("1/3"), f("1/2", "3/5", "2/3"), f("3/4")], True),
        ("merge", [f("1/3"), f("1/2", "3/5", "2/3", "3/4")], False),
        ("shift", [f("1/3", "1/2"), f("3/5", "2/3", "3/4")], True),
    ]
    assert red.result.ic_ok and red.result.steps == 2


def test_two_steps_reduce_to_babbling(mild):
    red = reduce_step(make_profile(mild.game, (2,)), mild)
    assert red.result.profile.cuts == () and len(red.trace) == 2


def test_full_revelation_reduces_by_one_step(mild):
    red = reduce_step(make_profile(mild.game, (1, 2, 3, 4)), mild)
    assert red.result.ic_ok and red.result.steps == 4


def test_reduce_rejects_non_equilibrium(moderate):
    with pytest.raises(ContractViolation) as exc:
        reduce_step(make_profile(moderate.game, (1, 2, 3, 4)), moderate)
    assert exc.value.violations


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_reduce_from_every_equilibrium(K):
    for g in all_games(K):
        if K == 4 and g.history.sigma not in (0, 2, 4):
            continue
        for b in probe_biases(g)[::3]:
            sc = Scenario(g, b)
            for r in enumerate_equilibria(sc):
                if r.steps < 2:
                    continue
                red = reduce_step(r.profile, sc)
                assert red.result.ic_ok and red.result.steps == r.steps - 1
                assert check_equilibrium(red.result.profile, sc).ic_ok


class _ReversedGame(Game):
    """Two classes whose best responses are deliberately out of order."""

    def action(self, lo, hi):
        return {(0, 0): F(2, 3), (1, 1): F(1, 2), (0, 1): F(1, 2)}[(lo, hi)]


def test_decreasing_actions_are_a_bug():
    sc = Scenario(_ReversedGame(History.from_string("1")), F(1, 10))
    with pytest.raises(InvariantError):
        check_equilibrium(PartitionProfile(2, (1,), (F(2, 3), F(1, 2))), sc)
