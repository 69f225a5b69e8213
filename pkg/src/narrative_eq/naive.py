"""Comparison with a naive receiver who takes proposed models at face value.

A naive receiver whose default model is the true one adopts any proposed
model that explains the history at least as well, and then plays that
model's bliss point.  The persuasion set of a receiver type collects the
true models under which the sender can move the receiver to an action she
strictly prefers over the truthful one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .core import History, Model, expected_receiver_utility, expected_sender_utility, likelihood, posterior_summary
from .engine import PartitionProfile, check_equilibrium
from .errors import ContractViolation, InvariantError
from .scenario import Game, Scenario


def naive_response(true_model: Model, proposal: Model, history: History) -> Model:
    """Model the naive receiver ends up using after ``proposal`` is made."""
    if likelihood(proposal, history) >= likelihood(true_model, history):
        return proposal
    return true_model


def _sender_utility(summary, a, b):
    return expected_sender_utility(summary.mean, summary.variance, a, b)


def naive_best_proposal(true_model: Model, history: History | Game, bias) -> tuple[Model, Fraction]:
    """Sender-optimal proposal to a naive receiver and its gain over truth-telling.

    ``history`` may be a :class:`Game` to search a restricted model space
    (for instance one without the empty model) under its tiebreak.  Ties between proposals inducing equally good actions go to the model
    ranked first by the game's order (class, then tiebreak), so the result
    is deterministic; the true model itself wins when nothing beats it.
    """
    game = history if isinstance(history, Game) else Game(history)
    history = game.history
    true = posterior_summary(true_model, history)
    if not game.space.contains(true_model):
        raise ContractViolation(f"{true_model} is not in the model space")
    b = Fraction(bias)
    truthful = _sender_utility(true, true.mean, b)
    best, best_u = true_model, truthful
    for cls in game.space:
        if cls.mean == true.mean:
            continue
        ok = [t for t in cls.types if t.summary.likelihood >= true.likelihood]
        if not ok:
            continue
        u = _sender_utility(true, cls.mean, b)
        if u > best_u:
            chosen = min(ok, key=lambda t: game.tiebreak.type_key(t.summary))
            best, best_u = min(chosen.members(history)), u
    return best, best_u - truthful


@dataclass(frozen=True)
class PersuasionReport:
    naive_set: frozenset[Model]
    equilibrium_set: frozenset[Model]
    subset_ok: bool
    strict: bool
    per_model_gain: dict[Model, tuple[Fraction, Fraction]]


def persuasion_sets(scenario: Scenario, equilibrium: PartitionProfile) -> PersuasionReport:
    """Persuasion sets against a naive and an equilibrium-playing receiver.

    Under MLEU the equilibrium set is always contained in the naive one;
    that inclusion is enforced.  Other rules get a warning and the
    comparison is reported as computed.
    """
    report = check_equilibrium(equilibrium, scenario)
    if not report.ic_ok:
        raise ContractViolation("profile is not an equilibrium", report.violations)
    game, b = scenario.game, scenario.bias
    if game.rule.kind != "MLEU":
        warnings.warn(
            f"containment of persuasion sets is only guaranteed under MLEU, not {game.rule.kind}",
            stacklevel=2,
        )
    naive, eq, gains = set(), set(), {}
    for ci, mtype in game.space.types():
        s = mtype.summary
        truthful = _sender_utility(s, s.mean, b)
        action = equilibrium.actions[equilibrium.cell_of(ci)]
        eq_gain = _sender_utility(s, action, b) - truthful
        naive_gain = max(
            (
                _sender_utility(s, cls.mean, b) - truthful
                for cls in game.space
                if any(t.summary.likelihood >= s.likelihood for t in cls.types)
            ),
            default=Fraction(0),
        )
        for m in mtype.members(game.history):
            gains[m] = (eq_gain, naive_gain)
            if eq_gain > 0:
                eq.add(m)
            if naive_gain > 0:
                naive.add(m)
    subset_ok = eq <= naive
    if game.rule.kind == "MLEU" and not subset_ok:
        raise InvariantError(f"equilibrium persuasion set is not contained in the naive one: {eq - naive}")
    return PersuasionReport(frozenset(naive), frozenset(eq), subset_ok, subset_ok and eq != naive, gains)


def receiver_welfare(game: Game, true_model: Model, action) -> Fraction:
    """Receiver's expected utility from ``action`` when ``true_model`` is true."""
    s = posterior_summary(true_model, game.history)
    return expected_receiver_utility(s.mean, s.variance, action)


def welfare_comparison(scenario: Scenario, equilibrium: PartitionProfile, true_model: Model) -> tuple[Fraction, Fraction]:
    """``(equilibrium utility, naive utility)`` of the receiver under ``true_model``."""
    game = scenario.game
    eq_action = equilibrium.actions[equilibrium.cell_of(game.space.class_index(true_model))]
    proposal, _ = naive_best_proposal(true_model, game, scenario.bias)
    naive_action = posterior_summary(proposal, game.history).mean
    return receiver_welfare(game, true_model, eq_action), receiver_welfare(game, true_model, naive_action)
