"""Equilibria as interval partitions of bliss classes.

In any equilibrium the models sending one message form an interval of the
bliss-point order, and models sharing a bliss point send the same message.
A pure equilibrium is therefore described by the cut positions of an
interval partition of the bliss classes, with the receiver best-responding
to each cell.

Under quadratic loss a sender whose true class has mean ``mu`` ranks
actions by their distance to ``mu + b``.  Because cell actions increase
strictly from left to right, a partition is an equilibrium exactly when,
at every boundary, the top class of the left cell and the bottom class of
the right cell are on the correct side of the midpoint of the two cell
actions.  The enumeration prunes on this local condition;
:func:`check_equilibrium` still verifies every class against every cell.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ContractViolation, InputError, InvariantError
from .scenario import Game, Scenario

log = logging.getLogger(__name__)


def cells_from_cuts(cuts: Sequence[int], n_classes: int) -> tuple[tuple[int, int], ...]:
    """``cuts`` are cell start positions (1..C-1) other than the first cell's."""
    cuts = tuple(cuts)
    if any(not isinstance(c, int) for c in cuts):
        raise ContractViolation(f"cut positions must be integers, got {cuts!r}")
    if list(cuts) != sorted(set(cuts)) or (cuts and (cuts[0] < 1 or cuts[-1] > n_classes - 1)):
        raise ContractViolation(f"cuts {list(cuts)} are not strictly increasing within 1..{n_classes - 1}")
    starts = (0,) + cuts
    ends = tuple(c - 1 for c in cuts) + (n_classes - 1,)
    return tuple(zip(starts, ends))


def cuts_from_cells(cells: Sequence[tuple[int, int]], n_classes: int) -> tuple[int, ...]:
    cells = [tuple(c) for c in cells]
    if not cells or cells[0][0] != 0 or cells[-1][1] != n_classes - 1:
        raise ContractViolation("cells must cover every bliss class")
    for (lo, hi), (nlo, _) in zip(cells, cells[1:] + [(n_classes, None)]):
        if lo > hi or nlo != hi + 1:
            raise ContractViolation(f"cells {cells} are not contiguous, disjoint and ordered")
    return tuple(lo for lo, _ in cells[1:])


@dataclass(frozen=True)
class PartitionProfile:
    """Interval partition of the classes with the induced receiver actions."""

    n_classes: int
    cuts: tuple[int, ...]
    actions: tuple

    @property
    def cells(self) -> tuple[tuple[int, int], ...]:
        return cells_from_cuts(self.cuts, self.n_classes)

    @property
    def steps(self) -> int:
        return len(self.cuts) + 1

    @property
    def mask(self) -> int:
        return sum(1 << c for c in self.cuts)

    def cell_of(self, class_index: int) -> int:
        return sum(1 for c in self.cuts if c <= class_index)

    def refines(self, other: PartitionProfile) -> bool:
        """Weakly more informative: every cut of ``other`` is a cut here."""
        return set(other.cuts) <= set(self.cuts)


def make_profile(game: Game, cuts: Sequence[int] | None = None, cells=None) -> PartitionProfile:
    """Profile for a partition given by cuts or cells, with best-response actions."""
    if (cuts is None) == (cells is None):
        raise InputError("give exactly one of cuts or cells")
    C = game.n_classes
    if cells is not None:
        cuts = cuts_from_cells(cells, C)
    cells = cells_from_cuts(cuts, C)
    return PartitionProfile(C, tuple(cuts), tuple(game.action(lo, hi) for lo, hi in cells))


def profile_from_means(game: Game, cell_means: Sequence[Sequence]) -> PartitionProfile:
    """Profile from cells written as lists of class means, e.g. ``[["1/3"], ["1/2", "3/5"]]``."""
    cells = []
    for group in cell_means:
        idx = sorted(game.space.class_of_mean(Fraction(m)) for m in group)
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise ContractViolation(f"cell {list(group)} is not a contiguous run of classes")
        cells.append((idx[0], idx[-1]))
    return make_profile(game, cells=cells)


@dataclass(frozen=True)
class EquilibriumReport:
    profile: PartitionProfile
    steps: int
    ic_ok: bool
    violations: tuple[tuple[int, int], ...]


def sender_prefers(mean, bias, a_own, a_other) -> bool:
    """Weak preference for ``a_own`` over ``a_other`` at bliss point ``mean + bias``."""
    target = mean + bias
    return abs(target - a_own) <= abs(target - a_other)


def _validate_profile(profile: PartitionProfile, game: Game) -> None:
    C = game.n_classes
    if profile.n_classes != C:
        raise ContractViolation(f"profile covers {profile.n_classes} classes, the game has {C}")
    cells = profile.cells
    if len(profile.actions) != len(cells):
        raise ContractViolation("one action per cell is required")
    for (lo, hi), a in zip(cells, profile.actions):
        if a != game.action(lo, hi):
            raise ContractViolation(
                f"action {a} for classes {lo}..{hi} is not the receiver's best response"
            )
    acts = profile.actions
    if any(x >= y for x, y in zip(acts, acts[1:])):
        raise InvariantError(f"cell actions {acts} are not strictly increasing")


def check_equilibrium(profile: PartitionProfile, scenario: Scenario) -> EquilibriumReport:
    """Verify sender incentive compatibility of every class against every cell."""
    game = scenario.game
    _validate_profile(profile, game)
    means, b, acts = game.means, scenario.bias, profile.actions
    violations = []
    for i, (lo, hi) in enumerate(profile.cells):
        for c in range(lo, hi + 1):
            target = means[c] + b
            dist = [abs(target - a) for a in acts]
            best = min(range(len(acts)), key=dist.__getitem__)
            if dist[best] < dist[i]:
                violations.append((c, best))
    return EquilibriumReport(profile, profile.steps, not violations, tuple(violations))


# -- enumeration ------------------------------------------------------------


def boundary_ok(game: Game, bias, left: tuple[int, int], right: tuple[int, int]) -> bool:
    a_l, a_r = game.action(*left), game.action(*right)
    if not a_l < a_r:
        raise InvariantError(f"actions {a_l}, {a_r} of adjacent cells are not increasing")
    mid = (a_l + a_r) / 2
    means = game.means
    return means[left[1]] + bias <= mid <= means[right[0]] + bias


def _equilibrium_cuts(game: Game, bias, first_ends: Sequence[int]) -> list[tuple[int, ...]]:
    C = game.n_classes
    found: list[tuple[int, ...]] = []

    def extend(prev, start, cuts):
        cuts = cuts + (start,)
        for end in range(start, C):
            cell = (start, end)
            if boundary_ok(game, bias, prev, cell):
                if end == C - 1:
                    found.append(cuts)
                else:
                    extend(cell, end + 1, cuts)

    for e0 in first_ends:
        if e0 == C - 1:
            found.append(())
        else:
            extend((0, e0), e0 + 1, ())
    return found


def _cuts_task(args):
    game, bias, e0 = args
    return _equilibrium_cuts(game, bias, [e0])


def equilibrium_cuts(scenario: Scenario, workers: int | None = None) -> list[tuple[int, ...]]:
    """Cut tuples of all equilibria, ordered by step count then lexicographically.

    The search tree is split by the extent of the first cell; each branch is
    independent, so the result does not depend on ``workers``.
    """
    game = scenario.game
    game.require_enumerable()
    workers = game.workers if workers is None else workers
    C = game.n_classes
    if workers > 1 and C > 1:
        # warm the action cache once so workers receive it
        for lo in range(C):
            for hi in range(lo, C):
                game.action(lo, hi)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_cuts_task, [(game, scenario.bias, e0) for e0 in range(C)])
            cuts = [c for part in parts for c in part]
    else:
        cuts = _equilibrium_cuts(game, scenario.bias, range(C))
    return sorted(cuts, key=lambda c: (len(c), c))


def enumerate_equilibria(scenario: Scenario, workers: int | None = None) -> list[EquilibriumReport]:
    """All pure equilibria (up to relabelling of messages)."""
    reports = []
    for cuts in equilibrium_cuts(scenario, workers):
        report = check_equilibrium(make_profile(scenario.game, cuts), scenario)
        if not report.ic_ok:
            raise InvariantError(f"pruned search accepted non-equilibrium cuts {cuts}")
        reports.append(report)
    return reports


def max_steps(scenario: Scenario, workers: int | None = None) -> int:
    """Largest number of distinct induced actions; checks that no step count is skipped."""
    steps = {len(c) + 1 for c in equilibrium_cuts(scenario, workers)}
    N = max(steps)
    if steps != set(range(1, N + 1)):
        raise InvariantError(f"equilibrium step counts {sorted(steps)} have a gap below N={N}")
    return N


def most_informative(scenario: Scenario, workers: int | None = None) -> list[EquilibriumReport]:
    """Equilibria not strictly refined by another equilibrium."""
    reports = enumerate_equilibria(scenario, workers)
    masks = [r.profile.mask for r in reports]
    keep = []
    for r, m in zip(reports, masks):
        if not any(o != m and o & m == m for o in masks):
            keep.append(r)
    return keep


# -- reduction from n+1 to n steps -------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    kind: str  # "start", "merge" or "shift"
    cells: tuple[tuple[int, int], ...]
    actions: tuple
    ic_ok: bool
    moved_class: int | None = None


@dataclass(frozen=True)
class Reduction:
    result: EquilibriumReport
    trace: tuple[TraceStep, ...]


def reduce_step(profile: PartitionProfile, scenario: Scenario) -> Reduction:
    """Turn an (n+1)-step equilibrium into an n-step one.

    Merge the two rightmost cells; while the sender has a profitable
    deviation, move the lowest class of a deviating cell into the cell on
    its left (the rightmost such cell when several qualify), re-solving the
    receiver's responses after each move.
    """
    game = scenario.game
    start = check_equilibrium(profile, scenario)
    if not start.ic_ok:
        raise ContractViolation("input profile is not an equilibrium", start.violations)
    if profile.steps < 2:
        raise ContractViolation("reduction needs an equilibrium with at least two steps")

    def record(kind, cells, moved=None):
        prof = make_profile(game, cells=cells)
        rep = check_equilibrium(prof, scenario)
        trace.append(TraceStep(kind, prof.cells, prof.actions, rep.ic_ok, moved))
        return prof, rep

    trace: list[TraceStep] = [TraceStep("start", profile.cells, profile.actions, True)]
    cells = list(profile.cells)
    cells[-2:] = [(cells[-2][0], cells[-1][1])]
    prof, rep = record("merge", cells)
    means, b = game.means, scenario.bias
    limit = game.n_classes * len(cells)
    while not rep.ic_ok:
        acts = prof.actions
        candidates = [
            i
            for i in range(1, len(cells))
            if not sender_prefers(means[cells[i][0]], b, acts[i], acts[i - 1])
        ]
        if not candidates:
            raise InvariantError(f"deviation at {rep.violations} is not a leftward boundary shift")
        i = max(candidates)
        lo, hi = cells[i]
        if lo == hi:
            raise InvariantError(f"shifting class {lo} would empty cell {i}")
        cells[i - 1] = (cells[i - 1][0], lo)
        cells[i] = (lo + 1, hi)
        prof, rep = record("shift", cells, moved=lo)
        if len(trace) > limit + 2:
            raise InvariantError("reduction did not terminate within the proven bound")
    log.debug("reduced %d -> %d steps in %d moves", profile.steps, rep.steps, len(trace) - 2)
    return Reduction(rep, tuple(trace))
