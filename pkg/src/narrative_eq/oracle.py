"""Slow, independent re-derivations used to check the main solvers.

Nothing here uses the bliss-class machinery or the pruned searches.  Models
are enumerated as raw subsets, every partition of the sorted means is
tried, and incentive compatibility is checked model by model.  Only the
posterior arithmetic in :mod:`narrative_eq.core` is shared.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
import numpy as np

from .bounds import BiasInterval, BoundsReport, union_intervals
from .core import DEFAULT_TIEBREAK, History, MinimalFeasibleSet, Model, TieBreak, posterior_summary
from .engine import PartitionProfile
from .errors import InputError, ResourceLimitError
from .rules import MLEU, RuleSelector, meu_maximizer, smooth_maximizer
from .scenario import Scenario

ORACLE_CLASS_CAP = 12


def _all_models(history: History, exclude_empty: bool):
    K = history.K
    out = []
    for k in range(K + 1):
        for rel in combinations(range(1, K + 1), k):
            if k or not exclude_empty:
                m = Model(rel)
                out.append((m, posterior_summary(m, history)))
    return out


def _grouped(history: History, exclude_empty: bool):
    models = _all_models(history, exclude_empty)
    means = sorted({s.mean for _, s in models})
    if len(means) > ORACLE_CLASS_CAP:
        raise ResourceLimitError(f"{len(means)} distinct means exceed the oracle cap {ORACLE_CLASS_CAP}")
    return models, means


def _action(members, rule: RuleSelector, tiebreak: TieBreak):
    if rule.kind == "MLEU":
        _, s = min(members, key=lambda p: tiebreak.model_key(*p))
        return s.mean
    if rule.kind == "Bayesian":
        weights = rule.weight_map() or {}
        total = num = Fraction(0)
        for m, s in members:
            w = Fraction(weights.get(m, 1))
            total += w
            num += w * s.mean
        return num / total
    if rule.kind == "MEU":
        return meu_maximizer([(s.mean, s.variance) for _, s in members])
    weights = rule.weight_map() or {}
    pts = [(s.mean, s.variance, weights.get(m, 1)) for m, s in members]
    return smooth_maximizer(pts, rule.smooth_alpha, rule.tolerance)


def _partitions(n: int):
    """Every interval partition of ``n`` sorted items as ``(cuts, cells)``."""
    for mask in range(1 << max(n - 1, 0)):
        cuts = tuple(i + 1 for i in range(n - 1) if mask >> i & 1)
        bounds = (0,) + cuts + (n,)
        yield cuts, [(bounds[j], bounds[j + 1] - 1) for j in range(len(bounds) - 1)]


@lru_cache(maxsize=64)
def _layouts(history: History, rule: RuleSelector, tiebreak: TieBreak, exclude_empty: bool):
    """``(cuts, actions, per-model rows)`` for every interval partition.

    Bias-free, so cached across the many biases probed for one game.
    """
    models, means = _grouped(history, exclude_empty)
    pos = {m: i for i, m in enumerate(means)}
    out = []
    for cuts, cells in _partitions(len(means)):
        cell_of = {}
        groups = []
        for j, (lo, hi) in enumerate(cells):
            members = [(m, s) for m, s in models if lo <= pos[s.mean] <= hi]
            groups.append(members)
            for m, _ in members:
                cell_of[m] = j
        actions = [_action(g, rule, tiebreak) for g in groups]
        rows = [(s, cell_of[m]) for m, s in models]
        out.append((cuts, actions, rows))
    return out, len(means)


def _ic(actions, rows, b) -> bool:
    for s, j in rows:
        own = -(s.variance + (s.mean + b - actions[j]) ** 2)
        for a in actions:
            if -(s.variance + (s.mean + b - a) ** 2) > own:
                return False
    return True


def brute_force_equilibria(scenario: Scenario) -> list[PartitionProfile]:
    """All equilibria, found by checking every partition model by model."""
    game = scenario.game
    layouts, C = _layouts(game.history, game.rule, game.tiebreak, game.exclude_empty)
    found = [
        PartitionProfile(C, cuts, tuple(actions))
        for cuts, actions, rows in layouts
        if all(x < y for x, y in zip(actions, actions[1:])) and _ic(actions, rows, scenario.bias)
    ]
    return sorted(found, key=lambda p: (p.steps, p.cuts))


def _constraints(actions, rows):
    """IC as ``(edge, lower)``: ``b >= edge`` if lower, else ``b <= edge``."""
    out = set()
    for s, j in rows:
        for a in actions:
            if a == actions[j]:
                continue
            edge = (actions[j] + a) / 2 - s.mean
            out.add((edge, a < actions[j]))
    return out


def _satisfies(cons, b) -> bool:
    return all(b >= e if lower else b <= e for e, lower in cons)


def brute_force_bounds(
    history: History,
    rule: RuleSelector = MLEU,
    tiebreak: TieBreak = DEFAULT_TIEBREAK,
    exclude_empty: bool = False,
) -> BoundsReport:
    """Thresholds from every IC breakpoint, probing each breakpoint and each gap."""
    layouts, C = _layouts(history, rule, tiebreak, exclude_empty)
    if C < 2:
        raise InputError("thresholds need at least two distinct posterior means")
    table = []
    points = set()
    for cuts, actions, rows in layouts:
        if not all(x < y for x, y in zip(actions, actions[1:])):
            continue
        cons = _constraints(actions, rows)
        table.append((cuts, cons))
        points.update(e for e, _ in cons if e > 0)
    pts = sorted(points)
    # alternate gap midpoints and breakpoints: (0,p1), p1, (p1,p2), p2, ..., (pn, inf)
    probes = []
    prev = Fraction(0)
    for p in pts:
        probes.append(("gap", prev, p, (prev + p) / 2))
        probes.append(("point", p, p, p))
        prev = p
    probes.append(("gap", prev, None, prev + 1))

    def informative(b):
        return any(cuts and _satisfies(cons, b) for cuts, cons in table)

    finest = next(cons for cuts, cons in table if len(cuts) == C - 1)
    b_lower = max(p for p in pts if _satisfies(finest, p))
    pieces = []
    for kind, lo, hi, b in probes:
        if informative(b):
            if kind == "gap":
                pieces.append(BiasInterval(lo, hi, False, False))
            else:
                pieces.append(BiasInterval(lo, hi, True, True))
    merged = union_intervals(pieces)
    b_upper = merged[-1].upper
    if b_upper is None:
        raise InputError("informative equilibria exist at arbitrarily large bias")
    is_interval = len(merged) == 1 and merged[0].lower == 0 and merged[0].upper_closed
    probe = b_upper + 1
    certified = True
    for cuts, actions, rows in layouts:
        if len(cuts) == 1 and all(x < y for x, y in zip(actions, actions[1:])):
            # sender at the top class of the lower cell prefers the upper action
            top = max(s.mean for s, j in rows if j == 0)
            if (top + probe - actions[0]) ** 2 <= (top + probe - actions[1]) ** 2:
                certified = False
    return BoundsReport(b_lower, b_upper, merged, is_interval, certified)


# -- numeric maximisation ---------------------------------------------------


def _as_points(members, rule: RuleSelector, tiebreak: TieBreak):
    if isinstance(members, MinimalFeasibleSet):
        members = list(members.members())
    members = list(members)
    if members and not isinstance(members[0][0], Model):
        # bare (mean, var[, weight]) tuples; MLEU needs models to rank
        if rule.kind == "MLEU":
            raise InputError("the MLEU oracle needs (model, summary) pairs")
        return [(float(p[0]), float(p[1]), float(p[2]) if len(p) > 2 else 1.0) for p in members]
    if rule.kind == "MLEU":
        _, s = min(members, key=lambda p: tiebreak.model_key(*p))
        return [(float(s.mean), float(s.variance), 1.0)]
    if rule.kind == "MEU":
        # duplicates leave the envelope unchanged
        return sorted({(float(s.mean), float(s.variance), 1.0) for _, s in members})
    weights = rule.weight_map() or {}
    return [(float(s.mean), float(s.variance), float(weights.get(m, 1))) for m, s in members]


def _objective(rule: RuleSelector, pts, a: np.ndarray) -> np.ndarray:
    m = np.array([p[0] for p in pts])[:, None]
    v = np.array([p[1] for p in pts])[:, None]
    w = np.array([p[2] for p in pts])[:, None]
    loss = v + (m - a[None, :]) ** 2
    if rule.kind == "MEU":
        return -loss.max(axis=0)
    if rule.kind == "Smooth":
        return -(w * np.expm1(rule.smooth_alpha * loss)).sum(axis=0)
    return -(w * loss).sum(axis=0)


def _envelope_slope_sign(pts, a: float) -> float:
    losses = [v + (m - a) ** 2 for m, v, _ in pts]
    worst = max(range(len(pts)), key=losses.__getitem__)
    return pts[worst][0] - a


def numeric_action_oracle(
    members,
    rule: RuleSelector,
    grid_size: int = 10**6,
    tiebreak: TieBreak = DEFAULT_TIEBREAK,
    refine: bool = False,
) -> float:
    """Grid maximiser of the rule's objective over the hull of member means.

    ``members`` is a :class:`MinimalFeasibleSet`, ``(model, summary)``
    pairs or bare ``(mean, var[, weight])`` tuples.  With ``refine`` the MEU answer is polished by bisecting on the
    slope of the worst-case parabola inside the best grid cell; the other
    rules' objectives are smooth and use a local quadratic fit instead.
    """
    if grid_size < 10**4:
        raise InputError(f"grid_size must be at least 10^4, got {grid_size}")
    pts = _as_points(members, rule, tiebreak)
    lo, hi = min(p[0] for p in pts), max(p[0] for p in pts)
    if lo == hi:
        return lo
    grid = np.linspace(lo, hi, grid_size)
    vals = _objective(rule, pts, grid)
    i = int(np.argmax(vals))
    if not refine:
        return float(grid[i])
    left, right = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]
    if rule.kind == "MEU":
        for _ in range(200):
            mid = (left + right) / 2
            if mid in (left, right):
                break
            if _envelope_slope_sign(pts, mid) > 0:
                left = mid
            else:
                right = mid
        return float((left + right) / 2)
    if 0 < i < grid_size - 1:
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            h = grid[1] - grid[0]
            return float(grid[i] + h * (y0 - y2) / (2 * denom))
    return float(grid[i])

