"""Exact informativeness thresholds in the sender's bias.

Receiver actions never depend on the bias, and every incentive constraint
``|mu + b - a_own| <= |mu + b - a_other|`` is a half-line in ``b``.  The set
of biases supporting a given partition is therefore an interval with
rational endpoints.  ``b_lower`` is the top of the fully informative
partition's interval; ``b_upper`` is the supremum of the union of the
intervals of all informative partitions.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .engine import PartitionProfile, make_profile
from .errors import DegenerateCaseError, InputError, InvariantError
from .scenario import Game


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class BiasInterval:
    """Subset of ``b > 0`` with rational endpoints; ``upper=None`` is unbounded."""

    lower: Fraction
    upper: Fraction | None
    lower_closed: bool = True
    upper_closed: bool = True

    def __post_init__(self):
        lo = Fraction(self.lower)
        up = None if self.upper is None else Fraction(self.upper)
        lc, uc = self.lower_closed, self.upper_closed and up is not None
        if lo <= 0:
            lo, lc = Fraction(0), False
        if up is not None and (up < lo or (up == lo and not (lc and uc))):
            lo, up, lc, uc = Fraction(0), Fraction(0), False, False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower_closed", lc)
        object.__setattr__(self, "upper_closed", uc)

    @classmethod
    def empty(cls) -> BiasInterval:
        return cls(Fraction(0), Fraction(0), False, False)

    @classmethod
    def positive(cls) -> BiasInterval:
        return cls(Fraction(0), None, False, False)

    @property
    def is_empty(self) -> bool:
        return self.upper is not None and self.upper == self.lower and not self.upper_closed

    def __contains__(self, b) -> bool:
        if self.is_empty:
            return False
        b = _exact(b)
        above = b > self.lower or (self.lower_closed and b == self.lower)
        below = self.upper is None or b < self.upper or (self.upper_closed and b == self.upper)
        return above and below

    def intersect(self, other: BiasInterval) -> BiasInterval:
        if self.is_empty or other.is_empty:
            return BiasInterval.empty()
        if self.lower != other.lower:
            lo, lc = max((self.lower, self.lower_closed), (other.lower, other.lower_closed))
        else:
            lo, lc = self.lower, self.lower_closed and other.lower_closed
        if self.upper is None or other.upper is None:
            up, uc = (other.upper, other.upper_closed) if self.upper is None else (self.upper, self.upper_closed)
        elif self.upper != other.upper:
            up, uc = min((self.upper, self.upper_closed), (other.upper, other.upper_closed))
        else:
            up, uc = self.upper, self.upper_closed and other.upper_closed
        return BiasInterval(lo, up, lc, uc)

    def __str__(self):
        if self.is_empty:
            return "{}"
        left = "[" if self.lower_closed else "("
        right = "]" if self.upper_closed else ")"
        up = "inf" if self.upper is None else str(self.upper)
        return f"{left}{self.lower}, {up}{right}"


def union_intervals(intervals: Iterable[BiasInterval]) -> tuple[BiasInterval, ...]:
    """Canonical sorted union: disjoint, non-touching, non-empty pieces."""
    pieces = sorted(
        (iv for iv in intervals if not iv.is_empty),
        key=lambda iv: (iv.lower, not iv.lower_closed),
    )
    merged: list[BiasInterval] = []
    for iv in pieces:
        if merged:
            last = merged[-1]
            touches = last.upper is None or iv.lower < last.upper or (
                iv.lower == last.upper and (iv.lower_closed or last.upper_closed)
            )
            if touches:
                if last.upper is None or iv.upper is None:
                    up, uc = None, False
                elif iv.upper > last.upper:
                    up, uc = iv.upper, iv.upper_closed
                elif iv.upper == last.upper:
                    up, uc = iv.upper, iv.upper_closed or last.upper_closed
                else:
                    up, uc = last.upper, last.upper_closed
                merged[-1] = BiasInterval(last.lower, up, last.lower_closed, uc)
                continue
        merged.append(iv)
    return tuple(merged)


class _Coverage:
    """Closed-interval union used to prune subtrees whose biases are already covered."""

    def __init__(self):
        self.lows: list[Fraction] = []
        self.highs: list[Fraction] = []

    def covers(self, lo: Fraction, hi: Fraction) -> bool:
        i = bisect.bisect_right(self.lows, lo) - 1
        return i >= 0 and self.highs[i] >= hi

    def add(self, lo: Fraction, hi: Fraction) -> None:
        i = bisect.bisect_left(self.lows, lo)
        if i > 0 and self.highs[i - 1] >= lo:
            i -= 1
        j = i
        while j < len(self.lows) and self.lows[j] <= hi:
            j += 1
        if j > i:
            lo, hi = min(lo, self.lows[i]), max(hi, self.highs[j - 1])
        self.lows[i:j] = [lo]
        self.highs[i:j] = [hi]


# -- per-partition feasibility ----------------------------------------------


def feasible_bias_interval(profile: PartitionProfile, game: Game) -> BiasInterval:
    """All ``b > 0`` at which ``profile`` is an equilibrium."""
    means = game.means
    acts = [_exact(a) for a in profile.actions]
    iv = BiasInterval.positive()
    for i, (lo, hi) in enumerate(profile.cells):
        for c in range(lo, hi + 1):
            for j, a_other in enumerate(acts):
                if j == i or a_other == acts[i]:
                    continue
                edge = (acts[i] + a_other) / 2 - means[c]
                if a_other < acts[i]:
                    iv = iv.intersect(BiasInterval(edge, None, True, False))
                else:
                    iv = iv.intersect(BiasInterval(Fraction(0), edge, False, True))
    return iv


def _boundary_window(game: Game, left, right) -> tuple[Fraction, Fraction]:
    """Biases ``[lo, hi]`` at which the boundary between two adjacent cells holds."""
    mid = (_exact(game.action(*left)) + _exact(game.action(*right))) / 2
    return mid - game.means[right[0]], mid - game.means[left[1]]


def _partition_union(game: Game, first_ends: Sequence[int]) -> list[tuple[Fraction, Fraction]]:
    """Closed windows ``[lo, hi]`` (clipped at 0) of informative equilibria."""
    C = game.n_classes
    windows: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}

    def window(left, right):
        key = (left[0], left[1], right[1])
        w = windows.get(key)
        if w is None:
            w = windows[key] = _boundary_window(game, left, right)
        return w

    cover = _Coverage()
    found = []

    def extend(prev, start, L, U):
        for end in range(start, C):
            cell = (start, end)
            lo, hi = window(prev, cell)
            nL, nU = max(L, lo), min(U, hi)
            if nU <= 0 or nL > nU:
                continue
            clipped = max(nL, Fraction(0))
            if cover.covers(clipped, nU):
                continue
            if end == C - 1:
                found.append((nL, nU))
                cover.add(clipped, nU)
            else:
                extend(cell, end + 1, nL, nU)

    for e0 in first_ends:
        if e0 < C - 1:
            extend((0, e0), e0 + 1, Fraction(-1), Fraction(2))
    return found


def _union_task(args):
    game, e0 = args
    return _partition_union(game, [e0])


def _windows_to_intervals(windows) -> tuple[BiasInterval, ...]:
    return union_intervals(BiasInterval(lo, hi, lo > 0, True) for lo, hi in windows)


def informative_set(game: Game, method: str = "union", workers: int | None = None) -> tuple[BiasInterval, ...]:
    """Biases at which some equilibrium induces at least two actions.

    ``union`` searches every interval partition (subject to the class cap).
    ``two_step`` only checks the ``C - 1`` two-cell partitions, which yields
    the same set because an informative equilibrium implies a two-step one.
    """
    C = game.n_classes
    if C < 2:
        raise DegenerateCaseError("a single bliss class admits no informative partition")
    if method == "two_step":
        windows = [_boundary_window(game, (0, p - 1), (p, C - 1)) for p in range(1, C)]
        return _windows_to_intervals(w for w in windows if w[1] > 0 and w[0] <= w[1])
    if method != "union":
        raise InputError(f"unknown upper-bound method {method!r}")
    game.require_enumerable()
    workers = game.workers if workers is None else workers
    if workers > 1:
        for lo in range(C):
            for hi in range(lo, C):
                game.action(lo, hi)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_union_task, [(game, e0) for e0 in range(C - 1)])
            windows = [w for part in parts for w in part]
    else:
        windows = _partition_union(game, range(C - 1))
    return _windows_to_intervals(windows)


# -- thresholds -------------------------------------------------------------


def lower_bound(game: Game) -> Fraction:
    """Largest bias at which full revelation is an equilibrium."""
    C = game.n_classes
    if C < 2:
        raise DegenerateCaseError("a single bliss class has no fully informative threshold")
    finest = make_profile(game, range(1, C))
    iv = feasible_bias_interval(finest, game)
    if iv.is_empty or iv.upper is None or iv.lower != 0:
        raise InvariantError(f"fully informative partition is feasible on {iv}, not on (0, x]")
    if game.rule.exact:
        means = game.means
        half_gap = min(b - a for a, b in zip(means, means[1:])) / 2
        if iv.upper != half_gap:
            raise InvariantError(f"threshold {iv.upper} differs from half the minimum gap {half_gap}")
    return iv.upper


@dataclass(frozen=True)
class BoundsReport:
    b_lower: Fraction
    b_upper: Fraction
    informative_set: tuple[BiasInterval, ...]
    is_interval: bool
    large_conflict_certified: bool


def compute_V(game: Game, true_class: int, bias) -> Fraction:
    """Sender's gain from the upper over the lower half of a two-way split at ``true_class``.

    Positive means a sender of this class would rather be pooled with the
    classes above it than with the classes at or below it.
    """
    C = game.n_classes
    if not 0 <= true_class < C:
        raise InputError(f"class index {true_class} out of range 0..{C - 1}")
    if true_class == C - 1:
        raise DegenerateCaseError("the topmost class has no classes above it to split off")
    target = game.means[true_class] + _exact(Fraction(bias))
    a_low = _exact(game.action(0, true_class))
    a_high = _exact(game.action(true_class + 1, C - 1))
    return (target - a_low) ** 2 - (target - a_high) ** 2


def upper_bound(game: Game, method: str = "union", workers: int | None = None) -> BoundsReport:
    """Babbling threshold, with the full informative set and a large-conflict check."""
    b_low = lower_bound(game)
    pieces = informative_set(game, method, workers)
    last = pieces[-1]
    if last.upper is None:
        raise InvariantError("informative equilibria exist for arbitrarily large bias")
    b_up = last.upper
    is_interval = len(pieces) == 1 and pieces[0].lower == 0 and last.upper_closed
    probe = b_up + 1
    certified = all(compute_V(game, c, probe) > 0 for c in range(game.n_classes - 1))
    if b_low > b_up:
        raise InvariantError(f"b_lower {b_low} exceeds b_upper {b_up}")
    return BoundsReport(b_low, b_up, pieces, is_interval, certified)


def closed_form_bounds(K: int) -> dict[str, Fraction]:
    """Closed forms for all-success and all-failure histories (MLEU, K >= 3)."""
    if not isinstance(K, int) or K < 3:
        raise InputError(f"closed forms require K >= 3, got {K!r}")
    return {
        "b_bar_K": Fraction(K - 1, 6 * (K + 2)),
        "b_bar_0": Fraction(1, 2 * (K + 1) * (K + 2)),
    }
