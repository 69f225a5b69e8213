"""Receiver best responses to a minimal feasible set under four ambiguity rules.

Expected receiver utility under model ``m`` is ``-(var_m + (mean_m - a)^2)``,
so every rule reduces to a one-dimensional problem over the members'
posterior means and variances:

* MLEU: act on the most likely member (ties broken by a strict order);
* MEU: maximise the lower envelope of the members' parabolas;
* Bayesian: a prior-weighted average of the members' means;
* Smooth: maximise ``sum_m w_m * phi(U_m(a))`` with ``phi(x) = -exp(-alpha x)/alpha``.

The first three are exact.  The smooth rule is the only floating-point
path and is solved by bisection on its derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    DEFAULT_TIEBREAK,
    MinimalFeasibleSet,
    Model,
    TieBreak,
    as_fraction,
)
from .errors import InputError, NumericError

RULE_KINDS = ("MLEU", "MEU", "Bayesian", "Smooth")


@dataclass(frozen=True)
class RuleSelector:
    """Which ambiguity rule the receiver uses, with its parameters.

    ``weights`` is the prior over models used by the Bayesian and smooth
    rules; models missing from it get weight 1, so ``None`` means uniform.
    """

    kind: str = "MLEU"
    weights: tuple[tuple[Model, Fraction], ...] | None = None
    smooth_alpha: float = 1.0
    tolerance: float = 1e-10

    def __post_init__(self):
        by_lower = {k.lower(): k for k in RULE_KINDS}
        kind = by_lower.get(str(self.kind).lower())
        if kind is None:
            raise InputError(f"unknown ambiguity rule {self.kind!r}; expected one of {RULE_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.weights is not None:
            pairs = self.weights.items() if isinstance(self.weights, Mapping) else self.weights
            norm = []
            for model, w in pairs:
                model = model if isinstance(model, Model) else Model.parse(str(model))
                w = as_fraction(w)
                if w <= 0:
                    raise InputError(f"weight of {model} must be positive, got {w}")
                norm.append((model, w))
            if len({m for m, _ in norm}) != len(norm):
                raise InputError("a model is weighted twice")
            object.__setattr__(self, "weights", tuple(sorted(norm)))
        if not (isinstance(self.smooth_alpha, (int, float)) and math.isfinite(self.smooth_alpha)):
            raise InputError(f"smooth_alpha must be a finite number, got {self.smooth_alpha!r}")
        if self.smooth_alpha <= 0:
            raise InputError(f"smooth_alpha must be positive, got {self.smooth_alpha}")
        if not (math.isfinite(self.tolerance) and self.tolerance > 0):
            raise InputError(f"tolerance must be positive, got {self.tolerance}")

    @property
    def exact(self) -> bool:
        return self.kind != "Smooth"

    def weight_map(self) -> dict[Model, Fraction] | None:
        return dict(self.weights) if self.weights is not None else None


MLEU = RuleSelector("MLEU")
MEU = RuleSelector("MEU")
BAYESIAN = RuleSelector("Bayesian")


# -- maximum likelihood -----------------------------------------------------


def mleu_choice(fset: MinimalFeasibleSet, tiebreak: TieBreak = DEFAULT_TIEBREAK):
    """The tiebreak-maximal most likely member, as ``(model, summary)``."""
    if tiebreak.type_level:
        best = min(fset.types(), key=lambda t: tiebreak.type_key(t.summary))
        model = min(best.members(fset.space.history))
        return model, best.summary
    return min(fset.members(), key=lambda p: tiebreak.model_key(*p))


def mleu_action(fset: MinimalFeasibleSet, tiebreak: TieBreak = DEFAULT_TIEBREAK) -> Fraction:
    if tiebreak.type_level:
        return min(fset.types(), key=lambda t: tiebreak.type_key(t.summary)).summary.mean
    return mleu_choice(fset, tiebreak)[1].mean


# -- max-min ----------------------------------------------------------------


def _envelope(points, a):
    return min(-(v + (m - a) ** 2) for m, v in points)


def meu_maximizer(points: Sequence[tuple[Fraction, Fraction]]) -> Fraction:
    """Exact maximiser of ``a -> min_i -(var_i + (mean_i - a)^2)``.

    The envelope is concave and piecewise quadratic; its maximum sits at a
    member mean or where two parabolas cross, and never outside the hull of
    the means.
    """
    pts = sorted(set((Fraction(m), Fraction(v)) for m, v in points))
    if not pts:
        raise InputError("MEU needs at least one member")
    lo, hi = pts[0][0], pts[-1][0]
    candidates = {m for m, _ in pts}
    for i, (mi, vi) in enumerate(pts):
        for mj, vj in pts[i + 1 :]:
            if mi == mj:
                continue
            # -(vi + (mi-a)^2) == -(vj + (mj-a)^2) is linear in a
            a = (mi + mj) / 2 + (vj - vi) / (2 * (mj - mi))
            if lo <= a <= hi:
                candidates.add(a)
    return max(sorted(candidates), key=lambda a: _envelope(pts, a))


def meu_action(fset: MinimalFeasibleSet) -> Fraction:
    return meu_maximizer([(t.summary.mean, t.summary.variance) for t in fset.types()])


# -- weighted rules ---------------------------------------------------------


def _weighted_members(fset: MinimalFeasibleSet, weights: Mapping[Model, Fraction] | None):
    """``(summary, weight)`` pairs; uniform weights aggregate per model type."""
    if weights is None:
        return [(t.summary, Fraction(t.count)) for t in fset.types()]
    return [(s, Fraction(weights.get(m, 1))) for m, s in fset.members()]


def bayesian_mean(points: Sequence[tuple[Fraction, Fraction]]) -> Fraction:
    """Weight-normalised average of ``(mean, weight)`` pairs."""
    total = sum((w for _, w in points), Fraction(0))
    if not points or total <= 0:
        raise InputError("Bayesian rule needs positive total weight")
    if any(w < 0 for _, w in points):
        raise InputError("Bayesian weights must be nonnegative")
    return sum((m * w for m, w in points), Fraction(0)) / total


def bayesian_action(fset: MinimalFeasibleSet, weights: Mapping[Model, Fraction] | None = None) -> Fraction:
    return bayesian_mean([(s.mean, w) for s, w in _weighted_members(fset, weights)])


def smooth_maximizer(points: Sequence[tuple[float, float, float]], alpha: float, tol: float) -> float:
    """Smooth-ambiguity best response for ``(mean, var, weight)`` members.

    The objective ``sum_m w_m * phi(-(var_m + (mean_m - a)^2))`` with
    ``phi(x) = -exp(-alpha*x)/alpha`` is strictly concave, so its maximiser
    is the unique zero of the derivative
    ``2 * sum_m w_m (mean_m - a) exp(alpha*(var_m + (mean_m - a)^2))``.
    Bisecting on the sign of that derivative is accurate to the last few
    ulps, unlike a search on objective values, which flattens near the top.
    Exponents are shifted by their maximum to avoid overflow.
    """
    pts = [(float(m), float(v), float(w)) for m, v, w in points]
    if not pts:
        raise InputError("smooth rule needs at least one member")
    if sum(w for _, _, w in pts) <= 0:
        raise InputError("smooth rule needs positive total weight")
    lo, hi = min(m for m, _, _ in pts), max(m for m, _, _ in pts)
    if lo == hi:
        return lo

    def slope(a):
        expo = [alpha * (v + (m - a) ** 2) for m, v, _ in pts]
        top = max(expo)
        val = sum(w * (m - a) * math.exp(e - top) for (m, _, w), e in zip(pts, expo))
        if not (math.isfinite(val) and math.isfinite(top)):
            raise NumericError(f"smooth objective is not finite at a={a}")
        return val

    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def smooth_action(
    fset: MinimalFeasibleSet,
    weights: Mapping[Model, Fraction] | None = None,
    smooth_alpha: float = 1.0,
    tolerance: float = 1e-10,
) -> float:
    pts = [(s.mean, s.variance, w) for s, w in _weighted_members(fset, weights)]
    return smooth_maximizer(pts, smooth_alpha, tolerance)


def best_response(rule: RuleSelector, fset: MinimalFeasibleSet, tiebreak: TieBreak = DEFAULT_TIEBREAK):
    """Receiver action for ``fset``: a Fraction, or a float for the smooth rule."""
    if rule.kind == "MLEU":
        return mleu_action(fset, tiebreak)
    if rule.kind == "MEU":
        return meu_action(fset)
    if rule.kind == "Bayesian":
        return bayesian_action(fset, rule.weight_map())
    return smooth_action(fset, rule.weight_map(), rule.smooth_alpha, rule.tolerance)

