"""Exact beta-binomial mathematics of the uniform-random-binomial game.

A *model* (narrative) is a subset of observation indices declared relevant
for the state.  Relevant observations are Bernoulli(theta) draws, the rest
are fair coin flips, and theta has a uniform prior.  Everything here is
exact: likelihoods, posterior moments and bliss points are ``Fraction``.

Models sharing a receiver bliss point (posterior mean) are grouped into
bliss classes.  Inside a class, models with the same number of relevant
observations and the same number of successes among them are
indistinguishable for every quantity the game uses; they form a
:class:`ModelType`, which lets the space be described without listing all
``2**K`` subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Sequence

from .errors import ContractViolation, InputError, ResourceLimitError

Rational = Fraction

DEFAULT_K_CAP = 25
HALF = Fraction(1, 2)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are rejected: every exact quantity must enter the solver exactly.
    """
    if isinstance(value, bool):
        raise InputError(f"not a rational number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed rational {value!r}") from exc
    raise InputError(f"expected an exact rational, got {type(value).__name__} {value!r}")


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# -- histories and models ---------------------------------------------------


@dataclass(frozen=True)
class History:
    """Observed outcomes ``h = (h_1, ..., h_K)``, each 0 or 1."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(self.bits)
        if not bits:
            raise InputError("history must contain at least one observation")
        if any(b not in (0, 1) or isinstance(b, bool) for b in bits):
            raise InputError(f"history entries must be 0 or 1, got {bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> History:
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise InputError(f"history string must be a non-empty bit string, got {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_sigma(cls, K: int, sigma: int) -> History:
        """Canonical representative: ``sigma`` ones followed by zeros."""
        if not isinstance(K, int) or K < 1:
            raise InputError(f"K must be a positive integer, got {K!r}")
        if not isinstance(sigma, int) or not 0 <= sigma <= K:
            raise InputError(f"h_sigma must lie in 0..{K}, got {sigma!r}")
        return cls((1,) * sigma + (0,) * (K - sigma))

    @property
    def K(self) -> int:
        return len(self.bits)

    @property
    def sigma(self) -> int:
        return sum(self.bits)

    @cached_property
    def ones(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits, start=1) if b)

    @cached_property
    def zeros(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits, start=1) if not b)

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True, order=True)
class Model:
    """Set of relevant observation indices (1-based)."""

    relevant: tuple[int, ...] = ()

    def __post_init__(self):
        rel = tuple(sorted(set(self.relevant)))
        if any(not isinstance(i, int) or i < 1 for i in rel):
            raise InputError(f"model indices must be positive integers, got {self.relevant!r}")
        object.__setattr__(self, "relevant", rel)

    @classmethod
    def parse(cls, text: str) -> Model:
        """Parse ``"{1,3}"``, ``"1,3"`` or ``"{}"``."""
        body = text.strip().strip("{}").strip()
        if not body:
            return cls(())
        try:
            return cls(tuple(int(tok) for tok in body.split(",")))
        except ValueError as exc:
            raise InputError(f"malformed model {text!r}") from exc

    @property
    def size(self) -> int:
        return len(self.relevant)

    def validate(self, K: int) -> None:
        if self.relevant and self.relevant[-1] > K:
            raise InputError(f"model {self} refers to observations beyond K={K}")

    def successes(self, history: History) -> int:
        self.validate(history.K)
        return sum(history.bits[i - 1] for i in self.relevant)

    def __str__(self):
        return "{" + ",".join(map(str, self.relevant)) + "}"


# -- posterior summaries ----------------------------------------------------


@dataclass(frozen=True)
class PosteriorSummary:
    successes: int
    size: int
    mean: Fraction
    variance: Fraction
    likelihood: Fraction


@lru_cache(maxsize=None)
def summary_for(successes: int, size: int, K: int) -> PosteriorSummary:
    """Posterior of theta after ``successes`` out of ``size`` relevant draws.

    The likelihood integrates theta out against the uniform prior and
    multiplies by ``(1/2)**(K - size)`` for the irrelevant coin flips.
    """
    s, k = successes, size
    if not (0 <= s <= k <= K):
        raise InputError(f"need 0 <= s <= #m <= K, got s={s}, #m={k}, K={K}")
    mean = Fraction(s + 1, k + 2)
    variance = Fraction((s + 1) * (k - s + 1), (k + 2) ** 2 * (k + 3))
    likelihood = Fraction(factorial(s) * factorial(k - s), factorial(k + 1) * 2 ** (K - k))
    return PosteriorSummary(s, k, mean, variance, likelihood)


def likelihood(m: Model, history: History) -> Fraction:
    """``Pr(h | m)`` under the uniform prior."""
    return summary_for(m.successes(history), m.size, history.K).likelihood


def posterior_summary(m: Model, history: History) -> PosteriorSummary:
    return summary_for(m.successes(history), m.size, history.K)


def expected_sender_utility(mean, variance, a, b) -> Fraction:
    """``E[-(theta + b - a)^2]`` from the first two posterior moments."""
    return -(variance + (mean + b - a) ** 2)


def expected_receiver_utility(mean, variance, a) -> Fraction:
    return expected_sender_utility(mean, variance, a, 0)


# -- tie-breaking for maximum-likelihood selection --------------------------


@dataclass(frozen=True)
class TieBreak:
    """Strict order used by MLEU to pick among equally likely models.

    Likelihood always ranks first, so every policy respects expected fit.
    ``default`` then prefers more relevant observations, a higher posterior
    mean and finally the lexicographically smaller index set.
    ``fewer_relevant`` flips the second criterion.  ``explicit`` ranks
    listed models (earlier wins) ahead of unlisted ones, which fall back
    to the default order.
    """

    policy: str = "default"
    order: tuple[Model, ...] = ()

    def __post_init__(self):
        if self.policy not in ("default", "fewer_relevant", "explicit"):
            raise InputError(f"unknown tiebreak policy {self.policy!r}")
        if self.policy == "explicit":
            if not self.order:
                raise InputError("explicit tiebreak needs a non-empty model order")
            if len(set(self.order)) != len(self.order):
                raise InputError("explicit tiebreak order lists a model twice")
        elif self.order:
            raise InputError("model order is only meaningful for the explicit policy")

    @cached_property
    def _rank(self) -> dict[Model, int]:
        return {m: i for i, m in enumerate(self.order)}

    @property
    def type_level(self) -> bool:
        """Whether the choice depends only on (successes, #m)."""
        return self.policy != "explicit"

    def type_key(self, summary: PosteriorSummary) -> tuple:
        k = summary.size if self.policy == "fewer_relevant" else -summary.size
        return (-summary.likelihood, k, -summary.mean)

    def model_key(self, model: Model, summary: PosteriorSummary) -> tuple:
        """Sort key; the minimum is the preferred model."""
        base = self.type_key(summary)
        if self.policy == "explicit":
            rank = self._rank.get(model, len(self.order))
            return (base[0], rank, -summary.size, -summary.mean, model.relevant)
        return base + (model.relevant,)


DEFAULT_TIEBREAK = TieBreak()


# -- model space ------------------------------------------------------------


@dataclass(frozen=True)
class ModelType:
    """All models with ``successes`` ones among ``size`` relevant indices."""

    successes: int
    size: int
    count: int
    summary: PosteriorSummary

    def members(self, history: History) -> Iterator[Model]:
        for ones in itertools.combinations(history.ones, self.successes):
            for zeros in itertools.combinations(history.zeros, self.size - self.successes):
                yield Model(ones + zeros)


@dataclass(frozen=True)
class BlissClass:
    """Models sharing one receiver bliss point, i.e. one posterior mean."""

    index: int
    mean: Fraction
    types: tuple[ModelType, ...]
    history: History = field(repr=False)
    tiebreak: TieBreak = field(default=DEFAULT_TIEBREAK, repr=False)

    @property
    def n_models(self) -> int:
        return sum(t.count for t in self.types)

    @cached_property
    def members(self) -> tuple[tuple[Model, PosteriorSummary], ...]:
        pairs = [(m, t.summary) for t in self.types for m in t.members(self.history)]
        pairs.sort(key=lambda p: self.tiebreak.model_key(*p))
        return tuple(pairs)

    @property
    def models(self) -> tuple[Model, ...]:
        return tuple(m for m, _ in self.members)

    @property
    def max_variance(self) -> Fraction:
        return max(t.summary.variance for t in self.types)


@dataclass(frozen=True)
class ModelSpace:
    """Ordered bliss classes of ``2**{1..K}`` (optionally without the empty model)."""

    history: History
    classes: tuple[BlissClass, ...]
    tiebreak: TieBreak = DEFAULT_TIEBREAK
    exclude_empty: bool = False

    def __len__(self):
        return len(self.classes)

    def __getitem__(self, i):
        return self.classes[i]

    def __iter__(self):
        return iter(self.classes)

    @property
    def K(self) -> int:
        return self.history.K

    @cached_property
    def means(self) -> tuple[Fraction, ...]:
        return tuple(c.mean for c in self.classes)

    @cached_property
    def _index_by_mean(self) -> dict[Fraction, int]:
        return {c.mean: c.index for c in self.classes}

    @property
    def n_models(self) -> int:
        return sum(c.n_models for c in self.classes)

    def contains(self, model: Model) -> bool:
        model.validate(self.K)
        return not (self.exclude_empty and model.size == 0)

    def class_index(self, model: Model) -> int:
        if not self.contains(model):
            raise InputError(f"model {model} is not part of this model space")
        return self._index_by_mean[posterior_summary(model, self.history).mean]

    def class_of_mean(self, mean) -> int:
        try:
            return self._index_by_mean[Fraction(mean)]
        except KeyError:
            raise InputError(f"no bliss class with mean {mean}") from None

    def models(self) -> Iterator[Model]:
        """Every model, by class then tiebreak order."""
        for c in self.classes:
            yield from c.models

    def types(self) -> Iterator[tuple[int, ModelType]]:
        for c in self.classes:
            for t in c.types:
                yield c.index, t


def _coerce_history(history) -> History:
    if isinstance(history, History):
        return history
    if isinstance(history, str):
        return History.from_string(history)
    return History(tuple(history))


def build_model_space(
    K: int,
    history,
    *,
    tiebreak: TieBreak = DEFAULT_TIEBREAK,
    exclude_empty: bool = False,
    k_cap: int = DEFAULT_K_CAP,
) -> ModelSpace:
    """Group all models into bliss classes sorted by strictly ascending mean."""
    history = _coerce_history(history)
    if not isinstance(K, int) or K < 1:
        raise InputError(f"K must be a positive integer, got {K!r}")
    if history.K != K:
        raise InputError(f"history has {history.K} observations, expected K={K}")
    if K > k_cap:
        raise ResourceLimitError(f"K={K} exceeds the configured cap {k_cap}")
    ones, zeros = history.sigma, K - history.sigma
    by_mean: dict[Fraction, list[ModelType]] = {}
    for k in range(K + 1):
        for s in range(max(0, k - zeros), min(k, ones) + 1):
            if exclude_empty and k == 0:
                continue
            summ = summary_for(s, k, K)
            mtype = ModelType(s, k, comb(ones, s) * comb(zeros, k - s), summ)
            by_mean.setdefault(summ.mean, []).append(mtype)
    classes = []
    for i, mean in enumerate(sorted(by_mean)):
        types = sorted(by_mean[mean], key=lambda t: tiebreak.type_key(t.summary))
        classes.append(BlissClass(i, mean, tuple(types), history, tiebreak))
    return ModelSpace(history, tuple(classes), tiebreak, exclude_empty)


# -- minimal feasible sets and belief updating ------------------------------


@dataclass(frozen=True)
class MinimalFeasibleSet:
    """Contiguous run ``lo..hi`` (inclusive) of bliss classes."""

    space: ModelSpace
    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi < len(self.space)):
            raise ContractViolation(
                f"feasible set {self.lo}..{self.hi} is not a nonempty range of "
                f"{len(self.space)} classes"
            )

    @property
    def classes(self) -> tuple[BlissClass, ...]:
        return self.space.classes[self.lo : self.hi + 1]

    @property
    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def types(self) -> Iterator[ModelType]:
        for c in self.classes:
            yield from c.types

    def members(self) -> Iterator[tuple[Model, PosteriorSummary]]:
        for c in self.classes:
            yield from c.members

    @property
    def min_mean(self) -> Fraction:
        return self.space[self.lo].mean

    @property
    def max_mean(self) -> Fraction:
        return self.space[self.hi].mean


def ds_update(space: ModelSpace, preimage: Iterable) -> MinimalFeasibleSet:
    """Minimal feasible set after a message whose preimage is ``preimage``.

    Under the vacuous initial capacity the Dempster-Shafer posterior puts
    all mass on the preimage itself, so the update reduces to validating
    it.  ``preimage`` holds class indices or :class:`Model` objects; model
    lists must cover whole bliss classes.
    """
    items = list(preimage)
    if not items:
        raise ContractViolation("message preimage is empty")
    if all(isinstance(x, Model) for x in items):
        if len(set(items)) != len(items):
            raise ContractViolation("message preimage lists a model twice")
        given = set(items)
        idx = {space.class_index(m) for m in items}
        for i in idx:
            missing = [m for m in space[i].models if m not in given]
            if missing:
                raise ContractViolation(
                    f"preimage splits bliss class {space[i].mean} (missing {missing[0]})"
                )
    elif all(isinstance(x, int) and not isinstance(x, bool) for x in items):
        idx = set(items)
    else:
        raise ContractViolation("preimage must list class indices or models, not a mix")
    lo, hi = min(idx), max(idx)
    if len(idx) != hi - lo + 1:
        raise ContractViolation(f"preimage classes {sorted(idx)} are not contiguous")
    return MinimalFeasibleSet(space, lo, hi)


def vacuous_capacity(universe: frozenset):
    """Initial belief: full weight on the whole space, nothing on proper subsets."""
    return lambda event: 1 if frozenset(event) >= universe else 0


def dempster_shafer_posterior(universe: frozenset, preimage: frozenset, event: frozenset) -> Fraction:
    mu0 = vacuous_capacity(universe)
    comp = universe - preimage
    den = 1 - mu0(comp)
    return Fraction(mu0(event | comp) - mu0(comp), den)


def full_bayesian_posterior(universe: frozenset, preimage: frozenset, event: frozenset) -> Fraction:
    """Full Bayesian capacity update, with the convention 0/0 = 1."""
    mu0 = vacuous_capacity(universe)
    num = mu0(event & preimage)
    den = num + 1 - mu0(event | (universe - preimage))
    if den == 0:  # forces num == 0 as well
        return Fraction(1)
    return Fraction(num, den)


def minimal_feasible_from_capacity(universe: Sequence, capacity) -> frozenset:
    """Smallest event of posterior capacity one (the intersection of all such events)."""
    universe = list(universe)
    result = frozenset(universe)
    for r in range(len(universe) + 1):
        for event in itertools.combinations(universe, r):
            if capacity(frozenset(event)) == 1:
                result &= frozenset(event)
    return result
