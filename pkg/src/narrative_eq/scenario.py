"""Game instances: a history plus the receiver's rule, with or without a bias."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

from .core import (
    DEFAULT_K_CAP,
    DEFAULT_TIEBREAK,
    History,
    MinimalFeasibleSet,
    ModelSpace,
    TieBreak,
    as_fraction,
    build_model_space,
)
from .errors import InputError, ResourceLimitError
from .rules import MLEU, RuleSelector, best_response

DEFAULT_CLASS_CAP = 22
CAP_ENV_VAR = "NARRATIVE_EQ_CAP"


def default_class_cap() -> int:
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_CLASS_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise InputError(f"{CAP_ENV_VAR} must be positive, got {cap}")
    return cap


@dataclass(frozen=True)
class Game:
    """Everything about an instance except the sender's bias.

    Receiver actions depend only on the feasible set, never on the bias, so
    they are computed once per class range and cached here.
    """

    history: History
    rule: RuleSelector = MLEU
    tiebreak: TieBreak = DEFAULT_TIEBREAK
    exclude_empty: bool = False
    class_cap: int | None = None
    k_cap: int = DEFAULT_K_CAP
    workers: int = 1
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.history, History):
            object.__setattr__(self, "history", History(tuple(self.history)))
        if self.class_cap is None:
            object.__setattr__(self, "class_cap", default_class_cap())
        if not isinstance(self.workers, int) or self.workers < 1:
            raise InputError(f"worker count must be a positive integer, got {self.workers!r}")

    @classmethod
    def from_sigma(cls, K: int, sigma: int, **kwargs) -> Game:
        return cls(History.from_sigma(K, sigma), **kwargs)

    @property
    def K(self) -> int:
        return self.history.K

    @cached_property
    def space(self) -> ModelSpace:
        return build_model_space(
            self.K,
            self.history,
            tiebreak=self.tiebreak,
            exclude_empty=self.exclude_empty,
            k_cap=self.k_cap,
        )

    @property
    def n_classes(self) -> int:
        return len(self.space)

    @property
    def means(self) -> tuple[Fraction, ...]:
        return self.space.means

    def require_enumerable(self) -> None:
        if self.n_classes > self.class_cap:
            raise ResourceLimitError(
                f"{self.n_classes} bliss classes exceed the enumeration cap {self.class_cap}; "
                "use the bounds module (lower_bound, or upper_bound with method='two_step') "
                f"or raise the cap via {CAP_ENV_VAR}"
            )

    def feasible_set(self, lo: int, hi: int) -> MinimalFeasibleSet:
        return MinimalFeasibleSet(self.space, lo, hi)

    def action(self, lo: int, hi: int):
        """Receiver best response to the classes ``lo..hi``."""
        key = (lo, hi)
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = best_response(self.rule, self.feasible_set(lo, hi), self.tiebreak)
        self._cache[key] = value
        return value

    def with_bias(self, bias) -> Scenario:
        return Scenario(self, bias)

    def replace(self, **changes) -> Game:
        return replace(self, **changes)


@dataclass(frozen=True)
class Scenario:
    """A full game instance: the bias-free :class:`Game` plus the bias ``b > 0``."""

    game: Game
    bias: Fraction

    def __post_init__(self):
        b = as_fraction(self.bias)
        if b <= 0:
            raise InputError(f"sender bias must be positive, got {b}")
        object.__setattr__(self, "bias", b)

    @classmethod
    def create(cls, history, bias, **kwargs) -> Scenario:
        """Build from a :class:`History`, a bit string or bit sequence."""
        if isinstance(history, str):
            history = History.from_string(history)
        elif not isinstance(history, History):
            history = History(tuple(history))
        return cls(Game(history, **kwargs), bias)

    @classmethod
    def from_sigma(cls, K: int, sigma: int, bias, **kwargs) -> Scenario:
        return cls(Game.from_sigma(K, sigma, **kwargs), bias)

    @property
    def history(self) -> History:
        return self.game.history

    @property
    def K(self) -> int:
        return self.game.K

    @property
    def rule(self) -> RuleSelector:
        return self.game.rule

    @property
    def tiebreak(self) -> TieBreak:
        return self.game.tiebreak

    @property
    def space(self) -> ModelSpace:
        return self.game.space
