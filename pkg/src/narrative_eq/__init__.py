"""Cheap-talk equilibria when the receiver weighs competing narratives.

Exact (rational) solvers for the uniform-random-binomial game: posterior
summaries of models, receiver rules under ambiguity, enumeration of
partition equilibria, informativeness thresholds in the sender's bias and
a comparison with a naive receiver.
"""

from .bounds import (
    BiasInterval,
    BoundsReport,
    closed_form_bounds,
    compute_V,
    feasible_bias_interval,
    informative_set,
    lower_bound,
    upper_bound,
)
from .core import (
    DEFAULT_TIEBREAK,
    BlissClass,
    History,
    MinimalFeasibleSet,
    Model,
    ModelSpace,
    PosteriorSummary,
    TieBreak,
    build_model_space,
    ds_update,
    likelihood,
    posterior_summary,
)
from .engine import (
    EquilibriumReport,
    PartitionProfile,
    check_equilibrium,
    enumerate_equilibria,
    make_profile,
    max_steps,
    most_informative,
    reduce_step,
)
from .errors import (
    ContractViolation,
    DegenerateCaseError,
    InputError,
    InvariantError,
    NarrativeEqError,
    NumericError,
    ResourceLimitError,
)
from .naive import PersuasionReport, naive_best_proposal, naive_response, persuasion_sets
from .rules import BAYESIAN, MEU, MLEU, RuleSelector, best_response
from .scenario import Game, Scenario

__all__ = [name for name in dir() if not name.startswith("_")]
