"""Optimizing against no-regret learners in repeated games.

The optimizer is always the last player; learners are players ``0..n-2``.
"""

from .errors import (
    InternalInvariantError,
    InvalidConfigurationError,
    InvalidInputError,
    ParseError,
    UnsupportedSizeError,
)
from .game_model import (
    GameSpec,
    JointDistribution,
    MixedProfile,
    MixedStrategy,
    best_reply_set,
    expected_utility,
    induce_game,
)
from .games import builtin_game, ce1_game, ce2_game, random_game
from .learners import LearnerPolicy
from .simulation import OptimizerPolicy, compute_metrics, run, verify_guarantee

__all__ = [
    "GameSpec",
    "InternalInvariantError",
    "InvalidConfigurationError",
    "InvalidInputError",
    "JointDistribution",
    "LearnerPolicy",
    "MixedProfile",
    "MixedStrategy",
    "OptimizerPolicy",
    "ParseError",
    "UnsupportedSizeError",
    "best_reply_set",
    "builtin_game",
    "ce1_game",
    "ce2_game",
    "compute_metrics",
    "expected_utility",
    "induce_game",
    "random_game",
    "run",
    "verify_guarantee",
]
