"""Decision-making policies behind the ``next_action`` / ``observe`` interface."""

from .base import Policy, run_policy
from .baselines import OFUL, PlayHint, oful_factory, optimistic_ball_action
from .multihint import MultiHintBandit, check_negation_closed, with_negations
from .pareto import DEFAULT_W, FrontierBandit, ParetoBandit
from .switch import Switch
from .two_arm import HintFavoringTwoArm

__all__ = [
    "DEFAULT_W",
    "FrontierBandit",
    "HintFavoringTwoArm",
    "MultiHintBandit",
    "OFUL",
    "ParetoBandit",
    "PlayHint",
    "Policy",
    "Switch",
    "check_negation_closed",
    "oful_factory",
    "optimistic_ball_action",
    "run_policy",
    "with_negations",
]
