"""
Learner construction from command-line style names
"""
from typing import Dict, Optional, Type

from src.core.config import OFUL_CAP, PROFILE_CAP
from src.core.game import MixedStrategy
from src.learners.base import FeedbackMode, FixedStrategyLearner, Learner
from src.learners.linear_bandit import ActionFeedbackLinBandit
from src.learners.type_feedback import TypeFeedbackGeneral, TypeFeedbackIndependent
from src.learners.ucb import ActionFeedbackUCB
from src.solvers.equilibrium import RegionCatalog

LEARNERS: Dict[str, Type[Learner]] = {
    TypeFeedbackGeneral.name: TypeFeedbackGeneral,
    TypeFeedbackIndependent.name: TypeFeedbackIndependent,
    ActionFeedbackUCB.name: ActionFeedbackUCB,
    ActionFeedbackLinBandit.name: ActionFeedbackLinBandit,
}


def parse_fixed_strategy(spec: str) -> MixedStrategy:
    """'fixed:0,1' or 'fixed:0.25,0.75' -> the strategy after the colon"""
    _, _, values = spec.partition(':')
    try:
        probs = [float(v) for v in values.split(',') if v.strip()]
    except ValueError as e:
        raise ValueError(f"invalid fixed strategy '{spec}': {e}")
    if not probs:
        raise ValueError(f"fixed learner needs a strategy, e.g. fixed:0,1 (got '{spec}')")
    return MixedStrategy(probs)


def create_learner(spec: str, catalog: Optional[RegionCatalog] = None, profile_cap: int = PROFILE_CAP,
                   oful_cap: int = OFUL_CAP) -> Learner:
    """Build a learner from its name; a shared catalog avoids re-enumerating regions"""
    if spec.startswith(FixedStrategyLearner.name + ':'):
        return FixedStrategyLearner(parse_fixed_strategy(spec))
    if spec not in LEARNERS:
        raise ValueError(f"unknown learner '{spec}', expected one of {sorted(LEARNERS)} or fixed:X")
    if spec == ActionFeedbackLinBandit.name:
        return ActionFeedbackLinBandit(catalog=catalog, profile_cap=profile_cap, oful_cap=oful_cap)
    return LEARNERS[spec](catalog=catalog, profile_cap=profile_cap)


def default_feedback(spec: str) -> FeedbackMode:
    """Feedback mode a learner runs under when none is given"""
    if spec.startswith(FixedStrategyLearner.name + ':'):
        return FeedbackMode.TYPE
    return LEARNERS[spec].feedback_modes[0]
