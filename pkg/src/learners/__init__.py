from src.learners.base import ActionFeedback, FeedbackMode, FixedStrategyLearner, Learner, TypeFeedback
from src.learners.factory import create_learner

__all__ = [
    "ActionFeedback",
    "FeedbackMode",
    "FixedStrategyLearner",
    "Learner",
    "TypeFeedback",
    "create_learner",
]
