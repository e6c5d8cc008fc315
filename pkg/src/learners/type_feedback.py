"""
Type-feedback learners
The leader sees the realized type profile after every round
"""
import logging

import numpy as np

from src.core.distributions import check_profile_cap, product_distribution, profile_index
from src.core.game import MixedStrategy
from src.learners.base import Feedback, FeedbackMode, Learner, TypeFeedback

logger = logging.getLogger(__name__)


class TypeFeedbackGeneral(Learner):
    """Plays the empirically optimal strategy against all observed type profiles"""

    name = "tf-general"
    feedback_modes = (FeedbackMode.TYPE,)

    def _reset_state(self) -> None:
        view = self.view
        check_profile_cap(view.n, view.K, self.profile_cap)
        self.catalog = self._region_catalog()
        self.counts = np.zeros(view.K ** view.n)

    def choose(self) -> MixedStrategy:
        if self.rounds == 0:
            return MixedStrategy.uniform(self.view.L)
        return self.catalog.best(self.counts / self.rounds).x_star

    def _update(self, feedback: Feedback) -> None:
        theta = self._expect(feedback, TypeFeedback).theta
        self.counts[profile_index(theta, self.view.K)] += 1


class TypeFeedbackIndependent(Learner):
    """
    Learner for independent type distributions.

    Keeps per-follower type counts and best-responds to the product of the empirical
    marginals, which covers profiles never observed jointly.
    """

    name = "tf-independent"
    feedback_modes = (FeedbackMode.TYPE,)

    def _reset_state(self) -> None:
        view = self.view
        check_profile_cap(view.n, view.K, self.profile_cap)
        self.catalog = self._region_catalog()
        self.type_counts = np.zeros((view.n, view.K))

    def empirical_marginals(self) -> np.ndarray:
        return self.type_counts / self.rounds

    def choose(self) -> MixedStrategy:
        if self.rounds == 0:
            return MixedStrategy.uniform(self.view.L)
        joint = product_distribution(self.empirical_marginals(), profile_cap=self.profile_cap).joint()
        return self.catalog.best(joint).x_star

    def _update(self, feedback: Feedback) -> None:
        theta = self._expect(feedback, TypeFeedback).theta
        self.type_counts[np.arange(self.view.n), list(theta)] += 1
