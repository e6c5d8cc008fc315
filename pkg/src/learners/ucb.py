"""
UCB over best-response regions for action feedback
Each region is an arm; its payoff estimate is the best strategy against the action profiles seen there
"""
import logging
from typing import Tuple

import numpy as np

from src.core.errors import HorizonTooSmall
from src.core.game import MixedStrategy
from src.learners.base import ActionFeedback, Feedback, FeedbackMode, Learner

logger = logging.getLogger(__name__)


def ucb_bonus(N: int, T: int, L: int) -> float:
    """Confidence width √(4(L+1)·ln(3T)/N) for a region visited N times"""
    if N < 1:
        raise ValueError("bonus needs at least one visit")
    return float(np.sqrt(4 * (L + 1) * np.log(3 * T) / N))


class ActionFeedbackUCB(Learner):
    """
    Optimistic region selection.

    Arms are the regions with a settled point, i.e. a strategy the tie rule maps into the
    region; boundary regions the rule never selects cannot be played and are left out.
    The first rounds play every arm's settled witness in enumeration order; afterwards the
    arm maximizing (empirical optimum + bonus) is played at its empirical optimum, which
    is always a settled point, so the action profiles credited to a region come from
    strategies inside it.
    """

    name = "ucb"
    feedback_modes = (FeedbackMode.ACTION,)

    def _reset_state(self) -> None:
        self.catalog = self._region_catalog()
        self.arms = self.catalog.selectable()
        if self.horizon < len(self.arms):
            raise HorizonTooSmall(f"UCB needs T >= number of playable regions ({len(self.arms)}), got T={self.horizon}")
        skipped = len(self.catalog) - len(self.arms)
        if skipped:
            logger.info(f"UCB leaves out {skipped} of {len(self.catalog)} regions that the tie rule never selects")
        num_regions = len(self.catalog)
        self.visits = np.zeros(num_regions, dtype=int)
        # payoff_sums[r] = Σ over samples credited to r of (u(ℓ, a^s))_ℓ
        self.payoff_sums = np.zeros((num_regions, self.view.L))
        self.estimates = {r: (self.catalog.region_points[r][0], 0.0) for r in self.arms}

    def upper_confidence_bounds(self) -> np.ndarray:
        """û(W) + bonus(N(W)) per region, −inf for regions that are not arms (requires every arm visited)"""
        bounds = np.full(len(self.catalog), -np.inf)
        for r in self.arms:
            bounds[r] = self.estimates[r][1] + ucb_bonus(int(self.visits[r]), self.horizon, self.view.L)
        return bounds

    def _select(self) -> Tuple[int, MixedStrategy]:
        if self.rounds < len(self.arms):
            r = self.arms[self.rounds]
            return r, self.estimates[r][0]
        bounds = self.upper_confidence_bounds()
        r = int(np.flatnonzero(bounds >= bounds.max())[0])
        return r, self.estimates[r][0]

    def selected_region(self) -> int:
        return self._select()[0]

    def choose(self) -> MixedStrategy:
        return self._select()[1]

    def _update(self, feedback: Feedback) -> None:
        actions = self._expect(feedback, ActionFeedback).actions
        r, _ = self._select()
        self.visits[r] += 1
        self.payoff_sums[r] += self.view.leader_payoffs(actions)
        objective = self.payoff_sums[r] / self.visits[r]
        self.estimates[r] = self.catalog.region_optimum(r, objective)
