"""
Linear-bandit learner for action feedback
OFUL over the loss vectors φ(x) of region vertices; the expected loss of x is ⟨φ(x), D⟩
"""
import logging
from typing import List

import numpy as np

from src.core.config import OFUL_CAP, PROFILE_CAP
from src.core.errors import ProfileCapExceeded
from src.core.game import BestResponder, MixedStrategy, PublicView
from src.learners.base import ActionFeedback, Feedback, FeedbackMode, Learner
from src.solvers.equilibrium import RegionCatalog

logger = logging.getLogger(__name__)

ARM_DEDUP_TOL = 1e-12


def phi_map(view: PublicView, x: MixedStrategy, oful_cap: int = OFUL_CAP) -> np.ndarray:
    """Loss vector over all K^n profiles (row-major): entry θ is −u(x, br(x, θ))"""
    d = view.K ** view.n
    if d > oful_cap:
        raise ProfileCapExceeded(f"K^n = {d} exceeds oful_cap {oful_cap}")
    return -BestResponder(view, x).profile_payoffs(profile_cap=d)


class ActionFeedbackLinBandit(Learner):
    """
    OFUL with ridge parameter λ, confidence δ = 1/T, ‖D‖ ≤ S and noise bound R.

    Each round plays the arm minimizing ⟨φ, D̂⟩ − β‖φ‖_{V⁻¹}; the gram inverse and its
    log-determinant are updated incrementally.
    """

    name = "linbandit"
    feedback_modes = (FeedbackMode.ACTION,)

    def __init__(self, catalog: RegionCatalog = None, profile_cap: int = PROFILE_CAP, oful_cap: int = OFUL_CAP,
                 ridge: float = 1.0, norm_bound: float = 1.0, noise_bound: float = 1.0):
        super().__init__(catalog=catalog, profile_cap=profile_cap)
        self.oful_cap = oful_cap
        self.ridge = ridge
        self.norm_bound = norm_bound
        self.noise_bound = noise_bound

    def _reset_state(self) -> None:
        view = self.view
        d = view.K ** view.n
        if d > self.oful_cap:
            raise ProfileCapExceeded(f"linear bandit dimension K^n = {d} exceeds oful_cap {self.oful_cap}")
        self.catalog = self._region_catalog()

        strategies: List[MixedStrategy] = []
        features: List[np.ndarray] = []
        for x in self.catalog.all_vertices():
            phi = phi_map(view, x, self.oful_cap)
            if any(np.max(np.abs(phi - f)) <= ARM_DEDUP_TOL for f in features):
                continue
            strategies.append(x)
            features.append(phi)
        self.arms = strategies
        self.features = np.array(features)
        logger.debug(f"{self.name}: {len(self.arms)} arms in dimension {d}")

        self.delta = 1.0 / self.horizon
        self.gram_inv = np.eye(d) / self.ridge
        self.log_det = d * np.log(self.ridge)
        self.response = np.zeros(d)

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def gram_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.gram_inv)

    def estimate(self) -> np.ndarray:
        """Ridge estimate D̂ = V⁻¹b"""
        return self.gram_inv @ self.response

    def confidence_radius(self) -> float:
        """β = R·√(2·log(det(V)^½ / (λ^{d/2}·δ))) + √λ·S"""
        d = self.dimension
        log_ratio = 0.5 * self.log_det - 0.5 * d * np.log(self.ridge) - np.log(self.delta)
        return self.noise_bound * np.sqrt(2 * max(log_ratio, 0.0)) + np.sqrt(self.ridge) * self.norm_bound

    def _select(self) -> int:
        widths = np.sqrt(np.einsum('ad,de,ae->a', self.features, self.gram_inv, self.features))
        scores = self.features @ self.estimate() - self.confidence_radius() * widths
        return int(np.flatnonzero(scores <= scores.min())[0])

    def choose(self) -> MixedStrategy:
        return self.arms[self._select()]

    def _update(self, feedback: Feedback) -> None:
        realized = self._expect(feedback, ActionFeedback).realized_utility
        phi = self.features[self._select()]
        v_phi = self.gram_inv @ phi
        denominator = 1.0 + phi @ v_phi
        self.gram_inv -= np.outer(v_phi, v_phi) / denominator
        self.log_det += np.log(denominator)
        self.response += phi * (-realized)
