"""
Learner contract for the repeated Stackelberg protocol
Feedback variants, the abstract learner and the fixed-strategy baseline
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Type, TypeVar, Union

from src.core.config import PROFILE_CAP
from src.core.errors import FeedbackMismatch
from src.core.game import MixedStrategy, PublicView
from src.solvers.equilibrium import RegionCatalog

logger = logging.getLogger(__name__)


class FeedbackMode(str, Enum):
    TYPE = "type"
    ACTION = "action"


@dataclass(frozen=True)
class TypeFeedback:
    """The realized type profile θ^t"""
    theta: Tuple[int, ...]


@dataclass(frozen=True)
class ActionFeedback:
    """The followers' joint action, the sampled leader action and u(ℓ^t, a^t)"""
    actions: Tuple[int, ...]
    leader_action: int
    realized_utility: float

    def __post_init__(self):
        if not 0.0 <= self.realized_utility <= 1.0:
            raise ValueError(f"realized utility {self.realized_utility} outside [0, 1]")


Feedback = Union[TypeFeedback, ActionFeedback]
F = TypeVar('F', TypeFeedback, ActionFeedback)


class Learner(ABC):
    """
    Online leader algorithm.

    reset(view, T) starts an episode; each round the harness calls choose() and then
    observe(feedback). choose() never mutates state.
    """

    name = "learner"
    feedback_modes: Tuple[FeedbackMode, ...] = (FeedbackMode.TYPE, FeedbackMode.ACTION)

    def __init__(self, catalog: Optional[RegionCatalog] = None, profile_cap: int = PROFILE_CAP):
        self._shared_catalog = catalog
        self.profile_cap = profile_cap
        self.view: Optional[PublicView] = None
        self.catalog: Optional[RegionCatalog] = None
        self.horizon = 0
        self.rounds = 0

    def supports(self, mode: FeedbackMode) -> bool:
        return FeedbackMode(mode) in self.feedback_modes

    def reset(self, view: PublicView, T: int) -> None:
        if T < 1:
            raise ValueError(f"horizon must be at least 1, got {T}")
        self.view = view
        self.horizon = T
        self.rounds = 0
        self._reset_state()

    def _region_catalog(self) -> RegionCatalog:
        """Prebuilt catalog when it belongs to this game, otherwise a fresh one"""
        if self._shared_catalog is not None and self._shared_catalog.matches(self.view):
            return self._shared_catalog
        logger.debug(f"{self.name}: building region catalog")
        return RegionCatalog.build(self.view, profile_cap=self.profile_cap)

    def _reset_state(self) -> None:
        pass

    @abstractmethod
    def choose(self) -> MixedStrategy:
        ...

    def observe(self, feedback: Feedback) -> None:
        self._update(feedback)
        self.rounds += 1

    @abstractmethod
    def _update(self, feedback: Feedback) -> None:
        ...

    def _expect(self, feedback: Feedback, kind: Type[F]) -> F:
        if not isinstance(feedback, kind):
            raise FeedbackMismatch(f"{self.name} expects {kind.__name__}, got {type(feedback).__name__}")
        return feedback


class FixedStrategyLearner(Learner):
    """Plays the same strategy every round"""

    name = "fixed"

    def __init__(self, strategy: MixedStrategy):
        super().__init__()
        self.strategy = strategy

    def _reset_state(self) -> None:
        if self.strategy.L != self.view.L:
            raise ValueError(f"fixed strategy has {self.strategy.L} entries, game has L={self.view.L}")

    def choose(self) -> MixedStrategy:
        return self.strategy

    def _update(self, feedback: Feedback) -> None:
        pass
