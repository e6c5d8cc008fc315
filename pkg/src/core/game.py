"""
Multi-follower Bayesian Stackelberg game model
Instances, leader mixed strategies, follower best responses and leader utilities
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import PROFILE_CAP
from src.core.distributions import TypeDistribution, profile_digits
from src.core.errors import InstanceValidationError, ShapeMismatch

logger = logging.getLogger(__name__)

EPS_SIMPLEX = 1e-9
EPS_TIE = 1e-9
JOINT_CANDIDATE_CAP = 10**4
DENSE_LEADER_CAP = 10**6

TypeProfile = Tuple[int, ...]
ActionProfile = Tuple[int, ...]
LeaderEvaluator = Callable[[ActionProfile], Sequence[float]]


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """A point on the leader's L-simplex"""
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).ravel()
        if probs.size < 1 or not np.all(np.isfinite(probs)):
            raise ValueError("mixed strategy needs finite entries")
        if np.any(probs < -EPS_SIMPLEX):
            raise ValueError(f"mixed strategy has negative entries: {probs}")
        probs = np.clip(probs, 0.0, None)
        if abs(probs.sum() - 1.0) > EPS_SIMPLEX:
            raise ValueError(f"mixed strategy sums to {probs.sum()}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def uniform(cls, L: int) -> "MixedStrategy":
        return cls(np.full(L, 1.0 / L))

    @classmethod
    def vertex(cls, L: int, action: int) -> "MixedStrategy":
        probs = np.zeros(L)
        probs[action] = 1.0
        return cls(probs)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "MixedStrategy":
        """Clamp tiny negatives and renormalize (for solver output)"""
        probs = np.clip(np.asarray(values, dtype=float).ravel(), 0.0, None)
        return cls(probs / probs.sum())

    @property
    def L(self) -> int:
        return self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, action: int) -> float:
        return float(self.probs[action])

    def __repr__(self) -> str:
        return "MixedStrategy(" + ", ".join(f"{p:.6g}" for p in self.probs) + ")"


def _leader_table(leader_utility, n: int, L: int, A: int) -> np.ndarray:
    """Normalize a dense leader table to shape (A^n, L)"""
    table = np.asarray(leader_utility, dtype=float)
    if table.size != (A ** n) * L:
        raise ShapeMismatch(f"leader table has {table.size} entries, expected A^n * L = {A ** n * L}")
    return table.reshape(A ** n, L)


@dataclass(frozen=True, eq=False)
class PublicView:
    """Everything the learners may see: sizes and utilities, no distribution"""
    n: int
    L: int
    A: int
    K: int
    follower_utilities: np.ndarray
    leader_table: Optional[np.ndarray] = None
    leader_evaluator: Optional[LeaderEvaluator] = field(default=None, repr=False)
    # rank[i, k, a] among tied best responses, lower wins; None means leader-favorable ties
    tie_preference: Optional[np.ndarray] = None

    def __post_init__(self):
        n, L, A, K = self.n, self.L, self.A, self.K
        if n < 1 or L < 2 or A < 2 or K < 1:
            raise InstanceValidationError(f"need n>=1, L>=2, A>=2, K>=1, got n={n}, L={L}, A={A}, K={K}")
        follower = np.array(self.follower_utilities, dtype=float)
        if follower.shape != (n, L, A, K):
            raise ShapeMismatch(f"follower utilities have shape {follower.shape}, expected {(n, L, A, K)}")
        _check_unit_range(follower, "follower utilities")
        follower.setflags(write=False)
        object.__setattr__(self, 'follower_utilities', follower)

        if self.leader_table is not None:
            table = _leader_table(self.leader_table, n, L, A).copy()
            _check_unit_range(table, "leader utility")
            table.setflags(write=False)
            object.__setattr__(self, 'leader_table', table)
        elif self.leader_evaluator is None:
            raise InstanceValidationError("a leader utility table or evaluator is required")
        elif A ** n <= DENSE_LEADER_CAP:
            logger.debug(f"Leader evaluator supplied although A^n = {A ** n} fits a dense table")

        if self.tie_preference is not None:
            ranks = np.array(self.tie_preference, dtype=int)
            if ranks.shape != (n, K, A):
                raise ShapeMismatch(f"tie preference has shape {ranks.shape}, expected {(n, K, A)}")
            ranks.setflags(write=False)
            object.__setattr__(self, 'tie_preference', ranks)

    @property
    def is_dense(self) -> bool:
        return self.leader_table is not None

    @property
    def leader_favorable(self) -> bool:
        return self.tie_preference is None

    def action_index(self, actions: Sequence[int]) -> int:
        """Row-major index of a joint action, follower 0 most significant"""
        index = 0
        for a in actions:
            index = index * self.A + int(a)
        return index

    def leader_payoffs(self, actions: Sequence[int]) -> np.ndarray:
        """Vector (u(ℓ, a))_ℓ for a joint action a"""
        if self.leader_table is not None:
            return self.leader_table[self.action_index(actions)]
        payoffs = np.asarray(self.leader_evaluator(tuple(int(a) for a in actions)), dtype=float)
        if payoffs.shape != (self.L,):
            raise ShapeMismatch(f"leader evaluator returned shape {payoffs.shape}, expected ({self.L},)")
        return payoffs

    def follower_expected_utilities(self, x: MixedStrategy) -> np.ndarray:
        """Array E[i, a, k] = Σ_ℓ x(ℓ)·v[i][ℓ][a][k]"""
        return np.einsum('l,ilak->iak', x.probs, self.follower_utilities)


def _check_unit_range(table: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(table)):
        raise InstanceValidationError(f"{name} contain NaN or infinite values")
    if table.min() < 0.0 or table.max() > 1.0:
        raise InstanceValidationError(f"{name} must lie in [0, 1], got range [{table.min()}, {table.max()}]")


@dataclass(frozen=True, eq=False)
class GameInstance:
    """A full game: the public view plus the hidden type distribution"""
    view: PublicView
    distribution: TypeDistribution

    def __post_init__(self):
        if self.distribution.n != self.view.n or self.distribution.K != self.view.K:
            raise ShapeMismatch(
                f"distribution shape (n={self.distribution.n}, K={self.distribution.K}) "
                f"does not match instance (n={self.view.n}, K={self.view.K})"
            )

    @classmethod
    def from_tables(cls, leader_utility, follower_utilities, distribution: TypeDistribution,
                    leader_evaluator: Optional[LeaderEvaluator] = None,
                    tie_preference: Optional[np.ndarray] = None) -> "GameInstance":
        follower = np.asarray(follower_utilities, dtype=float)
        if follower.ndim != 4:
            raise ShapeMismatch("follower utilities must be a 4-D table v[i][ℓ][a][k]")
        n, L, A, K = follower.shape
        view = PublicView(n=n, L=L, A=A, K=K, follower_utilities=follower,
                          leader_table=leader_utility, leader_evaluator=leader_evaluator,
                          tie_preference=tie_preference)
        return cls(view=view, distribution=distribution)

    @property
    def n(self) -> int:
        return self.view.n

    @property
    def L(self) -> int:
        return self.view.L

    @property
    def A(self) -> int:
        return self.view.A

    @property
    def K(self) -> int:
        return self.view.K

    def public_view(self) -> PublicView:
        return self.view


def follower_expected_utility(x: MixedStrategy, i: int, a: int, k: int, view: PublicView) -> float:
    """v_i(x, a, k) = Σ_ℓ x(ℓ)·v[i][ℓ][a][k]"""
    if not (0 <= i < view.n and 0 <= a < view.A and 0 <= k < view.K):
        raise IndexError(f"(i={i}, a={a}, k={k}) out of range for n={view.n}, A={view.A}, K={view.K}")
    if x.L != view.L:
        raise ShapeMismatch(f"strategy has {x.L} entries, instance has L={view.L}")
    return float(x.probs @ view.follower_utilities[i, :, a, k])


class BestResponder:
    """
    Follower best responses at a fixed leader strategy x.

    Per-(follower, type) argmax sets are computed once and resolved into one action per
    (i, k), so a follower's response never depends on the other followers' types.
    A tied entry takes the action with the best leader utility over completions by the
    other followers' argmax actions (up to JOINT_CANDIDATE_CAP completions, beyond which
    the smallest argmax action). When the view carries a tie preference, each argmax set
    is cut down to its preferred action instead.
    """

    def __init__(self, view: PublicView, x: MixedStrategy):
        if x.L != view.L:
            raise ShapeMismatch(f"strategy has {x.L} entries, instance has L={view.L}")
        self.view = view
        self.x = x
        expected = view.follower_expected_utilities(x)
        best = expected.max(axis=1, keepdims=True)
        self._ties = expected >= best - EPS_TIE
        self.argmax_sets: List[List[Tuple[int, ...]]] = [
            [tuple(int(a) for a in np.flatnonzero(self._ties[i, :, k])) for k in range(view.K)]
            for i in range(view.n)
        ]
        if view.tie_preference is not None:
            ranks = view.tie_preference
            self.argmax_sets = [
                [(min(s, key=lambda a: (ranks[i, k, a], a)),) for k, s in enumerate(row)]
                for i, row in enumerate(self.argmax_sets)
            ]
        self.has_ties = any(len(s) > 1 for row in self.argmax_sets for s in row)
        self._leader_values = view.leader_table @ x.probs if view.is_dense else None
        self._table: Optional[Tuple[Tuple[int, ...], ...]] = None

    def leader_value(self, actions: Sequence[int]) -> float:
        """u(x, a) for a joint action a"""
        if self._leader_values is not None:
            return float(self._leader_values[self.view.action_index(actions)])
        return float(self.x.probs @ self.view.leader_payoffs(actions))

    def _favorable(self, candidate_sets: Sequence[Sequence[int]]) -> ActionProfile:
        count = int(np.prod([len(s) for s in candidate_sets]))
        if count == 1:
            return tuple(s[0] for s in candidate_sets)
        if count > JOINT_CANDIDATE_CAP:
            logger.warning(f"{count} joint tie candidates exceed cap {JOINT_CANDIDATE_CAP}; using smallest argmax per follower")
            return tuple(min(s) for s in candidate_sets)
        best_actions, best_value = None, -np.inf
        for actions in itertools.product(*candidate_sets):
            value = self.leader_value(actions)
            if value > best_value + 1e-12:
                best_actions, best_value = actions, value
        return tuple(int(a) for a in best_actions)

    def respond(self, theta: Sequence[int]) -> ActionProfile:
        """Joint best response to type profile θ, read off the per-(i, k) table"""
        key = tuple(int(k) for k in theta)
        if len(key) != self.view.n:
            raise ShapeMismatch(f"type profile has length {len(key)}, expected n={self.view.n}")
        table = self.mapping_table()
        return tuple(table[i][k] for i, k in enumerate(key))

    def mapping_table(self) -> Tuple[Tuple[int, ...], ...]:
        """
        Per-(i, k) action table at x.

        Untied entries are the unique argmax. A tied entry takes the argmax action of
        follower i that reaches the highest leader utility over all completions by the
        other followers' argmax actions; for a single follower this is exactly the
        leader-favorable rule.
        """
        if self._table is not None:
            return self._table
        view = self.view
        table = [[s[0] for s in row] for row in self.argmax_sets]
        if self.has_ties:
            pooled = [sorted({a for s in row for a in s}) for row in self.argmax_sets]
            for i in range(view.n):
                for k in range(view.K):
                    options = self.argmax_sets[i][k]
                    if len(options) == 1:
                        continue
                    best_a, best_value = options[0], -np.inf
                    for a in options:
                        others = [pooled[j] if j != i else [a] for j in range(view.n)]
                        value = self.leader_value(self._favorable(others))
                        if value > best_value + 1e-12:
                            best_a, best_value = a, value
                    table[i][k] = best_a
        self._table = tuple(tuple(row) for row in table)
        return self._table

    def _table_payoffs(self, digits: np.ndarray) -> np.ndarray:
        view = self.view
        actions = np.array(self.mapping_table())[np.arange(view.n), digits]
        if self._leader_values is None:
            return np.array([self.leader_value(a) for a in actions])
        powers = view.A ** np.arange(view.n - 1, -1, -1)
        return self._leader_values[actions @ powers]

    def profile_payoffs(self, profile_cap: int = PROFILE_CAP) -> np.ndarray:
        """Vector over all K^n profiles (row-major) of u(x, br(x, θ))"""
        return self._table_payoffs(profile_digits(self.view.n, self.view.K, profile_cap))

    def expected_utility(self, weights: np.ndarray, profile_cap: int = PROFILE_CAP) -> float:
        """Σ_θ weights(θ)·u(x, br(θ, x)) over the dense row-major profile table"""
        digits = profile_digits(self.view.n, self.view.K, profile_cap)
        support = np.flatnonzero(weights > 0)
        return float(weights[support] @ self._table_payoffs(digits[support]))


def best_response(x: MixedStrategy, theta: Sequence[int], view: PublicView) -> ActionProfile:
    """Followers' joint best response to x under type profile θ; each tie-break depends only on the follower's own type"""
    return BestResponder(view, x).respond(theta)


def leader_expected_utility(x: MixedStrategy, distribution: TypeDistribution, view: PublicView,
                            profile_cap: int = PROFILE_CAP) -> float:
    """U_D(x) = Σ_θ D(θ)·u(x, br(x, θ)), summed exactly over all K^n profiles"""
    if distribution.n != view.n or distribution.K != view.K:
        raise ShapeMismatch("distribution shape does not match the instance")
    weights = distribution.joint(profile_cap)
    return BestResponder(view, x).expected_utility(weights, profile_cap)


def empirical_leader_utility(x: MixedStrategy, samples: Sequence[Sequence[int]], view: PublicView) -> float:
    """Û(x) = (1/t)·Σ_s u(x, br(x, θ^s)) over observed profiles"""
    samples = [tuple(int(k) for k in theta) for theta in samples]
    if not samples:
        raise ValueError("need at least one sample")
    responder = BestResponder(view, x)
    return sum(responder.leader_value(responder.respond(theta)) for theta in samples) / len(samples)
