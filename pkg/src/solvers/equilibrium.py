"""
Offline Stackelberg equilibrium computation
Per-region LPs, exact and empirical optima, the precomputed region catalog and the joint LP reformulation
"""
import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import PROFILE_CAP, REGION_SEEDS
from src.core.distributions import TypeDistribution, TypeProfile, check_profile_cap, profile_digits, profile_index
from src.core.errors import ShapeMismatch, VariableCapExceeded
from src.core.game import BestResponder, MixedStrategy, PublicView
from src.solvers.geometry import (
    VERTEX_DEDUP_TOL,
    BestResponseMapping,
    Region,
    classify,
    enumerate_regions,
    ranked_halfspaces,
    region_feasible,
    region_halfspaces,
    region_vertices,
    settle_point,
)
from src.solvers.linprog import LpResult, LpStatus, lp_maximize, solve_linear_program

logger = logging.getLogger(__name__)

REGION_TIE_TOL = 1e-12
VARIABLE_CAP = 10**5

WeightedProfiles = List[Tuple[TypeProfile, float]]


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """Optimal leader strategy, its value and the mapping of the region it was found in"""
    x_star: MixedStrategy
    value: float
    mapping: BestResponseMapping
    # LP objective after each row transfer (joint LP reformulation only)
    transfer_objectives: Tuple[float, ...] = ()


def weights_from_samples(samples: Sequence[Sequence[int]]) -> WeightedProfiles:
    """Empirical weights of observed profiles, duplicates counted by multiplicity"""
    counts = Counter(tuple(int(k) for k in theta) for theta in samples)
    if not counts:
        raise ValueError("need at least one sample")
    total = sum(counts.values())
    return [(profile, count / total) for profile, count in sorted(counts.items())]


def _check_weights(weights: WeightedProfiles) -> None:
    total = sum(w for _, w in weights)
    if any(w < 0 for _, w in weights) or abs(total - 1.0) > 1e-9:
        raise ValueError(f"profile weights must be nonnegative and sum to 1, got {total}")


def region_objective(view: PublicView, mapping: BestResponseMapping, weights: WeightedProfiles) -> np.ndarray:
    """c(ℓ) = Σ_(θ, p) p·u(ℓ, W(θ))"""
    objective = np.zeros(view.L)
    for theta, p in weights:
        if p > 0:
            objective += p * view.leader_payoffs(mapping.joint_action(theta))
    return objective


def payoff_matrix(view: PublicView, mapping: BestResponseMapping, profile_cap: int = PROFILE_CAP) -> np.ndarray:
    """Matrix Z[j, ℓ] = u(ℓ, W(θ_j)) over all K^n profiles in row-major order"""
    digits = profile_digits(view.n, view.K, profile_cap)
    table = np.array(mapping.w)
    actions = table[np.arange(view.n), digits]
    if view.is_dense:
        powers = view.A ** np.arange(view.n - 1, -1, -1)
        return view.leader_table[actions @ powers]
    return np.array([view.leader_payoffs(a) for a in actions])


def optimal_in_region(view: PublicView, mapping: BestResponseMapping, weights: WeightedProfiles) -> LpResult:
    """Maximize Σ_θ p(θ)·u(x, W(θ)) over x ∈ R(W)"""
    _check_weights(weights)
    objective = region_objective(view, mapping, weights)
    return lp_maximize(objective, region_halfspaces(view, mapping))


def _best_over_regions(view: PublicView, regions: Sequence[Region], weights: WeightedProfiles,
                       utility: Callable[[MixedStrategy], float]) -> Equilibrium:
    """
    Best region optimum, scored by the true utility of the strategy.

    Each region contributes its LP optimum, that optimum settled into the region and its
    witness. On a region boundary the tie rule may answer for a neighboring region, so the
    LP optimum alone can fall short of the region's value.
    """
    best_x: Optional[MixedStrategy] = None
    best_value = -np.inf
    for region in regions:
        result = optimal_in_region(view, region.mapping, weights)
        if result.status != LpStatus.OPTIMAL:
            logger.debug(f"Region {region.mapping} infeasible at solve time")
            continue
        settled = settle_point(view, region, result.x)
        for x in (result.x, settled, region.witness):
            if x is None:
                continue
            value = utility(x)
            if value > best_value + REGION_TIE_TOL:
                best_x, best_value = x, value
    if best_x is None:
        raise RuntimeError("no feasible best-response region")
    return Equilibrium(x_star=best_x, value=best_value, mapping=classify(view, best_x))


def offline_optimal(view: PublicView, distribution: TypeDistribution, regions: Optional[Sequence[Region]] = None,
                    profile_cap: int = PROFILE_CAP) -> Equilibrium:
    """Stackelberg equilibrium under the known distribution D"""
    if distribution.n != view.n or distribution.K != view.K:
        raise ShapeMismatch("distribution shape does not match the instance")
    weights = distribution.weighted_profiles(profile_cap)
    if regions is None:
        regions = enumerate_regions(view)
    joint = distribution.joint(profile_cap)
    equilibrium = _best_over_regions(
        view, regions, weights, lambda x: BestResponder(view, x).expected_utility(joint, profile_cap)
    )
    logger.info(f"Offline optimum {equilibrium.value:.6f} in region {equilibrium.mapping}")
    return equilibrium


def empirical_optimal(view: PublicView, samples: Sequence[Sequence[int]],
                      regions: Optional[Sequence[Region]] = None) -> Equilibrium:
    """Optimum against the empirical distribution of observed type profiles"""
    weights = weights_from_samples(samples)
    if regions is None:
        regions = enumerate_regions(view)

    def utility(x: MixedStrategy) -> float:
        responder = BestResponder(view, x)
        return sum(p * responder.leader_value(responder.respond(theta)) for theta, p in weights)

    return _best_over_regions(view, regions, weights, utility)


def _dedup(points: Sequence[MixedStrategy]) -> List[MixedStrategy]:
    unique: List[MixedStrategy] = []
    for p in points:
        if not any(np.max(np.abs(p.probs - q.probs)) <= VERTEX_DEDUP_TOL for q in unique):
            unique.append(p)
    return unique


class RegionCatalog:
    """
    Regions of one game with their vertices and candidate payoffs precomputed.

    A linear objective over a polytope is maximized at a vertex, so optima over the
    simplex reduce to scans over region vertices and witnesses. Each region also keeps
    its points settled into the region (classify maps them to W); regions the tie rule
    never selects have none. Candidate payoffs are true utilities u(x, br(x, θ)) for
    every profile θ.
    """

    def __init__(self, view: PublicView, regions: Sequence[Region], profile_cap: int = PROFILE_CAP):
        check_profile_cap(view.n, view.K, profile_cap)
        self.view = view
        self.profile_cap = profile_cap
        self.regions = list(regions)
        self.vertices: List[List[MixedStrategy]] = [region_vertices(r) or [r.witness] for r in self.regions]

        self.region_points: List[List[MixedStrategy]] = []
        for region, points in zip(self.regions, self.vertices):
            settled = [settle_point(view, region, p) for p in [region.witness] + points]
            self.region_points.append(_dedup([p for p in settled if p is not None]))
        self.point_matrices = [np.array([p.probs for p in ps]).reshape(-1, view.L) for ps in self.region_points]

        candidates: List[MixedStrategy] = []
        for region, points, settled in zip(self.regions, self.vertices, self.region_points):
            candidates.extend(points + [region.witness] + settled)
        self.candidates = _dedup(candidates)
        # candidate_payoffs[c, j] = u(x_c, br(x_c, θ_j))
        self.candidate_payoffs = np.stack([BestResponder(view, x).profile_payoffs(profile_cap) for x in self.candidates])
        logger.debug(f"Region catalog: {len(self.regions)} regions ({len(self.selectable())} selectable), "
                     f"{len(self.candidates)} candidate strategies")

    @classmethod
    def build(cls, view: PublicView, seeds: int = REGION_SEEDS, profile_cap: int = PROFILE_CAP) -> "RegionCatalog":
        return cls(view, enumerate_regions(view, seeds=seeds), profile_cap=profile_cap)

    def __len__(self) -> int:
        return len(self.regions)

    def matches(self, view: PublicView) -> bool:
        """True when `view` describes the same game this catalog was built for"""
        other = self.view
        if (other.n, other.L, other.A, other.K) != (view.n, view.L, view.A, view.K):
            return False
        if not np.array_equal(other.follower_utilities, view.follower_utilities):
            return False
        if other.is_dense != view.is_dense or other.leader_favorable != view.leader_favorable:
            return False
        if not view.leader_favorable and not np.array_equal(other.tie_preference, view.tie_preference):
            return False
        return not view.is_dense or np.array_equal(other.leader_table, view.leader_table)

    def dense_weights(self, weights: WeightedProfiles) -> np.ndarray:
        dense = np.zeros(self.candidate_payoffs.shape[1])
        for theta, p in weights:
            dense[profile_index(theta, self.view.K)] += p
        return dense

    def selectable(self) -> List[int]:
        """Indices of the regions that have a settled point"""
        return [r for r, points in enumerate(self.region_points) if points]

    def region_optimum(self, r: int, objective: np.ndarray) -> Tuple[MixedStrategy, float]:
        """Best settled point of region r for a length-L objective"""
        if not self.region_points[r]:
            raise ValueError(f"region {self.regions[r].mapping} has no point the tie rule maps into it")
        values = self.point_matrices[r] @ objective
        j = int(np.argmax(values))
        return self.region_points[r][j], float(values[j])

    def best(self, weights: np.ndarray) -> Equilibrium:
        """Best candidate for dense profile weights (length K^n), lowest index on ties"""
        values = self.candidate_payoffs @ weights
        c = int(np.flatnonzero(values >= values.max() - REGION_TIE_TOL)[0])
        x = self.candidates[c]
        return Equilibrium(x_star=x, value=float(values[c]), mapping=classify(self.view, x))

    def all_vertices(self) -> List[MixedStrategy]:
        return [v for vs in self.vertices for v in vs]


def _all_mappings(n: int, K: int, A: int) -> List[BestResponseMapping]:
    return [BestResponseMapping.from_flat(entries, n, K) for entries in itertools.product(range(A), repeat=n * K)]


def lp_reform_optimal(view: PublicView, distribution: TypeDistribution, variable_cap: int = VARIABLE_CAP,
                      profile_cap: int = PROFILE_CAP) -> Equilibrium:
    """
    Equilibrium via the joint LP over x(W, ℓ) for every mapping W.

    Variables are ordered W row-major, then ℓ. IC rows follow the tie ranking when the
    view has one, so a row can only carry mass where the ranking selects its mapping.
    The optimal LP solution is collapsed onto its best row by repeated mass transfer; the
    objective after each transfer is recorded. The collapsed point is settled into the
    row's region before its true utility is taken.
    """
    n, L, A, K = view.n, view.L, view.A, view.K
    num_mappings = A ** (n * K)
    if num_mappings * L > variable_cap:
        raise VariableCapExceeded(f"joint LP needs A^(nK)·L = {num_mappings * L} variables, cap is {variable_cap}")
    weights = distribution.joint(profile_cap)
    mappings = _all_mappings(n, K, A)
    coefficients = np.stack([weights @ payoff_matrix(view, m, profile_cap) for m in mappings])

    ic_rows = []
    for w_index, mapping in enumerate(mappings):
        for h in ranked_halfspaces(view, mapping):
            if h.is_trivial():
                continue
            ic_rows.append((w_index, h.normal / np.max(np.abs(h.normal))))
    num_x = num_mappings * L
    m = len(ic_rows)
    A_eq = np.zeros((m + 1, num_x + m))
    for row, (w_index, normal) in enumerate(ic_rows):
        A_eq[row, w_index * L:(w_index + 1) * L] = normal
        A_eq[row, num_x + row] = -1.0
    A_eq[m, :num_x] = 1.0
    b_eq = np.zeros(m + 1)
    b_eq[m] = 1.0
    objective = np.concatenate([coefficients.ravel(), np.zeros(m)])
    logger.debug(f"Joint LP: {num_x} strategy variables, {m} IC constraints")

    status, z, lp_value = solve_linear_program(objective, A_eq, b_eq)
    if status != LpStatus.OPTIMAL:
        raise RuntimeError(f"joint LP returned {status.value}")

    rows = np.clip(z[:num_x], 0.0, None).reshape(num_mappings, L)
    masses = rows.sum(axis=1)
    support = [w for w in range(num_mappings) if masses[w] > 1e-12]
    conditional = {w: float(rows[w] @ coefficients[w]) / masses[w] for w in support}
    best_w = max(support, key=lambda w: (conditional[w], -w))

    trajectory = [float(np.sum(rows * coefficients))]
    for w in support:
        if w == best_w:
            continue
        rows[best_w] *= (masses[best_w] + masses[w]) / masses[best_w]
        masses[best_w] += masses[w]
        rows[w] = 0.0
        masses[w] = 0.0
        trajectory.append(float(np.sum(rows * coefficients)))

    x = MixedStrategy.from_values(rows[best_w])
    candidates = [x]
    region = region_feasible(view, mappings[best_w])
    if region is not None:
        settled = settle_point(view, region, x)
        if settled is not None:
            candidates.append(settled)
    values = [BestResponder(view, c).expected_utility(weights, profile_cap) for c in candidates]
    best_c = int(np.argmax(values))
    x, value = candidates[best_c], values[best_c]
    logger.info(f"Joint LP value {lp_value:.6f}, collapsed onto {mappings[best_w]} with value {value:.6f}")
    return Equilibrium(x_star=x, value=value, mapping=mappings[best_w], transfer_objectives=tuple(trajectory))
