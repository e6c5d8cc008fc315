"""
Brute-force oracles used to cross-check the exact solvers
"""
import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import List, Optional, Set, Tuple

import numpy as np

from src.core.config import PROFILE_CAP
from src.core.distributions import TypeDistribution, profile_digits
from src.core.errors import GridTooLarge, ShapeMismatch
from src.core.game import EPS_TIE, BestResponder, MixedStrategy, PublicView, leader_expected_utility
from src.solvers.equilibrium import VARIABLE_CAP, lp_reform_optimal, offline_optimal
from src.solvers.geometry import BestResponseMapping, classify, enumerate_regions, region_count_bound

logger = logging.getLogger(__name__)

GRID_MAX_L = 4
GRID_POINT_CAP = 5 * 10**6
GRID_CHUNK = 4096


def simplex_grid(L: int, grid_step: float) -> np.ndarray:
    """All points of the simplex lattice with spacing grid_step, in lexicographic order"""
    steps = round(1.0 / grid_step)
    if steps < 1 or abs(steps * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid_step must divide 1, got {grid_step}")
    points = []
    # stars and bars: bar positions among steps + L - 1 slots
    for bars in itertools.combinations(range(steps + L - 1), L - 1):
        edges = (-1,) + bars + (steps + L - 1,)
        points.append([edges[j + 1] - edges[j] - 1 for j in range(L)])
    return np.array(points, dtype=float) / steps


def _grid_point_count(L: int, steps: int) -> int:
    return comb(steps + L - 1, L - 1)


def _chunk_values(view: PublicView, weights: np.ndarray, points: np.ndarray, digits: np.ndarray) -> np.ndarray:
    """Exact U_D on a block of grid points; tied points are sent through the full best-response rule"""
    expected = np.einsum('gl,ilak->giak', points, view.follower_utilities)
    best = expected.max(axis=2, keepdims=True)
    tied = ((expected >= best - EPS_TIE).sum(axis=2) > 1).any(axis=(1, 2))

    values = np.empty(len(points))
    if view.is_dense:
        actions = expected.argmax(axis=2)
        joint = actions[:, np.arange(view.n), digits]
        powers = view.A ** np.arange(view.n - 1, -1, -1)
        rows = joint @ powers
        leader_values = points @ view.leader_table.T
        per_profile = np.take_along_axis(leader_values, rows, axis=1)
        values[:] = per_profile @ weights
    else:
        tied[:] = True
    for g in np.flatnonzero(tied):
        x = MixedStrategy.from_values(points[g])
        values[g] = BestResponder(view, x).expected_utility(weights)
    return values


def brute_force_optimal(view: PublicView, distribution: TypeDistribution, grid_step: float = 0.01,
                        profile_cap: int = PROFILE_CAP) -> Tuple[MixedStrategy, float]:
    """Maximum of U_D over the simplex lattice; the first lattice point wins ties"""
    if view.L > GRID_MAX_L:
        raise GridTooLarge(f"grid search supports L <= {GRID_MAX_L}, got L={view.L}")
    if distribution.n != view.n or distribution.K != view.K:
        raise ShapeMismatch("distribution shape does not match the instance")
    steps = round(1.0 / grid_step)
    count = _grid_point_count(view.L, steps)
    if count > GRID_POINT_CAP:
        raise GridTooLarge(f"grid of {count} points exceeds cap {GRID_POINT_CAP}")
    weights = distribution.joint(profile_cap)
    digits = profile_digits(view.n, view.K, profile_cap)
    grid = simplex_grid(view.L, grid_step)
    logger.debug(f"Brute force over {len(grid)} grid points (step {grid_step})")

    values = np.concatenate([
        _chunk_values(view, weights, grid[start:start + GRID_CHUNK], digits)
        for start in range(0, len(grid), GRID_CHUNK)
    ])
    g = int(np.flatnonzero(values >= values.max() - 1e-12)[0])
    return MixedStrategy.from_values(grid[g]), float(values[g])


def sample_regions(view: PublicView, num_samples: int, seed: int = 0) -> Set[BestResponseMapping]:
    """Mappings of uniformly sampled simplex points"""
    rng = np.random.default_rng(seed)
    points = rng.dirichlet(np.ones(view.L), size=num_samples)
    return {classify(view, MixedStrategy.from_values(p)) for p in points}


@dataclass
class OracleCheck:
    """Outcome of one cross-oracle comparison"""
    name: str
    passed: bool
    detail: str


@dataclass
class OracleReport:
    instance: str
    checks: List[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(OracleCheck(name, passed, detail))
        log = logger.info if passed else logger.warning
        log(f"{self.instance} {name}: {'PASS' if passed else 'FAIL'} ({detail})")


def run_oracle_suite(view: PublicView, distribution: TypeDistribution, name: str = "instance",
                     grid_step: float = 0.01, num_samples: int = 10**4, seed: int = 0,
                     variable_cap: Optional[int] = None, profile_cap: int = PROFILE_CAP) -> OracleReport:
    """
    Cross-check offline_optimal against the grid search, the joint LP (when small enough)
    and the sampled region set.
    """
    report = OracleReport(instance=name)
    regions = enumerate_regions(view)
    mappings = {r.mapping for r in regions}
    equilibrium = offline_optimal(view, distribution, regions=regions, profile_cap=profile_cap)

    sampled = sample_regions(view, num_samples, seed=seed)
    missing = sampled - mappings
    report.add("regions-sound", not missing, f"{len(sampled)} sampled, {len(missing)} missing from {len(regions)}")
    bound = region_count_bound(view.n, view.K, view.A, view.L)
    report.add("regions-bound", len(regions) <= bound, f"{len(regions)} regions, bound {bound}")
    misplaced = [r.mapping for r in regions if r.is_full_dimensional and classify(view, r.witness) != r.mapping]
    report.add("witness-classify", not misplaced, f"{len(misplaced)} witnesses outside their region")

    value_check = leader_expected_utility(equilibrium.x_star, distribution, view, profile_cap)
    report.add("value-consistent", abs(value_check - equilibrium.value) <= 1e-7,
               f"value {equilibrium.value:.6f}, recomputed {value_check:.6f}")

    if view.L <= GRID_MAX_L:
        _, grid_value = brute_force_optimal(view, distribution, grid_step, profile_cap)
        tolerance = 2e-3 if grid_step <= 0.005 else 2 * grid_step
        report.add("grid-oracle", abs(grid_value - equilibrium.value) <= tolerance,
                   f"offline {equilibrium.value:.6f}, grid {grid_value:.6f}")

    cap = VARIABLE_CAP if variable_cap is None else variable_cap
    if view.A ** (view.n * view.K) * view.L <= cap:
        reform = lp_reform_optimal(view, distribution, variable_cap=cap, profile_cap=profile_cap)
        # with several followers both solvers may settle next to the LP vertex
        reform_tol = 1e-6 if view.n == 1 else 1e-5
        report.add("joint-lp", abs(reform.value - equilibrium.value) <= reform_tol,
                   f"offline {equilibrium.value:.6f}, joint LP {reform.value:.6f}")
    return report
