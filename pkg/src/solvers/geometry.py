"""
Best-response regions of the leader simplex
Advantage halfspaces, region feasibility, classification, BFS enumeration and vertex enumeration
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from math import comb
from typing import Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.core.config import REGION_SEEDS
from src.core.game import BestResponder, MixedStrategy, PublicView
from src.solvers.linprog import EPS_FEAS, EPS_PIVOT, Halfspace, LpStatus, lp_feasible_point

logger = logging.getLogger(__name__)

VERTEX_DEDUP_TOL = 1e-7
RANK_MARGIN = 1e-7
SETTLE_STEPS = tuple(np.logspace(-8, -1, 15))


@dataclass(frozen=True, order=True)
class BestResponseMapping:
    """n×K table W with w[i][k] the action of follower i when it has type k"""
    w: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        table = tuple(tuple(int(a) for a in row) for row in self.w)
        if not table or len({len(row) for row in table}) != 1 or not table[0]:
            raise ValueError("mapping must be a non-empty rectangular n×K table")
        object.__setattr__(self, 'w', table)

    @classmethod
    def from_flat(cls, entries: Sequence[int], n: int, K: int) -> "BestResponseMapping":
        return cls(tuple(tuple(entries[i * K:(i + 1) * K]) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def K(self) -> int:
        return len(self.w[0])

    def action(self, i: int, k: int) -> int:
        return self.w[i][k]

    def joint_action(self, theta: Sequence[int]) -> Tuple[int, ...]:
        """W(θ) = (w_1(θ_1), ..., w_n(θ_n))"""
        return tuple(self.w[i][int(k)] for i, k in enumerate(theta))

    def with_entry(self, i: int, k: int, a: int) -> "BestResponseMapping":
        rows = [list(row) for row in self.w]
        rows[i][k] = a
        return BestResponseMapping(tuple(tuple(row) for row in rows))

    def flat(self) -> Tuple[int, ...]:
        return tuple(a for row in self.w for a in row)

    def __str__(self) -> str:
        return "|".join(",".join(str(a) for a in row) for row in self.w)


@dataclass(frozen=True, eq=False)
class Region:
    """A weakly feasible best-response region R(W) with a max-slack witness"""
    mapping: BestResponseMapping
    halfspaces: Tuple[Halfspace, ...]
    witness: MixedStrategy
    slack: float

    @property
    def is_full_dimensional(self) -> bool:
        return self.slack > EPS_FEAS

    def contains(self, x: MixedStrategy, tol: float = EPS_FEAS) -> bool:
        return all(h.contains(x, tol) for h in self.halfspaces)


def advantage_vector(view: PublicView, i: int, k: int, a: int, a_other: int) -> np.ndarray:
    """Entry ℓ is v[i][ℓ][a][k] − v[i][ℓ][a'][k]"""
    if a == a_other:
        raise ValueError("advantage vector needs two distinct actions")
    if not (0 <= i < view.n and 0 <= k < view.K and 0 <= a < view.A and 0 <= a_other < view.A):
        raise IndexError(f"(i={i}, k={k}, a={a}, a'={a_other}) out of range")
    v = view.follower_utilities
    return v[i, :, a, k] - v[i, :, a_other, k]


def region_halfspaces(view: PublicView, mapping: BestResponseMapping) -> List[Halfspace]:
    """The n·K·(A−1) advantage halfspaces that make W a best response"""
    if mapping.n != view.n or mapping.K != view.K:
        raise ValueError(f"mapping shape ({mapping.n}, {mapping.K}) does not match view ({view.n}, {view.K})")
    halfspaces = []
    for i in range(view.n):
        for k in range(view.K):
            chosen = mapping.action(i, k)
            for other in range(view.A):
                if other != chosen:
                    halfspaces.append(Halfspace(advantage_vector(view, i, k, chosen, other)))
    return halfspaces


def region_feasible(view: PublicView, mapping: BestResponseMapping) -> Optional[Region]:
    """Region for W if its weak-inequality polytope is non-empty, else None"""
    halfspaces = region_halfspaces(view, mapping)
    result = lp_feasible_point(halfspaces, L=view.L)
    if result.status != LpStatus.OPTIMAL:
        return None
    return Region(mapping=mapping, halfspaces=tuple(halfspaces), witness=result.x, slack=result.value)


def classify(view: PublicView, x: MixedStrategy) -> BestResponseMapping:
    """The mapping W with W(θ) = br(x, θ) under the view's tie rule"""
    return BestResponseMapping(BestResponder(view, x).mapping_table())


def ranked_halfspaces(view: PublicView, mapping: BestResponseMapping, margin: float = RANK_MARGIN) -> List[Halfspace]:
    """
    Halfspaces of the points where the tie ranking selects W exactly.

    W(i, k) must beat every alternative ranked ahead of it by at least `margin` and the
    others weakly. On the simplex ⟨x, d⟩ ≥ margin is ⟨x, d − margin·1⟩ ≥ 0.
    Without a ranking these are the region halfspaces.
    """
    if view.leader_favorable:
        return region_halfspaces(view, mapping)
    ranks = view.tie_preference
    halfspaces = []
    for i in range(view.n):
        for k in range(view.K):
            chosen = mapping.action(i, k)
            for other in range(view.A):
                if other == chosen:
                    continue
                d = advantage_vector(view, i, k, chosen, other)
                if (ranks[i, k, other], other) < (ranks[i, k, chosen], chosen):
                    d = d - margin
                halfspaces.append(Halfspace(d))
    return halfspaces


def settle_point(view: PublicView, region: Region, x: MixedStrategy) -> Optional[MixedStrategy]:
    """
    A point at or next to x that classifies into the region.

    x itself when the tie rule already maps it to W, otherwise x moved a small step toward
    the witness, otherwise the witness. None when no such point is found, which happens for
    boundary regions the tie rule never selects.
    """
    if classify(view, x) == region.mapping:
        return x
    for step in SETTLE_STEPS:
        y = MixedStrategy.from_values((1.0 - step) * x.probs + step * region.witness.probs)
        if classify(view, y) == region.mapping:
            return y
    if classify(view, region.witness) == region.mapping:
        return region.witness
    return None


def _neighbors(mapping: BestResponseMapping, A: int) -> Iterator[BestResponseMapping]:
    for i in range(mapping.n):
        for k in range(mapping.K):
            for a in range(A):
                if a != mapping.action(i, k):
                    yield mapping.with_entry(i, k, a)


def enumerate_regions(view: PublicView, seeds: int = REGION_SEEDS, seed: int = 0) -> List[Region]:
    """
    All weakly feasible best-response regions, sorted by mapping.

    Breadth-first search over mappings differing in one (i, k) entry, started from the
    classification of the barycenter and of `seeds` random simplex points.
    """
    rng = np.random.default_rng(seed)
    starts = [MixedStrategy.uniform(view.L)]
    starts += [MixedStrategy.from_values(p) for p in rng.dirichlet(np.ones(view.L), size=seeds)]

    visited: Set[BestResponseMapping] = set()
    regions = {}
    for start in starts:
        origin = classify(view, start)
        if origin in visited:
            continue
        visited.add(origin)
        queue = deque([origin])
        while queue:
            mapping = queue.popleft()
            region = region_feasible(view, mapping)
            if region is None:
                continue
            regions[mapping] = region
            for neighbor in _neighbors(mapping, view.A):
                if neighbor not in visited:
                    visited.add(neighbor)
                    queue.append(neighbor)

    result = [regions[m] for m in sorted(regions)]
    boundary = sum(1 for r in result if not r.is_full_dimensional)
    logger.info(f"Enumerated {len(result)} best-response regions ({boundary} boundary-only, {len(visited)} mappings tested)")
    return result


def _unique_normals(halfspaces: Sequence[Halfspace], L: int) -> np.ndarray:
    rows = []
    for h in halfspaces:
        if h.is_trivial():
            continue
        normal = h.normal / np.max(np.abs(h.normal))
        if not any(np.allclose(normal, r, atol=1e-12) for r in rows):
            rows.append(normal)
    return np.array(rows) if rows else np.zeros((0, L))


def region_vertices(region: Region) -> List[MixedStrategy]:
    """Vertices of Δ(L) ∩ R(W), from every (L−1)-subset of active constraints"""
    L = region.witness.L
    normals = _unique_normals(region.halfspaces, L)
    constraints = np.vstack([normals, np.eye(L)])
    ones = np.ones((1, L))
    rhs = np.zeros(L)
    rhs[-1] = 1.0

    vertices: List[np.ndarray] = []
    for subset in itertools.combinations(range(constraints.shape[0]), L - 1):
        system = np.vstack([constraints[list(subset)], ones])
        if np.linalg.matrix_rank(system, tol=EPS_PIVOT) < L:
            continue
        point = np.linalg.solve(system, rhs)
        if point.min() < -EPS_FEAS:
            continue
        if normals.size and (normals @ point).min() < -EPS_FEAS:
            continue
        if any(np.max(np.abs(point - v)) <= VERTEX_DEDUP_TOL for v in vertices):
            continue
        vertices.append(point)
    return [MixedStrategy.from_values(v) for v in vertices]


def region_count_bound(n: int, K: int, A: int, L: int) -> int:
    """
    Upper bound on the number of weakly feasible mappings.

    Counts faces of an arrangement of m = n·K·A(A−1)/2 hyperplanes in dimension L−1,
    capped by the A^(nK) mappings that exist at all.
    """
    m = n * K * A * (A - 1) // 2
    d = L - 1
    faces = sum(comb(m, j) * 2 ** j * sum(comb(m, i) for i in range(d - j + 1)) for j in range(d + 1))
    return min(faces, A ** (n * K))
