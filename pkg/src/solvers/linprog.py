"""
Dense linear programming over the leader simplex
Two-phase primal simplex on a standard-form tableau with Bland's anti-cycling rule
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.game import MixedStrategy

logger = logging.getLogger(__name__)

EPS_PIVOT = 1e-10
EPS_FEAS = 1e-8
MAX_PIVOTS = 50_000


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class Halfspace:
    """The set {x : ⟨x, normal⟩ ≥ 0}"""
    normal: np.ndarray

    def __post_init__(self):
        normal = np.array(self.normal, dtype=float).ravel()
        if not np.all(np.isfinite(normal)):
            raise ValueError("halfspace normal must be finite")
        normal.setflags(write=False)
        object.__setattr__(self, 'normal', normal)

    def contains(self, x: MixedStrategy, tol: float = EPS_FEAS) -> bool:
        return float(x.probs @ self.normal) >= -tol

    def is_trivial(self) -> bool:
        return bool(np.max(np.abs(self.normal), initial=0.0) <= EPS_PIVOT)


@dataclass(frozen=True, eq=False)
class LpResult:
    status: LpStatus
    x: Optional[MixedStrategy] = None
    value: float = float('nan')
    is_vertex: bool = False

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


class _Tableau:
    """
    Simplex tableau for  max c·z  s.t.  A z = b, z ≥ 0.

    Rows 0..m-1 hold the constraints with the right-hand side in the last column; the
    last row holds reduced costs (negative entries can still improve the objective).
    """

    def __init__(self, A: np.ndarray, b: np.ndarray):
        m, N = A.shape
        sign = np.where(b < 0, -1.0, 1.0)
        A = A * sign[:, None]
        b = b * sign
        self.N = N
        self.table = np.zeros((m + 1, N + m + 1))
        self.table[:m, :N] = A
        self.table[:m, N:N + m] = np.eye(m)
        self.table[:m, -1] = b
        self.basis: List[int] = list(range(N, N + m))
        self.active = N + m

    @property
    def m(self) -> int:
        return self.table.shape[0] - 1

    def set_objective(self, c: np.ndarray) -> None:
        """Load reduced costs of `c` (over the active columns) for the current basis"""
        cost = np.zeros(self.table.shape[1] - 1)
        cost[:c.size] = c
        basic_cost = cost[self.basis]
        row = basic_cost @ self.table[:-1, :] if self.m else np.zeros(self.table.shape[1])
        row[:-1] -= cost
        self.table[-1, :] = row

    def pivot(self, row: int, col: int) -> None:
        table = self.table
        table[row, :] /= table[row, col]
        factors = table[:, col].copy()
        factors[row] = 0.0
        table -= np.outer(factors, table[row, :])
        self.basis[row] = col

    def run(self) -> LpStatus:
        """Iterate Bland pivots until optimal or unbounded"""
        table = self.table
        for _ in range(MAX_PIVOTS):
            reduced = table[-1, :self.active]
            candidates = np.flatnonzero(reduced < -EPS_PIVOT)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            col = int(candidates[0])
            column = table[:-1, col]
            rows = np.flatnonzero(column > EPS_PIVOT)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = table[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + EPS_PIVOT]
            row = int(min(tied, key=lambda r: self.basis[r]))
            self.pivot(row, col)
        raise RuntimeError(f"simplex did not terminate within {MAX_PIVOTS} pivots")

    def drive_out_artificials(self) -> None:
        """Pivot artificial variables out of the basis, dropping redundant rows"""
        row = 0
        while row < self.m:
            if self.basis[row] < self.N:
                row += 1
                continue
            entries = np.abs(self.table[row, :self.N])
            nonzero = np.flatnonzero(entries > EPS_PIVOT)
            if nonzero.size:
                self.pivot(row, int(nonzero[0]))
                row += 1
            else:
                self.table = np.delete(self.table, row, axis=0)
                del self.basis[row]

    def solution(self) -> np.ndarray:
        z = np.zeros(self.N)
        for row, var in enumerate(self.basis):
            if var < self.N:
                z[var] = self.table[row, -1]
        return z


def solve_linear_program(c: Sequence[float], A_eq: np.ndarray, b_eq: Sequence[float]) -> Tuple[LpStatus, Optional[np.ndarray], float]:
    """
    Maximize c·z subject to A_eq z = b_eq, z ≥ 0.

    Returns (status, z, value); z is a basic (vertex) solution when status is OPTIMAL.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float).ravel()
    m, N = A.shape
    if c.size != N or b.size != m:
        raise ValueError(f"inconsistent LP dimensions: c={c.size}, A={A.shape}, b={b.size}")

    tableau = _Tableau(A, b)
    phase_one = np.zeros(N + m)
    phase_one[N:] = -1.0
    tableau.set_objective(phase_one)
    tableau.run()
    infeasibility = -tableau.table[-1, -1]
    if infeasibility > EPS_FEAS:
        logger.debug(f"LP infeasible: phase-1 residual {infeasibility:.3e}")
        return LpStatus.INFEASIBLE, None, float('nan')

    tableau.drive_out_artificials()
    tableau.table = np.delete(tableau.table, np.s_[N:N + m], axis=1)
    tableau.active = N
    tableau.set_objective(c)
    status = tableau.run()
    if status != LpStatus.OPTIMAL:
        return status, None, float('nan')
    z = tableau.solution()
    return LpStatus.OPTIMAL, z, float(c @ z)


def _constraint_rows(hs: Sequence[Halfspace], L: int) -> np.ndarray:
    rows = [h.normal for h in hs if not h.is_trivial()]
    for normal in rows:
        if normal.size != L:
            raise ValueError(f"halfspace normal has length {normal.size}, expected {L}")
    if not rows:
        return np.zeros((0, L))
    normals = np.vstack(rows)
    return normals / np.max(np.abs(normals), axis=1, keepdims=True)


def lp_maximize(c: Sequence[float], hs: Sequence[Halfspace]) -> LpResult:
    """
    Maximize ⟨c, x⟩ over {x ∈ Δ(L) : ⟨x, d⟩ ≥ 0 for every d in hs}.

    Variables are x followed by one surplus per halfspace; the optimum returned is a vertex.
    """
    c = np.asarray(c, dtype=float).ravel()
    L = c.size
    if L < 2:
        raise ValueError("need at least two leader actions")
    normals = _constraint_rows(hs, L)
    m = normals.shape[0]

    A = np.zeros((m + 1, L + m))
    A[:m, :L] = normals
    A[:m, L:] = -np.eye(m)
    A[m, :L] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    objective = np.concatenate([c, np.zeros(m)])

    status, z, _ = solve_linear_program(objective, A, b)
    if status != LpStatus.OPTIMAL:
        return LpResult(status=status)
    x = MixedStrategy.from_values(z[:L])
    return LpResult(status=LpStatus.OPTIMAL, x=x, value=float(c @ x.probs), is_vertex=True)


def lp_feasible_point(hs: Sequence[Halfspace], L: Optional[int] = None) -> LpResult:
    """
    Maximum-slack point of {x ∈ Δ(L) : ⟨x, d⟩ ≥ 0}.

    Maximizes t subject to ⟨x, d/‖d‖∞⟩ ≥ t; the returned value is the slack t, so 0 marks
    a region with no interior. Empty constraint sets give the barycenter with infinite slack.
    """
    if L is None:
        if not hs:
            raise ValueError("L is required when no halfspaces are given")
        L = hs[0].normal.size
    if L < 2:
        raise ValueError("need at least two leader actions")
    normals = _constraint_rows(hs, L)
    m = normals.shape[0]
    if m == 0:
        return LpResult(status=LpStatus.OPTIMAL, x=MixedStrategy.uniform(L), value=float('inf'), is_vertex=False)

    # columns: x (L), t+ , t-, surplus (m)
    A = np.zeros((m + 1, L + 2 + m))
    A[:m, :L] = normals
    A[:m, L] = -1.0
    A[:m, L + 1] = 1.0
    A[:m, L + 2:] = -np.eye(m)
    A[m, :L] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    objective = np.zeros(L + 2 + m)
    objective[L] = 1.0
    objective[L + 1] = -1.0

    status, z, slack = solve_linear_program(objective, A, b)
    if status != LpStatus.OPTIMAL or slack < -EPS_FEAS:
        return LpResult(status=LpStatus.INFEASIBLE, value=slack if status == LpStatus.OPTIMAL else float('nan'))
    x = MixedStrategy.from_values(z[:L])
    return LpResult(status=LpStatus.OPTIMAL, x=x, value=slack if slack >= EPS_FEAS else 0.0, is_vertex=False)
