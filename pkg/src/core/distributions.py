"""
Type distributions over follower type profiles
Joint (general) and product (independent) variants plus TV / Hellinger distances
"""
import logging
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from src.core.config import PROFILE_CAP
from src.core.errors import ProfileCapExceeded, ShapeMismatch

logger = logging.getLogger(__name__)

PROB_TOL = 1e-9

TypeProfile = Tuple[int, ...]


def check_profile_cap(n: int, K: int, profile_cap: int = PROFILE_CAP) -> int:
    """Return K^n, raising ProfileCapExceeded when it is above the cap"""
    count = K ** n
    if count > profile_cap:
        raise ProfileCapExceeded(f"K^n = {K}^{n} = {count} type profiles exceeds profile_cap {profile_cap}")
    return count


def profile_index(theta: Sequence[int], K: int) -> int:
    """Row-major index of a type profile, follower 0 most significant"""
    index = 0
    for k in theta:
        if not 0 <= k < K:
            raise IndexError(f"type {k} out of range for K={K}")
        index = index * K + int(k)
    return index


def profile_from_index(index: int, n: int, K: int) -> TypeProfile:
    """Inverse of profile_index"""
    digits = []
    for _ in range(n):
        index, k = divmod(index, K)
        digits.append(k)
    return tuple(reversed(digits))


@lru_cache(maxsize=64)
def _profile_digits(n: int, K: int) -> np.ndarray:
    grids = np.indices((K,) * n).reshape(n, -1).T
    grids.setflags(write=False)
    return grids


def profile_digits(n: int, K: int, profile_cap: int = PROFILE_CAP) -> np.ndarray:
    """All K^n type profiles as a (K^n, n) integer array in row-major order"""
    check_profile_cap(n, K, profile_cap)
    return _profile_digits(n, K)


def _validate_table(table: np.ndarray, name: str) -> np.ndarray:
    if table.ndim != 1 or table.size == 0:
        raise ShapeMismatch(f"{name} must be a non-empty 1-D probability table")
    if not np.all(np.isfinite(table)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(table < -PROB_TOL):
        raise ValueError(f"{name} has negative entries")
    total = float(table.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"{name} sums to {total}, expected 1")
    return np.clip(table, 0.0, None)


class TypeDistribution:
    """Distribution over type profiles of n followers with K types each"""

    kind = "abstract"

    def __init__(self, n: int, K: int):
        if n < 1 or K < 1:
            raise ShapeMismatch(f"need n >= 1 and K >= 1, got n={n}, K={K}")
        self.n = n
        self.K = K

    @property
    def support_size(self) -> int:
        return self.K ** self.n

    def joint(self, profile_cap: int = PROFILE_CAP) -> np.ndarray:
        raise NotImplementedError

    def marginal(self, i: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` i.i.d. profiles, returned as a (size, n) integer array"""
        raise NotImplementedError

    def probability(self, theta: Sequence[int]) -> float:
        raise NotImplementedError

    def weighted_profiles(self, profile_cap: int = PROFILE_CAP) -> List[Tuple[TypeProfile, float]]:
        """Nonzero-probability profiles with their weights, in row-major order"""
        table = self.joint(profile_cap)
        digits = profile_digits(self.n, self.K, profile_cap)
        return [(tuple(int(k) for k in digits[j]), float(table[j])) for j in np.flatnonzero(table > 0)]

    def same_shape(self, other: "TypeDistribution") -> bool:
        return self.n == other.n and self.K == other.K


class GeneralDistribution(TypeDistribution):
    """Arbitrary joint table over the K^n profiles"""

    kind = "general"

    def __init__(self, joint: Sequence[float], n: int, K: int, profile_cap: int = PROFILE_CAP):
        super().__init__(n, K)
        check_profile_cap(n, K, profile_cap)
        table = np.asarray(joint, dtype=float).ravel()
        if table.size != K ** n:
            raise ShapeMismatch(f"joint table has {table.size} entries, expected K^n = {K ** n}")
        self._table = _validate_table(table, "joint table")
        self._table.setflags(write=False)

    def joint(self, profile_cap: int = PROFILE_CAP) -> np.ndarray:
        return self._table

    def marginal(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise IndexError(f"follower {i} out of range for n={self.n}")
        cube = self._table.reshape((self.K,) * self.n)
        axes = tuple(j for j in range(self.n) if j != i)
        return cube.sum(axis=axes) if axes else cube.copy()

    def probability(self, theta: Sequence[int]) -> float:
        return float(self._table[profile_index(theta, self.K)])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        indices = rng.choice(self._table.size, size=size, p=self._table)
        digits = _profile_digits(self.n, self.K)
        return digits[indices]

    def __repr__(self) -> str:
        return f"GeneralDistribution(n={self.n}, K={self.K})"


class IndependentDistribution(TypeDistribution):
    """Product of n per-follower marginals"""

    kind = "independent"

    def __init__(self, marginals: Sequence[Sequence[float]]):
        tables = [np.asarray(m, dtype=float).ravel() for m in marginals]
        if not tables:
            raise ShapeMismatch("need at least one marginal")
        K = tables[0].size
        if any(t.size != K for t in tables):
            raise ShapeMismatch("all marginals must have the same number of types")
        super().__init__(len(tables), K)
        self._marginals = tuple(_validate_table(t, f"marginal {i}") for i, t in enumerate(tables))
        for table in self._marginals:
            table.setflags(write=False)

    @property
    def marginals(self) -> Tuple[np.ndarray, ...]:
        return self._marginals

    def joint(self, profile_cap: int = PROFILE_CAP) -> np.ndarray:
        return product_distribution(self._marginals, profile_cap=profile_cap).joint()

    def marginal(self, i: int) -> np.ndarray:
        return self._marginals[i].copy()

    def probability(self, theta: Sequence[int]) -> float:
        if len(theta) != self.n:
            raise ShapeMismatch(f"profile length {len(theta)} != n={self.n}")
        return float(np.prod([self._marginals[i][k] for i, k in enumerate(theta)]))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        columns = [rng.choice(self.K, size=size, p=m) for m in self._marginals]
        return np.stack(columns, axis=1)

    def __repr__(self) -> str:
        return f"IndependentDistribution(n={self.n}, K={self.K})"


def product_distribution(marginals: Sequence[Sequence[float]], profile_cap: int = PROFILE_CAP) -> GeneralDistribution:
    """Joint table of independent marginals, joint(θ) = Π_i marginal_i(θ_i)"""
    tables = [np.asarray(m, dtype=float).ravel() for m in marginals]
    if not tables:
        raise ShapeMismatch("need at least one marginal")
    n, K = len(tables), tables[0].size
    check_profile_cap(n, K, profile_cap)
    joint = tables[0]
    for table in tables[1:]:
        if table.size != K:
            raise ShapeMismatch("all marginals must have the same number of types")
        joint = np.multiply.outer(joint, table).ravel()
    return GeneralDistribution(joint, n=n, K=K, profile_cap=profile_cap)


def _paired_tables(d1: TypeDistribution, d2: TypeDistribution, profile_cap: int) -> Tuple[np.ndarray, np.ndarray]:
    if not d1.same_shape(d2):
        raise ShapeMismatch(f"cannot compare distributions of shape (n={d1.n}, K={d1.K}) and (n={d2.n}, K={d2.K})")
    return d1.joint(profile_cap), d2.joint(profile_cap)


def tv_distance(d1: TypeDistribution, d2: TypeDistribution, profile_cap: int = PROFILE_CAP) -> float:
    """Total variation distance, half the L1 distance over all K^n profiles"""
    p, q = _paired_tables(d1, d2, profile_cap)
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def hellinger_distance(d1: TypeDistribution, d2: TypeDistribution, profile_cap: int = PROFILE_CAP) -> float:
    """Hellinger distance (1/√2)·‖√p − √q‖₂"""
    p, q = _paired_tables(d1, d2, profile_cap)
    return float(min(1.0, np.linalg.norm(np.sqrt(p) - np.sqrt(q)) / np.sqrt(2.0)))


def empirical_distribution(samples: np.ndarray, n: int, K: int, profile_cap: int = PROFILE_CAP) -> GeneralDistribution:
    """Empirical joint distribution of observed profiles (rows of `samples`)"""
    samples = np.asarray(samples, dtype=int).reshape(-1, n)
    if samples.shape[0] == 0:
        raise ValueError("need at least one sample")
    check_profile_cap(n, K, profile_cap)
    weights = K ** np.arange(n - 1, -1, -1)
    counts = np.bincount(samples @ weights, minlength=K ** n)
    return GeneralDistribution(counts / counts.sum(), n=n, K=K, profile_cap=profile_cap)
