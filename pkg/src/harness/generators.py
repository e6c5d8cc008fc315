"""
Instance generators
Seeded random games, the ±ε hard families for one and many followers, and the --gen mini-language
"""
import itertools
import logging
from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np

from src.core.config import PROFILE_CAP
from src.core.distributions import GeneralDistribution, IndependentDistribution, TypeDistribution, check_profile_cap
from src.core.errors import NotClassC, ShapeMismatch
from src.core.game import GameInstance, MixedStrategy

logger = logging.getLogger(__name__)

GOOD, BAD, OPT_OUT = 0, 1, 2

# Benchmark preset: two followers, two leader actions, six types, two actions, independent types
BENCH_SHAPE = {'n': 2, 'L': 2, 'A': 2, 'K': 6}
BENCH_SEED = 2

SignVector = Union[str, Sequence[int]]


def parse_sigma(sigma: SignVector, c: int) -> Tuple[int, ...]:
    """Sign vector from '+-+' or a sequence of ±1; a single sign is repeated c times"""
    if isinstance(sigma, str):
        symbols = {'+': 1, '-': -1}
        if not sigma or any(ch not in symbols for ch in sigma):
            raise ValueError(f"sigma must be a string of '+'/'-', got '{sigma}'")
        signs = tuple(symbols[ch] for ch in sigma)
    else:
        signs = tuple(int(s) for s in sigma)
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"sigma entries must be +1 or -1, got {signs}")
    if len(signs) == 1 and c > 1:
        signs = signs * c
    if len(signs) != c:
        raise ValueError(f"sigma has {len(signs)} signs, expected c={c}")
    return signs


class ClassCDistribution(GeneralDistribution):
    """
    Single-follower distribution over 2c types ordered (+1, −1, +2, −2, …).

    D(+j) = (1 + σ_j·ε)/(2c) and D(−j) = (1 − σ_j·ε)/(2c).
    """

    kind = "class-c"

    def __init__(self, c: int, epsilon: float, sigma: SignVector):
        if c < 1:
            raise ValueError(f"c must be at least 1, got {c}")
        if not 0.0 <= epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
        self.c = c
        self.epsilon = float(epsilon)
        self.sigma = parse_sigma(sigma, c)
        table = np.empty(2 * c)
        for j, s in enumerate(self.sigma):
            table[2 * j] = (1 + s * self.epsilon) / (2 * c)
            table[2 * j + 1] = (1 - s * self.epsilon) / (2 * c)
        super().__init__(table, n=1, K=2 * c)

    def __repr__(self) -> str:
        signs = ''.join('+' if s > 0 else '-' for s in self.sigma)
        return f"ClassCDistribution(c={self.c}, epsilon={self.epsilon}, sigma={signs})"


def gen_class_c(c: int, epsilon: float, sigma: SignVector) -> ClassCDistribution:
    return ClassCDistribution(c, epsilon, sigma)


def _check_class_c(distribution: TypeDistribution) -> ClassCDistribution:
    if not isinstance(distribution, ClassCDistribution):
        raise NotClassC(f"expected a class-C distribution from gen_class_c, got {distribution!r}")
    return distribution


def disagree(x: MixedStrategy, distribution: TypeDistribution) -> int:
    """Number of pairs j where 1[x(+j) ≥ x(−j)] differs from 1[σ_j = +1]"""
    dist = _check_class_c(distribution)
    if x.L != 2 * dist.c:
        raise ShapeMismatch(f"strategy has {x.L} entries, class-C support has {2 * dist.c}")
    return sum(1 for j, s in enumerate(dist.sigma) if (x[2 * j] >= x[2 * j + 1]) != (s > 0))


def round_to_class_c(x: MixedStrategy, c: int, epsilon: float) -> ClassCDistribution:
    """Class-C distribution whose signs follow x: σ_j = +1 iff x(+j) ≥ x(−j)"""
    if x.L != 2 * c:
        raise ShapeMismatch(f"strategy has {x.L} entries, expected 2c = {2 * c}")
    signs = [1 if x[2 * j] >= x[2 * j + 1] else -1 for j in range(c)]
    return ClassCDistribution(c, epsilon, signs)


def _paired_utilities(num_types: int) -> np.ndarray:
    """
    Follower utilities v[ℓ, a, s] for types paired as (+j, −j) = (2j, 2j+1).

    Good pays 1 exactly when ℓ is the type's own index, Bad pays 1 exactly when ℓ is
    its partner's index.
    """
    v = np.zeros((num_types, 2, num_types))
    for s in range(num_types):
        partner = s ^ 1
        v[s, GOOD, s] = 1.0
        v[partner, BAD, s] = 1.0
    return v


def _paired_tie_ranks(num_types: int) -> np.ndarray:
    """+j types settle ties on Good, −j types on Bad"""
    ranks = np.zeros((num_types, 2), dtype=int)
    for s in range(num_types):
        ranks[s] = (0, 1) if s % 2 == 0 else (1, 0)
    return ranks


def gen_single_follower_hard(c: int, epsilon: float, sigma: SignVector) -> GameInstance:
    """
    One follower, L = K = 2c, actions (Good, Bad).

    The leader earns 1 whenever the follower plays Good, so the optimum is x = D with
    value (1 + ε)/2 and every disagreeing pair costs ε/c.
    """
    distribution = gen_class_c(c, epsilon, sigma)
    K = 2 * c
    follower = _paired_utilities(K)[np.newaxis]
    leader = np.zeros((2, K))
    leader[GOOD] = 1.0
    ranks = _paired_tie_ranks(K)[np.newaxis]
    logger.debug(f"Hard single-follower instance: c={c}, epsilon={epsilon}, sigma={distribution.sigma}")
    return GameInstance.from_tables(leader, follower, distribution, tie_preference=ranks)


def gen_multi_follower_hard(n: int, K: int, base: TypeDistribution) -> GameInstance:
    """
    n followers with K + 1 types each built from a class-C distribution over n·K types.

    Type 0 of every follower is drawn with probability 1 − 1/(100n) and opts out; type
    j ≥ 1 of follower i behaves like type s = i·K + j − 1 of the single-follower game
    and is drawn with probability D(s)/100. The leader earns 1 only when exactly one
    follower plays Good and all others opt out. Utilities that would be −1 are mapped
    through (v + 1)/2, which keeps every argmax.
    """
    dist = _check_class_c(base)
    if dist.K != n * K:
        raise ShapeMismatch(f"base distribution has {dist.K} types, expected n·K = {n * K}")
    if K % 2:
        raise ShapeMismatch(f"K must be even so that every ±j pair belongs to one follower, got K={K}")
    L, A = n * K, 3
    single = _paired_utilities(L)
    single_ranks = _paired_tie_ranks(L)
    base_table = dist.joint()

    raw = np.full((n, L, A, K + 1), -1.0)
    ranks = np.zeros((n, K + 1, A), dtype=int)
    marginals = np.zeros((n, K + 1))
    for i in range(n):
        raw[i, :, OPT_OUT, 0] = 1.0
        ranks[i, 0] = (1, 2, 0)
        marginals[i, 0] = 1.0 - 1.0 / (100 * n)
        for j in range(1, K + 1):
            s = i * K + j - 1
            raw[i, :, GOOD, j] = single[:, GOOD, s]
            raw[i, :, BAD, j] = single[:, BAD, s]
            ranks[i, j, :2] = single_ranks[s]
            ranks[i, j, OPT_OUT] = 2
            marginals[i, j] = base_table[s] / 100.0
    follower = (raw + 1.0) / 2.0

    leader = np.zeros((A ** n, L))
    for index, actions in enumerate(itertools.product(range(A), repeat=n)):
        goods = sum(1 for a in actions if a == GOOD)
        opted_out = sum(1 for a in actions if a == OPT_OUT)
        if goods == 1 and opted_out == n - 1:
            leader[index] = 1.0
    logger.debug(f"Hard multi-follower instance: n={n}, K={K}, base={dist!r}")
    return GameInstance.from_tables(leader, follower, IndependentDistribution(marginals), tie_preference=ranks)


def _random_distribution(rng: np.random.Generator, n: int, K: int, dist_kind: str,
                         profile_cap: int) -> TypeDistribution:
    if dist_kind == "general":
        check_profile_cap(n, K, profile_cap)
        return GeneralDistribution(rng.dirichlet(np.ones(K ** n)), n=n, K=K, profile_cap=profile_cap)
    if dist_kind == "independent":
        return IndependentDistribution([rng.dirichlet(np.ones(K)) for _ in range(n)])
    raise ValueError(f"dist_kind must be 'general' or 'independent', got '{dist_kind}'")


def gen_random_instance(n: int, L: int, A: int, K: int, dist_kind: str = "general", seed: int = 0,
                        profile_cap: int = PROFILE_CAP) -> GameInstance:
    """Utilities i.i.d. uniform on [0, 1], distribution uniform-Dirichlet (joint or per marginal)"""
    rng = np.random.default_rng(seed)
    leader = rng.uniform(0.0, 1.0, size=(A ** n, L))
    follower = rng.uniform(0.0, 1.0, size=(n, L, A, K))
    distribution = _random_distribution(rng, n, K, dist_kind, profile_cap)
    return GameInstance.from_tables(leader, follower, distribution)


def gen_dominant_instance(n: int, L: int, A: int, K: int, seed: int = 0, dist_kind: str = "general",
                          profile_cap: int = PROFILE_CAP) -> GameInstance:
    """Every type has a strictly dominant action, so a single mapping covers the simplex"""
    rng = np.random.default_rng(seed)
    leader = rng.uniform(0.0, 1.0, size=(A ** n, L))
    follower = rng.uniform(0.0, 0.4, size=(n, L, A, K))
    dominant = rng.integers(A, size=(n, K))
    for i in range(n):
        for k in range(K):
            follower[i, :, dominant[i, k], k] = rng.uniform(0.6, 1.0, size=L)
    distribution = _random_distribution(rng, n, K, dist_kind, profile_cap)
    return GameInstance.from_tables(leader, follower, distribution)


def gen_bench_instance(seed: int = BENCH_SEED) -> GameInstance:
    """Benchmark preset with independent types"""
    return gen_random_instance(dist_kind="independent", seed=seed, **BENCH_SHAPE)


def _parse_params(text: str) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for item in filter(None, (part.strip() for part in text.split(','))):
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ValueError(f"generator parameter '{item}' is not of the form key=value")
        params[key.strip()] = value.strip()
    return params


def _ints(params: Dict[str, str], defaults: Dict[str, int]) -> Dict[str, int]:
    try:
        return {key: int(params.get(key, default)) for key, default in defaults.items()}
    except ValueError as e:
        raise ValueError(f"integer generator parameter expected: {e}")


def _build_random(params: Dict[str, str], profile_cap: int) -> GameInstance:
    sizes = _ints(params, {'n': 1, 'L': 2, 'A': 2, 'K': 2, 'seed': 0})
    return gen_random_instance(dist_kind=params.get('dist', 'general'), profile_cap=profile_cap, **sizes)


def _build_dominant(params: Dict[str, str], profile_cap: int) -> GameInstance:
    sizes = _ints(params, {'n': 1, 'L': 2, 'A': 2, 'K': 2, 'seed': 0})
    return gen_dominant_instance(dist_kind=params.get('dist', 'general'), profile_cap=profile_cap, **sizes)


def _build_hard_single(params: Dict[str, str], profile_cap: int) -> GameInstance:
    c = _ints(params, {'c': 1})['c']
    return gen_single_follower_hard(c, float(params.get('eps', 0.2)), params.get('sigma', '+'))


def _build_hard_multi(params: Dict[str, str], profile_cap: int) -> GameInstance:
    sizes = _ints(params, {'n': 2, 'K': 2})
    n, K = sizes['n'], sizes['K']
    if (n * K) % 2:
        raise ValueError(f"hard-multi needs n·K even, got n={n}, K={K}")
    base = gen_class_c(n * K // 2, float(params.get('eps', 0.2)), params.get('sigma', '+'))
    return gen_multi_follower_hard(n, K, base)


def _build_bench(params: Dict[str, str], profile_cap: int) -> GameInstance:
    return gen_bench_instance(seed=_ints(params, {'seed': BENCH_SEED})['seed'])


GENERATORS: Dict[str, Callable[[Dict[str, str], int], GameInstance]] = {
    'random': _build_random,
    'dominant': _build_dominant,
    'hard-single': _build_hard_single,
    'hard-multi': _build_hard_multi,
    'bench': _build_bench,
}


def parse_generator_spec(spec: str, profile_cap: int = PROFILE_CAP) -> GameInstance:
    """
    Build an instance from 'name:key=value,...'.

    random:n=2,L=3,A=2,K=2,dist=general,seed=1
    dominant:n=1,L=2,A=2,K=2,seed=0
    hard-single:c=1,eps=0.2,sigma=+
    hard-multi:n=2,K=2,eps=0.2,sigma=+-
    bench[:seed=2]
    """
    name, _, rest = spec.strip().partition(':')
    builder = GENERATORS.get(name.strip())
    if builder is None:
        raise ValueError(f"unknown generator '{name}', expected one of {sorted(GENERATORS)}")
    instance = builder(_parse_params(rest), profile_cap)
    logger.info(f"Generated instance '{spec}': n={instance.n}, L={instance.L}, A={instance.A}, K={instance.K}")
    return instance
