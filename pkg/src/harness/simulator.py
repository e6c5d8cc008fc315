"""
Repeated-game simulator with exact regret accounting
Runs seeded replications of the leader/follower protocol and aggregates their regret traces
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats
from tqdm import tqdm

from src.core.config import OFUL_CAP, PROFILE_CAP, REGION_SEEDS
from src.core.errors import FeedbackMismatch
from src.core.game import BestResponder, GameInstance
from src.harness.generators import parse_generator_spec
from src.harness.rng import Purpose, stream
from src.learners.base import ActionFeedback, FeedbackMode, FixedStrategyLearner, TypeFeedback
from src.learners.factory import create_learner, default_feedback
from src.solvers.equilibrium import Equilibrium, RegionCatalog, offline_optimal
from src.solvers.geometry import Region, classify, enumerate_regions
from src.utils.file_handler import BENCH_COLUMNS, TRACE_COLUMNS, load_instance, read_document

logger = logging.getLogger(__name__)

REGRET_FLOOR = -1e-7

# bench tables prefix the learner name
SUMMARY_COLUMNS = [c for c in BENCH_COLUMNS if c != 'learner']


class ExperimentConfig(BaseModel):
    """One simulation: an instance source, a learner and the replication plan"""

    model_config = ConfigDict(extra='forbid')

    instance: Optional[str] = None
    generator: Optional[str] = None
    learner: str
    feedback: Optional[FeedbackMode] = None
    T: int = Field(ge=1)
    seed: int = 0
    replications: int = Field(default=1, ge=1)
    threads: int = Field(default=1, ge=1)
    profile_cap: int = Field(default=PROFILE_CAP, ge=1)
    oful_cap: int = Field(default=OFUL_CAP, ge=1)
    region_seeds: int = Field(default=REGION_SEEDS, ge=1)

    @model_validator(mode='after')
    def _check_sources_and_feedback(self) -> "ExperimentConfig":
        if (self.instance is None) == (self.generator is None):
            raise ValueError("exactly one of 'instance' or 'generator' must be given")
        learner = create_learner(self.learner)
        if self.feedback is None:
            self.feedback = default_feedback(self.learner)
        if not learner.supports(self.feedback):
            raise FeedbackMismatch(f"learner '{self.learner}' does not support {self.feedback.value} feedback")
        return self

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        """Read a YAML or JSON experiment document"""
        return cls.model_validate(read_document(path))

    def load_instance(self) -> GameInstance:
        if self.generator is not None:
            return parse_generator_spec(self.generator, profile_cap=self.profile_cap)
        return load_instance(self.instance, profile_cap=self.profile_cap)


@dataclass(eq=False)
class RegretTrace:
    """Per-round record of one replication"""
    run_id: int
    optimal_value: float
    strategies: np.ndarray
    region_index: np.ndarray
    expected_regret: np.ndarray
    realized_utility: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.expected_regret)

    @property
    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.expected_regret)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'run_id': self.run_id,
            'round': np.arange(1, self.horizon + 1),
            'region_index': self.region_index,
            'expected_regret': self.expected_regret,
            'cumulative_regret': self.cumulative_regret,
            'realized_utility': self.realized_utility,
        }, columns=TRACE_COLUMNS)


@dataclass(eq=False)
class PreparedExperiment:
    """Everything shared by the replications of one experiment"""
    instance: GameInstance
    regions: List[Region]
    catalog: Optional[RegionCatalog]
    equilibrium: Equilibrium


def prepare_experiment(instance: GameInstance, learner: str, profile_cap: int = PROFILE_CAP,
                       region_seeds: int = REGION_SEEDS) -> PreparedExperiment:
    """Enumerate regions, build the catalog (unless the learner is fixed) and solve for x*"""
    view = instance.public_view()
    regions = enumerate_regions(view, seeds=region_seeds)
    logger.info(f"Enumerated {len(regions)} best-response regions")
    catalog = None
    if not learner.startswith(FixedStrategyLearner.name + ':'):
        catalog = RegionCatalog(view, regions, profile_cap=profile_cap)
    equilibrium = offline_optimal(view, instance.distribution, regions=regions, profile_cap=profile_cap)
    return PreparedExperiment(instance, regions, catalog, equilibrium)


def run_replication(cfg: ExperimentConfig, prepared: PreparedExperiment, rep: int) -> RegretTrace:
    """
    One episode of T rounds.

    Types θ^t come from the (seed, rep, TYPES) stream and leader actions ℓ^t ~ x^t from the
    (seed, rep, LEADER_ACTION) stream, so type sequences do not depend on the learner.
    """
    instance = prepared.instance
    view = instance.public_view()
    T = cfg.T
    joint = instance.distribution.joint(cfg.profile_cap)
    optimum = prepared.equilibrium.value
    region_lookup = {region.mapping: r for r, region in enumerate(prepared.regions)}

    learner = create_learner(cfg.learner, catalog=prepared.catalog, profile_cap=cfg.profile_cap,
                             oful_cap=cfg.oful_cap)
    learner.reset(view, T)
    thetas = instance.distribution.sample(stream(cfg.seed, rep, Purpose.TYPES), T)
    leader_rng = stream(cfg.seed, rep, Purpose.LEADER_ACTION)

    strategies = np.empty((T, view.L))
    region_index = np.empty(T, dtype=int)
    regret = np.empty(T)
    realized = np.empty(T)
    # strategy bytes -> (responder, U_D(x), region index)
    cache: Dict[bytes, Tuple[BestResponder, float, int]] = {}
    for t in range(T):
        x = learner.choose()
        key = x.probs.tobytes()
        entry = cache.get(key)
        if entry is None:
            responder = BestResponder(view, x)
            entry = (responder, responder.expected_utility(joint, cfg.profile_cap),
                     region_lookup.get(classify(view, x), -1))
            cache[key] = entry
        responder, value, region = entry

        theta = tuple(int(k) for k in thetas[t])
        actions = responder.respond(theta)
        leader_action = int(leader_rng.choice(view.L, p=x.probs))
        utility = float(view.leader_payoffs(actions)[leader_action])

        strategies[t] = x.probs
        region_index[t] = region
        regret[t] = optimum - value
        realized[t] = utility
        if cfg.feedback == FeedbackMode.TYPE:
            learner.observe(TypeFeedback(theta=theta))
        else:
            learner.observe(ActionFeedback(actions=actions, leader_action=leader_action, realized_utility=utility))

    if regret.min() < REGRET_FLOOR:
        logger.warning(f"Replication {rep}: negative regret {regret.min():.3e} below floor {REGRET_FLOOR}")
    logger.debug(f"Replication {rep} finished: cumulative regret {regret.sum():.6f}")
    return RegretTrace(run_id=rep, optimal_value=optimum, strategies=strategies, region_index=region_index,
                       expected_regret=regret, realized_utility=realized)


def run_experiment(cfg: ExperimentConfig, instance: Optional[GameInstance] = None,
                   prepared: Optional[PreparedExperiment] = None, progress: bool = False) -> List[RegretTrace]:
    """All replications of cfg, ordered by replication index"""
    if prepared is None:
        instance = instance if instance is not None else cfg.load_instance()
        prepared = prepare_experiment(instance, cfg.learner, cfg.profile_cap, cfg.region_seeds)
    logger.info(f"Running {cfg.replications} replications of {cfg.learner} ({cfg.feedback.value} feedback), "
                f"T={cfg.T}, optimum {prepared.equilibrium.value:.6f}")

    reps = tqdm(range(cfg.replications), desc=cfg.learner, disable=not progress)
    if cfg.threads == 1 or cfg.replications == 1:
        traces = [run_replication(cfg, prepared, rep) for rep in reps]
    else:
        traces = Parallel(n_jobs=cfg.threads)(delayed(run_replication)(cfg, prepared, rep) for rep in reps)
    logger.info(f"{cfg.learner}: mean final cumulative regret "
                f"{np.mean([tr.cumulative_regret[-1] for tr in traces]):.4f}")
    return traces


def traces_to_frame(traces: Sequence[RegretTrace]) -> pd.DataFrame:
    return pd.concat([trace.to_frame() for trace in traces], ignore_index=True)


def summarize_traces(traces: Sequence[RegretTrace], confidence: float = 0.9) -> pd.DataFrame:
    """Per-round mean cumulative regret with a Student-t confidence interval"""
    if not traces:
        raise ValueError("need at least one trace")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    cumulative = np.stack([trace.cumulative_regret for trace in traces])
    count = cumulative.shape[0]
    mean = cumulative.mean(axis=0)
    if count > 1:
        half_width = stats.t.ppf((1 + confidence) / 2, df=count - 1) * cumulative.std(axis=0, ddof=1) / np.sqrt(count)
    else:
        half_width = np.zeros_like(mean)
    return pd.DataFrame({
        'round': np.arange(1, cumulative.shape[1] + 1),
        'mean_cumulative_regret': mean,
        'ci_low': mean - half_width,
        'ci_high': mean + half_width,
        'replications': count,
    }, columns=SUMMARY_COLUMNS)


def per_round_window_mean(traces: Sequence[RegretTrace], start: int, end: int) -> float:
    """Mean expected regret over rounds start..end (1-based, inclusive) across replications"""
    if not traces:
        raise ValueError("need at least one trace")
    if not 1 <= start <= end <= traces[0].horizon:
        raise ValueError(f"window [{start}, {end}] outside rounds 1..{traces[0].horizon}")
    return float(np.mean([trace.expected_regret[start - 1:end] for trace in traces]))


def decile_ratio(traces: Sequence[RegretTrace]) -> float:
    """Mean per-round regret over the last tenth of the horizon divided by the first tenth"""
    T = traces[0].horizon
    width = max(1, T // 10)
    first = per_round_window_mean(traces, 1, width)
    last = per_round_window_mean(traces, T - width + 1, T)
    return last / first if first > 0 else float('nan')


@dataclass(eq=False)
class BenchResult:
    """Per-round summaries of every learner plus the raw traces"""
    summary: pd.DataFrame
    traces: Dict[str, List[RegretTrace]]
    optimal_value: float

    def decile_ratios(self) -> Dict[str, float]:
        return {learner: decile_ratio(traces) for learner, traces in self.traces.items()}


def run_bench(instance: GameInstance, learners: Sequence[str], T: int, replications: int, seed: int = 0,
              source: str = "bench", threads: int = 1, confidence: float = 0.9, profile_cap: int = PROFILE_CAP,
              region_seeds: int = REGION_SEEDS, progress: bool = False) -> BenchResult:
    """
    Learner comparison on one instance.

    Every learner runs under its default feedback with the same root seed, so all of them
    face identical type sequences.
    """
    view = instance.public_view()
    regions = enumerate_regions(view, seeds=region_seeds)
    catalog = RegionCatalog(view, regions, profile_cap=profile_cap)
    equilibrium = offline_optimal(view, instance.distribution, regions=regions, profile_cap=profile_cap)
    prepared = PreparedExperiment(instance, regions, catalog, equilibrium)

    frames = []
    traces: Dict[str, List[RegretTrace]] = {}
    for learner in learners:
        cfg = ExperimentConfig(generator=source, learner=learner, T=T, seed=seed, replications=replications,
                               threads=threads, profile_cap=profile_cap, region_seeds=region_seeds)
        traces[learner] = run_experiment(cfg, prepared=prepared, progress=progress)
        summary = summarize_traces(traces[learner], confidence)
        summary.insert(0, 'learner', learner)
        frames.append(summary)
    return BenchResult(pd.concat(frames, ignore_index=True)[BENCH_COLUMNS], traces, equilibrium.value)
