import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError
from scipy import stats

from src.core.errors import FeedbackMismatch, HorizonTooSmall
from src.harness.rng import Purpose, stream
from src.harness.simulator import (
    ExperimentConfig,
    RegretTrace,
    decile_ratio,
    per_round_window_mean,
    prepare_experiment,
    run_bench,
    run_experiment,
    summarize_traces,
    traces_to_frame,
)
from src.learners.base import FeedbackMode
from src.utils.file_handler import BENCH_COLUMNS, TRACE_COLUMNS

HARD = "hard-single:c=1,eps=0.2,sigma=+"


def _trace(run_id, regret):
    regret = np.asarray(regret, dtype=float)
    T = len(regret)
    return RegretTrace(run_id=run_id, optimal_value=1.0, strategies=np.full((T, 2), 0.5),
                       region_index=np.zeros(T, dtype=int), expected_regret=regret, realized_utility=np.zeros(T))


class TestStreams:
    def test_reproducible(self):
        """Same (seed, replication, purpose), same draws"""
        assert np.array_equal(stream(5, 1, Purpose.TYPES).random(4), stream(5, 1, Purpose.TYPES).random(4))

    def test_independent_purposes(self):
        """Type and leader-action streams differ"""
        assert not np.array_equal(stream(5, 1, Purpose.TYPES).random(4), stream(5, 1, Purpose.LEADER_ACTION).random(4))
        assert not np.array_equal(stream(5, 1, Purpose.TYPES).random(4), stream(5, 2, Purpose.TYPES).random(4))


class TestExperimentConfig:
    def test_defaults_feedback(self):
        """Feedback comes from the learner"""
        assert ExperimentConfig(generator=HARD, learner="ucb", T=10).feedback == FeedbackMode.ACTION
        assert ExperimentConfig(generator=HARD, learner="tf-general", T=10).feedback == FeedbackMode.TYPE

    def test_exactly_one_source(self):
        """Instance and generator are exclusive"""
        with pytest.raises(ValidationError):
            ExperimentConfig(learner="tf-general", T=10)
        with pytest.raises(ValidationError):
            ExperimentConfig(instance="game.json", generator=HARD, learner="tf-general", T=10)

    def test_feedback_mismatch(self):
        """UCB cannot run on type feedback"""
        with pytest.raises(FeedbackMismatch):
            ExperimentConfig(generator=HARD, learner="ucb", feedback="type", T=10)

    def test_invalid_values(self):
        """Horizon and unknown keys are checked"""
        with pytest.raises(ValidationError):
            ExperimentConfig(generator=HARD, learner="tf-general", T=0)
        with pytest.raises(ValidationError):
            ExperimentConfig(generator=HARD, learner="tf-general", T=5, rounds=5)
        with pytest.raises(ValueError):
            ExperimentConfig(generator=HARD, learner="exp3", T=5)

    def test_from_yaml(self, tmp_path):
        """Experiment documents load from YAML"""
        path = tmp_path / "exp.yaml"
        path.write_text(f"generator: '{HARD}'\nlearner: ucb\nT: 50\nreplications: 3\n")
        cfg = ExperimentConfig.from_file(str(path))
        assert (cfg.T, cfg.replications, cfg.feedback) == (50, 3, FeedbackMode.ACTION)


class TestRunExperiment:
    def test_fixed_strategy_regret(self):
        """Fixed (0, 1) on the hard instance loses 0.2 every round"""
        cfg = ExperimentConfig(generator=HARD, learner="fixed:0,1", T=25, replications=2)
        traces = run_experiment(cfg)
        assert len(traces) == 2
        for trace in traces:
            assert trace.optimal_value == pytest.approx(0.6)
            assert np.allclose(trace.expected_regret, 0.2, atol=1e-12)
            assert trace.cumulative_regret[-1] == pytest.approx(5.0, abs=1e-9)

    def test_realized_utility_is_binary(self):
        """Leader payoffs on the hard instance are 0 or 1"""
        cfg = ExperimentConfig(generator=HARD, learner="tf-general", T=30)
        trace = run_experiment(cfg)[0]
        assert set(np.unique(trace.realized_utility)) <= {0.0, 1.0}

    def test_deterministic(self, small_random):
        """Same seed, same trace"""
        cfg = ExperimentConfig(generator="random:n=2,L=3,A=2,K=2,seed=3", learner="tf-independent", T=40, seed=9)
        first = run_experiment(cfg, instance=small_random)[0]
        second = run_experiment(cfg, instance=small_random)[0]
        assert np.array_equal(first.strategies, second.strategies)
        assert np.array_equal(first.realized_utility, second.realized_utility)

    def test_type_sequence_shared_across_learners(self):
        """Learners face the same realized types for the same seed"""
        one = run_experiment(ExperimentConfig(generator=HARD, learner="fixed:1,0", T=30, seed=4))[0]
        two = run_experiment(ExperimentConfig(generator=HARD, learner="fixed:1,0", T=30, seed=4,
                                              feedback="action"))[0]
        assert np.array_equal(one.realized_utility, two.realized_utility)

    def test_regret_nonnegative(self, small_random):
        """Exact regret never drops below zero"""
        cfg = ExperimentConfig(generator="random:n=2,L=3,A=2,K=2,seed=3", learner="ucb", T=60, seed=1)
        trace = run_experiment(cfg, instance=small_random)[0]
        assert trace.expected_regret.min() >= -1e-7
        assert set(trace.region_index) <= set(range(len(prepare_experiment(small_random, "ucb").regions))) | {-1}

    def test_horizon_too_small_for_ucb(self):
        """UCB needs a round per playable region"""
        with pytest.raises(HorizonTooSmall):
            run_experiment(ExperimentConfig(generator=HARD, learner="ucb", T=1))

    def test_ucb_learns_on_negative_sign_instance(self):
        """UCB regret per round shrinks instead of staying at the ε gap of the shared tie point"""
        cfg = ExperimentConfig(generator="hard-single:c=1,eps=0.2,sigma=-", learner="ucb", T=1500, seed=3,
                               replications=4)
        traces = run_experiment(cfg)
        late = per_round_window_mean(traces, 1401, 1500)
        assert late < 0.1
        assert late < per_round_window_mean(traces, 1, 100)

    def test_no_catalog_for_fixed(self, g1):
        """Fixed learners skip the region catalog"""
        assert prepare_experiment(g1, "fixed:1,0").catalog is None
        assert prepare_experiment(g1, "tf-general").catalog is not None

    def test_trace_frame(self):
        """Trace rows carry the trace columns"""
        frame = traces_to_frame(run_experiment(ExperimentConfig(generator=HARD, learner="fixed:0,1", T=5,
                                                                replications=2)))
        assert list(frame.columns) == TRACE_COLUMNS
        assert list(frame['round']) == [1, 2, 3, 4, 5] * 2
        assert frame['cumulative_regret'].iloc[4] == pytest.approx(1.0)


class TestAggregation:
    def test_summary_interval(self):
        """Student-t interval around the per-round mean"""
        traces = [_trace(0, [1.0, 1.0]), _trace(1, [3.0, 3.0])]
        summary = summarize_traces(traces, confidence=0.9)
        assert list(summary['mean_cumulative_regret']) == [2.0, 4.0]
        half = stats.t.ppf(0.95, df=1) * np.std([1.0, 3.0], ddof=1) / np.sqrt(2)
        assert summary['ci_high'].iloc[0] == pytest.approx(2.0 + half)
        assert summary['ci_low'].iloc[0] == pytest.approx(2.0 - half)
        assert (summary['replications'] == 2).all()

    def test_single_trace_has_zero_width(self):
        """One replication gives a degenerate interval"""
        summary = summarize_traces([_trace(0, [0.5, 0.5])])
        assert (summary['ci_low'] == summary['ci_high']).all()

    def test_summary_checks(self):
        """Empty input and bad confidence levels raise"""
        with pytest.raises(ValueError):
            summarize_traces([])
        with pytest.raises(ValueError):
            summarize_traces([_trace(0, [1.0])], confidence=1.0)

    def test_window_mean(self):
        """Mean per-round regret over rounds 2..3"""
        traces = [_trace(0, [1, 2, 3, 4]), _trace(1, [3, 4, 5, 6])]
        assert per_round_window_mean(traces, 2, 3) == pytest.approx(3.5)
        with pytest.raises(ValueError):
            per_round_window_mean(traces, 3, 5)

    def test_decile_ratio(self):
        """Last tenth over first tenth"""
        traces = [_trace(0, [1, 2, 3, 4]), _trace(1, [3, 4, 5, 6])]
        assert decile_ratio(traces) == pytest.approx(2.5)
        assert np.isnan(decile_ratio([_trace(0, [0.0, 1.0])]))


class TestBench:
    def test_learner_comparison(self, g1):
        """Each learner gets T summary rows, learner column first"""
        result = run_bench(g1, ["tf-general", "fixed:0,1"], T=20, replications=2, source=HARD)
        assert list(result.summary.columns) == BENCH_COLUMNS
        assert len(result.summary) == 40
        fixed = result.summary[result.summary['learner'] == "fixed:0,1"]
        assert fixed['mean_cumulative_regret'].iloc[-1] == pytest.approx(4.0)
        assert result.optimal_value == pytest.approx(0.6)
        assert result.decile_ratios()["fixed:0,1"] == pytest.approx(1.0)
        assert isinstance(result.summary, pd.DataFrame)
