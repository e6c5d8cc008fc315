import numpy as np
import pytest

from src.core.errors import GridTooLarge
from src.core.game import leader_expected_utility
from src.harness.generators import gen_random_instance
from src.harness.oracles import OracleReport, brute_force_optimal, run_oracle_suite, sample_regions, simplex_grid
from src.solvers.equilibrium import offline_optimal
from src.solvers.geometry import enumerate_regions


class TestSimplexGrid:
    def test_points(self):
        """Step 0.5 on three actions gives six lattice points"""
        grid = simplex_grid(3, 0.5)
        assert grid.shape == (6, 3)
        assert np.allclose(grid.sum(axis=1), 1.0)
        assert len({tuple(p) for p in grid}) == 6

    def test_step_must_divide_one(self):
        """0.3 is not a lattice step"""
        with pytest.raises(ValueError):
            simplex_grid(2, 0.3)


class TestBruteForce:
    def test_hard_instance(self, g1):
        """Grid finds 0.6"""
        x, value = brute_force_optimal(g1.public_view(), g1.distribution, grid_step=0.01)
        assert value == pytest.approx(0.6)
        assert x[0] >= x[1]

    def test_constant_game(self, constant_game):
        """Constant leader payoff everywhere"""
        _, value = brute_force_optimal(constant_game.public_view(), constant_game.distribution, grid_step=0.05)
        assert value == pytest.approx(0.5)

    def test_never_beats_offline(self, small_random):
        """Lattice points are feasible strategies"""
        view, dist = small_random.public_view(), small_random.distribution
        x, value = brute_force_optimal(view, dist, grid_step=0.02)
        assert value <= offline_optimal(view, dist).value + 1e-9
        assert value == pytest.approx(leader_expected_utility(x, dist, view), abs=1e-12)

    def test_too_many_actions(self):
        """Grid search stops at L = 4"""
        game = gen_random_instance(n=1, L=5, A=2, K=2, seed=0)
        with pytest.raises(GridTooLarge):
            brute_force_optimal(game.public_view(), game.distribution)


class TestSampling:
    def test_sampled_subset_of_enumerated(self, small_random):
        """Sampling never finds a mapping enumeration misses"""
        view = small_random.public_view()
        assert sample_regions(view, 1000, seed=3) <= {r.mapping for r in enumerate_regions(view)}

    def test_hard_instance_samples_two_regions(self, g1):
        """Random points avoid the zero-slack regions"""
        assert {m.w for m in sample_regions(g1.public_view(), 200)} == {((0, 1),), ((1, 0),)}


class TestOracleSuite:
    def test_hard_instance_passes(self, g1):
        """Every check agrees on the hard instance"""
        report = run_oracle_suite(g1.public_view(), g1.distribution, name="hard", grid_step=0.01, num_samples=500)
        assert report.passed
        assert {c.name for c in report.checks} == {
            "regions-sound", "regions-bound", "witness-classify", "value-consistent", "grid-oracle", "joint-lp"}

    def test_joint_lp_skipped_above_cap(self, g1):
        """A tiny variable cap drops the joint LP check"""
        report = run_oracle_suite(g1.public_view(), g1.distribution, grid_step=0.05, num_samples=100, variable_cap=4)
        assert "joint-lp" not in {c.name for c in report.checks}

    def test_report_fails_on_any_check(self):
        """One failing check fails the instance"""
        report = OracleReport(instance="x")
        report.add("a", True, "ok")
        report.add("b", False, "off by one")
        assert not report.passed
