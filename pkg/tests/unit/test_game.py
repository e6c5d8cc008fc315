import itertools

import numpy as np
import pytest

from src.core.distributions import GeneralDistribution
from src.core.errors import InstanceValidationError, ProfileCapExceeded, ShapeMismatch
from src.core.game import (
    BestResponder,
    GameInstance,
    MixedStrategy,
    best_response,
    empirical_leader_utility,
    follower_expected_utility,
    leader_expected_utility,
)
from src.harness.generators import BAD, GOOD, gen_random_instance
from src.solvers.geometry import classify


class TestMixedStrategy:
    def test_rejects_off_simplex(self):
        """Entries must be nonnegative and sum to one"""
        with pytest.raises(ValueError):
            MixedStrategy([0.6, 0.6])
        with pytest.raises(ValueError):
            MixedStrategy([1.1, -0.1])

    def test_clamps_tiny_negatives(self):
        """Round-off below the tolerance is clamped to zero"""
        x = MixedStrategy([1.0 + 5e-10, -5e-10])
        assert x[1] == 0.0

    def test_constructors(self):
        """Uniform and vertex strategies"""
        assert np.allclose(MixedStrategy.uniform(4).probs, 0.25)
        assert MixedStrategy.vertex(3, 2)[2] == 1.0


class TestGameInstance:
    def test_utilities_out_of_range(self):
        """Utilities outside [0,1] are rejected"""
        with pytest.raises(InstanceValidationError):
            GameInstance.from_tables(np.full((2, 2), 1.5), np.zeros((1, 2, 2, 1)),
                                     GeneralDistribution([1.0], n=1, K=1))

    def test_nan_rejected(self):
        """NaN entries are rejected"""
        follower = np.zeros((1, 2, 2, 1))
        follower[0, 0, 0, 0] = np.nan
        with pytest.raises(InstanceValidationError):
            GameInstance.from_tables(np.zeros((2, 2)), follower, GeneralDistribution([1.0], n=1, K=1))

    def test_leader_table_size(self):
        """Leader table must have A^n·L entries"""
        with pytest.raises(ShapeMismatch):
            GameInstance.from_tables(np.zeros(5), np.zeros((1, 2, 2, 1)), GeneralDistribution([1.0], n=1, K=1))

    def test_distribution_shape(self):
        """Distribution must cover n followers with K types"""
        with pytest.raises(ShapeMismatch):
            GameInstance.from_tables(np.zeros((2, 2)), np.zeros((1, 2, 2, 2)), GeneralDistribution([1.0], n=1, K=1))

    def test_public_view_has_no_distribution(self, g1):
        """Learners only see the view"""
        view = g1.public_view()
        assert not hasattr(view, 'distribution')


class TestFollowerUtility:
    def test_hard_instance_good_action(self, g1):
        """v(x, Good, +1) = x(+1)"""
        x = MixedStrategy([0.7, 0.3])
        assert follower_expected_utility(x, 0, GOOD, 0, g1.public_view()) == pytest.approx(0.7)

    def test_unit_mass(self, small_random):
        """A vertex strategy reads the table entry"""
        view = small_random.public_view()
        x = MixedStrategy.vertex(view.L, 1)
        assert follower_expected_utility(x, 1, 0, 1, view) == view.follower_utilities[1, 1, 0, 1]

    def test_index_errors(self, g1):
        """Indices out of range raise IndexError"""
        with pytest.raises(IndexError):
            follower_expected_utility(MixedStrategy.uniform(2), 1, 0, 0, g1.public_view())


class TestBestResponse:
    def test_hard_instance(self, g1):
        """At x=(0.7,0.3) type +1 plays Good and type −1 plays Bad"""
        view = g1.public_view()
        x = MixedStrategy([0.7, 0.3])
        assert best_response(x, (0,), view) == (GOOD,)
        assert best_response(x, (1,), view) == (BAD,)

    def test_tie_goes_to_good_for_plus_type(self, g1):
        """At the tie x=(0.5,0.5) type +1 plays Good"""
        assert best_response(MixedStrategy.uniform(2), (0,), g1.public_view()) == (GOOD,)

    def test_leader_favorable_joint_ties(self):
        """Without a tie ranking the joint action best for the leader is chosen"""
        follower = np.full((2, 2, 2, 1), 0.5)
        leader = np.array([[0.1, 0.1], [0.2, 0.2], [0.9, 0.9], [0.3, 0.3]])
        game = GameInstance.from_tables(leader, follower, GeneralDistribution([1.0], n=2, K=1))
        assert best_response(MixedStrategy.uniform(2), (0, 0), game.public_view()) == (1, 0)

    def test_tie_break_ignores_other_followers_types(self):
        """A tied follower answers the same whatever type the other follower has"""
        follower = np.zeros((2, 2, 2, 2))
        follower[0] = 0.5
        follower[1, :, 0, 0] = 1.0
        follower[1, :, 1, 1] = 1.0
        leader = np.array([[0.9, 0.9], [0.1, 0.1], [0.1, 0.1], [0.9, 0.9]])
        game = GameInstance.from_tables(leader, follower, GeneralDistribution([0.25] * 4, n=2, K=2))
        view, x = game.public_view(), MixedStrategy.uniform(2)
        first = {best_response(x, (k0, k1), view)[0] for k0 in range(2) for k1 in range(2)}
        assert len(first) == 1
        assert best_response(x, (0, 1), view)[1] == 1

    def test_matches_exhaustive_enumeration(self, small_random):
        """Joint response maximizes leader utility within per-follower argmax sets"""
        view = small_random.public_view()
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = MixedStrategy(rng.dirichlet(np.ones(view.L)))
            expected = view.follower_expected_utilities(x)
            for theta in itertools.product(range(view.K), repeat=view.n):
                sets = [np.flatnonzero(expected[i, :, k] >= expected[i, :, k].max() - 1e-9)
                        for i, k in enumerate(theta)]
                best = max(itertools.product(*sets), key=lambda a: x.probs @ view.leader_payoffs(a))
                assert best_response(x, theta, view) == tuple(int(a) for a in best)

    def test_constant_shift_invariance(self, small_random):
        """Adding a constant to one type's utilities keeps the response"""
        view = small_random.public_view()
        shifted = view.follower_utilities * 0.5
        shifted[0, :, :, 1] += 0.3
        base = GameInstance.from_tables(view.leader_table, view.follower_utilities * 0.5, small_random.distribution)
        moved = GameInstance.from_tables(view.leader_table, shifted, small_random.distribution)
        rng = np.random.default_rng(6)
        for _ in range(20):
            x = MixedStrategy(rng.dirichlet(np.ones(view.L)))
            for theta in itertools.product(range(view.K), repeat=view.n):
                assert best_response(x, theta, base.public_view()) == best_response(x, theta, moved.public_view())


class TestLeaderUtility:
    def test_hard_instance_optimum(self, g1):
        """U(0.7,0.3) = D(+1) = 0.6"""
        assert leader_expected_utility(MixedStrategy([0.7, 0.3]), g1.distribution, g1.public_view()) == \
            pytest.approx(0.6, abs=1e-12)

    def test_dominant_instance_is_linear(self, g2):
        """With dominant actions U_D is one linear function on the whole simplex"""
        view = g2.public_view()
        dominant = [best_response(MixedStrategy.uniform(2), (k,), view) for k in range(view.K)]
        weights = g2.distribution.joint()
        rng = np.random.default_rng(1)
        for _ in range(5):
            x = MixedStrategy(rng.dirichlet(np.ones(2)))
            assert [best_response(x, (k,), view) for k in range(view.K)] == dominant
            expected = sum(weights[k] * (x.probs @ view.leader_payoffs(dominant[k])) for k in range(view.K))
            assert leader_expected_utility(x, g2.distribution, view) == pytest.approx(expected, abs=1e-12)

    def test_monte_carlo(self, small_random):
        """Exact value matches a Monte-Carlo estimate within 4σ"""
        view = small_random.public_view()
        x = MixedStrategy([0.2, 0.5, 0.3])
        exact = leader_expected_utility(x, small_random.distribution, view)
        rng = np.random.default_rng(2)
        draws = small_random.distribution.sample(rng, 20_000)
        responder = BestResponder(view, x)
        values = np.array([responder.leader_value(responder.respond(theta)) for theta in map(tuple, draws)])
        sigma = values.std() / np.sqrt(len(values))
        assert abs(values.mean() - exact) <= 4 * sigma + 1e-9

    def test_linear_inside_region(self, small_random):
        """U is linear on segments inside one region"""
        view, dist = small_random.public_view(), small_random.distribution
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 10:
            x = MixedStrategy(rng.dirichlet(np.ones(view.L)))
            y = MixedStrategy(rng.dirichlet(np.ones(view.L)))
            if classify(view, x) != classify(view, y):
                continue
            ux, uy = leader_expected_utility(x, dist, view), leader_expected_utility(y, dist, view)
            for alpha in np.linspace(0, 1, 11):
                z = MixedStrategy(alpha * x.probs + (1 - alpha) * y.probs)
                assert leader_expected_utility(z, dist, view) == pytest.approx(alpha * ux + (1 - alpha) * uy, abs=1e-9)
            checked += 1

    def test_profile_cap(self):
        """Exact sums beyond the cap raise"""
        game = gen_random_instance(n=3, L=2, A=2, K=3, seed=0)
        with pytest.raises(ProfileCapExceeded):
            leader_expected_utility(MixedStrategy.uniform(2), game.distribution, game.public_view(), profile_cap=10)

    def test_empirical_utility(self, g1):
        """Average over observed profiles"""
        x = MixedStrategy([0.7, 0.3])
        assert empirical_leader_utility(x, [(0,), (0,), (1,)], g1.public_view()) == pytest.approx(2 / 3)
