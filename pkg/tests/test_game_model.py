"""
Test payoff tensors, vectorization, strategies and the payoff operator.
"""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from drgames.exceptions import InvalidGameError, InvalidStrategyError
from drgames.game_model import (
    GameShape,
    MixedStrategy,
    PayoffTensor,
    StrategyProfile,
    expected_payoff,
    payoff_operator,
    unvec,
    vec,
)
from tests.support import random_profile


class TestGameShape(unittest.TestCase):
    """Shapes and their derived sizes"""

    def test_sizes(self):
        shape = GameShape((2, 3, 2))
        self.assertEqual(shape.num_players, 3)
        self.assertEqual(shape.joint_actions, 12)
        self.assertEqual(shape.vec_length, 36)
        self.assertEqual(shape.tensor_shape, (3, 2, 3, 2))
        self.assertEqual(str(shape), "2x3x2")

    def test_rejects_single_player_and_single_action(self):
        with self.assertRaises(InvalidGameError):
            GameShape((3,))
        with self.assertRaises(InvalidGameError):
            GameShape((2, 1))

    def test_rejects_huge_games(self):
        with self.assertRaises(InvalidGameError):
            GameShape((10, 10, 10, 11))

    def test_player_index(self):
        shape = GameShape((2, 2))
        self.assertEqual(shape.check_player(1), 1)
        with self.assertRaises(InvalidGameError):
            shape.check_player(2)
        with self.assertRaises(InvalidGameError):
            shape.check_player(-1)


class TestVectorization(unittest.TestCase):
    """vec is player-outermost with the last player's action fastest"""

    def test_inspection_layout(self):
        # employee (Shirk, Work) x employer (Inspect, Don't)
        nominal = PayoffTensor.from_player_arrays([
            [[0, 15], [5, 5]],
            [[-5, -15], [0, 5]],
        ])
        np.testing.assert_array_equal(vec(nominal), [0, 15, 5, 5, -5, -15, 0, 5])

    def test_unvec_inverts_vec(self):
        rng = np.random.default_rng(3)
        shape = GameShape((2, 3, 2))
        values = rng.normal(size=shape.vec_length)
        np.testing.assert_array_equal(vec(unvec(shape, values)), values)

    def test_unvec_checks_length(self):
        with self.assertRaises(InvalidGameError):
            unvec(GameShape((2, 2)), np.zeros(7))

    def test_non_finite_payoffs(self):
        entries = np.zeros((2, 2, 2))
        entries[0, 1, 1] = np.nan
        with self.assertRaises(InvalidGameError):
            PayoffTensor(GameShape((2, 2)), entries)


class TestStrategies(unittest.TestCase):

    def test_negative_entries_rejected(self):
        with self.assertRaises(InvalidStrategyError):
            MixedStrategy([1.2, -0.2])

    def test_wrong_sum_rejected(self):
        with self.assertRaises(InvalidStrategyError):
            MixedStrategy([0.5, 0.6])

    def test_small_drift_renormalized(self):
        strategy = MixedStrategy([0.5, 0.5 + 1e-10])
        self.assertAlmostEqual(strategy.probs.sum(), 1.0, places=15)

    def test_pure_and_support(self):
        strategy = MixedStrategy.pure(3, 1)
        self.assertEqual(strategy.support(), (1,))
        self.assertEqual(MixedStrategy.uniform(4).support(), (0, 1, 2, 3))

    def test_from_stacked(self):
        shape = GameShape((2, 3))
        profile = StrategyProfile.from_stacked(shape, [0.25, 0.75, 0.2, 0.3, 0.5])
        np.testing.assert_allclose(profile[1].probs, [0.2, 0.3, 0.5])
        with self.assertRaises(InvalidStrategyError):
            StrategyProfile.from_stacked(shape, [0.5, 0.5, 1.0])

    def test_check_against_names_player(self):
        profile = StrategyProfile(([0.5, 0.5], [1.0, 0.0]))
        with self.assertRaises(InvalidStrategyError) as context:
            profile.check_against(GameShape((2, 3)))
        self.assertEqual(context.exception.player, 1)
        profile.check_against(GameShape((2, 3)), skip=1)

    def test_first_probabilities(self):
        profile = StrategyProfile.from_first_probabilities([1 / 3, 2 / 3])
        np.testing.assert_allclose(profile.stacked(), [1 / 3, 2 / 3, 2 / 3, 1 / 3])


class TestPayoffs(unittest.TestCase):

    def test_pure_profile_reads_entry(self):
        rng = np.random.default_rng(0)
        shape = GameShape((2, 3, 2))
        payoffs = unvec(shape, rng.normal(size=shape.vec_length))
        profile = StrategyProfile.pure(shape, (1, 2, 0))
        for i in range(3):
            self.assertAlmostEqual(expected_payoff(payoffs, profile, i),
                                   payoffs.entries[i, 1, 2, 0])

    def test_mixed_profile_matches_brute_force(self):
        rng = np.random.default_rng(1)
        shape = GameShape((3, 2))
        payoffs = unvec(shape, rng.normal(size=shape.vec_length))
        profile = random_profile(rng, shape)
        x, y = profile[0].probs, profile[1].probs
        self.assertAlmostEqual(expected_payoff(payoffs, profile, 0), x @ payoffs.player(0) @ y)
        self.assertAlmostEqual(expected_payoff(payoffs, profile, 1), x @ payoffs.player(1) @ y)

    def test_payoff_operator_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            shape = GameShape(tuple(rng.integers(2, 4, size=3)))
            payoffs = unvec(shape, rng.normal(size=shape.vec_length))
            profile = random_profile(rng, shape)
            for i in range(shape.num_players):
                operator = payoff_operator(profile, i, shape)
                self.assertEqual(operator.shape, (shape.vec_length, shape.action_counts[i]))
                self.assertAlmostEqual(vec(payoffs) @ operator @ profile[i].probs,
                                       expected_payoff(payoffs, profile, i), places=10)

    def test_payoff_operator_ignores_own_strategy(self):
        shape = GameShape((2, 2))
        first = StrategyProfile(([1.0, 0.0], [0.3, 0.7]))
        second = StrategyProfile(([0.0, 1.0], [0.3, 0.7]))
        np.testing.assert_array_equal(payoff_operator(first, 0, shape),
                                      payoff_operator(second, 0, shape))


if __name__ == '__main__':
    unittest.main()
