"""
Test CVaR of finite distributions and the worst-case CVaR program.
"""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from drgames.ambiguity import AffineBoxUncertainty, AmbiguitySet, DiscreteDistribution, build_support_from_box
from drgames.exceptions import AmbiguitySetError, InvalidGameError
from drgames.game_model import GameShape, StrategyProfile, expected_payoff, payoff_operator, unvec
from drgames.risk import (
    CvarProgramBuilder,
    RiskProfile,
    cvar_discrete,
    robust_payoff,
    worst_case_cvar,
    worst_case_cvar_lower_bound,
)
from tests.support import inspection_game, random_ambiguity, random_profile, random_shape, two_atom_member

try:
    from scipy.optimize import linprog
except ImportError:  # scipy is a dev extra
    linprog = None


class TestRiskProfile(unittest.TestCase):

    def test_range(self):
        for bad in (0.0, -0.1, 1.5):
            with self.assertRaises(InvalidGameError):
                RiskProfile((1.0, bad))

    def test_helpers(self):
        risk = RiskProfile((1.0, 0.25))
        self.assertFalse(risk.is_risk_averse(0))
        self.assertTrue(risk.is_risk_averse(1))
        self.assertFalse(risk.all_risk_neutral)
        self.assertAlmostEqual(risk.sigma(1), 3.0)
        self.assertEqual(risk.sigma(0), 0.0)
        self.assertTrue(RiskProfile.neutral(3).all_risk_neutral)

    def test_player_count(self):
        with self.assertRaises(InvalidGameError):
            RiskProfile((1.0,)).check_against(GameShape((2, 2)))


class TestCvarDiscrete(unittest.TestCase):
    """Mean of the worst eps-tail of the losses"""

    def test_uniform_losses(self):
        losses, probs = [1.0, 2.0, 3.0, 4.0], [0.25] * 4
        self.assertAlmostEqual(cvar_discrete(losses, probs, 1.0), 2.5)
        self.assertAlmostEqual(cvar_discrete(losses, probs, 0.5), 3.5)
        self.assertAlmostEqual(cvar_discrete(losses, probs, 0.25), 4.0)
        self.assertAlmostEqual(cvar_discrete(losses, probs, 0.3), (0.25 * 4 + 0.05 * 3) / 0.3)

    def test_matches_rockafellar_uryasev_minimum(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            losses = rng.normal(size=6)
            probs = rng.dirichlet(np.ones(6))
            eps = rng.uniform(0.05, 1.0)
            # the minimizing threshold is one of the atoms
            objective = min(z + probs @ np.maximum(losses - z, 0.0) / eps for z in losses)
            self.assertAlmostEqual(cvar_discrete(losses, probs, eps), objective, places=9)

    def test_invalid_inputs(self):
        with self.assertRaises(AmbiguitySetError):
            cvar_discrete([], [], 0.5)
        with self.assertRaises(AmbiguitySetError):
            cvar_discrete([1.0, 2.0], [0.5, 0.6], 0.5)
        with self.assertRaises(InvalidGameError):
            cvar_discrete([1.0], [1.0], 0.0)


class TestWorstCaseCvar(unittest.TestCase):
    """Properties of the moment-dual LP"""

    def test_risk_neutral_is_negated_mean_payoff(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            shape = random_shape(rng)
            ambiguity, _ = random_ambiguity(rng, shape)
            profile = random_profile(rng, shape)
            for i in range(shape.num_players):
                value = worst_case_cvar(ambiguity, 1.0, profile, i).value
                self.assertAlmostEqual(value, -expected_payoff(ambiguity.mean_game(), profile, i),
                                       delta=1e-6)

    def test_lower_bound_sandwich(self):
        rng = np.random.default_rng(20)
        for _ in range(200):
            shape = random_shape(rng, max_actions=2)
            ambiguity, box = random_ambiguity(rng, shape)
            profile = random_profile(rng, shape)
            eps = rng.uniform(0.05, 1.0)
            i = int(rng.integers(shape.num_players))
            members = [two_atom_member(rng, ambiguity, box) for _ in range(3)]
            bound = worst_case_cvar_lower_bound(ambiguity, eps, profile, i, members)
            self.assertLessEqual(bound, worst_case_cvar(ambiguity, eps, profile, i).value + 1e-6)

    def test_singleton_support_is_exact(self):
        rng = np.random.default_rng(30)
        for _ in range(10):
            shape = random_shape(rng, max_actions=2)
            ambiguity, box = random_ambiguity(rng, shape, width=0.0)
            profile = random_profile(rng, shape)
            eps = rng.uniform(0.05, 1.0)
            point = DiscreteDistribution.point_mass(unvec(shape, box.lo))
            for i in range(shape.num_players):
                bound = worst_case_cvar_lower_bound(ambiguity, eps, profile, i, [point])
                value = worst_case_cvar(ambiguity, eps, profile, i).value
                self.assertAlmostEqual(bound, value, delta=1e-6)

    def test_nonincreasing_in_eps(self):
        rng = np.random.default_rng(40)
        for _ in range(100):
            shape = random_shape(rng, max_actions=2)
            ambiguity, _ = random_ambiguity(rng, shape)
            profile = random_profile(rng, shape)
            values = [worst_case_cvar(ambiguity, eps, profile, 0).value
                      for eps in (0.05, 0.25, 0.5, 0.75, 1.0)]
            for tighter, looser in zip(values, values[1:]):
                self.assertGreaterEqual(tighter, looser - 1e-8)

    def test_translation_shifts_value(self):
        rng = np.random.default_rng(45)
        for _ in range(20):
            shape = random_shape(rng)
            ambiguity, box = random_ambiguity(rng, shape)
            profile = random_profile(rng, shape)
            eps = rng.uniform(0.05, 1.0)
            i = int(rng.integers(shape.num_players))
            c = rng.uniform(-5.0, 5.0)
            block = shape.vec_length // shape.num_players
            shift = np.zeros(shape.vec_length)
            shift[i * block:(i + 1) * block] = c
            shifted_box = AffineBoxUncertainty(shape, box.names, box.lo + shift, box.hi + shift,
                                               box.A, box.b)
            shifted = AmbiguitySet(shape, build_support_from_box(shifted_box),
                                   ambiguity.m + shift, ambiguity.s)
            self.assertAlmostEqual(worst_case_cvar(shifted, eps, profile, i).value,
                                   worst_case_cvar(ambiguity, eps, profile, i).value - c,
                                   delta=1e-6)

    def test_zero_deviation_ignores_eps(self):
        rng = np.random.default_rng(50)
        shape = GameShape((2, 2))
        ambiguity, _ = random_ambiguity(rng, shape, s=0.0)
        profile = random_profile(rng, shape)
        expected = -expected_payoff(ambiguity.mean_game(), profile, 1)
        for eps in (0.1, 0.5, 1.0):
            self.assertAlmostEqual(worst_case_cvar(ambiguity, eps, profile, 1).value, expected,
                                   delta=1e-6)

    def test_bounded_by_support_worst_case(self):
        rng = np.random.default_rng(60)
        for _ in range(10):
            shape = random_shape(rng, max_actions=2)
            ambiguity, _ = random_ambiguity(rng, shape)
            profile = random_profile(rng, shape)
            worst = robust_payoff(ambiguity, profile, 0)
            self.assertLessEqual(worst, expected_payoff(ambiguity.mean_game(), profile, 0) + 1e-9)
            self.assertLessEqual(worst_case_cvar(ambiguity, 0.05, profile, 0).value, -worst + 1e-6)

    def test_result_variables(self):
        ambiguity, _ = inspection_game()
        profile = StrategyProfile.from_first_probabilities([1 / 3, 2 / 3])
        result = worst_case_cvar(ambiguity, 0.5, profile, 1)
        self.assertGreaterEqual(result.gamma, -1e-9)
        self.assertTrue(np.all(result.xi <= 1e-9))
        self.assertTrue(np.all(result.theta <= 1e-9))
        recomputed = result.zeta + (result.alpha + ambiguity.m @ result.beta
                                    + ambiguity.s * result.gamma) / 0.5
        self.assertAlmostEqual(recomputed, result.value, places=7)
        self.assertEqual(set(result.variables()),
                         {"zeta", "alpha", "gamma", "beta", "lam", "kappa", "delta", "nu",
                          "xi", "theta"})

    def test_builder_layout(self):
        ambiguity, _ = inspection_game()
        builder = CvarProgramBuilder(ambiguity, 0.5)
        slices = builder.variable_slices(num_actions=2)
        self.assertEqual(slices["zeta"], slice(0, 1))
        self.assertEqual(slices["u"].stop - slices["u"].start, 2)
        profile = StrategyProfile.from_first_probabilities([0.5, 0.5])
        program = builder.best_response_program(profile, 0)
        self.assertEqual(program.num_vars, slices["u"].stop)
        ub, eq = builder.row_slices(with_simplex=True)
        self.assertEqual(program.A_ub.shape[0], ub["tail_deviation"].stop)
        self.assertEqual(program.A_eq.shape[0], eq["simplex"].stop)

    def test_builder_rejects_bad_eps(self):
        ambiguity, _ = inspection_game()
        with self.assertRaises(InvalidGameError):
            CvarProgramBuilder(ambiguity, 1.5)

    def test_empty_candidate_list(self):
        ambiguity, _ = inspection_game()
        profile = StrategyProfile.from_first_probabilities([0.5, 0.5])
        self.assertEqual(worst_case_cvar_lower_bound(ambiguity, 0.5, profile, 0, []), -np.inf)

    def test_non_member_candidate_reports_index(self):
        ambiguity, _ = inspection_game()
        profile = StrategyProfile.from_first_probabilities([0.5, 0.5])
        good = DiscreteDistribution.point_mass(ambiguity.mean_game())
        bad = DiscreteDistribution.point_mass(unvec(ambiguity.shape, np.zeros(8)))
        with self.assertRaises(AmbiguitySetError) as context:
            worst_case_cvar_lower_bound(ambiguity, 0.5, profile, 0, [good, bad])
        self.assertEqual(context.exception.index, 1)


def two_point_worst_case(ambiguity, eps, profile, i):
    """
    Worst-case CVaR through the distributions themselves.

    The eps-tail and the rest of any member can each be collapsed to their
    barycenters a and b without changing the mean or the tail loss, and
    without raising the deviation, so the worst case is

        max L(a)  s.t.  eps a + (1 - eps) b = m,  a, b in U,
                        eps |a - m|_1 + (1 - eps) |b - m|_1 <= s
    """
    shape = ambiguity.shape
    n = shape.vec_length
    m, W, h = ambiguity.m, ambiguity.support.W, ambiguity.support.h
    payoff = payoff_operator(profile, i, shape) @ profile[i].probs
    identity, zeros = np.eye(n), np.zeros((n, n))
    c = np.concatenate([payoff, np.zeros(3 * n)])
    A_eq = np.hstack([eps * identity, (1.0 - eps) * identity, zeros, zeros])
    blank = np.zeros_like(W)
    A_ub = np.vstack([
        np.hstack([W, blank, blank, blank]),
        np.hstack([blank, W, blank, blank]),
        np.hstack([identity, zeros, -identity, zeros]),
        np.hstack([-identity, zeros, -identity, zeros]),
        np.hstack([zeros, identity, zeros, -identity]),
        np.hstack([zeros, -identity, zeros, -identity]),
        np.concatenate([np.zeros(2 * n), np.full(n, eps), np.full(n, 1.0 - eps)])[None, :],
    ])
    b_ub = np.concatenate([h, h, m, -m, m, -m, [ambiguity.s]])
    bounds = [(None, None)] * (2 * n) + [(0, None)] * (2 * n)
    result = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=m, bounds=bounds, method="highs")
    assert result.status == 0, result.message
    return -result.fun


@unittest.skipIf(linprog is None, "scipy not installed")
class TestWorstCaseCvarOracle(unittest.TestCase):
    """The moment-dual LP value equals the worst case over two-point members"""

    def test_random_instances(self):
        rng = np.random.default_rng(70)
        for _ in range(50):
            shape = random_shape(rng)
            ambiguity, _ = random_ambiguity(rng, shape)
            profile = random_profile(rng, shape)
            eps = rng.uniform(0.05, 1.0)
            i = int(rng.integers(shape.num_players))
            self.assertAlmostEqual(worst_case_cvar(ambiguity, eps, profile, i).value,
                                   two_point_worst_case(ambiguity, eps, profile, i), delta=1e-6)

    def test_inspection_game(self):
        ambiguity, _ = inspection_game()
        profile = StrategyProfile.from_first_probabilities([1 / 3, 2 / 3])
        for eps in (1.0, 0.75, 0.5, 0.25, 0.01):
            for i in range(2):
                self.assertAlmostEqual(worst_case_cvar(ambiguity, eps, profile, i).value,
                                       two_point_worst_case(ambiguity, eps, profile, i),
                                       delta=1e-6)

    def test_work_cost_tail(self):
        # working costs g in [8, 12] with mean 10; the tail reaches 12 for eps <= 0.5
        ambiguity, _ = inspection_game()
        work = StrategyProfile.from_first_probabilities([0.0, 0.5])
        self.assertAlmostEqual(worst_case_cvar(ambiguity, 0.5, work, 0).value, 12.0 - 15.0,
                               delta=1e-6)


if __name__ == '__main__':
    unittest.main()
