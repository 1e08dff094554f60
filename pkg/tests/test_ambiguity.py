"""
Test supports, affine boxes, validation and distribution membership.
"""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from drgames.ambiguity import (
    AffineBoxUncertainty,
    AmbiguitySet,
    DiscreteDistribution,
    PolyhedralSupport,
    build_support_from_box,
    is_member,
    validate,
)
from drgames.exceptions import AmbiguitySetError
from drgames.game_model import GameShape, unvec
from drgames.inspection import InspectionParams, inspection_uncertainty
from tests.support import inspection_game, random_ambiguity, two_atom_member

SHAPE = GameShape((2, 2))


class TestPolyhedralSupport(unittest.TestCase):

    def test_dimension_mismatch(self):
        with self.assertRaises(AmbiguitySetError):
            PolyhedralSupport(np.eye(3), np.ones(2))

    def test_box_coordinate_bounds(self):
        support = PolyhedralSupport(np.vstack([np.eye(2), -np.eye(2)]), [1.0, 2.0, 3.0, 4.0])
        lower, upper = support.coordinate_bounds
        np.testing.assert_allclose(lower, [-3.0, -4.0], atol=1e-9)
        np.testing.assert_allclose(upper, [1.0, 2.0], atol=1e-9)
        self.assertTrue(support.contains([0.0, 0.0]))
        self.assertFalse(support.contains([1.5, 0.0]))

    def test_unbounded_coordinates(self):
        support = PolyhedralSupport([[1.0, 0.0]], [1.0])
        lower, upper = support.coordinate_bounds
        self.assertEqual(lower[0], -np.inf)
        self.assertEqual(upper[1], np.inf)
        self.assertIsNone(support.singleton_point())

    def test_empty_support(self):
        support = PolyhedralSupport([[1.0], [-1.0]], [0.0, -1.0])
        self.assertIsNone(support.feasible_point())
        with self.assertRaises(AmbiguitySetError):
            support.coordinate_bounds

    def test_singleton(self):
        support = PolyhedralSupport(np.vstack([np.eye(2), -np.eye(2)]), [1.0, 2.0, -1.0, -2.0])
        np.testing.assert_allclose(support.singleton_point(), [1.0, 2.0], atol=1e-9)


class TestAffineBox(unittest.TestCase):

    def test_empty_interval_names_parameter(self):
        with self.assertRaises(AmbiguitySetError) as context:
            AffineBoxUncertainty(SHAPE, ["a", "b"], [0.0, 2.0], [1.0, 1.0],
                                 np.zeros((8, 2)), np.zeros(8))
        self.assertEqual(context.exception.index, 1)

    def test_needs_a_parameter(self):
        with self.assertRaises(AmbiguitySetError):
            AffineBoxUncertainty(SHAPE, [], [], [], np.zeros((8, 0)), np.zeros(8))

    def test_inspection_support_is_the_image(self):
        uncertainty = inspection_uncertainty(InspectionParams())
        support = build_support_from_box(uncertainty)
        # 3 lifted boxes (x2) plus 5 null-space directions (x2)
        self.assertEqual(support.num_rows, 16)
        for vertex in uncertainty.vertices():
            self.assertTrue(support.contains(vertex, tol=1e-8))
        self.assertTrue(support.contains(uncertainty.midpoint(), tol=1e-8))
        outside = uncertainty.point([13.0, 20.0, 5.0])
        self.assertFalse(support.contains(outside, tol=1e-8))
        off_plane = uncertainty.midpoint() + np.eye(8)[0]
        self.assertFalse(support.contains(off_plane, tol=1e-8))

    def test_rank_deficient_map_is_outer_approximation(self):
        A = np.zeros((8, 2))
        A[0, :] = 1.0
        uncertainty = AffineBoxUncertainty(SHAPE, ["a", "b"], [0.0, 0.0], [1.0, 2.0], A, np.zeros(8))
        with self.assertLogs("drgames.ambiguity", level="WARNING"):
            support = build_support_from_box(uncertainty)
        for vertex in uncertainty.vertices():
            self.assertTrue(support.contains(vertex, tol=1e-8))
        lower, upper = support.coordinate_bounds
        self.assertAlmostEqual(lower[0], 0.0, places=7)
        self.assertAlmostEqual(upper[0], 3.0, places=7)


class TestValidate(unittest.TestCase):

    def test_inspection_game_is_valid(self):
        ambiguity, _ = inspection_game()
        report = validate(ambiguity)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual([c.name for c in report.checks],
                         ["nonempty", "bounded", "mean_in_support", "deviation_nonnegative"])

    def test_mean_outside_support(self):
        nominal = inspection_uncertainty(InspectionParams()).midpoint()
        ambiguity, _ = inspection_game(mean=tuple(nominal + 50.0))
        report = validate(ambiguity)
        self.assertFalse(report.passed)
        failure = report.check("mean_in_support")
        self.assertFalse(failure.passed)
        self.assertIn("row", failure.witness)

    def test_negative_deviation_cap(self):
        ambiguity, _ = inspection_game(s=-1.0)
        self.assertFalse(validate(ambiguity).check("deviation_nonnegative").passed)

    def test_unbounded_support(self):
        ambiguity = AmbiguitySet(SHAPE, PolyhedralSupport(np.eye(8), np.ones(8)), np.zeros(8), 1.0)
        report = validate(ambiguity)
        self.assertFalse(report.check("bounded").passed)
        self.assertTrue(report.check("nonempty").passed)

    def test_empty_support(self):
        W = np.vstack([np.eye(8), -np.eye(8)])
        h = np.concatenate([np.zeros(8), -np.ones(8)])
        report = validate(AmbiguitySet(SHAPE, PolyhedralSupport(W, h), np.zeros(8), 1.0))
        self.assertFalse(report.check("nonempty").passed)

    def test_wrong_dimensions_raise(self):
        support = PolyhedralSupport(np.eye(4), np.ones(4))
        with self.assertRaises(AmbiguitySetError):
            AmbiguitySet(SHAPE, support, np.zeros(4), 1.0)


class TestMembership(unittest.TestCase):

    def test_two_atom_constructions_are_members(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            ambiguity, box = random_ambiguity(rng, SHAPE)
            distribution = two_atom_member(rng, ambiguity, box)
            self.assertTrue(is_member(distribution, ambiguity))

    def test_point_mass_at_mean(self):
        ambiguity, _ = inspection_game()
        self.assertTrue(is_member(DiscreteDistribution.point_mass(ambiguity.mean_game()), ambiguity))

    def test_wrong_mean_is_not_member(self):
        ambiguity, _ = inspection_game()
        vertex = inspection_uncertainty(InspectionParams()).vertices()[0]
        self.assertFalse(is_member(DiscreteDistribution.point_mass(unvec(SHAPE, vertex)), ambiguity))

    def test_deviation_cap_enforced(self):
        ambiguity, _ = inspection_game(s=0.0)
        uncertainty = inspection_uncertainty(InspectionParams())
        low, high = uncertainty.vertices()[0], uncertainty.vertices()[-1]
        spread = DiscreteDistribution((unvec(SHAPE, low), unvec(SHAPE, high)), [0.5, 0.5])
        self.assertFalse(is_member(spread, ambiguity))
        self.assertTrue(is_member(spread, ambiguity.with_deviation(100.0)))

    def test_shape_mismatch(self):
        ambiguity, _ = inspection_game()
        other = DiscreteDistribution.point_mass(unvec(GameShape((2, 3)), np.zeros(12)))
        with self.assertRaises(AmbiguitySetError):
            is_member(other, ambiguity)

    def test_probabilities_checked(self):
        with self.assertRaises(AmbiguitySetError):
            DiscreteDistribution((unvec(SHAPE, np.zeros(8)),), [0.5])


if __name__ == '__main__':
    unittest.main()
