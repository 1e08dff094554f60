"""
Random robust-game instances shared by the test modules.

Supports are axis-aligned boxes in payoff space (identity affine map), so
membership and distances to the boundary are easy to reason about.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from drgames.ambiguity import AffineBoxUncertainty, AmbiguitySet, DiscreteDistribution, build_support_from_box
from drgames.game_model import GameShape, StrategyProfile, unvec
from drgames.inspection import InspectionParams, build_inspection_game


def random_shape(rng, players=2, max_actions=3):
    return GameShape(tuple(int(a) for a in rng.integers(2, max_actions + 1, size=players)))


def random_box(rng, shape, width=None):
    """Payoff box [lo, hi] with vec(P) = t"""
    n = shape.vec_length
    lo = rng.uniform(-10.0, 10.0, size=n)
    widths = rng.uniform(0.5, 6.0, size=n) if width is None else np.full(n, float(width))
    names = [f"p{j}" for j in range(n)]
    return AffineBoxUncertainty(shape, names, lo, lo + widths, np.eye(n), np.zeros(n))


def random_ambiguity(rng, shape, s=None, width=None):
    """Box support, mean drawn inside the box, random deviation cap"""
    box = random_box(rng, shape, width)
    support = build_support_from_box(box)
    mean = box.lo + rng.uniform(0.2, 0.8, size=shape.vec_length) * (box.hi - box.lo)
    if s is None:
        s = rng.uniform(0.5, 5.0)
    return AmbiguitySet(shape, support, mean, s), box


def random_profile(rng, shape):
    return StrategyProfile(tuple(rng.dirichlet(np.ones(a)) for a in shape.action_counts))


def random_risk_levels(rng, players):
    return tuple(float(e) for e in rng.uniform(0.05, 1.0, size=players))


def two_atom_member(rng, ambiguity, box):
    """
    A two-point distribution in the ambiguity set.

    Atoms m + a d and m - b d with probabilities p and 1 - p, where p a =
    (1 - p) b keeps the mean at m. The step is shrunk until both atoms stay
    in the box and the mean absolute deviation 2 p a |d|_1 stays within s.
    """
    m = ambiguity.m
    d = rng.uniform(-1.0, 1.0, size=m.size)
    p = rng.uniform(0.1, 0.9)
    ratio = p / (1.0 - p)
    up = np.where(d > 0, (box.hi - m) / np.maximum(d, 1e-12), (m - box.lo) / np.maximum(-d, 1e-12))
    down = np.where(d > 0, (m - box.lo) / np.maximum(d, 1e-12), (box.hi - m) / np.maximum(-d, 1e-12))
    a = min(up.min(), down.min() / ratio)
    if ambiguity.s > 0:
        a = min(a, ambiguity.s / (2.0 * p * np.abs(d).sum()))
    else:
        a = 0.0
    a *= 0.999
    atoms = (unvec(ambiguity.shape, m + a * d), unvec(ambiguity.shape, m - ratio * a * d))
    return DiscreteDistribution(atoms, np.array([p, 1.0 - p]))


def inspection_game(**overrides):
    """Published inspection game (w = 15, s = 4) with optional overrides"""
    ambiguity, nominal = build_inspection_game(InspectionParams(**overrides))
    return ambiguity, nominal


def two_by_two_equilibria(A, B):
    """
    Nash equilibria of a nondegenerate 2x2 bimatrix game from the
    indifference conditions, as (first-action probability of each player).
    """
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    found = [
        (1.0 - j, 1.0 - k)
        for j in (0, 1) for k in (0, 1)
        if A[j, k] >= A[1 - j, k] and B[j, k] >= B[j, 1 - k]
    ]
    x = (B[1, 1] - B[1, 0]) / (B[0, 0] - B[1, 0] - B[0, 1] + B[1, 1])
    y = (A[1, 1] - A[0, 1]) / (A[0, 0] - A[0, 1] - A[1, 0] + A[1, 1])
    if 0.0 < x < 1.0 and 0.0 < y < 1.0:
        found.append((float(x), float(y)))
    return found


def hausdorff_distance(records, points):
    """Largest distance from a record to the nearest point, or from a point to the nearest record"""
    profiles = [np.array(r.profile.first_probabilities()) for r in records]
    points = [np.array(p) for p in points]
    if not profiles or not points:
        return 0.0 if len(profiles) == len(points) else np.inf

    def one_way(source, target):
        return max(min(np.max(np.abs(s - t)) for t in target) for s in source)

    return max(one_way(profiles, points), one_way(points, profiles))
