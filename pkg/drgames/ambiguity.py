"""
Moment Ambiguity Sets

Distributions of the payoff tensor are constrained to a bounded polyhedral
support U = {P : W vec(P) <= h}, a fixed mean m and a cap s on the mean
absolute deviation E ||vec(P) - m||_1. This module holds those sets, the
affine box builder that lifts interval-uncertain parameters into payoff
space, finite distributions used as test oracles, and validation.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constants import LpStatus, Tolerances
from .exceptions import AmbiguitySetError
from .game_model import GameShape, PayoffTensor, unvec, vec
from .lp_core import INF, LinearProgram, solve_lp

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PolyhedralSupport:
    """U = {p : W p <= h}; equalities are stored as <= / >= pairs"""

    W: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        h = np.array(self.h, dtype=float).reshape(-1)
        if W.ndim != 2:
            raise AmbiguitySetError(f"W must be a matrix, got shape {W.shape}")
        if h.size != W.shape[0]:
            raise AmbiguitySetError(
                f"h has {h.size} entries but W has {W.shape[0]} rows",
                details={"W_shape": list(W.shape), "h_length": h.size},
            )
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(h))):
            raise AmbiguitySetError("W and h must be finite")
        W.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "h", h)

    @property
    def num_rows(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def slack(self, point) -> np.ndarray:
        """h - W p; negative entries are violated rows"""
        return self.h - self.W @ np.asarray(point, dtype=float)

    def contains(self, point, tol: float = Tolerances.FEASIBILITY) -> bool:
        return bool(np.all(self.slack(point) >= -tol))

    def _coordinate_program(self, j: int, sense: str) -> LinearProgram:
        c = np.zeros(self.dim)
        c[j] = 1.0
        return LinearProgram(
            c=c, A_ub=self.W, b_ub=self.h, bounds=[(-INF, INF)] * self.dim,
            sense=sense, name=f"support/{sense}[{j}]",
        )

    @cached_property
    def coordinate_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Per-coordinate (min, max) over U, +/-inf where unbounded.

        Uses 2 * dim LPs and is computed once per support. NaN marks a
        coordinate whose LP failed to certify.
        """
        lower = np.empty(self.dim)
        upper = np.empty(self.dim)
        for j in range(self.dim):
            for sense, target, fallback in (("min", lower, -INF), ("max", upper, INF)):
                solution = solve_lp(self._coordinate_program(j, sense))
                if solution.is_optimal:
                    target[j] = solution.objective
                elif solution.status == LpStatus.UNBOUNDED:
                    target[j] = fallback
                elif solution.status == LpStatus.INFEASIBLE:
                    raise AmbiguitySetError("Support is empty", details={"coordinate": j})
                else:
                    logger.warning(f"Coordinate {j} {sense} LP ended with {solution.status}")
                    target[j] = np.nan
        lower.setflags(write=False)
        upper.setflags(write=False)
        return lower, upper

    def feasible_point(self) -> Optional[np.ndarray]:
        """Any point of U, or None when U is empty"""
        program = LinearProgram(
            c=np.zeros(self.dim), A_ub=self.W, b_ub=self.h,
            bounds=[(-INF, INF)] * self.dim, name="support/feasibility",
        )
        solution = solve_lp(program)
        if solution.status == LpStatus.INFEASIBLE:
            return None
        if not solution.is_optimal:
            raise AmbiguitySetError(
                f"Feasibility LP of the support ended with {solution.status}",
                details=solution.diagnostics,
            )
        return solution.x

    def singleton_point(self, tol: float = Tolerances.SINGLETON) -> Optional[np.ndarray]:
        """The unique point of U when U is a single point, else None"""
        lower, upper = self.coordinate_bounds
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            return None
        scale = 1.0 + max(np.max(np.abs(lower)), np.max(np.abs(upper)))
        if np.max(upper - lower) > tol * scale:
            return None
        return 0.5 * (lower + upper)


@dataclass(frozen=True, eq=False)
class AmbiguitySet:
    """
    Distributions of vec(P) with support U, mean m and mean absolute
    deviation at most s.
    """

    shape: GameShape
    support: PolyhedralSupport
    m: np.ndarray
    s: float

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(-1)
        if m.size != self.shape.vec_length:
            raise AmbiguitySetError(
                f"Mean has {m.size} entries, a {self.shape} game needs {self.shape.vec_length}"
            )
        if self.support.dim != self.shape.vec_length:
            raise AmbiguitySetError(
                f"Support lives in dimension {self.support.dim}, "
                f"a {self.shape} game needs {self.shape.vec_length}"
            )
        if not np.all(np.isfinite(m)) or not np.isfinite(self.s):
            raise AmbiguitySetError("Mean and deviation cap must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "s", float(self.s))

    @property
    def vec_length(self) -> int:
        return self.shape.vec_length

    def mean_game(self) -> PayoffTensor:
        """The fixed-payoff game unvec(m)"""
        return unvec(self.shape, self.m)

    def with_deviation(self, s: float) -> "AmbiguitySet":
        return replace(self, s=s)

    def with_mean(self, m) -> "AmbiguitySet":
        return replace(self, m=m)


@dataclass(frozen=True, eq=False)
class AffineBoxUncertainty:
    """
    vec(P) = A t + b for parameters t in the box [lo, hi].

    Args:
        shape: Game shape; A must have shape.vec_length rows
        names: One name per parameter
        lo, hi: Interval end points
        A, b: Affine map from parameters to vec(P)
    """

    shape: GameShape
    names: Tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        lo = np.array(self.lo, dtype=float).reshape(-1)
        hi = np.array(self.hi, dtype=float).reshape(-1)
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        k = len(names)
        if k == 0:
            raise AmbiguitySetError("An affine box needs at least one parameter")
        if lo.size != k or hi.size != k:
            raise AmbiguitySetError(f"Expected {k} interval end points per side")
        if A.ndim == 1 and k == 1:
            A = A.reshape(-1, 1)
        if A.shape != (self.shape.vec_length, k) or b.size != self.shape.vec_length:
            raise AmbiguitySetError(
                f"Affine map must be {self.shape.vec_length}x{k} with a length "
                f"{self.shape.vec_length} offset, got {A.shape} and {b.size}"
            )
        bad = np.flatnonzero(~(lo <= hi))
        if bad.size:
            index = int(bad[0])
            raise AmbiguitySetError(
                f"Interval for '{names[index]}' is empty: [{lo[index]}, {hi[index]}]",
                index=index,
            )
        if not all(np.all(np.isfinite(v)) for v in (lo, hi, A, b)):
            raise AmbiguitySetError("Box end points and affine map must be finite")
        for attr, value in (("lo", lo), ("hi", hi), ("A", A), ("b", b)):
            value.setflags(write=False)
            object.__setattr__(self, attr, value)
        object.__setattr__(self, "names", names)

    @property
    def num_parameters(self) -> int:
        return len(self.names)

    def point(self, parameters) -> np.ndarray:
        """vec(P) at the given parameter values"""
        return self.A @ np.asarray(parameters, dtype=float) + self.b

    def midpoint(self) -> np.ndarray:
        return self.point(0.5 * (self.lo + self.hi))

    def vertices(self) -> List[np.ndarray]:
        """Images of every corner of the parameter box"""
        corners = itertools.product(*zip(self.lo, self.hi))
        return [self.point(corner) for corner in corners]


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely many payoff tensors with their probabilities"""

    atoms: Tuple[PayoffTensor, ...]
    probs: np.ndarray

    def __post_init__(self):
        atoms = tuple(self.atoms)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if not atoms:
            raise AmbiguitySetError("A distribution needs at least one atom")
        if probs.size != len(atoms):
            raise AmbiguitySetError(f"{len(atoms)} atoms but {probs.size} probabilities")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > Tolerances.SIMPLEX_SUM:
            raise AmbiguitySetError(f"Probabilities must be >= 0 and sum to 1: {probs.tolist()}")
        shape = atoms[0].shape
        if any(a.shape != shape for a in atoms):
            raise AmbiguitySetError("All atoms must share one game shape")
        probs.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, payoffs: PayoffTensor) -> "DiscreteDistribution":
        return cls((payoffs,), np.ones(1))

    @property
    def shape(self) -> GameShape:
        return self.atoms[0].shape

    def vectors(self) -> np.ndarray:
        """Atoms as rows of vec(P)"""
        return np.array([vec(a) for a in self.atoms])

    def mean(self) -> np.ndarray:
        return self.probs @ self.vectors()

    def mean_absolute_deviation(self, center) -> float:
        deviations = np.abs(self.vectors() - np.asarray(center, dtype=float)).sum(axis=1)
        return float(self.probs @ deviations)


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    message: str
    witness: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ValidationReport:
    """Outcome of validate(); one entry per check, in a fixed order"""

    checks: List[ValidationCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[ValidationCheck]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> ValidationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "message": c.message, "witness": c.witness}
                for c in self.checks
            ],
        }


def _clean_rows(matrix: np.ndarray) -> np.ndarray:
    cleaned = np.array(matrix, dtype=float)
    cleaned[np.abs(cleaned) < 1e-14] = 0.0
    return cleaned


def build_support_from_box(uncertainty: AffineBoxUncertainty) -> PolyhedralSupport:
    """
    Polyhedral description of the image {A t + b : lo <= t <= hi}.

    With A of full column rank the rows are the box constraints lifted
    through the pseudo-inverse, lo <= A^+ (p - b) <= hi, plus equality pairs
    N^T p = N^T b over a basis N of the left null space of A. That set is
    exactly the image.

    A rank-deficient A cannot be lifted this way; the result then falls back
    to the coordinate-wise bounding box of the image intersected with the
    affine hull, an outer approximation that still contains every image
    point.
    """
    A, b = uncertainty.A, uncertainty.b
    n, k = A.shape
    U, singular, _ = np.linalg.svd(A, full_matrices=True)
    cutoff = max(n, k) * np.finfo(float).eps * (singular[0] if singular.size else 0.0)
    rank = int(np.sum(singular > cutoff))
    null_basis = _clean_rows(U[:, rank:].T)
    null_rows = [null_basis, -null_basis]
    null_rhs = [null_basis @ b, -(null_basis @ b)]

    if rank == k:
        lift = _clean_rows(np.linalg.pinv(A))
        shift = lift @ b
        W = np.vstack([lift, -lift] + null_rows)
        h = np.concatenate([uncertainty.hi + shift, -uncertainty.lo - shift] + null_rhs)
    else:
        logger.warning(
            f"Affine map has rank {rank} < {k} parameters; "
            "using the bounding box of its image as support"
        )
        low = b + np.minimum(A * uncertainty.lo, A * uncertainty.hi).sum(axis=1)
        high = b + np.maximum(A * uncertainty.lo, A * uncertainty.hi).sum(axis=1)
        eye = np.eye(n)
        W = np.vstack([eye, -eye] + null_rows)
        h = np.concatenate([high, -low] + null_rhs)
    return PolyhedralSupport(W, h)


def validate(ambiguity: AmbiguitySet, tol: float = Tolerances.FEASIBILITY) -> ValidationReport:
    """
    Check that the ambiguity set is usable.

    Runs, in order: support nonempty, support bounded, mean inside the
    support, deviation cap nonnegative. Failures are reported, not raised.
    """
    support = ambiguity.support
    checks = []

    point = support.feasible_point()
    if point is None:
        checks.append(ValidationCheck("nonempty", False, "support polytope is empty"))
        checks.append(ValidationCheck("bounded", True, "empty support is trivially bounded"))
    else:
        checks.append(ValidationCheck("nonempty", True, "support polytope has a feasible point",
                                      {"point": point.tolist()}))
        lower, upper = support.coordinate_bounds
        open_below = [int(j) for j in np.flatnonzero(~np.isfinite(lower))]
        open_above = [int(j) for j in np.flatnonzero(~np.isfinite(upper))]
        if open_below or open_above:
            checks.append(ValidationCheck(
                "bounded", False, "support polytope is unbounded",
                {"unbounded_below": open_below, "unbounded_above": open_above},
            ))
        else:
            checks.append(ValidationCheck(
                "bounded", True, "every coordinate is bounded over the support",
                {"lower": lower.tolist(), "upper": upper.tolist()},
            ))

    slack = support.slack(ambiguity.m)
    if support.num_rows and slack.min() < -tol:
        row = int(np.argmin(slack))
        checks.append(ValidationCheck(
            "mean_in_support", False,
            f"mean m violates support row {row} by {-slack[row]:.9g}",
            {"row": row, "violation": float(-slack[row])},
        ))
    else:
        checks.append(ValidationCheck("mean_in_support", True, "W m <= h holds"))

    if ambiguity.s < 0:
        checks.append(ValidationCheck("deviation_nonnegative", False,
                                      f"deviation cap s = {ambiguity.s:.9g} is negative",
                                      {"s": ambiguity.s}))
    else:
        checks.append(ValidationCheck("deviation_nonnegative", True, "s >= 0"))

    report = ValidationReport(checks)
    for failure in report.failures:
        logger.info(f"Ambiguity set check '{failure.name}' failed: {failure.message}")
    return report


def is_member(distribution: DiscreteDistribution, ambiguity: AmbiguitySet,
              tol: float = Tolerances.FEASIBILITY) -> bool:
    """
    Whether a finite distribution belongs to the ambiguity set.

    Every atom must lie in U, the mean must equal m and the mean absolute
    deviation must not exceed s, each within tol.
    """
    if distribution.shape != ambiguity.shape:
        raise AmbiguitySetError(
            f"Distribution over {distribution.shape} games tested against a "
            f"{ambiguity.shape} ambiguity set"
        )
    vectors = distribution.vectors()
    if not all(ambiguity.support.contains(v, tol) for v in vectors):
        return False
    if np.max(np.abs(distribution.mean() - ambiguity.m)) > tol:
        return False
    return distribution.mean_absolute_deviation(ambiguity.m) <= ambiguity.s + tol
