"""
Classical Nash Games

Support enumeration for bimatrix games and the special cases in which a
distributionally robust game collapses to a fixed-payoff Nash game: all
players risk neutral, zero deviation cap, or a one-point support.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .ambiguity import AmbiguitySet, DiscreteDistribution
from .constants import MAX_ENUMERATION_ACTIONS, Reductions
from .exceptions import EnumerationLimitError
from .game_model import GameShape, PayoffTensor, StrategyProfile, unvec
from .risk import RiskProfile

logger = logging.getLogger(__name__)

# payoff comparisons in the best-response filter
BEST_RESPONSE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BimatrixGame:
    """Row player payoffs A and column player payoffs B"""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or A.shape != B.shape:
            raise EnumerationLimitError(
                f"Bimatrix payoffs must be two matrices of one shape, got {A.shape} and {B.shape}"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_payoffs(cls, payoffs: PayoffTensor) -> "BimatrixGame":
        if payoffs.shape.num_players != 2:
            raise EnumerationLimitError(
                f"Support enumeration handles 2-player games, got {payoffs.shape.num_players}",
                shape=payoffs.shape.action_counts,
            )
        return cls(payoffs.player(0), payoffs.player(1))

    @property
    def shape(self):
        return self.A.shape

    def to_payoffs(self) -> PayoffTensor:
        return PayoffTensor(GameShape(self.A.shape), np.array([self.A, self.B]))


@dataclass
class NashEnumerationResult:
    """
    Equilibria found by support enumeration.

    `degenerate` is set when some strategy has more pure best responses
    than its support size; equilibria with supports of unequal size are
    then not enumerated.
    """

    equilibria: List[StrategyProfile] = field(default_factory=list)
    degenerate: bool = False


@dataclass(frozen=True)
class ReducedGame:
    """A fixed-payoff game whose Nash equilibria are the robust equilibria"""

    reduction: str
    payoffs: PayoffTensor


def _indifference_strategy(payoffs: np.ndarray, own: tuple, other: tuple) -> Optional[np.ndarray]:
    """
    Probabilities on `own` that make the opponent indifferent across `other`.

    `payoffs` are the opponent's payoffs indexed [own action, other action].
    Solves  sum_i x_i payoffs[i, j] = v (j in other),  sum_i x_i = 1.
    """
    k = len(own)
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = payoffs[np.ix_(own, other)].T
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    return solution[:k]


def _best_responses(values: np.ndarray) -> tuple:
    scale = 1.0 + np.max(np.abs(values))
    return tuple(int(j) for j in np.flatnonzero(values >= values.max() - BEST_RESPONSE_TOL * scale))


def nash_support_enumeration(game) -> NashEnumerationResult:
    """
    All Nash equilibria of a nondegenerate bimatrix game.

    For each pair of equal-size supports, solve both indifference systems,
    keep nonnegative solutions and accept those where each support only
    holds best responses.

    Args:
        game: BimatrixGame or a 2-player PayoffTensor

    Raises:
        EnumerationLimitError: More than two players or too many actions
    """
    if isinstance(game, PayoffTensor):
        game = BimatrixGame.from_payoffs(game)
    rows, cols = game.shape
    if max(rows, cols) > MAX_ENUMERATION_ACTIONS:
        raise EnumerationLimitError(
            f"Support enumeration is limited to {MAX_ENUMERATION_ACTIONS} actions per player, "
            f"got {rows}x{cols}",
            shape=(rows, cols),
        )

    result = NashEnumerationResult()
    for j in range(cols):
        if len(_best_responses(game.A[:, j])) > 1:
            result.degenerate = True
    for i in range(rows):
        if len(_best_responses(game.B[i, :])) > 1:
            result.degenerate = True

    for size in range(1, min(rows, cols) + 1):
        logger.debug(f"Support enumeration for support size {size}")
        for row_support, col_support in itertools.product(
                itertools.combinations(range(rows), size),
                itertools.combinations(range(cols), size)):
            x_part = _indifference_strategy(game.B, row_support, col_support)
            y_part = _indifference_strategy(game.A.T, col_support, row_support)
            if x_part is None or y_part is None:
                continue
            if np.any(x_part < -BEST_RESPONSE_TOL) or np.any(y_part < -BEST_RESPONSE_TOL):
                continue
            x = np.zeros(rows)
            y = np.zeros(cols)
            x[list(row_support)] = np.clip(x_part, 0.0, None)
            y[list(col_support)] = np.clip(y_part, 0.0, None)
            x /= x.sum()
            y /= y.sum()

            row_best = _best_responses(game.A @ y)
            col_best = _best_responses(x @ game.B)
            if not (set(row_support) <= set(row_best) and set(col_support) <= set(col_best)):
                continue
            if len(row_best) > size or len(col_best) > size:
                result.degenerate = True
            profile = StrategyProfile((x, y))
            if not any(np.allclose(profile.stacked(), e.stacked(), atol=1e-9)
                       for e in result.equilibria):
                result.equilibria.append(profile)

    if result.degenerate:
        logger.warning(f"Degenerate {rows}x{cols} bimatrix game; equilibrium list may be incomplete")
    return result


def special_case_reduction(ambiguity: AmbiguitySet, risk: RiskProfile) -> Optional[ReducedGame]:
    """
    The fixed-payoff Nash game equivalent to the robust game, if any.

    All eps_i = 1 or s = 0 give the mean game unvec(m); a support that is a
    single point C gives the game C. Otherwise None.
    """
    risk.check_against(ambiguity.shape)
    if risk.all_risk_neutral:
        reduction = ReducedGame(Reductions.RISK_NEUTRAL, ambiguity.mean_game())
    elif ambiguity.s == 0.0:
        reduction = ReducedGame(Reductions.ZERO_DEVIATION, ambiguity.mean_game())
    else:
        point = ambiguity.support.singleton_point()
        if point is None:
            return None
        reduction = ReducedGame(Reductions.SINGLETON_SUPPORT, unvec(ambiguity.shape, point))
    logger.info(f"Robust game reduces to a Nash game ({reduction.reduction})")
    return reduction


def bayesian_game(distribution: DiscreteDistribution) -> PayoffTensor:
    """Expected-payoff game of a known payoff distribution"""
    return unvec(distribution.shape, distribution.mean())
