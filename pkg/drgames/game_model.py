"""
Finite Game Model

Payoff tensors, mixed strategies, expected payoffs and the linear payoff
operator that turns a player's expected payoff into a bilinear form between
vec(P) and the player's own strategy.

Players and actions are 0-based throughout the Python API. vec() stacks the
payoff tensor player-outermost, then joint actions row-major (the last
player's action varies fastest).
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .constants import MAX_JOINT_ACTIONS, Tolerances
from .exceptions import InvalidGameError, InvalidStrategyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GameShape:
    """Number of players and the size of each player's action set"""

    action_counts: Tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(a) for a in self.action_counts)
        if any(a != b for a, b in zip(counts, self.action_counts)):
            raise InvalidGameError("Action counts must be integers")
        if len(counts) < 2:
            raise InvalidGameError(f"A game needs at least 2 players, got {len(counts)}")
        if any(a < 2 for a in counts):
            raise InvalidGameError(f"Every player needs at least 2 actions, got {list(counts)}")
        joint = reduce(lambda acc, a: acc * a, counts, 1)
        if joint > MAX_JOINT_ACTIONS:
            raise InvalidGameError(
                f"{joint} joint actions exceeds the dense storage limit of {MAX_JOINT_ACTIONS}",
                details={"action_counts": list(counts)},
            )
        object.__setattr__(self, "action_counts", counts)

    @property
    def num_players(self) -> int:
        return len(self.action_counts)

    @property
    def joint_actions(self) -> int:
        """Number of pure joint actions, prod(a_i)"""
        return reduce(lambda acc, a: acc * a, self.action_counts, 1)

    @property
    def vec_length(self) -> int:
        """Length of vec(P), N * prod(a_i)"""
        return self.num_players * self.joint_actions

    @property
    def tensor_shape(self) -> Tuple[int, ...]:
        return (self.num_players,) + self.action_counts

    def check_player(self, i: int) -> int:
        if not 0 <= i < self.num_players:
            raise InvalidGameError(
                f"Player index {i} out of range for a {self.num_players}-player game"
            )
        return i

    def __str__(self) -> str:
        return "x".join(str(a) for a in self.action_counts)


@dataclass(frozen=True, eq=False)
class PayoffTensor:
    """
    Payoffs to every player at every pure joint action.

    entries[i, j_1, ..., j_N] is the payoff to player i when player k plays
    action j_k.
    """

    shape: GameShape
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.shape != self.shape.tensor_shape:
            raise InvalidGameError(
                f"Payoff entries have shape {entries.shape}, expected {self.shape.tensor_shape}"
            )
        if not np.all(np.isfinite(entries)):
            raise InvalidGameError("Payoff entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, shape: GameShape) -> "PayoffTensor":
        return cls(shape, np.zeros(shape.tensor_shape))

    @classmethod
    def from_player_arrays(cls, arrays: Sequence) -> "PayoffTensor":
        """Build from one (a_1 x ... x a_N) array per player"""
        stacked = np.array([np.asarray(a, dtype=float) for a in arrays])
        return cls(GameShape(stacked.shape[1:]), stacked)

    def player(self, i: int) -> np.ndarray:
        """Payoff array of player i over joint actions"""
        return self.entries[self.shape.check_player(i)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PayoffTensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"PayoffTensor(shape={self.shape}, entries={self.entries.tolist()})"


def vec(payoffs: PayoffTensor) -> np.ndarray:
    """
    Canonical vectorization of a payoff tensor.

    Player index outermost, then joint actions with the last player's action
    varying fastest. unvec() is the exact inverse.
    """
    return payoffs.entries.reshape(-1).copy()


def unvec(shape: GameShape, values) -> PayoffTensor:
    """Inverse of vec() for the given game shape"""
    values = np.asarray(values, dtype=float)
    if values.shape != (shape.vec_length,):
        raise InvalidGameError(
            f"Vector of length {values.size} does not match a {shape} game "
            f"(expected {shape.vec_length})"
        )
    return PayoffTensor(shape, values.reshape(shape.tensor_shape))


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """A probability vector over one player's actions"""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise InvalidStrategyError(f"Strategy must be a non-empty vector, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise InvalidStrategyError("Strategy entries must be finite")
        if np.any(probs < -Tolerances.SIMPLEX_RENORMALIZE):
            raise InvalidStrategyError(f"Strategy has negative entries: {probs.tolist()}")
        clipped = bool(np.any(probs < 0.0))
        probs = np.clip(probs, 0.0, None)
        drift = abs(probs.sum() - 1.0)
        if drift > Tolerances.SIMPLEX_RENORMALIZE:
            raise InvalidStrategyError(
                f"Strategy sums to {probs.sum():.12g}, not 1: {probs.tolist()}"
            )
        if clipped or drift > Tolerances.SIMPLEX_SUM:
            probs = probs / probs.sum()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def pure(cls, num_actions: int, action: int) -> "MixedStrategy":
        probs = np.zeros(num_actions)
        probs[action] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, num_actions: int) -> "MixedStrategy":
        return cls(np.full(num_actions, 1.0 / num_actions))

    @property
    def num_actions(self) -> int:
        return self.probs.size

    def support(self, tol: float = 1e-12) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.probs > tol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"MixedStrategy({self.probs.tolist()})"


@dataclass(frozen=True)
class StrategyProfile:
    """One mixed strategy per player"""

    strategies: Tuple[MixedStrategy, ...]

    def __post_init__(self):
        strategies = tuple(
            s if isinstance(s, MixedStrategy) else MixedStrategy(s)
            for s in self.strategies
        )
        object.__setattr__(self, "strategies", strategies)

    @classmethod
    def uniform(cls, shape: GameShape) -> "StrategyProfile":
        return cls(tuple(MixedStrategy.uniform(a) for a in shape.action_counts))

    @classmethod
    def pure(cls, shape: GameShape, actions: Sequence[int]) -> "StrategyProfile":
        return cls(tuple(
            MixedStrategy.pure(a, j) for a, j in zip(shape.action_counts, actions)
        ))

    @classmethod
    def from_stacked(cls, shape: GameShape, values) -> "StrategyProfile":
        """Split a stacked vector (x^1, x^2, ..., x^N) into a profile"""
        values = np.asarray(values, dtype=float).reshape(-1)
        expected = sum(shape.action_counts)
        if values.size != expected:
            raise InvalidStrategyError(
                f"Profile has {values.size} entries, expected {expected} for a {shape} game"
            )
        cuts = np.cumsum(shape.action_counts)[:-1]
        return cls(tuple(MixedStrategy(part) for part in np.split(values, cuts)))

    @classmethod
    def from_first_probabilities(cls, first: Sequence[float]) -> "StrategyProfile":
        """Profile of a game where everyone has two actions, from P(action 1) per player"""
        return cls(tuple(MixedStrategy([p, 1.0 - p]) for p in first))

    @property
    def num_players(self) -> int:
        return len(self.strategies)

    def __len__(self) -> int:
        return len(self.strategies)

    def __getitem__(self, i: int) -> MixedStrategy:
        return self.strategies[i]

    def __iter__(self) -> Iterator[MixedStrategy]:
        return iter(self.strategies)

    def replace(self, i: int, strategy) -> "StrategyProfile":
        """Profile (x^{-i}, u^i)"""
        if not isinstance(strategy, MixedStrategy):
            strategy = MixedStrategy(strategy)
        strategies = list(self.strategies)
        strategies[i] = strategy
        return StrategyProfile(tuple(strategies))

    def stacked(self) -> np.ndarray:
        return np.concatenate([s.probs for s in self.strategies])

    def first_probabilities(self) -> List[float]:
        return [float(s.probs[0]) for s in self.strategies]

    def check_against(self, shape: GameShape, skip: int = None) -> None:
        """Raise unless every strategy (except player `skip`) fits the shape"""
        if self.num_players != shape.num_players:
            raise InvalidStrategyError(
                f"Profile has {self.num_players} strategies for a {shape.num_players}-player game"
            )
        for k, (strategy, a) in enumerate(zip(self.strategies, shape.action_counts)):
            if k != skip and strategy.num_actions != a:
                raise InvalidStrategyError(
                    f"Player {k} strategy has {strategy.num_actions} entries, expected {a}",
                    player=k,
                )

    def __repr__(self) -> str:
        return f"StrategyProfile({[s.probs.tolist() for s in self.strategies]})"


def expected_payoff(payoffs: PayoffTensor, profile: StrategyProfile, i: int) -> float:
    """
    Expected payoff of player i under a mixed profile.

    Args:
        payoffs: Payoff tensor
        profile: One mixed strategy per player
        i: Player index

    Returns:
        sum over joint actions of P^i_(j_1..j_N) * prod_k x^k_(j_k)
    """
    payoffs.shape.check_player(i)
    profile.check_against(payoffs.shape)
    result = payoffs.entries[i]
    for strategy in reversed(profile.strategies):
        result = result.dot(strategy.probs)
    return float(result)


def opponent_weights(profile: StrategyProfile, i: int, shape: GameShape) -> np.ndarray:
    """prod_{l != i} x^l_(j_l) over joint actions, with player i's axis left at 1"""
    weights = np.array(1.0)
    for l, a in enumerate(shape.action_counts):
        factor = np.ones(a) if l == i else profile[l].probs
        weights = np.multiply.outer(weights, factor)
    return weights


def payoff_operator(profile: StrategyProfile, i: int, shape: GameShape) -> np.ndarray:
    """
    Matrix Y^i(x^{-i}) with vec(P)^T Y u = pi_i(P; x^{-i}, u).

    Row (k, j_1..j_N), column j holds [k = i][j_i = j] prod_{l != i} x^l_(j_l).
    The strategy of player i inside `profile` is ignored.

    Returns:
        Array of shape (N * prod(a_k), a_i)
    """
    shape.check_player(i)
    profile.check_against(shape, skip=i)
    a_i = shape.action_counts[i]
    weights = opponent_weights(profile, i, shape)
    operator = np.zeros(shape.tensor_shape + (a_i,))
    for j in range(a_i):
        cell = [slice(None)] * shape.num_players
        cell[i] = j
        cell = tuple(cell)
        operator[(i,) + cell + (j,)] = weights[cell]
    return operator.reshape(shape.vec_length, a_i)
