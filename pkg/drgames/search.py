"""
Equilibrium Search

Multistart local search over the product of simplices. Each start runs
iterated best-response dynamics and then a pattern search that moves
probability mass between pairs of actions, minimizing the total
best-response gap. Games that reduce to a fixed-payoff bimatrix game are
solved exactly by support enumeration instead.
"""

import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .ambiguity import AmbiguitySet
from .certificate import EquilibriumCertificate, build_certificate
from .constants import MAX_ENUMERATION_ACTIONS, Tolerances
from .equilibrium import best_response, profile_distance
from .game_model import GameShape, StrategyProfile
from .nash import nash_support_enumeration, special_case_reduction
from .risk import RiskProfile, worst_case_cvar

logger = logging.getLogger(__name__)

# Pattern search stops once the step falls below this
MIN_STEP = 1e-10

# Joint pattern moves are only polled when there are at most this many
MAX_JOINT_MOVES = 64


@dataclass
class SearchConfig:
    """
    Tunables of find_equilibria().

    Args:
        restarts: Number of random starting profiles
        seed: Seed of the random starts
        gap_tol: Largest total gap accepted as an equilibrium
        dedupe_radius: Profiles closer than this (infinity norm) are merged
        max_iterations: Iteration cap of each local phase per start
        workers: Threads used to run starts concurrently
        include_pure: Also start from every pure profile
        use_reductions: Solve reducible games by support enumeration
        certify: Attach an equilibrium certificate to every result
    """

    restarts: int = 8
    seed: int = 0
    gap_tol: float = Tolerances.GAP
    dedupe_radius: float = Tolerances.DEDUPE_RADIUS
    max_iterations: int = 40
    workers: int = 1
    include_pure: bool = True
    use_reductions: bool = True
    certify: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.gap_tol <= 0 or self.dedupe_radius <= 0:
            raise ValueError("gap_tol and dedupe_radius must be positive")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "SearchConfig":
        """Build from a mapping, rejecting unknown keys"""
        data = dict(data or {})
        known = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ValueError(f"Unknown search settings: {', '.join(unknown)}")
        converted = {}
        for key, value in data.items():
            default = getattr(cls, key)
            if isinstance(default, bool):
                converted[key] = bool(value)
            elif isinstance(default, int):
                converted[key] = int(value)
            else:
                converted[key] = float(value)
        return cls(**converted)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EquilibriumRecord:
    """One equilibrium with its gap and (optionally) certificate"""

    profile: StrategyProfile
    gap: float
    player_gaps: List[float]
    source: str
    certificate: Optional[EquilibriumCertificate] = field(default=None, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "profile": [s.probs.tolist() for s in self.profile],
            "gap": self.gap,
            "player_gaps": list(self.player_gaps),
            "source": self.source,
        }
        if self.certificate is not None:
            data["certificate"] = {
                "valid": self.certificate.valid,
                "max_equality_residual": self.certificate.max_equality_residual,
                "max_inequality_violation": self.certificate.max_inequality_violation,
            }
        return data


class GapEvaluator:
    """
    Memoized best-response gap of one robust game.

    Worst-case CVaR values are keyed on the full profile and best-response
    values on the opponents' strategies only. Safe to share between threads.
    """

    def __init__(self, ambiguity: AmbiguitySet, risk: RiskProfile):
        self.ambiguity = ambiguity
        self.risk = risk
        self.num_players = ambiguity.shape.num_players
        self._current: Dict[Tuple[int, bytes], float] = {}
        self._best: Dict[Tuple[int, bytes], Any] = {}
        self._lock = threading.Lock()
        self.lp_solves = 0

    @staticmethod
    def _key(profile: StrategyProfile, skip: Optional[int] = None) -> bytes:
        return b"|".join(s.probs.tobytes() for k, s in enumerate(profile) if k != skip)

    def current(self, profile: StrategyProfile, i: int) -> float:
        key = (i, self._key(profile))
        with self._lock:
            if key in self._current:
                return self._current[key]
        value = worst_case_cvar(self.ambiguity, self.risk[i], profile, i).value
        with self._lock:
            self._current[key] = value
            self.lp_solves += 1
        return value

    def best(self, profile: StrategyProfile, i: int):
        key = (i, self._key(profile, skip=i))
        with self._lock:
            if key in self._best:
                return self._best[key]
        response = best_response(self.ambiguity, self.risk[i], profile, i)
        with self._lock:
            self._best[key] = response
            self.lp_solves += 1
        return response

    def player_gaps(self, profile: StrategyProfile) -> List[float]:
        return [self.current(profile, i) - self.best(profile, i).value
                for i in range(self.num_players)]

    def total(self, profile: StrategyProfile) -> float:
        return float(sum(self.player_gaps(profile)))


def _moves(shape: GameShape) -> List[List[Tuple[int, int, int]]]:
    """
    Pattern directions as lists of (player, to_action, from_action).

    Single-player moves shift mass between two actions of one player; joint
    moves combine one such shift for each of two players.
    """
    single = [
        [(i, j, k)]
        for i, a in enumerate(shape.action_counts)
        for j, k in itertools.permutations(range(a), 2)
    ]
    joint = [
        first + second
        for first, second in itertools.combinations(single, 2)
        if first[0][0] != second[0][0]
    ]
    if len(joint) > MAX_JOINT_MOVES:
        joint = []
    return single + joint


def _apply_move(profile: StrategyProfile, move, step: float) -> Optional[StrategyProfile]:
    result = profile
    for i, to_action, from_action in move:
        probs = result[i].probs.copy()
        amount = min(step, probs[from_action])
        if amount <= 0.0:
            return None
        probs[from_action] -= amount
        probs[to_action] += amount
        result = result.replace(i, probs)
    return result


class _LocalSearch:
    def __init__(self, evaluator: GapEvaluator, config: SearchConfig):
        self.evaluator = evaluator
        self.config = config
        self.moves = _moves(evaluator.ambiguity.shape)

    def best_response_dynamics(self, profile: StrategyProfile):
        best, best_gap = profile, self.evaluator.total(profile)
        seen = {GapEvaluator._key(profile)}
        for iteration in range(self.config.max_iterations):
            if best_gap <= self.config.gap_tol:
                break
            for i in range(self.evaluator.num_players):
                profile = profile.replace(i, self.evaluator.best(profile, i).strategy)
            gap = self.evaluator.total(profile)
            if gap < best_gap:
                best, best_gap = profile, gap
            key = GapEvaluator._key(profile)
            if key in seen:
                logger.debug(f"Best-response dynamics cycled after {iteration + 1} rounds")
                break
            seen.add(key)
        return best, best_gap

    def pattern_search(self, profile: StrategyProfile, gap: float):
        step = 0.25
        polls = 0
        budget = self.config.max_iterations * len(self.moves)
        while gap > self.config.gap_tol and step > MIN_STEP and polls < budget:
            improved = False
            for move in self.moves:
                candidate = _apply_move(profile, move, step)
                if candidate is None:
                    continue
                polls += 1
                value = self.evaluator.total(candidate)
                if value < gap:
                    profile, gap, improved = candidate, value, True
                    break
            if not improved:
                step *= 0.5
        return profile, gap

    def run(self, start: StrategyProfile):
        profile, gap = self.best_response_dynamics(start)
        if gap > self.config.gap_tol:
            profile, gap = self.pattern_search(profile, gap)
        return profile, gap


def starting_profiles(ambiguity: AmbiguitySet, config: SearchConfig) -> List[StrategyProfile]:
    """Mean-game Nash points, then pure profiles, then seeded random profiles"""
    shape = ambiguity.shape
    starts: List[StrategyProfile] = []
    if shape.num_players == 2 and max(shape.action_counts) <= MAX_ENUMERATION_ACTIONS:
        starts.extend(nash_support_enumeration(ambiguity.mean_game()).equilibria)
    if config.include_pure:
        starts.extend(
            StrategyProfile.pure(shape, actions)
            for actions in itertools.product(*(range(a) for a in shape.action_counts))
        )
    rng = np.random.default_rng(config.seed)
    for _ in range(config.restarts):
        starts.append(StrategyProfile(tuple(
            rng.dirichlet(np.ones(a)) for a in shape.action_counts
        )))
    return starts


def _stacked_key(record: EquilibriumRecord) -> Tuple[float, ...]:
    return tuple(np.round(record.profile.stacked(), 12))


def _canonical(records: List[EquilibriumRecord], radius: float) -> List[EquilibriumRecord]:
    """One record per cluster of nearby profiles, the one with the smallest gap"""
    ordered = sorted(records, key=lambda r: (r.gap, _stacked_key(r)))
    kept: List[EquilibriumRecord] = []
    for record in ordered:
        if all(profile_distance(record.profile, k.profile) > radius for k in kept):
            kept.append(record)
    return sorted(kept, key=_stacked_key)


def _reduced_equilibria(ambiguity, risk, config, evaluator) -> Optional[List[EquilibriumRecord]]:
    shape = ambiguity.shape
    if shape.num_players != 2 or max(shape.action_counts) > MAX_ENUMERATION_ACTIONS:
        return None
    reduced = special_case_reduction(ambiguity, risk)
    if reduced is None:
        return None
    enumeration = nash_support_enumeration(reduced.payoffs)
    if enumeration.degenerate:
        logger.info("Reduced game is degenerate; falling back to multistart search")
        return None
    records = []
    for profile in enumeration.equilibria:
        gaps = evaluator.player_gaps(profile)
        if sum(gaps) > config.gap_tol:
            logger.warning(f"Reduced-game equilibrium {profile} has robust gap {sum(gaps):.3g}")
            continue
        records.append(EquilibriumRecord(profile, float(sum(gaps)), gaps, reduced.reduction))
    return records


def find_equilibria(ambiguity: AmbiguitySet, risk: RiskProfile,
                    config: Optional[SearchConfig] = None) -> List[EquilibriumRecord]:
    """
    Approximate equilibria of a distributionally robust game.

    Deterministic for a fixed seed, whatever the number of workers. The
    search is multistart and not exhaustive; an empty list is a valid
    answer.

    Args:
        ambiguity: Validated ambiguity set
        risk: One risk level per player
        config: Search settings (defaults to SearchConfig())

    Returns:
        Equilibria sorted by stacked strategy, each within config.gap_tol
    """
    config = config or SearchConfig()
    risk.check_against(ambiguity.shape)
    evaluator = GapEvaluator(ambiguity, risk)

    records = _reduced_equilibria(ambiguity, risk, config, evaluator) if config.use_reductions else None
    if records is None:
        starts = starting_profiles(ambiguity, config)
        logger.info(f"Searching {ambiguity.shape} game from {len(starts)} starting profiles")
        search = _LocalSearch(evaluator, config)
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                outcomes = list(pool.map(search.run, starts))
        else:
            outcomes = [search.run(start) for start in starts]
        records = [
            EquilibriumRecord(profile, gap, evaluator.player_gaps(profile), "search")
            for profile, gap in outcomes if gap <= config.gap_tol
        ]

    records = _canonical(records, config.dedupe_radius)
    if config.certify:
        for record in records:
            record.certificate = build_certificate(ambiguity, risk, record.profile)
    logger.info(f"Found {len(records)} equilibria ({evaluator.lp_solves} LP solves)")
    if not records:
        logger.warning("No equilibrium reached the gap tolerance")
    return records
