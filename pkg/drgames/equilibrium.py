"""
Best Responses and Equilibrium Verification

A profile x is a distributionally robust equilibrium when every player's
strategy minimizes their worst-case CVaR loss given the others' strategies.
The best-response gap (current worst-case CVaR minus the best achievable
one) measures how far a profile is from that.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from .ambiguity import AmbiguitySet
from .constants import Tolerances
from .game_model import MixedStrategy, StrategyProfile
from .risk import (
    CvarProgramBuilder,
    RiskProfile,
    WorstCaseCvarResult,
    solve_cvar_program,
    worst_case_cvar,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BestResponseResult:
    """Optimal strategy u of player i against x^{-i} and its value rho_i"""

    player: int
    strategy: MixedStrategy
    value: float
    inner: WorstCaseCvarResult

    @property
    def solution(self):
        return self.inner.solution


@dataclass
class GapReport:
    """Per-player best-response gaps of one profile"""

    profile: StrategyProfile
    current_values: List[float]
    best_values: List[float]
    best_responses: List[BestResponseResult] = field(repr=False)

    @property
    def player_gaps(self) -> List[float]:
        return [c - b for c, b in zip(self.current_values, self.best_values)]

    @property
    def total(self) -> float:
        return float(sum(self.player_gaps))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": [s.probs.tolist() for s in self.profile],
            "current_values": list(self.current_values),
            "best_values": list(self.best_values),
            "player_gaps": self.player_gaps,
            "total_gap": self.total,
            "best_responses": [br.strategy.probs.tolist() for br in self.best_responses],
        }


@dataclass
class VerificationReport:
    is_equilibrium: bool
    tolerance: float
    gap: GapReport

    def __bool__(self) -> bool:
        return self.is_equilibrium

    def to_dict(self) -> Dict[str, Any]:
        return {"is_equilibrium": self.is_equilibrium, "tolerance": self.tolerance,
                **self.gap.to_dict()}


def best_response(ambiguity: AmbiguitySet, eps: float, profile: StrategyProfile,
                  i: int) -> BestResponseResult:
    """
    Player i's best response to the opponents in `profile`.

    Player i's own entry of `profile` is ignored. The returned strategy is
    the vertex picked by the solver's deterministic pivoting; ties between
    optimal strategies are not enumerated.

    Raises:
        LpSolveError: With the full program dump if the LP cannot be certified
    """
    ambiguity.shape.check_player(i)
    builder = CvarProgramBuilder(ambiguity, eps)
    program = builder.best_response_program(profile, i)
    solution = solve_cvar_program(program, f"Best response of player {i}")
    a_i = ambiguity.shape.action_counts[i]
    inner = builder.unpack(solution, num_actions=a_i)
    u = inner.strategy / inner.strategy.sum()
    return BestResponseResult(player=i, strategy=MixedStrategy(u), value=inner.value,
                              inner=inner)


def equilibrium_gap(ambiguity: AmbiguitySet, risk: RiskProfile,
                    profile: StrategyProfile) -> GapReport:
    """Best-response gap of every player at `profile`"""
    shape = ambiguity.shape
    risk.check_against(shape)
    profile.check_against(shape)
    current, best, responses = [], [], []
    for i in range(shape.num_players):
        current.append(worst_case_cvar(ambiguity, risk[i], profile, i).value)
        response = best_response(ambiguity, risk[i], profile, i)
        best.append(response.value)
        responses.append(response)
    report = GapReport(profile, current, best, responses)
    if min(report.player_gaps) < -1e-7:
        logger.warning(f"Negative best-response gap {report.player_gaps} at {profile}")
    return report


def verify_equilibrium(ambiguity: AmbiguitySet, risk: RiskProfile, profile: StrategyProfile,
                       tol: float = Tolerances.GAP) -> VerificationReport:
    """True iff the total best-response gap is at most tol"""
    gap = equilibrium_gap(ambiguity, risk, profile)
    verdict = gap.total <= tol
    logger.debug(f"Profile {profile}: total gap {gap.total:.3g} (tol {tol:g}) -> {verdict}")
    return VerificationReport(is_equilibrium=verdict, tolerance=tol, gap=gap)


def profile_distance(first: StrategyProfile, second: StrategyProfile) -> float:
    """Infinity-norm distance between stacked strategies"""
    return float(np.max(np.abs(first.stacked() - second.stacked())))
