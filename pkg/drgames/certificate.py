"""
Equilibrium Certificates

At an equilibrium, every player's worst-case CVaR program at their own
strategy is primal feasible, the best-response program's dual is feasible,
and the two objective values agree. The multilinear system below collects
those conditions; its residuals certify (or refute) a profile.

Per player i, with sigma = (1 - eps) / eps, Y = Y^i(x^{-i}):

    zeta + (alpha + m^T beta + s gamma) / eps - rho = 0
    e^T x^i = 1
    -lam + kappa + W^T xi - beta = 0
    -delta + nu + W^T theta - beta - Y x^i = 0
    -tau - f - m / eps = 0
    alpha - m^T lam + m^T kappa + h^T xi >= 0
    alpha - m^T delta + m^T nu + h^T theta + zeta >= 0
    lam + kappa <= gamma e,  delta + nu <= gamma e
    rho e <= Y^T f
    -e^T g - e^T phi <= s / eps
    -tau + phi <= sigma m,   tau + phi <= -sigma m
    W tau >= -sigma h,       W f >= -h
    -f + g <= m,             f + g <= -m
    gamma, lam, kappa, delta, nu, x^i >= 0;  xi, theta, phi, g <= 0
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from .ambiguity import AmbiguitySet
from .constants import Tolerances
from .game_model import StrategyProfile, payoff_operator
from .risk import CvarProgramBuilder, RiskProfile, WorstCaseCvarResult, worst_case_cvar
from .equilibrium import best_response

logger = logging.getLogger(__name__)


@dataclass
class PlayerCertificate:
    player: int
    rho: float
    primal: WorstCaseCvarResult = field(repr=False)
    tau: np.ndarray
    f: np.ndarray
    phi: np.ndarray
    g: np.ndarray
    equalities: Dict[str, np.ndarray] = field(repr=False)
    inequalities: Dict[str, np.ndarray] = field(repr=False)

    @property
    def max_equality_residual(self) -> float:
        return max((float(np.max(np.abs(r))) for r in self.equalities.values() if r.size),
                   default=0.0)

    @property
    def max_inequality_violation(self) -> float:
        return max((float(np.max(r)) for r in self.inequalities.values() if r.size),
                   default=0.0)

    def worst_rows(self) -> Dict[str, float]:
        rows = {name: float(np.max(np.abs(r))) for name, r in self.equalities.items() if r.size}
        rows.update({name: float(np.max(r)) for name, r in self.inequalities.items() if r.size})
        return rows


@dataclass
class EquilibriumCertificate:
    """Residuals of the equilibrium system at one profile"""

    profile: StrategyProfile
    players: List[PlayerCertificate]
    tolerance: float = Tolerances.CERTIFICATE

    @property
    def max_equality_residual(self) -> float:
        return max(p.max_equality_residual for p in self.players)

    @property
    def max_inequality_violation(self) -> float:
        return max(p.max_inequality_violation for p in self.players)

    @property
    def max_residual(self) -> float:
        return max(self.max_equality_residual, self.max_inequality_violation)

    @property
    def valid(self) -> bool:
        return (self.max_equality_residual <= self.tolerance
                and self.max_inequality_violation <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": [s.probs.tolist() for s in self.profile],
            "valid": self.valid,
            "tolerance": self.tolerance,
            "max_equality_residual": self.max_equality_residual,
            "max_inequality_violation": self.max_inequality_violation,
            "players": [
                {"player": p.player, "rho": p.rho, "rows": p.worst_rows()}
                for p in self.players
            ],
        }


def _violation(lhs, rhs) -> np.ndarray:
    """Positive part of lhs - rhs for rows lhs <= rhs"""
    return np.clip(np.atleast_1d(np.asarray(lhs, dtype=float) - rhs), 0.0, None)


def _player_certificate(ambiguity: AmbiguitySet, eps: float, sigma: float,
                        profile: StrategyProfile, i: int) -> PlayerCertificate:
    m, s = ambiguity.m, ambiguity.s
    W, h = ambiguity.support.W, ambiguity.support.h
    x_i = profile[i].probs
    Y = payoff_operator(profile, i, ambiguity.shape)

    primal = worst_case_cvar(ambiguity, eps, profile, i)
    response = best_response(ambiguity, eps, profile, i)

    # multipliers of the best-response program, sign-flipped into the
    # variables of the equilibrium system
    ub_rows, eq_rows = CvarProgramBuilder(ambiguity, eps).row_slices(with_simplex=True)
    mu = response.solution.ineq_duals
    w = response.solution.eq_duals
    rho = float(-w[eq_rows["simplex"]][0])
    tau = -w[eq_rows["mean_balance"]]
    f = -w[eq_rows["tail_balance"]]
    phi = -mu[ub_rows["mean_deviation"]]
    g = -mu[ub_rows["tail_deviation"]]

    p = primal
    objective = p.zeta + (p.alpha + m @ p.beta + s * p.gamma) / eps
    equalities = {
        "objective": np.array([objective - rho]),
        "simplex": np.array([x_i.sum() - 1.0]),
        "mean_balance": -p.lam + p.kappa + W.T @ p.xi - p.beta,
        "tail_balance": -p.delta + p.nu + W.T @ p.theta - p.beta - Y @ x_i,
        "dual_mean": -tau - f - m / eps,
    }
    inequalities = {
        "mean_cut": _violation(-(p.alpha - m @ p.lam + m @ p.kappa + h @ p.xi), 0.0),
        "tail_cut": _violation(-(p.alpha - m @ p.delta + m @ p.nu + h @ p.theta + p.zeta), 0.0),
        "mean_deviation": _violation(p.lam + p.kappa, p.gamma),
        "tail_deviation": _violation(p.delta + p.nu, p.gamma),
        "best_response": _violation(rho, Y.T @ f),
        "deviation_budget": _violation(-g.sum() - phi.sum(), s / eps),
        "mean_lower": _violation(-tau + phi, sigma * m),
        "mean_upper": _violation(tau + phi, -sigma * m),
        "mean_support": _violation(-(W @ tau), sigma * h),
        "tail_support": _violation(-(W @ f), h),
        "tail_lower": _violation(-f + g, m),
        "tail_upper": _violation(f + g, -m),
        "nonnegative": _violation(-np.concatenate(
            [[p.gamma], p.lam, p.kappa, p.delta, p.nu, x_i]), 0.0),
        "nonpositive": _violation(np.concatenate([p.xi, p.theta, phi, g]), 0.0),
    }
    return PlayerCertificate(player=i, rho=rho, primal=primal, tau=tau, f=f, phi=phi, g=g,
                             equalities=equalities, inequalities=inequalities)


def build_certificate(ambiguity: AmbiguitySet, risk: RiskProfile, profile: StrategyProfile,
                      tol: float = Tolerances.CERTIFICATE) -> EquilibriumCertificate:
    """
    Assemble and evaluate the equilibrium system at `profile`.

    Primal blocks come from each player's worst-case CVaR program at x^i,
    dual blocks (rho, tau, f, phi, g) from the best-response program's
    multipliers. A non-equilibrium profile still yields a certificate; it
    is just not valid.
    """
    shape = ambiguity.shape
    risk.check_against(shape)
    profile.check_against(shape)
    players = [
        _player_certificate(ambiguity, risk[i], risk.sigma(i), profile, i)
        for i in range(shape.num_players)
    ]
    certificate = EquilibriumCertificate(profile, players, tol)
    logger.debug(
        f"Certificate at {profile}: equality residual {certificate.max_equality_residual:.3g}, "
        f"inequality violation {certificate.max_inequality_violation:.3g}"
    )
    return certificate
