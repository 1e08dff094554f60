"""
Risk Measures

CVaR of finite loss distributions and the worst-case CVaR of a player's loss
-pi_i(P; x) over a moment ambiguity set, evaluated through the moment-dual
linear program. Losses are negated payoffs throughout.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .ambiguity import AmbiguitySet, DiscreteDistribution, PolyhedralSupport, is_member
from .constants import LpStatus
from .exceptions import AmbiguitySetError, InvalidGameError, LpSolveError
from .game_model import GameShape, StrategyProfile, expected_payoff, payoff_operator
from .lp_core import INF, LinearProgram, LpSolution, solve_lp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RiskProfile:
    """CVaR levels eps_i in (0, 1], one per player; eps_i = 1 is risk neutral"""

    eps: Tuple[float, ...]

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        for i, e in enumerate(eps):
            if not 0.0 < e <= 1.0:
                raise InvalidGameError(
                    f"Risk level of player {i} must lie in (0, 1], got {e}",
                    details={"eps": list(eps)},
                )
        object.__setattr__(self, "eps", eps)

    @classmethod
    def neutral(cls, num_players: int) -> "RiskProfile":
        return cls((1.0,) * num_players)

    @property
    def num_players(self) -> int:
        return len(self.eps)

    def __len__(self) -> int:
        return len(self.eps)

    def __getitem__(self, i: int) -> float:
        return self.eps[i]

    def __iter__(self) -> Iterator[float]:
        return iter(self.eps)

    def sigma(self, i: int) -> float:
        """(1 - eps_i) / eps_i"""
        return (1.0 - self.eps[i]) / self.eps[i]

    @property
    def sigmas(self) -> Tuple[float, ...]:
        return tuple(self.sigma(i) for i in range(self.num_players))

    def is_risk_averse(self, i: int) -> bool:
        return self.eps[i] < 1.0

    @property
    def all_risk_neutral(self) -> bool:
        return all(e == 1.0 for e in self.eps)

    def check_against(self, shape: GameShape) -> None:
        if self.num_players != shape.num_players:
            raise InvalidGameError(
                f"Risk profile lists {self.num_players} levels for a "
                f"{shape.num_players}-player game"
            )


@dataclass(frozen=True, eq=False)
class WorstCaseCvarResult:
    """
    Optimal point of the worst-case CVaR program.

    value = zeta + (alpha + m^T beta + s gamma) / eps. gamma, lam, kappa,
    delta, nu are >= 0; xi and theta are <= 0. `strategy` is the player's
    own mixed strategy (fixed or optimized).
    """

    value: float
    zeta: float
    alpha: float
    gamma: float
    beta: np.ndarray
    lam: np.ndarray
    kappa: np.ndarray
    delta: np.ndarray
    nu: np.ndarray
    xi: np.ndarray
    theta: np.ndarray
    strategy: np.ndarray
    solution: LpSolution

    def variables(self) -> Dict[str, object]:
        return {
            "zeta": self.zeta, "alpha": self.alpha, "gamma": self.gamma,
            "beta": self.beta, "lam": self.lam, "kappa": self.kappa,
            "delta": self.delta, "nu": self.nu, "xi": self.xi, "theta": self.theta,
        }


class CvarProgramBuilder:
    """
    Builds the worst-case CVaR linear program of one player.

    Variable blocks (in order): zeta, alpha, beta[n], gamma, lam[n],
    kappa[n], delta[n], nu[n], xi[r], theta[r] and, for best responses,
    u[a_i]. Rows:

        mean_cut            -alpha + m^T lam - m^T kappa - h^T xi <= 0
        mean_deviation       lam + kappa - gamma e <= 0
        tail_cut            -alpha + m^T delta - m^T nu - h^T theta - zeta <= 0
        tail_deviation       delta + nu - gamma e <= 0
        mean_balance        -lam + kappa + W^T xi - beta = 0
        tail_balance        -delta + nu + W^T theta - beta - Y u = 0
        simplex              e^T u = 1            (best responses only)
    """

    UB_ROWS = ("mean_cut", "mean_deviation", "tail_cut", "tail_deviation")
    EQ_ROWS = ("mean_balance", "tail_balance", "simplex")

    def __init__(self, ambiguity: AmbiguitySet, eps: float):
        """
        Args:
            ambiguity: Moment ambiguity set
            eps: CVaR level of the player in (0, 1]
        """
        if not 0.0 < eps <= 1.0:
            raise InvalidGameError(f"Risk level must lie in (0, 1], got {eps}")
        if ambiguity.s < 0:
            raise AmbiguitySetError(f"Deviation cap must be nonnegative, got {ambiguity.s}")
        self.ambiguity = ambiguity
        self.eps = float(eps)
        self.n = ambiguity.vec_length
        self.r = ambiguity.support.num_rows

    def variable_slices(self, num_actions: int = 0) -> Dict[str, slice]:
        n, r = self.n, self.r
        sizes = [("zeta", 1), ("alpha", 1), ("beta", n), ("gamma", 1), ("lam", n),
                 ("kappa", n), ("delta", n), ("nu", n), ("xi", r), ("theta", r)]
        if num_actions:
            sizes.append(("u", num_actions))
        slices = {}
        start = 0
        for name, size in sizes:
            slices[name] = slice(start, start + size)
            start += size
        return slices

    def row_slices(self, with_simplex: bool) -> Tuple[Dict[str, slice], Dict[str, slice]]:
        n = self.n
        ub = {"mean_cut": slice(0, 1), "mean_deviation": slice(1, 1 + n),
              "tail_cut": slice(1 + n, 2 + n), "tail_deviation": slice(2 + n, 2 + 2 * n)}
        eq = {"mean_balance": slice(0, n), "tail_balance": slice(n, 2 * n)}
        if with_simplex:
            eq["simplex"] = slice(2 * n, 2 * n + 1)
        return ub, eq

    def _compile(self, operator: np.ndarray, fixed_strategy: Optional[np.ndarray],
                 name: str) -> LinearProgram:
        n, r = self.n, self.r
        m = self.ambiguity.m
        W, h = self.ambiguity.support.W, self.ambiguity.support.h
        a_i = operator.shape[1]
        free_u = fixed_strategy is None
        v = self.variable_slices(a_i if free_u else 0)
        num_vars = v["theta"].stop + (a_i if free_u else 0)
        eye = np.eye(n)
        ones = np.ones(n)

        c = np.zeros(num_vars)
        c[v["zeta"]] = 1.0
        c[v["alpha"]] = 1.0 / self.eps
        c[v["beta"]] = m / self.eps
        c[v["gamma"]] = self.ambiguity.s / self.eps

        ub_rows, eq_rows = self.row_slices(free_u)
        A_ub = np.zeros((2 + 2 * n, num_vars))
        row = ub_rows["mean_cut"].start
        A_ub[row, v["alpha"]] = -1.0
        A_ub[row, v["lam"]] = m
        A_ub[row, v["kappa"]] = -m
        A_ub[row, v["xi"]] = -h
        rows = ub_rows["mean_deviation"]
        A_ub[rows, v["lam"]] = eye
        A_ub[rows, v["kappa"]] = eye
        A_ub[rows, v["gamma"]] = -ones[:, None]
        row = ub_rows["tail_cut"].start
        A_ub[row, v["alpha"]] = -1.0
        A_ub[row, v["delta"]] = m
        A_ub[row, v["nu"]] = -m
        A_ub[row, v["theta"]] = -h
        A_ub[row, v["zeta"]] = -1.0
        rows = ub_rows["tail_deviation"]
        A_ub[rows, v["delta"]] = eye
        A_ub[rows, v["nu"]] = eye
        A_ub[rows, v["gamma"]] = -ones[:, None]
        b_ub = np.zeros(2 + 2 * n)

        A_eq = np.zeros((2 * n + (1 if free_u else 0), num_vars))
        b_eq = np.zeros(A_eq.shape[0])
        rows = eq_rows["mean_balance"]
        A_eq[rows, v["lam"]] = -eye
        A_eq[rows, v["kappa"]] = eye
        A_eq[rows, v["xi"]] = W.T
        A_eq[rows, v["beta"]] = -eye
        rows = eq_rows["tail_balance"]
        A_eq[rows, v["delta"]] = -eye
        A_eq[rows, v["nu"]] = eye
        A_eq[rows, v["theta"]] = W.T
        A_eq[rows, v["beta"]] = -eye
        if free_u:
            A_eq[rows, v["u"]] = -operator
            A_eq[eq_rows["simplex"], v["u"]] = 1.0
            b_eq[eq_rows["simplex"]] = 1.0
        else:
            b_eq[rows] = operator @ fixed_strategy

        bounds = ([(-INF, INF)] * (2 + n) + [(0.0, INF)] * (1 + 4 * n)
                  + [(-INF, 0.0)] * (2 * r) + ([(0.0, INF)] * a_i if free_u else []))
        return LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                             bounds=bounds, sense="min", name=name)

    def fixed_strategy_program(self, profile: StrategyProfile, i: int) -> LinearProgram:
        """Worst-case CVaR of player i at the full profile x"""
        shape = self.ambiguity.shape
        profile.check_against(shape)
        operator = payoff_operator(profile, i, shape)
        return self._compile(operator, profile[i].probs, f"worst_case_cvar[player {i}]")

    def best_response_program(self, profile: StrategyProfile, i: int) -> LinearProgram:
        """Same program with player i's strategy u as a decision variable"""
        shape = self.ambiguity.shape
        profile.check_against(shape, skip=i)
        operator = payoff_operator(profile, i, shape)
        return self._compile(operator, None, f"best_response[player {i}]")

    def unpack(self, solution: LpSolution, fixed_strategy: Optional[np.ndarray] = None,
               num_actions: int = 0) -> WorstCaseCvarResult:
        """Split an optimal LP point into the named variable blocks"""
        v = self.variable_slices(0 if fixed_strategy is not None else num_actions)
        x = solution.x
        strategy = (np.array(fixed_strategy, dtype=float) if fixed_strategy is not None
                    else np.clip(x[v["u"]], 0.0, None))
        return WorstCaseCvarResult(
            value=float(solution.objective),
            zeta=float(x[v["zeta"]][0]),
            alpha=float(x[v["alpha"]][0]),
            gamma=float(x[v["gamma"]][0]),
            beta=x[v["beta"]].copy(),
            lam=x[v["lam"]].copy(),
            kappa=x[v["kappa"]].copy(),
            delta=x[v["delta"]].copy(),
            nu=x[v["nu"]].copy(),
            xi=x[v["xi"]].copy(),
            theta=x[v["theta"]].copy(),
            strategy=strategy,
            solution=solution,
        )


def solve_cvar_program(program: LinearProgram, context: str) -> LpSolution:
    """
    Solve a worst-case CVaR style program.

    Infeasible or unbounded programs mean the ambiguity set is inconsistent
    (empty or unbounded support); solver breakdowns raise LpSolveError.
    """
    solution = solve_lp(program)
    if solution.status in (LpStatus.INFEASIBLE, LpStatus.UNBOUNDED):
        raise AmbiguitySetError(
            f"{context}: program is {solution.status}; validate the ambiguity set",
            details={"status": solution.status},
        )
    if not solution.is_optimal:
        raise LpSolveError(
            f"{context}: LP '{program.name}' finished with status {solution.status}",
            status=solution.status,
            diagnostics=dict(solution.diagnostics),
            program=program.to_dict(),
        )
    return solution


def cvar_discrete(losses: Sequence[float], probs: Sequence[float], eps: float) -> float:
    """
    CVaR at level eps of a finite loss distribution.

    min over z of z + E[max(L - z, 0)] / eps, evaluated exactly as the mean
    of the worst eps-tail: sort losses in decreasing order and take mass
    until eps is used up, splitting the atom at the quantile.
    """
    losses = np.asarray(losses, dtype=float).reshape(-1)
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if losses.size == 0:
        raise AmbiguitySetError("CVaR of an empty distribution")
    if probs.size != losses.size:
        raise AmbiguitySetError(f"{losses.size} losses but {probs.size} probabilities")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise AmbiguitySetError(f"Probabilities must be >= 0 and sum to 1: {probs.tolist()}")
    if not 0.0 < eps <= 1.0:
        raise InvalidGameError(f"Risk level must lie in (0, 1], got {eps}")

    order = np.argsort(-losses, kind="stable")
    total = 0.0
    remaining = eps
    for k in order:
        take = min(probs[k], remaining)
        total += take * losses[k]
        remaining -= take
        if remaining <= 0.0:
            break
    if remaining > 0.0:
        # rounding left a sliver of tail mass; it sits on the smallest loss
        total += remaining * losses[order[-1]]
    return float(total / eps)


def worst_case_cvar(ambiguity: AmbiguitySet, eps: float, profile: StrategyProfile,
                    i: int) -> WorstCaseCvarResult:
    """
    sup over Q in F of Q-CVaR_eps[-pi_i(P; x)].

    Args:
        ambiguity: Validated ambiguity set
        eps: Player i's risk level
        profile: Full strategy profile x
        i: Player index

    Returns:
        Optimal value with every inner variable of the dual program
    """
    ambiguity.shape.check_player(i)
    builder = CvarProgramBuilder(ambiguity, eps)
    program = builder.fixed_strategy_program(profile, i)
    solution = solve_cvar_program(program, f"Worst-case CVaR of player {i}")
    return builder.unpack(solution, fixed_strategy=profile[i].probs)


def worst_case_cvar_lower_bound(ambiguity: AmbiguitySet, eps: float, profile: StrategyProfile,
                                i: int, candidates: List[DiscreteDistribution]) -> float:
    """
    Best CVaR over an explicit list of member distributions.

    Never exceeds worst_case_cvar(); -inf for an empty list.
    """
    best = -INF
    for index, candidate in enumerate(candidates):
        if not is_member(candidate, ambiguity):
            raise AmbiguitySetError(
                f"Candidate distribution {index} is not a member of the ambiguity set",
                index=index,
            )
        losses = [-expected_payoff(atom, profile, i) for atom in candidate.atoms]
        best = max(best, cvar_discrete(losses, candidate.probs, eps))
    return best


def robust_payoff(ambiguity: AmbiguitySet, profile: StrategyProfile, i: int) -> float:
    """
    Worst payoff of player i over the support: min over P in U of pi_i(P; x).

    The quantity a classical robust game optimizes.
    """
    support: PolyhedralSupport = ambiguity.support
    operator = payoff_operator(profile, i, ambiguity.shape)
    program = LinearProgram(
        c=operator @ profile[i].probs, A_ub=support.W, b_ub=support.h,
        bounds=[(-INF, INF)] * support.dim, name=f"robust_payoff[player {i}]",
    )
    return float(solve_cvar_program(program, f"Robust payoff of player {i}").objective)
