"""
Linear Programming Kernel

Dense two-phase revised primal simplex with primal and dual solution
extraction. Every optimal answer is checked against its own optimality
certificate (primal feasibility, dual feasibility, complementary slackness
and duality gap) before it is returned; an answer that fails the check comes
back with status ``numerical_error`` instead of ``optimal``.

Dual convention: the program is solved internally as a minimization
(``-c`` for ``sense="max"``). Inequality multipliers ``mu`` are >= 0 and
equality multipliers ``w`` are free, with stationarity

    c_int + A_ub^T mu + A_eq^T w - r = 0

where ``r`` are the reduced costs (> 0 at an active lower bound, < 0 at an
active upper bound). For ``min x s.t. -x <= -3`` this gives ``mu = 1``.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import LpStatus, Tolerances
from .exceptions import LpSolveError

logger = logging.getLogger(__name__)

INF = float("inf")

# Consecutive degenerate pivots tolerated before switching to Bland's rule
DEGENERATE_STREAK_LIMIT = 50


def _as_matrix(values, num_vars: int, name: str) -> np.ndarray:
    if values is None:
        return np.zeros((0, num_vars))
    matrix = np.array(values, dtype=float)
    if matrix.size == 0:
        return np.zeros((0, num_vars))
    if matrix.ndim != 2 or matrix.shape[1] != num_vars:
        raise ValueError(f"{name} must have {num_vars} columns, got shape {matrix.shape}")
    return matrix


def _as_vector(values, length: int, name: str) -> np.ndarray:
    if values is None:
        return np.zeros(length)
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.size != length:
        raise ValueError(f"{name} must have length {length}, got {vector.size}")
    return vector


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """
    optimize c^T z  s.t.  A_ub z <= b_ub,  A_eq z = b_eq,  lo <= z <= hi.

    Bounds default to (0, +inf) for every variable; use ``-inf`` / ``inf``
    for free directions.
    """

    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    bounds: Optional[Sequence[Tuple[float, float]]] = None
    sense: str = "min"
    name: str = "lp"

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        n = c.size
        A_ub = _as_matrix(self.A_ub, n, "A_ub")
        b_ub = _as_vector(self.b_ub, A_ub.shape[0], "b_ub")
        A_eq = _as_matrix(self.A_eq, n, "A_eq")
        b_eq = _as_vector(self.b_eq, A_eq.shape[0], "b_eq")
        if self.bounds is None:
            lower = np.zeros(n)
            upper = np.full(n, INF)
        else:
            if len(self.bounds) != n:
                raise ValueError(f"bounds must have {n} entries, got {len(self.bounds)}")
            lower = np.array([-INF if lo is None else lo for lo, _ in self.bounds], dtype=float)
            upper = np.array([INF if hi is None else hi for _, hi in self.bounds], dtype=float)
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        for label, array in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub),
                             ("A_eq", A_eq), ("b_eq", b_eq)):
            if not np.all(np.isfinite(array)):
                raise ValueError(f"{label} has non-finite coefficients")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise ValueError("every bound needs lo <= hi")
        if np.any(lower == INF) or np.any(upper == -INF):
            raise ValueError("bounds cannot pin a variable at infinity")
        for attr, value in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub), ("A_eq", A_eq),
                            ("b_eq", b_eq)):
            value.setflags(write=False)
            object.__setattr__(self, attr, value)
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "bounds", tuple(zip(lower.tolist(), upper.tolist())))
        object.__setattr__(self, "_lower", lower)
        object.__setattr__(self, "_upper", upper)

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def lower(self) -> np.ndarray:
        return self._lower

    @property
    def upper(self) -> np.ndarray:
        return self._upper

    def to_dict(self) -> Dict[str, Any]:
        """Plain-data dump used in error reports"""
        return {
            "name": self.name,
            "sense": self.sense,
            "c": self.c.tolist(),
            "A_ub": self.A_ub.tolist(),
            "b_ub": self.b_ub.tolist(),
            "A_eq": self.A_eq.tolist(),
            "b_eq": self.b_eq.tolist(),
            "bounds": [list(b) for b in self.bounds],
        }


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Result of solve_lp()"""

    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    ineq_duals: Optional[np.ndarray] = None
    eq_duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


class _StandardForm:
    """
    min cost^T y  s.t.  A y = b,  y >= 0  equivalent of a LinearProgram.

    Columns: structural (each original variable shifted/negated/split),
    then one slack per inequality row (bound rows of doubly bounded
    variables included), then artificials for phase 1.
    """

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n = lp.num_vars
        sign = 1.0 if lp.sense == "min" else -1.0
        self.c_int = sign * lp.c

        columns: List[Tuple[int, float]] = []   # (original variable, coefficient)
        offset = np.zeros(n)
        bound_rows: List[Tuple[int, float]] = []  # (structural column, width)
        for j, (lo, hi) in enumerate(zip(lp.lower, lp.upper)):
            if np.isfinite(lo):
                offset[j] = lo
                columns.append((j, 1.0))
                if np.isfinite(hi):
                    bound_rows.append((len(columns) - 1, hi - lo))
            elif np.isfinite(hi):
                offset[j] = hi
                columns.append((j, -1.0))
            else:
                columns.append((j, 1.0))
                columns.append((j, -1.0))

        T = np.zeros((n, len(columns)))
        for col, (j, coef) in enumerate(columns):
            T[j, col] = coef
        self.T = T
        self.offset = offset

        n_struct = len(columns)
        p = lp.A_ub.shape[0]
        q = lp.A_eq.shape[0]
        nb = len(bound_rows)
        n_ub = p + nb
        rows = n_ub + q

        A = np.zeros((rows, n_struct + n_ub))
        b = np.zeros(rows)
        if p:
            A[:p, :n_struct] = lp.A_ub @ T
            b[:p] = lp.b_ub - lp.A_ub @ offset
        for r, (col, width) in enumerate(bound_rows):
            A[p + r, col] = 1.0
            b[p + r] = width
        A[:n_ub, n_struct:n_struct + n_ub] = np.eye(n_ub)
        if q:
            A[n_ub:, :n_struct] = lp.A_eq @ T
            b[n_ub:] = lp.b_eq - lp.A_eq @ offset

        flip = np.where(b < 0, -1.0, 1.0)
        A *= flip[:, None]
        b *= flip

        self.n_struct = n_struct
        self.n_ub = n_ub
        self.num_orig_ub = p
        self.num_eq = q
        self.flip = flip
        self.cost = np.concatenate([T.T @ self.c_int, np.zeros(n_ub)])
        self.A = A
        self.b = b

    def initial_basis(self):
        """Slack basis where possible, artificial columns elsewhere"""
        rows = self.A.shape[0]
        basis = []
        artificial_rows = []
        for r in range(rows):
            if r < self.n_ub and self.flip[r] > 0:
                basis.append(self.n_struct + r)
            else:
                basis.append(None)
                artificial_rows.append(r)
        num_cols = self.A.shape[1]
        art = np.zeros((rows, len(artificial_rows)))
        for k, r in enumerate(artificial_rows):
            art[r, k] = 1.0
            basis[r] = num_cols + k
        return np.hstack([self.A, art]), np.array(basis, dtype=int), num_cols


def _simplex_phase(A, b, cost, basis, eligible, max_iter, label):
    """
    Revised primal simplex iterations from a feasible basis.

    Dantzig pricing with a switch to Bland's rule after a streak of
    degenerate pivots. Returns (status, basis, x_B, y, iterations).
    """
    bland = False
    streak = 0
    opt_tol = Tolerances.LP_PIVOT * (1.0 + np.max(np.abs(cost), initial=0.0))
    x_B = y = None
    for iteration in range(max_iter):
        B = A[:, basis]
        try:
            x_B = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError:
            return LpStatus.NUMERICAL, basis, x_B, y, iteration
        reduced = cost - A.T @ y
        reduced[basis] = 0.0
        candidates = np.flatnonzero(eligible & (reduced < -opt_tol))
        if candidates.size == 0:
            return LpStatus.OPTIMAL, basis, x_B, y, iteration
        if bland:
            entering = int(candidates[0])
        else:
            entering = int(candidates[np.argmin(reduced[candidates])])

        direction = np.linalg.solve(B, A[:, entering])
        rows = np.flatnonzero(direction > Tolerances.LP_PIVOT)
        if rows.size == 0:
            return LpStatus.UNBOUNDED, basis, x_B, y, iteration
        ratios = np.clip(x_B[rows], 0.0, None) / direction[rows]
        step = ratios.min()
        ties = rows[ratios <= step + 1e-12 * (1.0 + step)]
        if bland:
            leaving = int(ties[np.argmin(basis[ties])])
        else:
            leaving = int(ties[np.argmax(direction[ties])])
        basis = basis.copy()
        basis[leaving] = entering

        if step <= 1e-12:
            streak += 1
            if not bland and streak > DEGENERATE_STREAK_LIMIT:
                logger.debug(f"{label}: {streak} degenerate pivots, switching to Bland's rule")
                bland = True
        else:
            streak = 0
    return LpStatus.ITERATION_LIMIT, basis, x_B, y, max_iter


def _drive_out_artificials(A, b, basis, num_real):
    """
    Pivot zero-level artificials out of the basis after phase 1.

    Returns the (possibly reduced) A, b, basis and the list of kept row
    indices; rows that are linear combinations of others are dropped.
    """
    kept_rows = list(range(A.shape[0]))
    position = 0
    while position < len(basis):
        if basis[position] < num_real:
            position += 1
            continue
        B = A[:, basis]
        unit = np.zeros(len(basis))
        unit[position] = 1.0
        z = np.linalg.solve(B.T, unit)
        row = z @ A[:, :num_real]
        row[basis[basis < num_real]] = 0.0
        col = int(np.argmax(np.abs(row)))
        if abs(row[col]) > 1e-7:
            basis = basis.copy()
            basis[position] = col
            position += 1
            continue
        # redundant: drop the row the artificial is tied to
        drop = int(np.argmax(np.abs(z)))
        logger.debug(f"Dropping redundant constraint row {kept_rows[drop]}")
        A = np.delete(A, drop, axis=0)
        b = np.delete(b, drop)
        basis = np.delete(basis, position)
        del kept_rows[drop]
    return A, b, basis, kept_rows


def _certify(lp: LinearProgram, x, c_int, mu, w) -> Dict[str, float]:
    """Measure how well (x, mu, w) satisfy the optimality conditions"""
    reduced = c_int + lp.A_ub.T @ mu + lp.A_eq.T @ w
    scale = 1.0 + max(np.max(np.abs(lp.b_ub), initial=0.0),
                      np.max(np.abs(lp.b_eq), initial=0.0),
                      np.max(np.abs(x), initial=0.0))
    cost_scale = 1.0 + np.max(np.abs(c_int), initial=0.0)

    slack_ub = lp.b_ub - lp.A_ub @ x
    primal = max(
        np.max(-slack_ub, initial=0.0),
        np.max(np.abs(lp.A_eq @ x - lp.b_eq), initial=0.0),
        np.max(lp.lower - x, initial=0.0),
        np.max(x - lp.upper, initial=0.0),
    )

    dual = np.max(-mu, initial=0.0)
    complementarity = float(np.max(np.abs(mu * slack_ub), initial=0.0))
    bound_term = 0.0
    for j, r in enumerate(reduced):
        lo, hi = lp.lower[j], lp.upper[j]
        if r > 0:
            if np.isfinite(lo):
                bound_term += r * lo
                complementarity = max(complementarity, r * (x[j] - lo))
            else:
                dual = max(dual, r)
        elif r < 0:
            if np.isfinite(hi):
                bound_term += r * hi
                complementarity = max(complementarity, -r * (hi - x[j]))
            else:
                dual = max(dual, -r)

    primal_value = float(c_int @ x)
    dual_value = float(-lp.b_ub @ mu - lp.b_eq @ w + bound_term)
    return {
        "primal_violation": float(primal) / scale,
        "dual_violation": float(dual) / cost_scale,
        "complementarity": complementarity / (scale * cost_scale),
        "duality_gap": abs(primal_value - dual_value) / (1.0 + abs(primal_value)),
        "reduced_costs": reduced,
    }


def solve_lp(lp: LinearProgram, max_iterations: Optional[int] = None) -> LpSolution:
    """
    Solve a linear program with the two-phase primal simplex method.

    Args:
        lp: Program to solve
        max_iterations: Pivot cap per phase (default scales with size)

    Returns:
        LpSolution whose status is optimal, infeasible, unbounded,
        iteration_limit or numerical_error
    """
    form = _StandardForm(lp)
    A_full, basis, num_real = form.initial_basis()
    rows, cols = A_full.shape
    if max_iterations is None:
        max_iterations = 50 * (rows + cols) + 1000

    phase1_cost = np.zeros(cols)
    phase1_cost[num_real:] = 1.0
    eligible = np.ones(cols, dtype=bool)
    status, basis, x_B, _, it1 = _simplex_phase(
        A_full, form.b, phase1_cost, basis, eligible, max_iterations, f"{lp.name}/phase1"
    )
    if status != LpStatus.OPTIMAL:
        # phase 1 is bounded below by 0, so only a breakdown lands here
        return LpSolution(status=status if status != LpStatus.UNBOUNDED else LpStatus.NUMERICAL,
                          iterations=it1, diagnostics={"phase": 1})
    infeasibility = float(phase1_cost[basis] @ x_B)
    if infeasibility > Tolerances.FEASIBILITY * (1.0 + np.max(np.abs(form.b), initial=0.0)):
        return LpSolution(status=LpStatus.INFEASIBLE, iterations=it1,
                          diagnostics={"phase1_infeasibility": infeasibility})

    A2, b2, basis, kept_rows = _drive_out_artificials(A_full, form.b, basis, num_real)
    cost2 = np.concatenate([form.cost, np.zeros(cols - num_real)])
    eligible2 = np.zeros(cols, dtype=bool)
    eligible2[:num_real] = True
    status, basis, x_B, y, it2 = _simplex_phase(
        A2, b2, cost2, basis, eligible2, max_iterations, f"{lp.name}/phase2"
    )
    iterations = it1 + it2
    if status == LpStatus.UNBOUNDED:
        return LpSolution(status=status, iterations=iterations)
    if status != LpStatus.OPTIMAL:
        return LpSolution(status=status, iterations=iterations, diagnostics={"phase": 2})

    y_std = np.zeros(rows)
    y_std[kept_rows] = y
    solution_std = np.zeros(cols)
    solution_std[basis] = x_B
    x = form.T @ solution_std[:form.n_struct] + form.offset

    # Lagrange multipliers of the original rows (bound rows are folded into r)
    p = form.num_orig_ub
    mu = -form.flip[:p] * y_std[:p]
    w = -form.flip[form.n_ub:] * y_std[form.n_ub:]
    checks = _certify(lp, x, form.c_int, mu, w)
    reduced = checks.pop("reduced_costs")

    sign = 1.0 if lp.sense == "min" else -1.0
    objective = sign * float(form.c_int @ x)
    failed = (
        checks["primal_violation"] > Tolerances.LP_PRIMAL
        or checks["dual_violation"] > Tolerances.LP_DUAL
        or checks["complementarity"] > Tolerances.LP_COMPLEMENTARITY
        or checks["duality_gap"] > Tolerances.LP_GAP
    )
    if failed:
        logger.warning(f"{lp.name}: solution failed its optimality certificate {checks}")
    return LpSolution(
        status=LpStatus.NUMERICAL if failed else LpStatus.OPTIMAL,
        x=x,
        objective=objective,
        ineq_duals=mu,
        eq_duals=w,
        reduced_costs=reduced,
        iterations=iterations,
        diagnostics=checks,
    )


def solve_or_raise(lp: LinearProgram, context: str) -> LpSolution:
    """solve_lp() that escalates anything but an optimal answer"""
    solution = solve_lp(lp)
    if not solution.is_optimal:
        raise LpSolveError(
            f"{context}: LP '{lp.name}' finished with status {solution.status}",
            status=solution.status,
            diagnostics={k: v for k, v in solution.diagnostics.items()},
            program=lp.to_dict(),
        )
    return solution


def dual_program(lp: LinearProgram) -> LinearProgram:
    """
    Explicit LP dual whose optimal value equals the primal optimal value.

    Variables are (mu, w, r_lo, r_hi): inequality multipliers, equality
    multipliers and multipliers of the finite lower/upper bounds.
    """
    sign = 1.0 if lp.sense == "min" else -1.0
    c_int = sign * lp.c
    n = lp.num_vars
    finite_lo = np.flatnonzero(np.isfinite(lp.lower))
    finite_hi = np.flatnonzero(np.isfinite(lp.upper))
    p, q = lp.A_ub.shape[0], lp.A_eq.shape[0]

    E_lo = np.zeros((n, finite_lo.size))
    E_lo[finite_lo, np.arange(finite_lo.size)] = 1.0
    E_hi = np.zeros((n, finite_hi.size))
    E_hi[finite_hi, np.arange(finite_hi.size)] = 1.0

    # c_int + A_ub^T mu + A_eq^T w - r_lo + r_hi = 0
    A_eq = np.hstack([lp.A_ub.T, lp.A_eq.T, -E_lo, E_hi])
    b_eq = -c_int
    # internal-min dual objective: -b_ub^T mu - b_eq^T w + lo^T r_lo - hi^T r_hi
    objective = np.concatenate([-lp.b_ub, -lp.b_eq, lp.lower[finite_lo], -lp.upper[finite_hi]])
    bounds = ([(0.0, INF)] * p + [(-INF, INF)] * q
              + [(0.0, INF)] * (finite_lo.size + finite_hi.size))
    if lp.sense == "min":
        return LinearProgram(c=objective, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                             sense="max", name=f"{lp.name}/dual")
    return LinearProgram(c=-objective, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                         sense="min", name=f"{lp.name}/dual")
