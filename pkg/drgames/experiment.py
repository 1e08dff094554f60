"""
Inspection Game Experiments

Runs the equilibrium search over a grid of risk levels with the ambiguity
set held fixed, reports both payoff notions at every equilibrium (expected
payoff under the mean game and the negated worst-case CVaR), and checks the
published equilibrium lists against the exact gap.
"""

import csv
import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, IO, Iterable, List, Optional, Sequence, Tuple, Union

from .ambiguity import AmbiguitySet, validate
from .constants import PRINT_DIGITS, Tolerances
from .exceptions import AmbiguitySetError
from .game_model import StrategyProfile, expected_payoff
from .inspection import InspectionParams, PublishedEntry, PublishedTables, build_inspection_game
from .risk import RiskProfile, robust_payoff, worst_case_cvar
from .search import EquilibriumRecord, GapEvaluator, SearchConfig, find_equilibria

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["eps1", "eps2", "x1_1", "x2_1", "payoff1", "payoff2",
               "robust_payoff1", "robust_payoff2", "gap"]
TABLE_CHECK_COLUMNS = ["table", "eps1", "eps2", "entry", "literal_gap", "best_gap",
                       "x1_1", "x2_1", "passed"]

# Largest denominator tried when snapping printed values to fractions
MAX_DENOMINATOR = 12


def format_number(value: float) -> str:
    """Nine significant digits; negative zero prints as 0"""
    value = float(value)
    if value == 0.0:
        value = 0.0
    return f"{value:.{PRINT_DIGITS}g}"


@dataclass
class EquilibriumRow:
    eps: Tuple[float, float]
    profile: StrategyProfile
    payoffs: List[float]
    robust_payoffs: List[float]
    support_worst_payoffs: List[float]
    gap: float
    source: str
    certificate_valid: Optional[bool] = None

    def csv_row(self) -> List[str]:
        first = self.profile.first_probabilities()
        values = [*self.eps, *first, *self.payoffs, *self.robust_payoffs, self.gap]
        return [format_number(v) for v in values]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": [s.probs.tolist() for s in self.profile],
            "payoffs": self.payoffs,
            "robust_payoffs": self.robust_payoffs,
            "support_worst_payoffs": self.support_worst_payoffs,
            "gap": self.gap,
            "source": self.source,
            "certificate_valid": self.certificate_valid,
        }


@dataclass
class GridPointResult:
    eps: Tuple[float, float]
    equilibria: List[EquilibriumRow]
    runtime_seconds: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": list(self.eps),
            "runtime_seconds": self.runtime_seconds,
            "equilibria": [row.to_dict() for row in self.equilibria],
        }


@dataclass
class TableCheck:
    """
    One published equilibrium checked against the exact gap.

    literal_gap is the gap at the printed values; best_gap the smallest gap
    found inside the rounding box of the printed digits.
    """

    table: str
    eps: Tuple[float, float]
    entry: PublishedEntry
    literal_gap: float
    best_gap: float
    best_profile: Tuple[float, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.best_gap <= self.tolerance

    def csv_row(self) -> List[str]:
        return [self.table, *(format_number(e) for e in self.eps), str(self.entry),
                format_number(self.literal_gap), format_number(self.best_gap),
                *(format_number(p) for p in self.best_profile), str(self.passed).lower()]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "table": self.table, "eps": list(self.eps), "entry": str(self.entry),
            "literal_gap": self.literal_gap, "best_gap": self.best_gap,
            "best_profile": list(self.best_profile), "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class ExperimentReport:
    params: InspectionParams
    config: SearchConfig
    points: List[GridPointResult] = field(default_factory=list)
    table_checks: List[TableCheck] = field(default_factory=list)

    def rows(self) -> List[EquilibriumRow]:
        return [row for point in self.points for row in point.equilibria]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inspection": self.params.to_dict(),
            "search": self.config.to_dict(),
            "points": [p.to_dict() for p in self.points],
            "table_checks": [c.to_dict() for c in self.table_checks],
        }


def _equilibrium_row(ambiguity: AmbiguitySet, risk: RiskProfile,
                     record: EquilibriumRecord) -> EquilibriumRow:
    mean_game = ambiguity.mean_game()
    players = range(ambiguity.shape.num_players)
    profile = record.profile
    return EquilibriumRow(
        eps=tuple(risk.eps),
        profile=profile,
        payoffs=[expected_payoff(mean_game, profile, i) for i in players],
        robust_payoffs=[-worst_case_cvar(ambiguity, risk[i], profile, i).value for i in players],
        support_worst_payoffs=[robust_payoff(ambiguity, profile, i) for i in players],
        gap=record.gap,
        source=record.source,
        certificate_valid=None if record.certificate is None else record.certificate.valid,
    )


def _validated_game(params: InspectionParams) -> AmbiguitySet:
    ambiguity, _ = build_inspection_game(params)
    report = validate(ambiguity)
    if not report.passed:
        failure = report.failures[0]
        raise AmbiguitySetError(f"Inspection game ambiguity set is invalid: {failure.message}",
                                details=report.to_dict())
    return ambiguity


def run_experiment(params: InspectionParams, grid: Sequence[Tuple[float, float]],
                   config: Optional[SearchConfig] = None,
                   check_tables: bool = False) -> ExperimentReport:
    """
    Equilibria of the inspection game at every risk pair of the grid.

    Args:
        params: Inspection game parameters (held fixed)
        grid: (eps1, eps2) pairs, processed in order
        config: Search settings
        check_tables: Also check the published equilibrium lists

    Returns:
        ExperimentReport; CSV output is deterministic for a fixed seed
    """
    config = config or SearchConfig()
    ambiguity = _validated_game(params)
    report = ExperimentReport(params, config)
    for eps in grid:
        risk = RiskProfile(tuple(eps))
        started = time.perf_counter()
        records = find_equilibria(ambiguity, risk, config)
        rows = [_equilibrium_row(ambiguity, risk, record) for record in records]
        elapsed = time.perf_counter() - started
        logger.info(f"eps={eps}: {len(rows)} equilibria in {elapsed:.2f}s")
        report.points.append(GridPointResult(tuple(float(e) for e in eps), rows, elapsed))
    if check_tables:
        report.table_checks = check_published_tables(params)
    return report


def _fractions_in(lo: float, hi: float) -> List[float]:
    found = set()
    for denominator in range(1, MAX_DENOMINATOR + 1):
        for numerator in range(denominator + 1):
            value = Fraction(numerator, denominator)
            if lo - 1e-12 <= value <= hi + 1e-12:
                found.add(value)
    return [float(v) for v in sorted(found)]


def _snap_entry(evaluator: GapEvaluator, entry: PublishedEntry) -> Tuple[float, float, Tuple[float, float]]:
    """(literal gap, best gap, best point) for one printed equilibrium"""
    def gap_at(point) -> float:
        return evaluator.total(StrategyProfile.from_first_probabilities(point))

    values = entry.values
    box = [(max(0.0, v - w), min(1.0, v + w)) for v, w in zip(values, entry.half_widths)]
    literal = gap_at(values)
    best, best_point = literal, tuple(values)
    for point in itertools.product(*(_fractions_in(lo, hi) for lo, hi in box)):
        value = gap_at(point)
        if value < best:
            best, best_point = value, tuple(point)

    step = max(hi - lo for lo, hi in box) / 4.0
    directions = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]
    polls = 0
    while best > 1e-9 and step > 1e-9 and polls < 400:
        improved = False
        for direction in directions:
            point = tuple(min(max(p + step * d, lo), hi)
                          for p, d, (lo, hi) in zip(best_point, direction, box))
            if point == best_point:
                continue
            polls += 1
            value = gap_at(point)
            if value < best:
                best, best_point, improved = value, point, True
                break
        if not improved:
            step *= 0.5
    return literal, best, best_point


def check_published_tables(params: Optional[InspectionParams] = None,
                       tables: Optional[Iterable[str]] = None,
                       risk_pairs: Optional[Iterable[Tuple[float, float]]] = None,
                       tol: float = Tolerances.PUBLISHED_GAP) -> List[TableCheck]:
    """
    Check published equilibria of the inspection game entry by entry.

    Failures are logged and reported, never raised.

    Args:
        params: Game parameters (defaults match the published setting)
        tables: Names from PublishedTables.get_all() (default: all)
        risk_pairs: Restrict to these (eps1, eps2) pairs
        tol: Gap accepted as a pass
    """
    ambiguity = _validated_game(params or InspectionParams())
    selected = PublishedTables.get_all()
    names = list(tables) if tables is not None else list(selected)
    wanted = None if risk_pairs is None else {tuple(map(float, p)) for p in risk_pairs}
    checks = []
    for name in names:
        table = selected[name]
        for eps, entries in table.items():
            if wanted is not None and eps not in wanted:
                continue
            evaluator = GapEvaluator(ambiguity, RiskProfile(eps))
            checks.extend(check_published_entry(evaluator, name, entry, tol) for entry in entries)
    return checks


def check_published_entry(evaluator: GapEvaluator, table: str, entry: PublishedEntry,
                          tol: float = Tolerances.PUBLISHED_GAP) -> TableCheck:
    """Gap of one printed equilibrium, literal and snapped to its rounding box"""
    literal, best, point = _snap_entry(evaluator, entry)
    check = TableCheck(table, tuple(evaluator.risk.eps), entry, literal, best, point, tol)
    if not check.passed:
        logger.warning(f"{table} eps={check.eps} entry {entry}: best gap {best:.3g} > {tol:g}")
    return check


def _open_for_write(target: Union[str, Path, IO[str]]):
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", newline=""), True


def write_csv(report: ExperimentReport, target: Union[str, Path, IO[str]]) -> None:
    """One row per equilibrium; no timestamps so reruns are byte-identical"""
    handle, owned = _open_for_write(target)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows():
            writer.writerow(row.csv_row())
    finally:
        if owned:
            handle.close()


def write_table_checks_csv(checks: List[TableCheck], target: Union[str, Path, IO[str]]) -> None:
    handle, owned = _open_for_write(target)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TABLE_CHECK_COLUMNS)
        for check in checks:
            writer.writerow(check.csv_row())
    finally:
        if owned:
            handle.close()


def write_json(report: ExperimentReport, target: Union[str, Path, IO[str]]) -> None:
    handle, owned = _open_for_write(target)
    try:
        json.dump(report.to_dict(), handle, indent=2)
        handle.write("\n")
    finally:
        if owned:
            handle.close()


def write_outputs(report: ExperimentReport, out_dir: Union[str, Path]) -> List[Path]:
    """Write equilibria.csv, report.json and (if present) table_checks.csv"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "equilibria.csv", out_dir / "report.json"]
    write_csv(report, written[0])
    write_json(report, written[1])
    if report.table_checks:
        written.append(out_dir / "table_checks.csv")
        write_table_checks_csv(report.table_checks, written[-1])
    return written
