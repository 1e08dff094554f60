"""
drgames

Finite N-player games with risk-averse players facing ambiguous payoffs:
worst-case CVaR over a moment ambiguity set, best responses, equilibrium
search and certificates, and the inspection game experiments.
"""

from .game_model import (
    GameShape,
    PayoffTensor,
    MixedStrategy,
    StrategyProfile,
    vec,
    unvec,
    expected_payoff,
)
from .ambiguity import (
    PolyhedralSupport,
    AmbiguitySet,
    AffineBoxUncertainty,
    DiscreteDistribution,
    ValidationReport,
    build_support_from_box,
    validate,
    is_member,
)
from .lp_core import LinearProgram, LpSolution, solve_lp, dual_program
from .risk import (
    RiskProfile,
    WorstCaseCvarResult,
    worst_case_cvar,
    worst_case_cvar_lower_bound,
    robust_payoff,
)
from .equilibrium import best_response, equilibrium_gap, verify_equilibrium
from .certificate import EquilibriumCertificate, build_certificate
from .nash import BimatrixGame, nash_support_enumeration, special_case_reduction, bayesian_game
from .search import SearchConfig, EquilibriumRecord, find_equilibria
from .inspection import InspectionParams, PublishedTables, build_inspection_game
from .experiment import ExperimentReport, run_experiment, check_published_tables
from .gamefile import GameFile, ExperimentSpec
from .constants import Tolerances, LpStatus, Reductions
from .exceptions import (
    DrgamesError,
    InvalidGameError,
    InvalidStrategyError,
    AmbiguitySetError,
    LpSolveError,
    EnumerationLimitError,
    GameFileError,
)

__version__ = "0.1.0"
__all__ = [
    "GameShape",
    "PayoffTensor",
    "MixedStrategy",
    "StrategyProfile",
    "vec",
    "unvec",
    "expected_payoff",
    "PolyhedralSupport",
    "AmbiguitySet",
    "AffineBoxUncertainty",
    "DiscreteDistribution",
    "ValidationReport",
    "build_support_from_box",
    "validate",
    "is_member",
    "LinearProgram",
    "LpSolution",
    "solve_lp",
    "dual_program",
    "RiskProfile",
    "WorstCaseCvarResult",
    "worst_case_cvar",
    "worst_case_cvar_lower_bound",
    "robust_payoff",
    "best_response",
    "equilibrium_gap",
    "verify_equilibrium",
    "EquilibriumCertificate",
    "build_certificate",
    "BimatrixGame",
    "nash_support_enumeration",
    "special_case_reduction",
    "bayesian_game",
    "SearchConfig",
    "EquilibriumRecord",
    "find_equilibria",
    "InspectionParams",
    "PublishedTables",
    "build_inspection_game",
    "ExperimentReport",
    "run_experiment",
    "check_published_tables",
    "GameFile",
    "ExperimentSpec",
    "Tolerances",
    "LpStatus",
    "Reductions",
    "DrgamesError",
    "InvalidGameError",
    "InvalidStrategyError",
    "AmbiguitySetError",
    "LpSolveError",
    "EnumerationLimitError",
    "GameFileError",
]
