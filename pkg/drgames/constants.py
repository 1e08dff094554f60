"""
Solver Constants

Tolerances, status codes and other fixed vocabularies shared across modules.
"""


class Tolerances:
    """Numerical tolerances used throughout the package"""

    # Strategies
    SIMPLEX_SUM = 1e-12           # accepted as-is
    SIMPLEX_RENORMALIZE = 1e-9    # renormalized silently up to this drift

    # Ambiguity sets
    FEASIBILITY = 1e-9            # W·vec(P) <= h + tol, membership checks
    SINGLETON = 1e-7              # coordinate max - min of a one-point support

    # LP kernel
    LP_PRIMAL = 1e-8              # scaled primal feasibility
    LP_DUAL = 1e-8                # dual feasibility
    LP_COMPLEMENTARITY = 1e-7
    LP_GAP = 1e-7                 # relative to 1 + |objective|
    LP_PIVOT = 1e-9

    # Equilibria
    CERTIFICATE = 1e-6            # equilibrium system residuals
    GAP = 1e-6                    # synthesized games
    PUBLISHED_GAP = 5e-2              # rounded published tables
    DEDUPE_RADIUS = 1e-3

    @classmethod
    def as_dict(cls):
        """Get all tolerances as a plain mapping"""
        return {
            name: value for name, value in vars(cls).items()
            if name.isupper()
        }


class LpStatus:
    """Outcomes of an LP solve"""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL = "numerical_error"   # result failed its own certificate

    @classmethod
    def get_all(cls):
        """Get every status value"""
        return [cls.OPTIMAL, cls.INFEASIBLE, cls.UNBOUNDED,
                cls.ITERATION_LIMIT, cls.NUMERICAL]

    @classmethod
    def is_failure(cls, status):
        """Check if a status means the solver could not certify an answer"""
        return status in (cls.ITERATION_LIMIT, cls.NUMERICAL)


class Reductions:
    """Special cases where a robust game collapses to a fixed-payoff Nash game"""

    RISK_NEUTRAL = "risk_neutral"           # every eps_i = 1, payoff unvec(m)
    ZERO_DEVIATION = "zero_deviation"       # s = 0, payoff unvec(m)
    SINGLETON_SUPPORT = "singleton_support" # U = {C}, payoff C

    @classmethod
    def get_all(cls):
        """Get reductions in the order they are tried"""
        return [cls.RISK_NEUTRAL, cls.ZERO_DEVIATION, cls.SINGLETON_SUPPORT]


class OutputFormats:
    """Formats understood by the command-line interface"""

    TEXT = "text"
    JSON = "json"
    CSV = "csv"

    @classmethod
    def get_all(cls):
        """Get all output formats"""
        return [cls.TEXT, cls.JSON, cls.CSV]


# Soft limit on the number of pure joint actions of a dense payoff tensor
MAX_JOINT_ACTIONS = 10_000

# Support enumeration bound on the number of actions per player
MAX_ENUMERATION_ACTIONS = 6

# Significant digits for every number the CLI prints
PRINT_DIGITS = 9
