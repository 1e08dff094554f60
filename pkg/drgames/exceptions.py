"""
drgames Exception Classes

Error handling for the distributionally robust games toolkit.
"""


class DrgamesError(Exception):
    """Base exception for all drgames errors"""

    def __init__(self, message, error_code=None, details=None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}


class InvalidGameError(DrgamesError):
    """Raised when a game shape, payoff tensor or player index is invalid"""

    def __init__(self, message="Invalid game", details=None):
        super().__init__(message, error_code="INVALID_GAME", details=details)


class InvalidStrategyError(DrgamesError):
    """Raised when a mixed strategy is off the simplex or has the wrong length"""

    def __init__(self, message, player=None):
        super().__init__(message, error_code="INVALID_STRATEGY",
                         details={"player": player})
        self.player = player


class AmbiguitySetError(DrgamesError):
    """Raised when an ambiguity set or a candidate distribution is malformed"""

    def __init__(self, message, index=None, details=None):
        details = dict(details or {})
        if index is not None:
            details["index"] = index
        super().__init__(message, error_code="AMBIGUITY_SET", details=details)
        self.index = index


class LpSolveError(DrgamesError):
    """Raised when an LP that must be optimal is not"""

    def __init__(self, message, status=None, diagnostics=None, program=None):
        super().__init__(message, error_code="LP_FAILURE", details={
            "status": status,
            "diagnostics": diagnostics or {},
            "program": program,
        })
        self.status = status


class EnumerationLimitError(DrgamesError):
    """Raised when support enumeration is asked to handle a game it cannot"""

    def __init__(self, message, shape=None):
        super().__init__(message, error_code="ENUMERATION_LIMIT",
                         details={"shape": shape})
        self.shape = shape


class GameFileError(DrgamesError):
    """Raised when a game or experiment file cannot be read or violates the schema"""

    def __init__(self, message, path=None, field=None):
        super().__init__(message, error_code="GAME_FILE",
                         details={"path": path, "field": field})
        self.path = path
        self.field = field
