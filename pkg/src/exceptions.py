from src.config import settings


class QuantumPortfolioError(Exception):
    """Base class for every error the library raises on purpose."""

    exit_code: int = 1

    def __init__(
        self,
        message: str = "An unexpected error occurred",
        error_code: str = "INTERNAL_ERROR",
        debug: str | None = None,
    ):
        self.message = message
        self.error_code = error_code
        self.debug = debug
        super().__init__(message)

    @property
    def detail(self) -> dict[str, str]:
        detail = {"message": self.message, "error_code": self.error_code}
        if self.debug and settings.is_development:
            detail["debug"] = self.debug
        return detail


class InputError(QuantumPortfolioError):
    exit_code = 3

    def __init__(
        self,
        message: str = "Invalid input",
        error_code: str = "INVALID_INPUT",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class DimacsFormatError(InputError):
    def __init__(
        self,
        message: str = "Malformed DIMACS CNF input",
        error_code: str = "DIMACS_FORMAT",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class DimensionMismatchError(InputError):
    def __init__(
        self,
        message: str = "State and operator dimensions do not match",
        error_code: str = "DIMENSION_MISMATCH",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class QubitLimitExceeded(InputError):
    def __init__(
        self,
        message: str = "Qubit count exceeds the configured memory guard",
        error_code: str = "QUBIT_LIMIT",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class EnumerationLimitExceeded(InputError):
    def __init__(
        self,
        message: str = "Instance too large for brute-force enumeration",
        error_code: str = "ENUMERATION_LIMIT",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class RegimeError(InputError):
    def __init__(
        self,
        message: str = "Parameters fall outside the formula's regime",
        error_code: str = "REGIME_VIOLATED",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class InvalidWeightsError(InputError):
    def __init__(
        self,
        message: str = "Portfolio weights are not a unit vector",
        error_code: str = "INVALID_WEIGHTS",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class InfeasibleError(QuantumPortfolioError):
    exit_code = 4

    def __init__(
        self,
        message: str = "The requested computation is infeasible",
        error_code: str = "INFEASIBLE",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class DegenerateStrategyError(InfeasibleError):
    def __init__(
        self,
        message: str = "Success probability is below the configured floor",
        error_code: str = "DEGENERATE_STRATEGY",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class UnsolvableInstanceError(InfeasibleError):
    def __init__(
        self,
        message: str = "Instance has no satisfying assignment",
        error_code: str = "UNSOLVABLE_INSTANCE",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)


class EquivalenceViolation(InfeasibleError):
    def __init__(
        self,
        message: str = "Quantum portfolio probability differs from the weighted sum",
        error_code: str = "EQUIVALENCE_VIOLATED",
        debug: str | None = None,
    ):
        super().__init__(message=message, error_code=error_code, debug=debug)
