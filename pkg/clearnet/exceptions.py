class ClearnetError(Exception):
    """
    Base error
    """


class ConfigError(ClearnetError, ValueError):
    """
    Invalid parameters or experiment configuration
    """


class SamplingError(ClearnetError):
    """
    Graph sampling gave up
    """

    def __init__(self, message: str, attempts: int = 0) -> None:
        super().__init__(message)
        self.attempts = attempts


class WeightError(ClearnetError):
    """
    Zero denominator with a nonzero numerator while building weights
    """

    def __init__(self, message: str, rows: list[int] | None = None) -> None:
        super().__init__(message)
        self.rows = rows or []


class SolverError(ClearnetError):
    """
    Limit solver did not converge
    """


class ContractViolation(ClearnetError):
    """
    An internal invariant failed: a map left its box, weight rows lost
    mass or returns came out of order
    """


class OutsideHypothesesError(ClearnetError):
    """
    Closed form requested outside the hypotheses it was derived under
    """


class ZeroVarianceError(ClearnetError, ValueError):
    """
    Statistic undefined because a sample has zero variance
    """


class AllPathsFailedError(ClearnetError):
    """
    Every Monte-Carlo path failed
    """


class OverLendingWarning(UserWarning):
    """
    Group-1 risky investment clipped at zero
    """
