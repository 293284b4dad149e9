from typing import Any, Optional, Sequence


class NullcongError(Exception):
    """
    Base class of all errors raised by the package.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ArgumentError(NullcongError):
    """
    An argument (or the data behind it) violates an operation's precondition.
    """


class EvaluationError(NullcongError):
    """
    A field could not be evaluated at a point.
    """

    def __init__(self, message: str, point: Optional[Sequence[float]] = None) -> None:
        """
        Parameters
        ----------
        message : str - What went wrong.
        point : Sequence[float], optional - The chart point of the failed evaluation.
        """
        if point is not None:
            message = f"{message} at point {[float(x) for x in point]}"
        super().__init__(message)
        self.point = None if point is None else [float(x) for x in point]


class NumericError(NullcongError):
    """
    A numerical operation is singular or too ill-conditioned to be meaningful.
    """

    def __init__(self, message: str, value: Any = None) -> None:
        super().__init__(message)
        self.value = value


class StructureError(NullcongError):
    """
    The structure equations of a CR base cannot be solved consistently.
    """

    def __init__(self, message: str, coefficient: str, residual: float) -> None:
        super().__init__(f"{message}: {coefficient} off by {residual:.3e}")
        self.coefficient = coefficient
        self.residual = residual


class PreconditionError(NullcongError):
    """
    The hypotheses of a check do not hold at the evaluated point.
    """

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
