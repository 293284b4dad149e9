from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

SCALE_FLOOR = 1.0


def string_from_snake_to_camel_case(input: str) -> str:
    """
    Convert a string from snake_case to camelCase.

    Parameters
    ----------
    input : str - The string to convert.

    Returns
    -------
    str - The converted string.

    Examples
    --------
    >>> string_from_snake_to_camel_case("phi_margin")
    "phiMargin"
    >>> string_from_snake_to_camel_case("wallMs")
    "wallMs"
    """

    if not input:
        return input
    if "_" not in input:
        return input
    s = input.split("_")
    return s[0] + "".join(i.title() for i in s[1:])


@dataclass(frozen=True)
class Residual:
    """
    Outcome of comparing two tensors.

    The relative residual divides by max(scale, SCALE_FLOOR), so identities whose
    operands both vanish at a point are judged by their absolute deviation.

    Attributes:
    ----------
    max_abs: float - Largest absolute componentwise difference
    scale: float - Largest absolute component of the compared operands
    """

    max_abs: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "max_abs", float(self.max_abs))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def max_rel(self) -> float:
        return self.max_abs / max(self.scale, SCALE_FLOOR)

    def worst(self, other: "Residual") -> "Residual":
        if other.max_rel > self.max_rel:
            return other
        return self


ArrayLike = Union[np.ndarray, float, complex]


def max_abs(x: ArrayLike) -> float:
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x)))


def residual(lhs: ArrayLike, rhs: ArrayLike = 0.0) -> Residual:
    """
    Residual of lhs = rhs, normalized by the largest operand component.
    """
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    return Residual(max_abs(lhs - rhs), max(max_abs(lhs), max_abs(rhs)))


def combine(residuals: Iterable[Residual]) -> Residual:
    """
    The worst residual of a family, by absolute deviation, keeping the largest scale.
    """
    worst_abs = 0.0
    scale = 0.0
    for r in residuals:
        worst_abs = max(worst_abs, r.max_abs)
        scale = max(scale, r.scale)
    return Residual(worst_abs, scale)
