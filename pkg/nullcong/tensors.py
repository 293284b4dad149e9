import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import ArgumentError, NumericError
from .jets import Jet3, constant, einsum, jet_apply, stack

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e8

UP = "u"
DOWN = "d"


@dataclass(frozen=True)
class PointTensor:
    """
    Components of a tensor at one point.

    Attributes:
    ----------
    components: np.ndarray - Complex array of shape (d,) * rank
    valence: Tuple[str, ...] - Per slot "u" (contravariant) or "d" (covariant)
    """

    components: np.ndarray
    valence: Tuple[str, ...]

    def __post_init__(self) -> None:
        components = np.asarray(self.components, dtype=complex)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "valence", tuple(self.valence))
        if components.ndim != len(self.valence):
            raise ArgumentError(
                f"{components.ndim} component axes for valence {self.valence}"
            )
        if len(set(components.shape)) > 1:
            raise ArgumentError(f"non-square component array {components.shape}")
        if any(v not in (UP, DOWN) for v in self.valence):
            raise ArgumentError(f"valence entries must be 'u' or 'd': {self.valence}")

    @property
    def rank(self) -> int:
        return len(self.valence)


def contract(t: PointTensor, slot_a: int, slot_b: int) -> PointTensor:
    """
    Trace over a pair of slots of opposite variance.
    """
    if slot_a == slot_b or not (0 <= slot_a < t.rank and 0 <= slot_b < t.rank):
        raise ArgumentError(f"invalid slot pair ({slot_a}, {slot_b}) for rank {t.rank}")
    if t.valence[slot_a] == t.valence[slot_b]:
        raise ArgumentError(
            f"slots {slot_a} and {slot_b} are both '{t.valence[slot_a]}'; "
            "raise or lower one of them first"
        )
    components = np.trace(t.components, axis1=slot_a, axis2=slot_b)
    valence = tuple(v for i, v in enumerate(t.valence) if i not in (slot_a, slot_b))
    return PointTensor(components, valence)


def _metric_inverse(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if abs(det) < 1e-300:
        raise NumericError(f"singular metric (det={det:.3e})", det)
    return np.linalg.inv(g)


def raise_lower(
    t: PointTensor, slot: int, g: PointTensor, direction: str
) -> PointTensor:
    """
    Raise or lower one slot with a metric.

    Parameters
    ----------
    t : PointTensor - The tensor.
    slot : int - The slot to move.
    g : PointTensor - A symmetric (0,2) metric.
    direction : str - "up" or "down".

    Returns
    -------
    PointTensor - The tensor with the slot's variance flipped.
    """

    if g.valence != (DOWN, DOWN):
        raise ArgumentError(f"metric must be a (0,2) tensor, got {g.valence}")
    if np.max(np.abs(g.components - g.components.T)) > 1e-12 * (
        1 + np.max(np.abs(g.components))
    ):
        raise ArgumentError("metric is not symmetric")
    if not 0 <= slot < t.rank:
        raise ArgumentError(f"slot {slot} out of range for rank {t.rank}")
    if direction == "down":
        if t.valence[slot] != UP:
            raise ArgumentError(f"slot {slot} is already covariant")
        matrix, flipped = g.components, DOWN
    elif direction == "up":
        if t.valence[slot] != DOWN:
            raise ArgumentError(f"slot {slot} is already contravariant")
        matrix, flipped = _metric_inverse(g.components), UP
    else:
        raise ArgumentError(f"direction must be 'up' or 'down', got {direction!r}")
    components = np.moveaxis(
        np.tensordot(matrix, t.components, axes=([1], [slot])), 0, slot
    )
    valence = t.valence[:slot] + (flipped,) + t.valence[slot + 1 :]
    return PointTensor(components, valence)


@dataclass(frozen=True)
class Coframe:
    """
    An adapted coframe at a point: row i of ``forms`` holds the coordinate
    components of the i-th 1-form, with jets of those components.

    Attributes:
    ----------
    forms: Jet3 - Jet of the (d, d) coframe matrix
    labels: Tuple[str, ...] - Frame labels, e.g. ("0", "1", "2", "1b", "2b", "0_")
    """

    forms: Jet3
    labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        if self.forms.shape != (len(self.labels), self.forms.dim):
            raise ArgumentError(
                f"coframe of shape {self.forms.shape} does not match "
                f"{len(self.labels)} labels on a {self.forms.dim}-chart"
            )

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.forms.value, dtype=complex)

    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def dual(self) -> np.ndarray:
        """
        Dual frame E[a, K]: column K holds the coordinate components of e_K.
        """
        cond = self.condition()
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            logger.debug("coframe %s rejected at condition %.3e", self.labels, cond)
            raise NumericError(f"ill-conditioned coframe (condition {cond:.3e})", cond)
        return np.linalg.inv(self.matrix)


def frame_components(t: PointTensor, cf: Coframe) -> PointTensor:
    """
    Express a coordinate tensor in the frame of a coframe: down slots are
    contracted with the dual frame, up slots with the coframe.
    """
    frame = cf.dual()
    coframe = cf.matrix
    components = t.components
    for slot, v in enumerate(t.valence):
        matrix = frame.T if v == DOWN else coframe
        components = np.moveaxis(
            np.tensordot(matrix, components, axes=([1], [slot])), 0, slot
        )
    return PointTensor(components, t.valence)


def coordinate_components(t: PointTensor, cf: Coframe) -> PointTensor:
    """
    Inverse of frame_components.
    """
    frame = cf.dual()
    coframe = cf.matrix
    components = t.components
    for slot, v in enumerate(t.valence):
        matrix = coframe.T if v == DOWN else frame
        components = np.moveaxis(
            np.tensordot(matrix, components, axes=([1], [slot])), 0, slot
        )
    return PointTensor(components, t.valence)


def to_frame(array: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """
    Frame components of an all-covariant coordinate array, frame given as E[a, K].
    """
    out = np.asarray(array)
    for slot in range(out.ndim):
        out = np.moveaxis(np.tensordot(frame.T, out, axes=([1], [slot])), 0, slot)
    return out


def exterior_derivative(form: Jet3) -> Jet3:
    """
    Exterior derivative of (a stack of) 1-form fields.

    ``(dα)_{ab} = ∂_a α_b − ∂_b α_a``, so that with the matching wedge
    ``α ∧ β = α⊗β − β⊗α`` the coefficients of dα = Σ c θ∧θ' agree with those in
    the half-normalized convention.

    Parameters
    ----------
    form : Jet3 - Jet of shape (..., d) with order >= 1.

    Returns
    -------
    Jet3 - Jet of shape (..., d, d), one order lower.
    """

    if form.order < 1:
        raise ArgumentError("exterior derivative needs first-order jets")
    if form.shape[-1:] != (form.dim,):
        raise ArgumentError(f"not a 1-form jet: shape {form.shape}")
    grad = form.d()
    return einsum("...ba->...ab", grad) - grad


def symmetrize(t: np.ndarray, slot_a: int = 0, slot_b: int = 1) -> np.ndarray:
    return 0.5 * (t + np.swapaxes(t, slot_a, slot_b))


def antisymmetrize(t: np.ndarray, slot_a: int = 0, slot_b: int = 1) -> np.ndarray:
    return 0.5 * (t - np.swapaxes(t, slot_a, slot_b))


@dataclass(frozen=True)
class LeviFormPoint:
    """
    Jet of the Levi form h_{αβ̄} at a point; h[α, β] is the coefficient of θ^α∧θ̄^β.
    """

    h: Jet3

    def __post_init__(self) -> None:
        value = np.asarray(self.h.value, dtype=complex)
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise ArgumentError(f"Levi form must be square, got shape {value.shape}")
        if np.max(np.abs(value - value.conj().T)) > 1e-10 * (1 + np.max(np.abs(value))):
            raise ArgumentError("Levi form is not Hermitian")
        for k in range(1, value.shape[0] + 1):
            minor = float(np.real(np.linalg.det(value[:k, :k])))
            if minor <= 0:
                raise ArgumentError(
                    f"Levi form is not positive definite: leading minor {k} = {minor:.3e}"
                )

    @property
    def m(self) -> int:
        return self.h.shape[0]


def cholesky(levi: LeviFormPoint) -> Jet3:
    """
    Lower-triangular jet L with h = L L^H, built entry by entry from scalar jets.
    """
    h = levi.h
    m = levi.m
    entries = [[None] * m for _ in range(m)]
    zero = h[0, 0] * 0.0
    for j in range(m):
        diag = h[j, j]
        for k in range(j):
            diag = diag - entries[j][k] * entries[j][k].conj()
        entries[j][j] = jet_apply("sqrt", diag.real)
        for i in range(j + 1, m):
            off = h[i, j]
            for k in range(j):
                off = off - entries[i][k] * entries[j][k].conj()
            entries[i][j] = off / entries[j][j]
        for i in range(j):
            entries[i][j] = zero
    rows = [_stack_row(row) for row in entries]
    return _stack_row(rows)


def _stack_row(jets: Sequence[Jet3]) -> Jet3:
    return stack([j * (1.0 + 0.0j) for j in jets])


def unitarize(rows: Jet3, levi: LeviFormPoint) -> Jet3:
    """
    Transform the θ^α rows of a coframe so that the Levi form becomes the identity.

    With h = L L^H the new rows are θ'^α = L[β, α] θ^β, i.e. L^T θ with L^T upper
    triangular; the dual frame vectors transform with the inverse (L^T)^{-1}.

    Parameters
    ----------
    rows : Jet3 - Jet of shape (m, D) with the coordinate components of θ^α.
    levi : LeviFormPoint - The Levi form of those rows.

    Returns
    -------
    Jet3 - Jet of shape (m, D) of the unitarized rows.
    """

    if rows.shape[0] != levi.m:
        raise ArgumentError(f"{rows.shape[0]} rows for a Levi form of rank {levi.m}")
    lower = cholesky(levi)
    return einsum("ba,bk->ak", lower, rows)


def constant_levi(h: np.ndarray, point: Sequence[float], order: int) -> LeviFormPoint:
    return LeviFormPoint(constant(np.asarray(h, dtype=complex), point, order))
