import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, NumericError
from .jets import Jet3, coordinate_jets, einsum, inv, jet_apply
from .tensors import DOWN, UP, PointTensor
from .utils import Residual, combine, residual

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray, int], Jet3]


@dataclass(frozen=True)
class MetricField:
    """
    A metric given by an evaluator returning the jet of its coordinate components.

    Attributes:
    ----------
    dim: int - Chart dimension d
    signature: Tuple[int, int] - Expected numbers of positive and negative eigenvalues
    evaluate: Callable[[np.ndarray, int], Jet3] - point, order -> jet of shape (d, d)
    name: str - A label used in logs and reports
    """

    dim: int
    signature: Tuple[int, int]
    evaluate: Callable[[np.ndarray, int], Jet3]
    name: str = "metric"

    @classmethod
    def from_coordinates(
        cls,
        dim: int,
        signature: Tuple[int, int],
        builder: Callable[[List[Jet3]], Jet3],
        name: str = "metric",
    ) -> "MetricField":
        """
        Wrap a builder that maps the coordinate jets to the metric jet.
        """

        def evaluate(point: np.ndarray, order: int) -> Jet3:
            return builder(coordinate_jets(point, order))

        return cls(dim, signature, evaluate, name)

    def at(self, point: Sequence[float], order: int) -> Jet3:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ArgumentError(f"{self.name}: point of shape {point.shape} on a {self.dim}-chart")
        jet = self.evaluate(point, order)
        if jet.shape != (self.dim, self.dim):
            raise ArgumentError(f"{self.name}: metric jet of shape {jet.shape}")
        if jet.order < order:
            raise ArgumentError(f"{self.name}: jet order insufficient ({jet.order} < {order})")
        if np.iscomplexobj(jet.value):
            imaginary = float(np.max(np.abs(np.imag(jet.value))))
            if imaginary > 1e-10 * (1 + float(np.max(np.abs(jet.value)))):
                raise NumericError(f"{self.name}: metric is not real", imaginary)
            jet = jet.real
        asym = float(np.max(np.abs(jet.value - jet.value.T)))
        if asym > 1e-12 * (1 + float(np.max(np.abs(jet.value)))):
            raise NumericError(f"{self.name}: metric is not symmetric", asym)
        return jet

    def signature_at(self, point: Sequence[float]) -> Tuple[int, int]:
        eigenvalues = np.linalg.eigvalsh(self.at(point, 0).value)
        return int(np.sum(eigenvalues > 0)), int(np.sum(eigenvalues < 0))


@dataclass(frozen=True)
class CurvaturePack:
    """
    Curvature of a metric at a point, in coordinate components.

    Index conventions: ``christoffel[c, a, b] = Γ^c_{ab}``;
    ``riemann[a, b, c, d] = R_{ab}{}^c{}_d`` with 2∇_[a∇_b]V^c = R_{ab}{}^c{}_d V^d;
    ``ricci[b, d] = R_{ab}{}^a{}_d``; ``weyl[a, b, c, d]`` all indices down;
    ``cotton[a, b, c] = ∇_b P_{ca} − ∇_c P_{ba}``.
    """

    metric: np.ndarray
    inverse: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    schouten: Optional[np.ndarray]
    rho: Optional[float]
    weyl: Optional[np.ndarray]
    cotton: Optional[np.ndarray]
    jets: Dict[str, Jet3] = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def riemann_lowered(self) -> np.ndarray:
        return np.einsum("ce,abed->abcd", self.metric, self.riemann)


def christoffel_jets(metric: Jet3) -> Tuple[Jet3, Jet3]:
    """
    Inverse metric and Christoffel symbols Γ^c_{ab} as jets, one order below the metric.
    """
    det = float(np.linalg.det(metric.value))
    if abs(det) < 1e-300:
        raise NumericError(f"singular metric (det={det:.3e})", det)
    inverse = inv(metric)
    dg = metric.d()
    lowered = 0.5 * (dg + einsum("eba->eab", dg) - einsum("abe->eab", dg))
    christoffel = einsum("ce,eab->cab", inverse.truncate(dg.order), lowered)
    return inverse, christoffel


def riemann_jet(christoffel: Jet3) -> Jet3:
    d_gamma = christoffel.d()
    gamma = christoffel.truncate(d_gamma.order)
    return (
        einsum("cbda->abcd", d_gamma)
        - einsum("cadb->abcd", d_gamma)
        + einsum("cae,ebd->abcd", gamma, gamma)
        - einsum("cbe,ead->abcd", gamma, gamma)
    )


def covariant_derivative_jet(
    tensor: Jet3, valence: Sequence[str], christoffel: Jet3
) -> Jet3:
    """
    Levi-Civita derivative of a tensor jet; the derivative slot comes first.

    Parameters
    ----------
    tensor : Jet3 - Jet of the tensor, leading axes are its slots.
    valence : Sequence[str] - "u" or "d" per slot.
    christoffel : Jet3 - Γ^c_{ab} as a jet.

    Returns
    -------
    Jet3 - (∇T)[e, ...] = ∇_e T_..., one order lower than the tensor.
    """

    if len(valence) != len(tensor.shape):
        raise ArgumentError(f"valence {tuple(valence)} for tensor shape {tensor.shape}")
    if tensor.order < 1:
        raise ArgumentError("jet order insufficient for a covariant derivative")
    letters = "abcdefgh"[: len(valence)]
    out = "z" + letters
    result = einsum(f"{letters}z->{out}", tensor.d())
    gamma = christoffel.truncate(min(christoffel.order, result.order))
    body = tensor.truncate(min(tensor.order, result.order))
    for slot, variance in enumerate(valence):
        moved = letters[:slot] + "y" + letters[slot + 1 :]
        if variance == UP:
            result = result + einsum(f"{letters[slot]}zy,{moved}->{out}", gamma, body)
        else:
            result = result - einsum(f"yz{letters[slot]},{moved}->{out}", gamma, body)
    return result


def curvature_jets(metric: Jet3) -> Dict[str, Jet3]:
    """
    All curvature tensors of a metric jet as jets (order drops by 2, Cotton by 3).
    """
    dim = metric.shape[0]
    if metric.order < 2:
        raise ArgumentError("jet order insufficient: curvature needs order 2")
    inverse, christoffel = christoffel_jets(metric)
    riemann = riemann_jet(christoffel)
    ricci = einsum("abad->bd", riemann)
    order = riemann.order
    g = metric.truncate(order)
    gi = inverse.truncate(order)
    scalar = einsum("bd,bd->", gi, ricci)
    jets = {
        "metric": metric,
        "inverse": inverse,
        "christoffel": christoffel,
        "riemann": riemann,
        "ricci": ricci,
        "scalar": scalar,
    }
    if dim < 3:
        return jets
    n = dim - 2
    schouten = (ricci - scalar * g * (1.0 / (2 * (n + 1)))) * (1.0 / n)
    lowered = einsum("ce,abed->abcd", g, riemann)
    kulkarni = (
        einsum("ac,bd->abcd", g, schouten)
        - einsum("ad,bc->abcd", g, schouten)
        - einsum("bc,ad->abcd", g, schouten)
        + einsum("bd,ac->abcd", g, schouten)
    )
    jets["schouten"] = schouten
    jets["rho"] = einsum("ab,ab->", gi, schouten)
    jets["weyl"] = lowered - kulkarni
    if order >= 1:
        nabla_p = covariant_derivative_jet(schouten, (DOWN, DOWN), christoffel)
        jets["cotton"] = einsum("bca->abc", nabla_p) - einsum("cba->abc", nabla_p)
    return jets


def curvature_pack(g: MetricField, pt: Sequence[float], order: int = 2) -> CurvaturePack:
    """
    Christoffel symbols, Riemann, Ricci, scalar, Schouten, Weyl and (order 3) Cotton
    tensors of a metric field at a point.

    Parameters
    ----------
    g : MetricField - The metric.
    pt : Sequence[float] - The chart point.
    order : int - 2, or 3 to include the Cotton tensor.

    Returns
    -------
    CurvaturePack - The curvature at pt.
    """

    if order not in (2, 3):
        raise ArgumentError(f"curvature order must be 2 or 3, got {order}")
    jets = curvature_jets(g.at(pt, order))
    schouten = jets.get("schouten")
    logger.debug("curvature of %s at %s: Sc=%.6e", g.name, list(pt), float(jets["scalar"].value))
    return CurvaturePack(
        metric=jets["metric"].value,
        inverse=jets["inverse"].value,
        christoffel=jets["christoffel"].value,
        riemann=jets["riemann"].value,
        ricci=jets["ricci"].value,
        scalar=float(jets["scalar"].value),
        schouten=None if schouten is None else schouten.value,
        rho=None if schouten is None else float(jets["rho"].value),
        weyl=jets["weyl"].value if "weyl" in jets else None,
        cotton=jets["cotton"].value if "cotton" in jets else None,
        jets=jets,
    )


def covariant_derivative(
    t_field: Callable[[np.ndarray, int], Jet3],
    valence: Sequence[str],
    g: MetricField,
    pt: Sequence[float],
) -> PointTensor:
    """
    Levi-Civita derivative of a tensor field at a point; derivative slot first.
    """
    pt = np.asarray(pt, dtype=float)
    tensor = t_field(pt, 1)
    if tensor.order < 1:
        raise ArgumentError("insufficient jets: the tensor field must supply order 1")
    _, christoffel = christoffel_jets(g.at(pt, 1))
    nabla = covariant_derivative_jet(tensor, valence, christoffel)
    return PointTensor(nabla.value, (DOWN,) + tuple(valence))


def conformal_rescale(g: MetricField, phi_field: ScalarField) -> MetricField:
    """
    The metric e^{2φ} g, with jets composed through the exponential.
    """

    def evaluate(point: np.ndarray, order: int) -> Jet3:
        factor = jet_apply("exp", 2.0 * phi_field(point, order))
        return g.evaluate(point, order) * factor

    return MetricField(g.dim, g.signature, evaluate, f"rescaled {g.name}")


def transform_law_residuals(
    g: MetricField, phi_field: ScalarField, pt: Sequence[float]
) -> Dict[str, Residual]:
    """
    Residuals of the conformal transformation laws of the Levi-Civita connection
    (on the coordinate basis 1-forms, weight 0) and of the Schouten tensor.
    """
    pt = np.asarray(pt, dtype=float)
    hat = conformal_rescale(g, phi_field)
    base = curvature_pack(g, pt)
    rescaled = curvature_pack(hat, pt)
    phi = phi_field(pt, 2)
    upsilon = phi.grad
    upsilon_up = base.inverse @ upsilon
    dim = g.dim

    connection = []
    for j in range(dim):
        alpha = np.zeros(dim)
        alpha[j] = 1.0
        nabla = -base.christoffel[j]
        nabla_hat = -rescaled.christoffel[j]
        expected = (
            nabla
            - np.outer(upsilon, alpha)
            - np.outer(alpha, upsilon)
            + (upsilon_up @ alpha) * base.metric
        )
        connection.append(residual(nabla_hat, expected))

    nabla_upsilon = phi.hess - np.einsum("cab,c->ab", base.christoffel, upsilon)
    expected_p = (
        base.schouten
        - nabla_upsilon
        + np.outer(upsilon, upsilon)
        - 0.5 * (upsilon_up @ upsilon) * base.metric
    )
    return {
        "connection_residual": combine(connection),
        "schouten_residual": residual(rescaled.schouten, expected_p),
    }


def weyl_mixed(pack: CurvaturePack) -> np.ndarray:
    """
    W_{ab}{}^c{}_d, the conformally invariant position.
    """
    return np.einsum("ce,abed->abcd", pack.inverse, pack.weyl)


def weyl_trace_residual(pack: CurvaturePack) -> Residual:
    traces = [
        np.einsum("ac,abcd->bd", pack.inverse, pack.weyl),
        np.einsum("ad,abcd->bc", pack.inverse, pack.weyl),
        np.einsum("bc,abcd->ad", pack.inverse, pack.weyl),
        np.einsum("bd,abcd->ac", pack.inverse, pack.weyl),
    ]
    worst = max(float(np.max(np.abs(t))) for t in traces)
    return Residual(worst, float(np.max(np.abs(pack.weyl))))


def first_bianchi_residual(pack: CurvaturePack) -> Residual:
    r = pack.riemann
    cyclic = r + np.einsum("bdca->abcd", r) + np.einsum("dacb->abcd", r)
    return Residual(float(np.max(np.abs(cyclic))), float(np.max(np.abs(r))))


def second_bianchi_residual(pack: CurvaturePack) -> Residual:
    """
    Cyclic sum ∇_e R_{ab}{}^c{}_d over (e, a, b); needs an order-3 pack.
    """
    riemann = pack.jets["riemann"]
    if riemann.order < 1:
        raise ArgumentError("jet order insufficient: second Bianchi needs order 3")
    nabla = covariant_derivative_jet(
        riemann, (DOWN, DOWN, UP, DOWN), pack.jets["christoffel"]
    ).value
    cyclic = (
        nabla
        + np.einsum("abecd->eabcd", nabla)
        + np.einsum("beacd->eabcd", nabla)
    )
    return Residual(float(np.max(np.abs(cyclic))), float(np.max(np.abs(nabla))))


def commutator_residual(
    g: MetricField, vector_field: Callable[[np.ndarray, int], Jet3], pt: Sequence[float]
) -> Residual:
    """
    Residual of 2∇_[a∇_b]V^c = R_{ab}{}^c{}_d V^d for a vector field V.
    """
    pt = np.asarray(pt, dtype=float)
    jets = curvature_jets(g.at(pt, 2))
    christoffel = jets["christoffel"]
    v = vector_field(pt, 2)
    first = covariant_derivative_jet(v, (UP,), christoffel)
    second = covariant_derivative_jet(first, (DOWN, UP), christoffel).value
    lhs = second - np.einsum("bac->abc", second)
    rhs = np.einsum("abcd,d->abc", jets["riemann"].value, v.value)
    return residual(lhs, rhs)


def einstein_residual(pack: CurvaturePack, cosmological: float) -> Residual:
    return residual(pack.ricci, cosmological * pack.metric)


def fefferman_scalar(g: MetricField, pt: Sequence[float], axis: int = 0) -> float:
    """
    (1/d²)(∇_a k^a)² − k^a k^b P_{ab} − (1/d) k^a ∇_a ∇_b k^b for the coordinate
    vector field k = ∂_axis on a d-dimensional chart.
    """
    pt = np.asarray(pt, dtype=float)
    if not 0 <= axis < g.dim:
        raise ArgumentError(f"axis {axis} out of range for a {g.dim}-dimensional chart")
    jets = curvature_jets(g.at(pt, 2))
    metric, inverse = jets["metric"], jets["inverse"]
    divergence = einsum("ab,ba->", inverse.truncate(1), metric.partial(axis)) * 0.5
    div = float(divergence.value)
    along_k = float(divergence.partial(axis).value)
    d = g.dim
    return div * div / d**2 - float(jets["schouten"].value[axis, axis]) - along_k / d
