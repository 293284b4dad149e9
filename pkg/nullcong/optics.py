import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .curvature import MetricField, christoffel_jets, covariant_derivative_jet, curvature_pack
from .errors import ArgumentError, PreconditionError
from .jets import Jet3, constant, einsum, jet_apply, lift_coordinate
from .robinson import ELL, SpacetimeModel, bce_coefficients, frame_blocks
from .tensors import DOWN
from .utils import Residual, max_abs

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray, int], Jet3]

NULL_TOLERANCE = 1e-10


def coordinate_vector(dim: int, axis: int = 0) -> VectorField:
    """
    The coordinate vector field ∂_axis on a dim-dimensional chart.
    """
    if not 0 <= axis < dim:
        raise ArgumentError(f"axis {axis} out of range for a {dim}-dimensional chart")
    components = np.zeros(dim)
    components[axis] = 1.0

    def field(pt: np.ndarray, order: int) -> Jet3:
        return constant(components, pt, order)

    return field


def frame_vector(model: SpacetimeModel, slot: int) -> VectorField:
    """
    A real frame vector of a spacetime model (ℓ for ELL, k for the last slot).
    """

    def field(pt: np.ndarray, order: int) -> Jet3:
        frame = model.frame(pt, order)
        return einsum("ab->ba", frame)[slot].real

    return field


@dataclass(frozen=True)
class OpticalData:
    """
    A null vector k at a point with its optical 1-form, a dual null vector and
    the screen H_{K,L} = K⊥ ∩ L⊥.

    Attributes:
    ----------
    point: np.ndarray - The chart point
    metric: np.ndarray - g at the point
    vector: np.ndarray - k^a
    form: np.ndarray - κ_a = g_{ab}k^b
    dual: np.ndarray - ℓ^a with g(ℓ, ℓ) = 0 and κ(ℓ) = 1
    screen: np.ndarray - Real basis of the screen as columns, shape (d, d − 2)
    screen_metric: np.ndarray - h_{ij} = g(v_i, v_j) on the screen basis
    """

    point: np.ndarray
    metric: np.ndarray
    vector: np.ndarray
    form: np.ndarray
    dual: np.ndarray
    screen: np.ndarray
    screen_metric: np.ndarray

    @property
    def rank(self) -> int:
        return self.screen.shape[1]


def _transversal(metric: np.ndarray, vector: np.ndarray, form: np.ndarray) -> np.ndarray:
    axis = int(np.argmax(np.abs(form)))
    u = np.zeros_like(vector)
    u[axis] = 1.0
    pairing = form[axis]
    return u / pairing - 0.5 * metric[axis, axis] / pairing**2 * vector


def optical_data(
    g: MetricField,
    pt: Sequence[float],
    vector: Optional[VectorField] = None,
    dual: Optional[VectorField] = None,
) -> OpticalData:
    """
    Optical data of a null vector field at a point.

    Parameters
    ----------
    g : MetricField - The metric.
    pt : Sequence[float] - The chart point.
    vector : VectorField, optional - The optical vector field, ∂/∂x⁰ by default.
    dual : VectorField, optional - A null vector field transverse to k; one is
        built from the coordinate basis when omitted.

    Returns
    -------
    OpticalData - The data at pt.
    """

    pt = np.asarray(pt, dtype=float)
    vector = vector or coordinate_vector(g.dim)
    metric = g.at(pt, 0).value
    k = np.real(vector(pt, 0).value)
    form = metric @ k
    norm = float(abs(k @ form))
    if norm > NULL_TOLERANCE * (1.0 + max_abs(metric)) * (1.0 + float(k @ k)):
        raise PreconditionError(f"{g.name}: k is not null at {list(pt)}", norm)
    if max_abs(form) == 0.0:
        raise ArgumentError(f"{g.name}: the optical vector vanishes at {list(pt)}")
    if dual is None:
        ell = _transversal(metric, k, form)
    else:
        ell = np.real(dual(pt, 0).value)
        pairing = float(form @ ell)
        if pairing == 0.0:
            raise ArgumentError(f"{g.name}: dual vector orthogonal to k at {list(pt)}")
        ell = ell / pairing
    _, _, vh = np.linalg.svd(np.stack([form, metric @ ell]))
    screen = vh[2:].T
    return OpticalData(pt, metric, k, form, ell, screen, screen.T @ metric @ screen)


@dataclass(frozen=True)
class CongruenceInvariants:
    """
    Twist, shear and expansion of a null congruence at a point.

    Attributes:
    ----------
    data: OpticalData - The optical data
    twist: np.ndarray - τ_{ij} = dκ(v_i, v_j)
    shear: np.ndarray - σ_{ij}, trace-free part of ½ £_k g on the screen
    expansion: float - ε with εκ = κ div k − ∇_k κ
    geodesy: float - max |£_k κ(v)| over v in K⊥
    nabla_form: np.ndarray - ∇_b κ_a, derivative slot first
    """

    data: OpticalData
    twist: np.ndarray
    shear: np.ndarray
    expansion: float
    geodesy: float
    nabla_form: np.ndarray

    @property
    def screen_metric(self) -> np.ndarray:
        return self.data.screen_metric


def congruence_invariants(
    g: MetricField,
    pt: Sequence[float],
    vector: Optional[VectorField] = None,
    dual: Optional[VectorField] = None,
) -> CongruenceInvariants:
    """
    Twist, shear, expansion and geodesy residual of the congruence generated by
    a null vector field.

    Parameters
    ----------
    g : MetricField - The metric.
    pt : Sequence[float] - The chart point.
    vector : VectorField, optional - The optical vector field, ∂/∂x⁰ by default.
    dual : VectorField, optional - A transverse null vector field.

    Returns
    -------
    CongruenceInvariants - The invariants at pt.
    """

    pt = np.asarray(pt, dtype=float)
    vector = vector or coordinate_vector(g.dim)
    data = optical_data(g, pt, vector, dual)
    jet = g.at(pt, 1)
    _, christoffel = christoffel_jets(jet)
    k_jet = vector(pt, 1).real
    kappa = einsum("ab,b->a", jet, k_jet)
    nabla_form = covariant_derivative_jet(kappa, (DOWN,), christoffel).value

    metric, k, form = data.metric, data.vector, data.form
    dk = k_jet.d().value
    dg = jet.d().value
    d_form = kappa.d().value
    lie_g = np.einsum("abc,c->ab", dg, k) + metric @ dk + (metric @ dk).T
    lie_form = d_form @ k + dk.T @ form
    d_kappa = d_form.T - d_form

    v = data.screen
    h = data.screen_metric
    n = data.rank
    twist = v.T @ d_kappa @ v
    half_lie = 0.5 * v.T @ lie_g @ v
    shear = half_lie - np.trace(np.linalg.solve(h, half_lie)) / n * h
    divergence = float(np.trace(dk) + np.einsum("aab,b->", christoffel.value, k))
    expansion = divergence - float(data.dual @ (k @ nabla_form))
    perp = np.column_stack([v, k])
    geodesy = max_abs(lie_form @ perp)
    logger.debug(
        "congruence of %s at %s: ε=%.3e, |σ|=%.3e, geodesy %.3e",
        g.name, list(pt), expansion, max_abs(shear), geodesy,
    )
    return CongruenceInvariants(data, twist, shear, expansion, geodesy, nabla_form)


def twist_complex_structure_residual(invariants: CongruenceInvariants) -> float:
    """
    max |τ_{ik}τ^k_j + (1/n) τ_{kl}τ^{kl} h_{ij}| on the screen of rank n.
    """
    tau = invariants.twist
    h = invariants.screen_metric
    h_inv = np.linalg.inv(h)
    square = tau @ h_inv @ tau
    norm = float(np.einsum("kl,ka,lb,ab->", tau, h_inv, h_inv, tau))
    return max_abs(square + norm / h.shape[0] * h)


def _antisymmetrize(t: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    a, b = axes
    return 0.5 * (t - np.swapaxes(t, a, b))


def weyl_twist_identity_residual(
    g: MetricField,
    pt: Sequence[float],
    vector: Optional[VectorField] = None,
    tolerance: float = 1e-8,
) -> Residual:
    """
    Residual of

        4 κ_[a W_b]ef[c κ_d] k^e k^f = τ_{abe}τ^e_{cd} + (4/n) τ_[a^{ef} g_b][c τ_d]ef

    with τ_{abc} = 3κ_[a ∇_b κ_c], for a non-expanding, non-shearing congruence
    of affinely parametrised null geodesics.
    """
    pt = np.asarray(pt, dtype=float)
    invariants = congruence_invariants(g, pt, vector)
    precondition = max(
        invariants.geodesy,
        max_abs(invariants.shear),
        abs(invariants.expansion),
        max_abs(invariants.data.vector @ invariants.nabla_form),
    )
    if precondition > tolerance * (1.0 + max_abs(invariants.data.metric)):
        raise PreconditionError(
            f"{g.name}: congruence is not a non-expanding non-shearing affine geodesic one",
            precondition,
        )
    pack = curvature_pack(g, pt)
    k, kappa = invariants.data.vector, invariants.data.form
    nabla = invariants.nabla_form
    n = g.dim - 2

    t = np.einsum("a,bc->abc", kappa, nabla)
    tau = 0.5 * (
        t
        - np.einsum("acb->abc", t)
        + np.einsum("bca->abc", t)
        - np.einsum("bac->abc", t)
        + np.einsum("cab->abc", t)
        - np.einsum("cba->abc", t)
    )
    tau_up = np.einsum("ef,fcd->ecd", pack.inverse, tau)
    tau_up2 = np.einsum("ae,bf,cef->cab", pack.inverse, pack.inverse, tau)
    mixed = np.einsum("aef,bc,def->abcd", tau_up2, pack.metric, tau)
    rhs = np.einsum("abe,ecd->abcd", tau, tau_up) + 4.0 / n * _antisymmetrize(
        _antisymmetrize(mixed, (0, 1)), (2, 3)
    )

    contracted = np.einsum("befc,e,f->bc", pack.weyl, k, k)
    lhs = 4.0 * _antisymmetrize(
        _antisymmetrize(np.einsum("a,bc,d->abcd", kappa, contracted, kappa), (0, 1)), (2, 3)
    )
    result = Residual(max_abs(lhs - rhs), max(max_abs(lhs), max_abs(rhs)))
    logger.debug("Weyl–twist identity of %s at %s: %.3e", g.name, list(pt), result.max_abs)
    return result


def _antisymmetrize3(t: np.ndarray) -> np.ndarray:
    return (
        t
        - np.einsum("acb...->abc...", t)
        + np.einsum("bca...->abc...", t)
        - np.einsum("bac...->abc...", t)
        + np.einsum("cab...->abc...", t)
        - np.einsum("cba...->abc...", t)
    ) / 6.0


def weyl_degeneracy_report(
    g: MetricField,
    pt: Sequence[float],
    vector: Optional[VectorField] = None,
) -> Dict[str, Residual]:
    """
    The Weyl degeneracy conditions along k, each scaled by the largest Riemann component:

        null_null   W(k, v, k, w) for screen v, w
        null_all    W(k, v, k, ·) for screen v
        repeated    k^d W_{dae[b} κ_c] k^e
        trace_free  the Levi-trace-free part of W(k, v, w, u) on the screen
        full        κ_[a W_bc]f[d κ_e] k^f
    """
    pt = np.asarray(pt, dtype=float)
    data = optical_data(g, pt, vector)
    pack = curvature_pack(g, pt)
    w = pack.weyl
    k, kappa, v, h = data.vector, data.form, data.screen, data.screen_metric
    scale = max_abs(pack.riemann_lowered)

    kk = np.einsum("abcd,a,c->bd", w, k, k)
    repeated = 0.5 * (np.einsum("ab,c->abc", kk, kappa) - np.einsum("ac,b->abc", kk, kappa))
    screen_block = np.einsum("abcd,a,bi,cj,dl->ijl", w, k, v, v, v)
    trace = np.einsum("ij,ijl->l", np.linalg.inv(h), screen_block) / (data.rank - 1)
    trace_free = screen_block - (
        np.einsum("ij,l->ijl", h, trace) - np.einsum("il,j->ijl", h, trace)
    )
    five = np.einsum("a,bcfd,f,e->abcde", kappa, w, k, kappa)
    full = _antisymmetrize3(five)
    full = 0.5 * (full - np.swapaxes(full, 3, 4))

    return {
        "null_null": Residual(max_abs(v.T @ kk @ v), scale),
        "null_all": Residual(max_abs(v.T @ kk), scale),
        "repeated": Residual(max_abs(repeated), scale),
        "trace_free": Residual(max_abs(trace_free), scale),
        "full": Residual(max_abs(full), scale),
    }


def repeated_direction_residual(model: SpacetimeModel, pt: Sequence[float]) -> Residual:
    """
    W(e_α, k, k, ℓ) of g against (1/2m)((2m − 1)Ė_α − (2m − 4)iE_α) with E_α = ½∂_φλ_α.
    """
    pt = np.asarray(pt, dtype=float)
    m = model.m
    hol, _, k = frame_blocks(m)
    co = bce_coefficients(model, pt)
    e = co.e.value
    e_dot = co.e.partial(0).value
    expected = ((2 * m - 1) * e_dot - (2 * m - 4) * 1j * e) / (2 * m)
    pack = curvature_pack(model.metric, pt)
    weyl = model.to_frame(pack.weyl, pt)
    found = weyl[hol, k, k, ELL]
    return Residual(max_abs(found - expected), max_abs(model.to_frame(pack.riemann_lowered, pt)))


def rescaled_expansion_residual(model: SpacetimeModel, pt: Sequence[float]) -> Residual:
    """
    The expansion of k for ĝ = sec²φ·g against 2m·tanφ.
    """
    pt = np.asarray(pt, dtype=float)
    invariants = congruence_invariants(model.rescaled, pt)
    expected = 2 * model.m * np.tan(pt[0])
    return Residual(abs(invariants.expansion - expected), max(abs(expected), 1.0))


def e_alpha_ode_solution(
    m: int,
    phi: Union[float, Jet3],
    e_bar: complex,
    lam_bar: complex,
) -> Union[complex, Jet3]:
    """
    λ_α(φ) solving λ̈_α − i(2m − 4)/(2m − 1)·λ̇_α = 0 with λ̇_α(0) = 2E̲_α, λ_α(0) = λ̲_α
    shifted as

        m ≠ 2:  λ_α = −2i(2m − 1)/(2m − 4)·E̲_α e^{i(2m − 4)φ/(2m − 1)} + λ̲_α
        m = 2:  λ_α = 2E̲_α φ + λ̲_α

    Parameters
    ----------
    m : int - Holomorphic rank, at least 1.
    phi : float | Jet3 - φ, or its jet.
    e_bar : complex - E̲_α.
    lam_bar : complex - λ̲_α.

    Returns
    -------
    complex | Jet3 - λ_α, a jet when phi is one.
    """

    if m < 1:
        raise ArgumentError(f"m must be at least 1, got {m}")
    if isinstance(phi, Jet3):
        if m == 2:
            return phi * (2.0 * e_bar) + lam_bar
        rate = (2 * m - 4) / (2 * m - 1)
        wave = jet_apply("exp", phi * (1j * rate))
        return wave * (-2j * e_bar / rate) + lam_bar
    phi = float(phi)
    if m == 2:
        return complex(2.0 * e_bar * phi + lam_bar)
    rate = (2 * m - 4) / (2 * m - 1)
    return complex(-2j * e_bar / rate * np.exp(1j * rate * phi) + lam_bar)


def e_alpha_ode_residual(m: int, phi: float, e_bar: complex, lam_bar: complex) -> float:
    jet = e_alpha_ode_solution(m, lift_coordinate([float(phi)], 0, 2), e_bar, lam_bar)
    rate = (2 * m - 4) / (2 * m - 1)
    return abs(complex(jet.hess[0, 0]) - 1j * rate * complex(jet.grad[0]))
