import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cr_base import EINSTEIN_TOLERANCE, CRBase
from .curvature import MetricField, curvature_pack, einstein_residual
from .errors import ArgumentError, EvaluationError, PreconditionError
from .jets import (
    MAX_ORDER,
    Jet3,
    concatenate,
    constant,
    coordinate_jets,
    einsum,
    embed,
    inv,
    jet_apply,
    lift_coordinate,
    stack,
)
from .tensors import DOWN, exterior_derivative
from .utils import Residual, max_abs, residual
from .webster import (
    WebsterSolution,
    connection_jet,
    cr_einstein_check,
    cr_einstein_constant,
    frame_covariant_derivative,
    webster_solve,
)

logger = logging.getLogger(__name__)

LambdaBuilder = Callable[[Sequence[Jet3]], Jet3]

PHI_MARGIN = 0.2
ELL = 0

_BASE_SAMPLES = ((0.0, 0.0, 0.0), (0.3, -0.2, 0.1), (-0.4, 0.25, -0.3))


def frame_blocks(m: int) -> Tuple[slice, slice, int]:
    """
    Positions of θ^α, θ̄^α and λ in the spacetime coframe; κ is row ELL.
    """
    return slice(1, m + 1), slice(m + 1, 2 * m + 1), 2 * m + 1


def frame_metric(m: int) -> np.ndarray:
    """
    g in the coframe {κ, θ^α, θ̄^α, λ}: κ pairs with λ, θ^α with θ̄^α.
    """
    hol, anti, k = frame_blocks(m)
    g = np.zeros((2 * m + 2, 2 * m + 2))
    g[ELL, k] = g[k, ELL] = 1.0
    g[hol, anti] = np.eye(m)
    g[anti, hol] = np.eye(m)
    return g


def aj_coefficients(m: int) -> np.ndarray:
    """
    a₀ = 1, a_j = (2m − 2j + 4)/(2m − 2j + 1)·a_{j−1} for j = 1, ..., m.
    """
    if m < 1:
        raise ArgumentError(f"coefficients need m >= 1, got {m}")
    values = [Fraction(1)]
    for j in range(1, m + 1):
        values.append(values[-1] * Fraction(2 * m - 2 * j + 4, 2 * m - 2 * j + 1))
    return np.array([float(v) for v in values])


@dataclass(frozen=True)
class EinsteinParams:
    """
    Parameters of the Einstein family over a CR–Einstein base.

    Attributes:
    ----------
    m: int - Holomorphic rank of the base, at least 2
    cosmological: float - Λ, with Ric(ĝ) = Λ ĝ
    ulambda: float - Λ̲, the CR–Einstein constant of the base
    c: float - The free constant c̲ of the λ₀ profile
    """

    m: int
    cosmological: float
    ulambda: float
    c: float = 0.0

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ArgumentError(f"the Einstein family needs m >= 2, got {self.m}")

    @classmethod
    def fefferman(cls, m: int, ulambda: float) -> "EinsteinParams":
        return cls(m, (2 * m + 1) * ulambda / (2 * m + 2), ulambda, 0.0)

    @classmethod
    def for_base(
        cls, base: CRBase, cosmological: float, c: float = 0.0, ulambda: Optional[float] = None
    ) -> "EinsteinParams":
        """
        Parameters with Λ̲ read from the base, or validated against it when given.
        """
        found = base_einstein_constant(base)
        if ulambda is None:
            ulambda = found
        check_ulambda(base, ulambda, found)
        return cls(base.m, cosmological, ulambda, c)

    @property
    def is_fefferman(self) -> bool:
        m = self.m
        gap = abs((2 * m + 2) * self.cosmological - (2 * m + 1) * self.ulambda)
        return self.c == 0.0 and gap <= 1e-12 * (1.0 + abs(self.ulambda))

    @property
    def slope(self) -> float:
        """
        Λ/(2m+1) − Λ̲/(2m+2), the weight of the trigonometric part of λ₀.
        """
        return self.cosmological / (2 * self.m + 1) - self.ulambda / (2 * self.m + 2)


def _as_phi(phi: Union[float, Jet3]) -> Jet3:
    if isinstance(phi, Jet3):
        return phi
    return lift_coordinate([float(phi)], 0, MAX_ORDER)


def lambda0(params: EinsteinParams, phi: Union[float, Jet3]) -> Jet3:
    """
    The λ₀ profile of the Einstein family,

        λ₀ = Λ̲/(2m+2) + (Λ/(2m+1) − Λ̲/(2m+2))(Σ a_j cos^{2j}φ − 2a_m cos^{2m+2}φ)
             + c̲ cos^{2m+1}φ sinφ.

    Parameters
    ----------
    params : EinsteinParams - The parameters.
    phi : float | Jet3 - φ, or the jet of φ on some chart.

    Returns
    -------
    Jet3 - λ₀ with the derivatives carried by phi (a one-dimensional jet for a float).
    """

    phi = _as_phi(phi)
    if np.any(np.abs(phi.value) >= np.pi / 2):
        raise EvaluationError("λ₀ is defined for |φ| < π/2", phi.point)
    m = params.m
    a = aj_coefficients(m)
    cos = jet_apply("cos", phi)
    sin = jet_apply("sin", phi)
    cos2 = cos * cos
    power = constant(1.0, phi.point, phi.order)
    series = power * a[0]
    for j in range(1, m + 1):
        power = power * cos2
        series = series + power * a[j]
    profile = series - power * cos2 * (2.0 * a[m])
    odd = cos ** (2 * m + 1) * sin
    return profile * params.slope + odd * params.c + params.ulambda / (2 * m + 2)


def _balance(terms: Sequence[float], rhs: float) -> Residual:
    total = float(sum(terms))
    scale = max([abs(float(t)) for t in terms] + [abs(rhs)])
    return Residual(abs(total - rhs), scale)


def lambda0_ode_residuals(params: EinsteinParams, phi: float) -> Dict[str, Residual]:
    """
    Residuals of the ODEs satisfied by λ₀ at φ:

        r1: λ̈ + 2(2m+1)tanφ λ̇ + (2(m+1)(2m+1)sec²φ − 4m(m+1))λ = 2(m+1)Λsec²φ − 2mΛ̲
        r2: λ̈ + (2m+1)tanφ λ̇ + (2(m+1) + (2m+1)sec²φ)λ = Λsec²φ + Λ̲
        r3: tanφ λ̇ − (2m+2 − (2m+1)sec²φ)λ = Λsec²φ − Λ̲
        r4: λ̈ + (4(m+1)² − 2m(2m+1)sec²φ)λ = 2(m+1)Λ̲ − 2mΛsec²φ

    and rb, the identity obtained by reading off the cos^{2m+2}φ coefficient b̲
    and setting b̲ = −2(Λ/(2m+1) − Λ̲/(2m+2))a_m.
    """
    x = lift_coordinate([float(phi)], 0, 2)
    jet = lambda0(params, x)
    lam, dot, ddot = float(jet.value), float(jet.grad[0]), float(jet.hess[0, 0])
    m, big, small = params.m, params.cosmological, params.ulambda
    tan, sec2 = np.tan(phi), 1.0 / np.cos(phi) ** 2

    r1 = _balance(
        [ddot, 2 * (2 * m + 1) * tan * dot,
         (2 * (m + 1) * (2 * m + 1) * sec2 - 4 * m * (m + 1)) * lam],
        2 * (m + 1) * big * sec2 - 2 * m * small,
    )
    r2 = _balance(
        [ddot, (2 * m + 1) * tan * dot, (2 * (m + 1) + (2 * m + 1) * sec2) * lam],
        big * sec2 + small,
    )
    r3 = _balance([tan * dot, -(2 * m + 2 - (2 * m + 1) * sec2) * lam], big * sec2 - small)
    r4 = _balance(
        [ddot, (4 * (m + 1) ** 2 - 2 * m * (2 * m + 1) * sec2) * lam],
        2 * (m + 1) * small - 2 * m * big * sec2,
    )

    a = aj_coefficients(m)
    cos = np.cos(phi)
    known = [small / (2 * m + 2), params.c * cos ** (2 * m + 1) * np.sin(phi)]
    known += [params.slope * a[j] * cos ** (2 * j) for j in range(m + 1)]
    b = -2.0 * params.slope * a[m]
    rb = _balance(known + [b * cos ** (2 * m + 2)], lam)
    return {"r1": r1, "r2": r2, "r3": r3, "r4": r4, "rb": rb}


@dataclass(frozen=True)
class GeneralLambda:
    """
    The 1-form λ = dφ + λ_α θ^α + λ_ᾱ θ̄^α + λ₀ θ⁰ on the (φ, base) chart.

    Attributes:
    ----------
    m: int - Holomorphic rank
    zero: LambdaBuilder - coordinate jets of the (φ, base) chart -> real jet of λ₀
    alpha: LambdaBuilder, optional - coordinate jets -> complex jet of shape (m,); None for λ_α = 0
    name: str - Label used in reports
    """

    m: int
    zero: LambdaBuilder
    alpha: Optional[LambdaBuilder] = None
    name: str = "lambda"

    def components(self, coords: Sequence[Jet3]) -> Tuple[Jet3, Jet3]:
        """
        Jets of (λ_α, λ₀) at the point the coordinate jets are taken at.
        """
        point, order = coords[0].point, coords[0].order
        if self.alpha is None:
            alpha = constant(np.zeros(self.m, dtype=complex), point, order)
        else:
            alpha = self.alpha(coords) * (1.0 + 0.0j)
        if alpha.shape != (self.m,):
            raise ArgumentError(f"{self.name}: λ_α of shape {alpha.shape}, expected {(self.m,)}")
        zero = self.zero(coords)
        if zero.shape != ():
            raise ArgumentError(f"{self.name}: λ₀ must be a scalar, got shape {zero.shape}")
        if np.iscomplexobj(zero.value):
            if abs(np.imag(zero.value)) > 1e-12 * (1 + abs(zero.value)):
                raise ArgumentError(f"{self.name}: λ₀ is not real")
            zero = zero.real
        return alpha, zero


def einstein_lambda(params: EinsteinParams) -> GeneralLambda:
    return GeneralLambda(
        params.m,
        lambda coords: lambda0(params, coords[0]),
        None,
        f"einstein(Λ={params.cosmological:g}, Λ̲={params.ulambda:g}, c̲={params.c:g})",
    )


def polynomial_lambda(m: int, rng: np.random.Generator, scale: float = 0.3) -> GeneralLambda:
    """
    λ_α and λ₀ quadratic in all coordinates of the (φ, base) chart with random coefficients.
    """
    dim = 2 * m + 2
    shapes = ((1,), (1, dim), (1, dim, dim))
    zero_coefficients = tuple(rng.normal(size=shape) * scale for shape in shapes)
    alpha_coefficients = tuple(
        (rng.normal(size=(m,) + shape[1:]) + 1j * rng.normal(size=(m,) + shape[1:])) * scale
        for shape in shapes
    )

    def quadratic(coefficients, coords: Sequence[Jet3]) -> Jet3:
        c0, c1, c2 = coefficients
        x = stack(list(coords))
        linear = einsum("ab,b->a", c1, x)
        quad = einsum("ab,b->a", einsum("abc,c->ab", c2, x), x)
        return linear + quad + c0

    def zero(coords: Sequence[Jet3]) -> Jet3:
        return quadratic(zero_coefficients, coords)[0]

    def alpha(coords: Sequence[Jet3]) -> Jet3:
        return quadratic(alpha_coefficients, coords)

    return GeneralLambda(m, zero, alpha, "polynomial")


def _coframe_builder(base: CRBase, lam: GeneralLambda) -> LambdaBuilder:
    m = base.m
    dim = 2 * m + 2
    hol, anti, _ = frame_blocks(m)

    def builder(coords: Sequence[Jet3]) -> Jet3:
        point, order = coords[0].point, coords[0].order
        rows = base.full_coframe(coords[1:])
        padding = constant(np.zeros((2 * m + 1, 1), dtype=complex), point, order)
        rows = concatenate([padding, rows], axis=1)
        alpha, zero = lam.components(coords)
        dphi = np.zeros(dim, dtype=complex)
        dphi[0] = 1.0
        lam_row = (
            einsum("a,ab->b", alpha, rows[hol])
            + einsum("a,ab->b", alpha.conj(), rows[anti])
            + einsum(",b->b", zero, rows[0])
            + dphi
        )
        kappa = rows[0] * 2.0
        return stack([kappa] + [rows[i] for i in range(1, 2 * m + 1)] + [lam_row])

    return builder


@dataclass(frozen=True)
class SpacetimeModel:
    """
    A metric g = κ⊗λ + λ⊗κ + h_{αβ̄}(θ^α⊗θ̄^β + θ̄^β⊗θ^α) on the (φ, base) chart and
    its rescaling ĝ = sec²φ·g.

    Attributes:
    ----------
    base: CRBase - The CR base
    lam: GeneralLambda - The 1-form λ
    coframe_builder: LambdaBuilder - coordinate jets -> jet of the coframe rows κ, θ^α, θ̄^α, λ
    metric: MetricField - g
    rescaled: MetricField - ĝ
    params: EinsteinParams, optional - Set for members of the Einstein family
    """

    base: CRBase
    lam: GeneralLambda
    coframe_builder: LambdaBuilder
    metric: MetricField
    rescaled: MetricField
    params: Optional[EinsteinParams] = None

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def dim(self) -> int:
        return 2 * self.m + 2

    @property
    def name(self) -> str:
        return self.metric.name

    @property
    def coordinate_names(self) -> Tuple[str, ...]:
        return ("phi",) + tuple(self.base.coordinate_names)

    def coordinates(self, pt: Sequence[float], order: int) -> List[Jet3]:
        pt = np.asarray(pt, dtype=float)
        if pt.shape != (self.dim,):
            raise ArgumentError(f"{self.name}: point of shape {pt.shape} on a {self.dim}-chart")
        if abs(pt[0]) >= np.pi / 2:
            raise EvaluationError(f"{self.name}: φ outside (−π/2, π/2)", pt)
        return coordinate_jets(pt, order)

    def coframe(self, pt: Sequence[float], order: int = 2) -> Jet3:
        return self.coframe_builder(self.coordinates(pt, order))

    def frame(self, pt: Sequence[float], order: int = 2) -> Jet3:
        """
        E[a, A]: chart components of ℓ, e_α, ē_α and k = ∂_φ.
        """
        return inv(self.coframe(pt, order))

    def lambda_parts(self, pt: Sequence[float], order: int = MAX_ORDER) -> Tuple[Jet3, Jet3]:
        return self.lam.components(self.coordinates(pt, order))

    def lambda0_at(self, pt: Sequence[float]) -> float:
        return float(self.lambda_parts(pt, 0)[1].value)

    def to_frame(self, tensor: np.ndarray, pt: Sequence[float]) -> np.ndarray:
        """
        Frame components of a covariant coordinate tensor.
        """
        frame = self.frame(pt, 0).value
        out = np.asarray(tensor, dtype=complex)
        for slot in range(out.ndim):
            out = np.moveaxis(np.tensordot(out, frame, axes=([slot], [0])), -1, slot)
        return out


def assemble_general(base: CRBase, lam: GeneralLambda, name: Optional[str] = None) -> SpacetimeModel:
    """
    The metric built from a CR base and an arbitrary λ.

    Parameters
    ----------
    base : CRBase - The base.
    lam : GeneralLambda - λ_α and λ₀.
    name : str, optional - Label of the model.

    Returns
    -------
    SpacetimeModel - g and ĝ = sec²φ·g.
    """

    if lam.m != base.m:
        raise ArgumentError(f"λ of rank {lam.m} over a base of rank {base.m}")
    return _assemble(base, lam, None, name or f"{base.name}/{lam.name}")


def _assemble(
    base: CRBase, lam: GeneralLambda, params: Optional[EinsteinParams], name: str
) -> SpacetimeModel:
    m = base.m
    dim = 2 * m + 2
    builder = _coframe_builder(base, lam)
    pattern = frame_metric(m)

    def metric(coords: List[Jet3]) -> Jet3:
        rows = builder(coords)
        return einsum("ib,ia->ab", einsum("ij,jb->ib", pattern, rows), rows)

    def rescaled(coords: List[Jet3]) -> Jet3:
        sec = jet_apply("sec", coords[0])
        return einsum("ab,->ab", metric(coords), sec * sec)

    signature = (2 * m + 1, 1)
    g = MetricField.from_coordinates(dim, signature, metric, name)
    g_hat = MetricField.from_coordinates(dim, signature, rescaled, f"rescaled {name}")
    logger.debug("assembled %s over %s", name, base.name)
    return SpacetimeModel(base, lam, builder, g, g_hat, params)


def _base_sample_points(base: CRBase) -> List[np.ndarray]:
    points = []
    for t, x, y in _BASE_SAMPLES:
        pt = np.zeros(base.dim)
        pt[0] = t
        for a in range(base.m):
            pt[1 + 2 * a] = x / (1 + a)
            pt[2 + 2 * a] = y / (1 + a)
        points.append(pt)
    return points


def base_einstein_constant(base: CRBase) -> float:
    """
    Λ̲ of a base: the closed-form value when known, else the verified numerical constant.
    """
    if base.einstein_constant is not None:
        return base.einstein_constant
    points = _base_sample_points(base)
    for pt in points:
        record = cr_einstein_check(base, pt)
        if not record.passes(EINSTEIN_TOLERANCE * (1.0 + abs(record.ulambda))):
            worst = max(record.a_res, record.div_n_res, record.ricci_res, record.grad_ulambda_res)
            raise PreconditionError(f"{base.name} is not CR–Einstein at {list(pt)}", worst)
    mean, spread = cr_einstein_constant(base, points)
    if spread > EINSTEIN_TOLERANCE * (1.0 + abs(mean)):
        raise PreconditionError(f"{base.name}: Λ̲ is not constant", spread)
    return mean


def check_ulambda(base: CRBase, ulambda: float, found: float) -> None:
    if abs(ulambda - found) > EINSTEIN_TOLERANCE * (1.0 + abs(found)):
        raise ArgumentError(
            f"Λ̲ = {ulambda:.12g} does not match the CR–Einstein constant {found:.12g} of {base.name}"
        )


def assemble_einstein(base: CRBase, params: EinsteinParams) -> SpacetimeModel:
    """
    The Einstein metric ĝ = sec²φ·(κ⊗λ + λ⊗κ + h) with κ = 2θ⁰ and λ = dφ + λ₀θ⁰.

    Parameters
    ----------
    base : CRBase - A CR–Einstein base.
    params : EinsteinParams - Parameters whose Λ̲ matches the base.

    Returns
    -------
    SpacetimeModel - The model; Ric(ĝ) = Λĝ.
    """

    if params.m != base.m:
        raise ArgumentError(f"parameters for m={params.m} over a base of rank {base.m}")
    check_ulambda(base, params.ulambda, base_einstein_constant(base))
    name = (
        f"{base.name}/einstein(Λ={params.cosmological:g}, Λ̲={params.ulambda:g}, c̲={params.c:g})"
    )
    logger.info("assembling %s", name)
    return _assemble(base, einstein_lambda(params), params, name)


def einstein_check(model: SpacetimeModel, pt: Sequence[float]) -> Residual:
    """
    Residual of Ric(ĝ) = Λĝ at a point.
    """
    if model.params is None:
        raise ArgumentError(f"{model.name} is not a member of the Einstein family")
    pack = curvature_pack(model.rescaled, pt)
    result = einstein_residual(pack, model.params.cosmological)
    logger.debug("Einstein residual of %s at %s: %.3e", model.name, list(pt), result.max_rel)
    return result


def frame_pattern_residual(model: SpacetimeModel, pt: Sequence[float]) -> Residual:
    """
    Residual of g against its coframe pattern in frame components.
    """
    g = model.metric.at(pt, 0).value
    return residual(model.to_frame(g, pt), frame_metric(model.m))


@dataclass(frozen=True)
class BCECoefficients:
    """
    Coefficients of dλ in the spacetime coframe,

        dλ = −B_{αβ}θ^α∧θ^β − 2B_{αβ̄}θ^α∧θ̄^β − B_{ᾱβ̄}θ̄^α∧θ̄^β − C_αθ^α∧κ − C_ᾱθ̄^α∧κ
             − 2E_αθ^α∧λ − 2E_ᾱθ̄^α∧λ − E₀κ∧λ,

    evaluated from λ_α, λ₀ and the Webster data of the base. Every entry is a jet
    on the (φ, base) chart; ``nabla`` holds ∇̲ of (λ₀, λ_α, λ_ᾱ) in the base frame,
    derivative slot first.
    """

    b_hol: Jet3
    b_mixed: Jet3
    c: Jet3
    e: Jet3
    e0: Jet3
    alpha: Jet3
    zero: Jet3
    nabla: Jet3
    solution: WebsterSolution
    frame: Jet3
    connection: Jet3


def _lift_to_spacetime(jet: Jet3, pt: np.ndarray) -> Jet3:
    return embed(jet, pt, range(1, pt.shape[0]))


def base_data(model: SpacetimeModel, pt: Sequence[float]) -> Tuple[WebsterSolution, Jet3, Jet3]:
    """
    Webster solution of the base under pt with its frame (padded by a zero φ row)
    and connection as jets on the (φ, base) chart.
    """
    pt = np.asarray(pt, dtype=float)
    solution = webster_solve(model.base, pt[1:], MAX_ORDER)
    frame = _lift_to_spacetime(solution.frame, pt)
    padding = constant(np.zeros((1, model.base.dim), dtype=complex), pt, frame.order)
    frame = concatenate([padding, frame * (1.0 + 0.0j)], axis=0)
    connection = _lift_to_spacetime(connection_jet(solution), pt)
    return solution, frame, connection


def bce_coefficients(model: SpacetimeModel, pt: Sequence[float]) -> BCECoefficients:
    """
    B_{αβ} = −∇̲_[αλ_β] + λ_[αλ̇_β] + ½N_{αβγ}λ^γ
    B_{αβ̄} = −½(∇̲_αλ_β̄ − ∇̲_β̄λ_α − λ_αλ̇_β̄ + λ_β̄λ̇_α + iλ₀h_{αβ̄})
    C_α = −½(∇̲_αλ₀ − ∇̲_0λ_α − λ_αλ̇₀ + λ₀λ̇_α − A_{αβ}λ^β)
    E_α = ½λ̇_α,  E₀ = ½λ̇₀
    """
    pt = np.asarray(pt, dtype=float)
    m = model.m
    solution, frame, connection = base_data(model, pt)
    alpha, zero = model.lambda_parts(pt, MAX_ORDER)
    covector = concatenate([stack([zero * (1.0 + 0.0j)]), alpha, alpha.conj()])
    nabla = frame_covariant_derivative(covector, (DOWN,), connection, frame)
    order = nabla.order
    dot = alpha.partial(0).truncate(order)
    dot0 = zero.partial(0).truncate(order)
    alpha, zero = alpha.truncate(order), zero.truncate(order)
    torsion = _lift_to_spacetime(solution.torsion, pt).truncate(order)
    nijenhuis = _lift_to_spacetime(solution.nijenhuis, pt).truncate(order)
    hol = slice(1, m + 1)
    anti = slice(m + 1, 2 * m + 1)
    lam_up = alpha.conj()
    eye = np.eye(m)

    grad_hol = nabla[hol, hol]
    outer = einsum("a,b->ab", alpha, dot)
    b_hol = (
        (grad_hol - einsum("ab->ba", grad_hol)) * (-0.5)
        + (outer - einsum("ab->ba", outer)) * 0.5
        + einsum("abg,g->ab", nijenhuis, lam_up) * 0.5
    )
    b_mixed = (
        nabla[hol, anti]
        - einsum("ba->ab", nabla[anti, hol])
        - einsum("a,b->ab", alpha, dot.conj())
        + einsum("b,a->ab", alpha.conj(), dot)
        + einsum(",ab->ab", zero * 1j, constant(eye, pt, order))
    ) * (-0.5)
    c = (
        nabla[hol, 0]
        - nabla[0, hol]
        - einsum("a,->a", alpha, dot0)
        + einsum(",a->a", zero, dot)
        - einsum("ab,b->a", torsion, lam_up)
    ) * (-0.5)
    return BCECoefficients(
        b_hol=b_hol,
        b_mixed=b_mixed,
        c=c,
        e=dot * 0.5,
        e0=dot0 * 0.5,
        alpha=alpha,
        zero=zero,
        nabla=nabla,
        solution=solution,
        frame=frame,
        connection=connection,
    )


def d_lambda_frame(model: SpacetimeModel, pt: Sequence[float]) -> np.ndarray:
    """
    dλ(e_A, e_B) in the spacetime frame, from the numerically differentiated λ row.
    """
    coframe = model.coframe(pt, 1)
    _, _, k = frame_blocks(model.m)
    d_lam = exterior_derivative(coframe[k]).value
    frame = np.linalg.inv(coframe.value)
    return frame.T @ d_lam @ frame


def bce_residuals(model: SpacetimeModel, pt: Sequence[float]) -> Dict[str, Residual]:
    """
    Cross-check of the B/C/E formulas against the expansion of dλ.
    """
    m = model.m
    hol, anti, k = frame_blocks(m)
    coefficients = bce_coefficients(model, pt)
    d_lam = d_lambda_frame(model, pt)
    b_hol = coefficients.b_hol.value
    b_mixed = coefficients.b_mixed.value
    c = coefficients.c.value
    e = coefficients.e.value
    e0 = complex(coefficients.e0.value)
    scale = max_abs(d_lam)

    def against(found: np.ndarray, expected: np.ndarray) -> Residual:
        return Residual(max_abs(np.asarray(found) - np.asarray(expected)), scale)

    return {
        "b_hol": against(d_lam[hol, hol], -2.0 * b_hol),
        "b_antihol": against(d_lam[anti, anti], -2.0 * b_hol.conj()),
        "b_mixed": against(d_lam[hol, anti], -2.0 * b_mixed),
        "c": against(d_lam[hol, ELL], -c),
        "c_bar": against(d_lam[anti, ELL], -c.conj()),
        "e": against(d_lam[hol, k], -2.0 * e),
        "e_bar": against(d_lam[anti, k], -2.0 * e.conj()),
        "e0": against(d_lam[ELL, k], -e0),
    }


def _closed_forms(params: EinsteinParams, phi: float) -> Tuple[float, float]:
    """
    P̂(ℓ, k) and the Levi trace of P̂ in terms of λ₀ for the Einstein family.
    """
    m, small = params.m, params.ulambda
    jet = lambda0(params, lift_coordinate([phi], 0, 2))
    lam, dot, ddot = float(jet.value), float(jet.grad[0]), float(jet.hess[0, 0])
    tan, sec2 = np.tan(phi), 1.0 / np.cos(phi) ** 2
    n = 2 * (2 * m + 1)
    ell_k = (
        -small / n + ddot / n + 0.5 * tan * dot + ((m + 1) / (2 * m + 1) + 0.5 * sec2) * lam
    )
    trace = (
        -(0.5 * ddot + (2 * (m + 1) ** 2 - m * (2 * m + 1) * sec2) * lam) / n
        + (m + 1) * small / n
    )
    return ell_k, trace


def schouten_frame(model: SpacetimeModel, pt: Sequence[float]) -> np.ndarray:
    """
    The Schouten tensor of ĝ in the frame of g.
    """
    pack = curvature_pack(model.rescaled, pt)
    return model.to_frame(pack.schouten, pt)


def schouten_steps(model: SpacetimeModel, pt: Sequence[float]) -> Dict[str, Residual]:
    """
    Components of the Schouten tensor P̂ of ĝ against the Einstein value
    Λ/(2(2m+1))·ĝ, one residual per integration step, plus the closed forms of
    P̂(ℓ, k) and of the Levi trace in terms of λ₀.
    """
    if model.params is None:
        raise ArgumentError(f"{model.name} is not a member of the Einstein family")
    pt = np.asarray(pt, dtype=float)
    m = model.m
    hol, anti, k = frame_blocks(m)
    p = schouten_frame(model, pt)
    phi = float(pt[0])
    value = model.params.cosmological / (2 * (2 * m + 1)) / np.cos(phi) ** 2
    scale = max(max_abs(p), abs(value))
    mixed = p[hol, anti]
    trace = complex(np.trace(mixed))
    ell_k, closed_trace = _closed_forms(model.params, phi)

    def step(found, expected=0.0) -> Residual:
        return Residual(max_abs(np.asarray(found) - expected), scale)

    steps = {
        "kk": step(p[k, k]),
        "alpha_k": step(p[hol, k]),
        "alpha_beta": step(p[hol, hol]),
        "alpha_betabar_tracefree": step(mixed - trace / m * np.eye(m)),
        "trace": step(trace, m * value),
        "ell_k": step(p[ELL, k], value),
        "alpha_ell": step(p[hol, ELL]),
        "ell_ell": step(p[ELL, ELL]),
        "ell_k_closed": step(p[ELL, k], ell_k),
        "trace_closed": step(trace, closed_trace),
    }
    for name, r in steps.items():
        logger.debug("%s at %s: step %s residual %.3e", model.name, list(pt), name, r.max_rel)
    return steps


def pure_radiation(model: SpacetimeModel, pt: Sequence[float]) -> float:
    """
    Φ = P̂(ℓ, ℓ), the coefficient of a κ⊗κ term in the Schouten tensor of ĝ.
    """
    return float(np.real(schouten_frame(model, pt)[ELL, ELL]))


def lambda0_spread(model: SpacetimeModel, phi: float, base_points: Sequence[Sequence[float]]) -> float:
    """
    max − min of λ₀ over base points at fixed φ.
    """
    if not base_points:
        raise ArgumentError("no base points")
    values = [model.lambda0_at(np.concatenate([[phi], np.asarray(b, dtype=float)]))
              for b in base_points]
    return float(max(values) - min(values))
