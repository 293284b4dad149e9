import logging
from dataclasses import dataclass
from math import comb
from typing import List, Optional, Sequence

import numpy as np

from .cr_base import CRBase
from .curvature import MetricField, curvature_pack, einstein_residual
from .errors import ArgumentError
from .jets import Jet3, concatenate, constant, einsum, jet_apply, lift_coordinate
from .robinson import EinsteinParams, base_einstein_constant, check_ulambda, lambda0
from .utils import Residual

logger = logging.getLogger(__name__)

MIN_ABS_F = 1e-6


@dataclass(frozen=True)
class TaubNutPoint:
    """
    The Taub–NUT description of an Einstein model at a radius r.

    Attributes:
    ----------
    r: float - Radial coordinate
    phi: float - atan(r/Λ̲)
    f: float - F(r) = −((r²+Λ̲²)/Λ̲²)·λ₀(φ)
    f_ode_residual: Residual - Residual of the radial Einstein equation for F
    mass: float - −Λ̲^{2m−1}c̲
    extracted_mass: float, optional - The integration constant read off F, None at r = 0
    round_trip: float - |Λ̲·tan φ − r|
    """

    r: float
    phi: float
    f: float
    f_ode_residual: Residual
    mass: float
    extracted_mass: Optional[float]
    round_trip: float


def _require_nut(params: EinsteinParams) -> float:
    if params.ulambda == 0.0:
        raise ArgumentError("the Taub–NUT description needs a nonzero Λ̲")
    return params.ulambda


def radial_profile(params: EinsteinParams, r: Jet3) -> Jet3:
    """
    F as a jet in r.
    """
    nut = _require_nut(params)
    phi = jet_apply("atan", r * (1.0 / nut))
    s = r * r + nut * nut
    return s * lambda0(params, phi) * (-1.0 / nut**2)


def _primitive(n: int, nut: float, r: float) -> float:
    """
    A primitive of (r² + Λ̲²)^n / r².
    """
    total = -(nut ** (2 * n)) / r
    for k in range(1, n + 1):
        total += comb(n, k) * nut ** (2 * n - 2 * k) * r ** (2 * k - 1) / (2 * k - 1)
    return total


def taubnut_map(params: EinsteinParams, r: float) -> TaubNutPoint:
    """
    The change of variables r = Λ̲ tan φ for an Einstein model and the Einstein
    equation of the radial profile,

        d/dr( (r²+Λ̲²)^m F / r ) = (r²+Λ̲²)^m Λ̲ / r² − (r²+Λ̲²)^{m+1} Λ / (Λ̲² r²),

    evaluated in the form multiplied by r² so that r = 0 is admissible. The
    integration constant M of this equation is −Λ̲^{2m−1}c̲.

    Parameters
    ----------
    params : EinsteinParams - Parameters with Λ̲ ≠ 0.
    r : float - The radius.

    Returns
    -------
    TaubNutPoint - The mapped point and its residuals.
    """

    nut = _require_nut(params)
    m = params.m
    r = float(r)
    r_jet = lift_coordinate([r], 0, 1)
    f = radial_profile(params, r_jet)
    s = r_jet * r_jet + nut * nut
    h = f * s**m
    size = float(s.value)
    terms = [
        r * float(h.grad[0]),
        -float(h.value),
        -(size**m) * nut,
        size ** (m + 1) * params.cosmological / nut**2,
    ]
    total = float(sum(terms))
    f_ode = Residual(abs(total), max(abs(t) for t in terms))

    phi = float(np.arctan(r / nut))
    mass = -(nut ** (2 * m - 1)) * params.c
    extracted = None
    if r != 0.0:
        particular = nut * _primitive(m, nut, r) - params.cosmological / nut**2 * _primitive(
            m + 1, nut, r
        )
        extracted = float(h.value) / r - particular
    result = TaubNutPoint(
        r=r,
        phi=phi,
        f=float(f.value),
        f_ode_residual=f_ode,
        mass=mass,
        extracted_mass=extracted,
        round_trip=abs(nut * np.tan(phi) - r),
    )
    logger.debug("Taub–NUT point %s", result)
    return result


def taubnut_metric(base: CRBase, params: EinsteinParams) -> MetricField:
    """
    g_TN = dr⊗dr/(Λ̲²F) − 4F θ⁰⊗θ⁰ + ((r²+Λ̲²)/Λ̲²)(θ^α⊗θ̄^α + θ̄^α⊗θ^α)
    on the chart (r, base coordinates).
    """
    nut = _require_nut(params)
    if params.m != base.m:
        raise ArgumentError(f"parameters for m={params.m} over a base of rank {base.m}")
    check_ulambda(base, nut, base_einstein_constant(base))
    m = base.m
    dim = 2 * m + 2

    def builder(coords: List[Jet3]) -> Jet3:
        r = coords[0]
        point, order = r.point, r.order
        rows = base.full_coframe(coords[1:])
        padding = constant(np.zeros((2 * m + 1, 1), dtype=complex), point, order)
        rows = concatenate([padding, rows], axis=1)
        f = radial_profile(params, r)
        s = r * r + nut * nut
        dr = np.zeros(dim)
        dr[0] = 1.0
        radial = jet_apply("reciprocal", f) * (np.outer(dr, dr) / nut**2)
        theta0 = rows[0]
        time = einsum("ab,->ab", einsum("a,b->ab", theta0, theta0), f) * (-4.0)
        screen = einsum("ia,ib->ab", rows[1 : m + 1], rows[m + 1 :])
        screen = einsum("ab,->ab", screen + einsum("ab->ba", screen), s) * (1.0 / nut**2)
        return time + screen + radial

    name = f"{base.name}/taub-nut(Λ={params.cosmological:g}, Λ̲={nut:g}, c̲={params.c:g})"
    return MetricField.from_coordinates(dim, (2 * m + 1, 1), builder, name)


def taubnut_einstein_check(
    base: CRBase,
    params: EinsteinParams,
    pt: Sequence[float],
    min_abs_f: float = MIN_ABS_F,
    metric: Optional[MetricField] = None,
) -> Optional[Residual]:
    """
    Residual of Ric(g_TN) = Λ g_TN at a chart point (r, base coordinates), or None
    when |F(r)| < min_abs_f.
    """
    pt = np.asarray(pt, dtype=float)
    f = taubnut_map(params, pt[0]).f
    if abs(f) < min_abs_f:
        logger.warning("|F| = %.3e at r = %g, Taub–NUT point skipped", abs(f), pt[0])
        return None
    metric = metric or taubnut_metric(base, params)
    result = einstein_residual(curvature_pack(metric, pt), params.cosmological)
    logger.debug("Einstein residual of %s at %s: %.3e", metric.name, list(pt), result.max_rel)
    return result
