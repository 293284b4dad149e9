import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .appendix import corpus_data
from .curvature import (
    christoffel_jets,
    covariant_derivative_jet,
    curvature_pack,
    fefferman_scalar,
)
from .errors import ArgumentError, PreconditionError
from .jets import Jet3, einsum, lift_coordinate
from .optics import congruence_invariants, frame_vector
from .robinson import (
    ELL,
    EinsteinParams,
    SpacetimeModel,
    assemble_einstein,
    bce_coefficients,
    frame_blocks,
    lambda0,
)
from .tensors import DOWN
from .utils import Residual, max_abs
from .webster import trace_free_symmetric

logger = logging.getLogger(__name__)

# Frame slots in family names: h = e_α, a = ē_α, l = ℓ, k = k.

ZERO_LAMBDA_TOLERANCE = 1e-8


def _require_params(model: SpacetimeModel) -> EinsteinParams:
    if model.params is None:
        raise ArgumentError(f"{model.name} is not a member of the Einstein family")
    return model.params


def _profile(params: EinsteinParams, phi: float):
    jet = lambda0(params, lift_coordinate([float(phi)], 0, 2))
    return float(jet.value), float(jet.grad[0]), float(jet.hess[0, 0])


def _slots(tensor: np.ndarray, slots: str, m: int) -> np.ndarray:
    hol, anti, k = frame_blocks(m)
    index = {"h": hol, "a": anti, "l": ELL, "k": k}
    return tensor[tuple(index[s] for s in slots)]


def weyl_einstein_components(model: SpacetimeModel, pt: Sequence[float]) -> Dict[str, Residual]:
    """
    Frame components of the Weyl tensor of g for an Einstein model against their
    closed forms in λ₀, Λ̲ and the Nijenhuis tensor of the base:

        W_hkhh  W_γ^0_αβ = 2i N_αβγ
        W_hhhh  W_γδαβ = 2∇̲_[γ N_αβ|δ]
        W_hhah  W_γδβ̄α = ∇̲_β̄ N_γδα
        W_haah  W_γ^δβ_α = R̲_γ^δ_α^β + N^εβδ N_εαγ − 2λ₀ δ_α^β δ_γ^δ − λ₀ δ_γ^β δ_α^δ
                           + (λ̈₀ + 2(3m+2)λ₀ − 2(m+1)Λ̲)/(2m(2m+1)) δ_α^δ δ_γ^β
        W_alkh  W_β̄0^0_α = (½iλ̇₀ + ((2m−1)/2 λ̈₀ − (2m+2)λ₀ + Λ̲)/(2m(2m+1))) h_αβ̄
        W_lkkl  W_0^00_0 = ((2m−1)/2 λ̈₀ − (2m+2)λ₀ + Λ̲)/(2m+1)
        W_hlhh  W_γ0αβ = iλ₀ N_αβγ

    and the relations W^0_αβγ = −2iN_βγα, W^0_α^0_β = W^0_α^0_β̄ = 0 between the
    Weyl tensor and the CR data. For integrable bases the Chern–Moser tensor is
    compared with the symmetric trace-free part of the W_haah block.
    """
    params = _require_params(model)
    pt = np.asarray(pt, dtype=float)
    m = model.m
    d = corpus_data(model, pt)
    lam0, dot, ddot = _profile(params, pt[0])
    small = params.ulambda
    i = 1j
    delta = np.eye(m)
    n = d.nijenhuis
    nn = d.nabla_nijenhuis
    hol, anti = slice(1, m + 1), slice(m + 1, 2 * m + 1)

    pack = curvature_pack(model.metric, pt)
    weyl = model.to_frame(pack.weyl, pt)
    scale = max_abs(model.to_frame(pack.riemann_lowered, pt))

    trace_weight = (ddot + 2 * (3 * m + 2) * lam0 - 2 * (m + 1) * small) / (2 * m * (2 * m + 1))
    radial = (2 * m - 1) / 2 * ddot - (2 * m + 2) * lam0 + small
    hhhh = nn[hol, hol, hol, hol]
    expected = {
        "W_hkhh": 2 * i * np.einsum("abg->gab", n),
        "W_hhhh": np.einsum("gabd->gdab", hhhh) - np.einsum("dabg->gdab", hhhh),
        "W_hhah": np.einsum("bgda->gdba", nn[anti, hol, hol, hol]),
        "W_haah": (
            np.einsum("gdab->gdba", d.webster)
            + np.einsum("eag,ebd->gdba", n, n.conj())
            - 2 * lam0 * np.einsum("ab,gd->gdba", delta, delta)
            - lam0 * np.einsum("gb,ad->gdba", delta, delta)
            + trace_weight * np.einsum("ad,gb->gdba", delta, delta)
        ),
        "W_alkh": (0.5 * i * dot + radial / (2 * m * (2 * m + 1))) * delta,
        "W_lkkl": np.array(radial / (2 * m + 1)),
        "W_hlhh": i * lam0 * np.einsum("abg->gab", n),
        "W_khhh": -2 * i * np.einsum("bga->abg", n),
        "W_khkh": np.zeros((m, m)),
        "W_khka": np.zeros((m, m)),
    }
    out = {}
    for name, value in expected.items():
        found = _slots(weyl, name[2:], m)
        out[name] = Residual(max_abs(found - value), scale)
    if max_abs(n) <= 1e-10:
        block = np.einsum("gdba->gdab", _slots(weyl, "haah", m))
        out["chern_moser"] = Residual(
            max_abs(trace_free_symmetric(block) - trace_free_symmetric(d.webster)), scale
        )
    else:
        logger.debug("%s: non-integrable base, Chern–Moser relation skipped", model.name)
    return out


def _coframe_nabla(model: SpacetimeModel, pt: np.ndarray, rows: Sequence[Jet3]):
    _, christoffel = christoffel_jets(model.metric.at(pt, 1))
    return [
        model.to_frame(covariant_derivative_jet(row, (DOWN,), christoffel).value, pt)
        for row in rows
    ]


def _pulled_back_connection(connection: np.ndarray, m: int) -> np.ndarray:
    """
    ω_I^J on the spacetime frame: ℓ projects to ½e̲₀, e_α to e̲_α and k to zero.
    """
    size = 2 * m + 1
    out = np.zeros((size + 1, size, size), dtype=complex)
    out[ELL] = 0.5 * connection[0]
    out[1:size] = connection[1:size]
    return out


def coframe_derivative_check(model: SpacetimeModel, pt: Sequence[float]) -> Dict[str, Residual]:
    """
    ∇κ, ∇θ^α, ∇θ̄^α and ∇λ of g in the frame (derivative slot first) against

        ∇κ = 2ih θ∧θ̄ + 2E_α θ^α⊙κ + 2E_ᾱ θ̄^α⊙κ + E₀ κ⊗κ
        ∇λ = ½A θ⊙θ + ½Ā θ̄⊙θ̄ − 2B_αβ̄ θ^α∧θ̄^β − B_αβ θ^α∧θ^β − B_ᾱβ̄ θ̄^α∧θ̄^β
             − 2E_α θ^α∧λ − 2E_ᾱ θ̄^α∧λ − E₀ κ⊗λ + C_α κ⊗θ^α + C_ᾱ κ⊗θ̄^α
        ∇θ^α = ∇̲θ^α − ½A^α_β̄ θ̄^β⊗κ − N^α_β̄γ̄ θ̄^γ⊗θ̄^β − 2i λ⊙θ^α + 2B_β^α κ⊙θ^β
               + 2B_β̄^α κ⊙θ̄^β − 2E^α λ⊙κ − C^α κ⊗κ

    with symmetrized and skew products normalized to weight ½.
    """
    pt = np.asarray(pt, dtype=float)
    m = model.m
    hol, anti, k = frame_blocks(m)
    size = 2 * m + 2
    co = bce_coefficients(model, pt)
    b, bm, c = co.b_hol.value, co.b_mixed.value, co.c.value
    e, e0 = co.e.value, complex(co.e0.value)
    torsion = co.solution.torsion.value
    nijenhuis = co.solution.nijenhuis.value
    omega = _pulled_back_connection(co.connection.value, m)
    i = 1j
    delta = np.eye(m)

    kappa = np.zeros((size, size), dtype=complex)
    kappa[hol, anti] = i * delta
    kappa[anti, hol] = -i * delta
    kappa[hol, ELL] += e
    kappa[ELL, hol] += e
    kappa[anti, ELL] += e.conj()
    kappa[ELL, anti] += e.conj()
    kappa[ELL, ELL] += e0

    lam = np.zeros((size, size), dtype=complex)
    lam[hol, hol] = 0.5 * torsion - b
    lam[anti, anti] = 0.5 * torsion.conj() - b.conj()
    lam[hol, anti] = -bm
    lam[anti, hol] = bm.T
    lam[hol, k] = -e
    lam[k, hol] = e
    lam[anti, k] = -e.conj()
    lam[k, anti] = e.conj()
    lam[ELL, k] = -e0
    lam[ELL, hol] += c
    lam[ELL, anti] += c.conj()

    theta = []
    for alpha in range(m):
        t = np.zeros((size, size), dtype=complex)
        t[:, 1 : m + 1] -= omega[:, 1 : m + 1, 1 + alpha]
        t[anti, anti] -= nijenhuis[alpha].conj().T
        t[anti, ELL] -= 0.5 * torsion[alpha].conj()
        t[k, 1 + alpha] -= i
        t[1 + alpha, k] -= i
        t[ELL, hol] += bm[:, alpha]
        t[hol, ELL] += bm[:, alpha]
        t[ELL, anti] += b[:, alpha].conj()
        t[anti, ELL] += b[:, alpha].conj()
        t[k, ELL] -= e[alpha].conj()
        t[ELL, k] -= e[alpha].conj()
        t[ELL, ELL] -= c[alpha].conj()
        theta.append(t)
    swap = np.concatenate([[ELL], np.arange(m + 1, 2 * m + 1), np.arange(1, m + 1), [k]])
    theta_bar = [t.conj()[np.ix_(swap, swap)] for t in theta]

    coframe = model.coframe(pt, 1)
    found = _coframe_nabla(model, pt, [coframe[a] for a in range(size)])

    def against(values, targets) -> Residual:
        worst, top = 0.0, 0.0
        for x, y in zip(values, targets):
            worst = max(worst, max_abs(x - y))
            top = max(top, max_abs(x), max_abs(y))
        return Residual(worst, top)

    result = {
        "kappa": against([found[ELL]], [kappa]),
        "theta": against(found[1 : m + 1], theta),
        "theta_bar": against(found[m + 1 : 2 * m + 1], theta_bar),
        "lambda": against([found[k]], [lam]),
    }
    logger.debug(
        "coframe derivatives of %s at %s: %s",
        model.name, list(pt), {name: r.max_rel for name, r in result.items()},
    )
    return result


@dataclass(frozen=True)
class KillingRecord:
    """
    Attributes:
    ----------
    sym_residual: Residual - ∇_(a α_b) for α = λ + ½λ₀κ
    norm_residual: Residual - g(v, v) − λ₀ for v = g⁻¹α
    conformal_killing: Residual - trace-free part of £_k ĝ
    """

    sym_residual: Residual
    norm_residual: Residual
    conformal_killing: Residual


def killing_check(model: SpacetimeModel, pt: Sequence[float]) -> KillingRecord:
    """
    The Killing equation for v = g⁻¹(λ + ½λ₀κ), its norm g(v, v) = λ₀, and the
    conformal Killing equation of k = ∂_φ for ĝ.
    """
    _require_params(model)
    pt = np.asarray(pt, dtype=float)
    _, _, k = frame_blocks(model.m)
    coframe = model.coframe(pt, 1)
    _, zero = model.lambda_parts(pt, 1)
    alpha = (coframe[k] + einsum(",b->b", zero, coframe[ELL]) * 0.5).real
    metric = model.metric.at(pt, 1)
    inverse, christoffel = christoffel_jets(metric)
    nabla = covariant_derivative_jet(alpha, (DOWN,), christoffel).value
    sym = 0.5 * (nabla + nabla.T)

    a = alpha.value
    norm = float(a @ inverse.value @ a)
    lam0 = float(zero.value)

    g_hat = model.rescaled.at(pt, 1)
    lie = g_hat.partial(0).value
    trace = float(np.trace(np.linalg.solve(g_hat.value, lie)))
    conformal = lie - trace / model.dim * g_hat.value

    record = KillingRecord(
        sym_residual=Residual(max_abs(sym), max(max_abs(nabla), 1.0)),
        norm_residual=Residual(abs(norm - lam0), max(abs(lam0), 1.0)),
        conformal_killing=Residual(max_abs(conformal), max(max_abs(lie), max_abs(g_hat.value))),
    )
    logger.debug("Killing residuals of %s at %s: %s", model.name, list(pt), record)
    return record


@dataclass(frozen=True)
class FeffermanRecord:
    """
    Attributes:
    ----------
    weyl_res: Residual - k^a W_abcd of ĝ
    cotton_res: Residual - k^c Y_abc of ĝ
    scalar_value: float - The scalar criterion, −1 on Fefferman spaces
    """

    weyl_res: Residual
    cotton_res: Residual
    scalar_value: float


def fefferman_criteria(model: SpacetimeModel, pt: Sequence[float]) -> FeffermanRecord:
    """
    The conditions for k = ∂_φ to be a null conformal Killing field of a
    Fefferman space: k^a W_abcd = 0, k^c Y_abc = 0 and

        (1/d²)(∇_a k^a)² − k^a k^b P_ab − (1/d) k^a ∇_a ∇_b k^b = −1.

    Parameters
    ----------
    model : SpacetimeModel - An Einstein model with (2m+2)Λ = (2m+1)Λ̲ and c̲ = 0.
    pt : Sequence[float] - The chart point.

    Returns
    -------
    FeffermanRecord - The residuals on ĝ.
    """

    params = _require_params(model)
    if not params.is_fefferman:
        gap = abs((2 * params.m + 2) * params.cosmological - (2 * params.m + 1) * params.ulambda)
        raise PreconditionError(
            f"{model.name}: parameters are not of Fefferman type", gap + abs(params.c)
        )
    pt = np.asarray(pt, dtype=float)
    pack = curvature_pack(model.rescaled, pt, 3)
    record = FeffermanRecord(
        weyl_res=Residual(max_abs(pack.weyl[0]), max_abs(pack.riemann_lowered)),
        cotton_res=Residual(max_abs(pack.cotton[:, :, 0]), max(max_abs(pack.schouten), 1.0)),
        scalar_value=fefferman_scalar(model.rescaled, pt, 0),
    )
    logger.debug("Fefferman criteria of %s at %s: %s", model.name, list(pt), record)
    return record


def fefferman_reference(model: SpacetimeModel) -> SpacetimeModel:
    """
    The Fefferman–Einstein model over the same base, λ₀ = Λ̲/(2m+2).
    """
    params = _require_params(model)
    return assemble_einstein(model.base, EinsteinParams.fefferman(params.m, params.ulambda))


def conformal_flatness_check(model: SpacetimeModel, pt: Sequence[float]) -> Residual:
    """
    Largest Weyl component of ĝ; vanishes when Λ = Λ̲ = c̲ = 0.
    """
    return Residual(max_abs(curvature_pack(model.rescaled, pt).weyl), 1.0)


def kerr_schild_check(
    model: SpacetimeModel,
    pt: Sequence[float],
    reference: Optional[SpacetimeModel] = None,
) -> Residual:
    """
    Residual of ĝ = ĝ_FE + sec²φ (λ₀ − Λ̲/(2m+2)) κ⊗κ.
    """
    params = _require_params(model)
    pt = np.asarray(pt, dtype=float)
    reference = reference or fefferman_reference(model)
    g_hat = model.rescaled.at(pt, 0).value
    g_fe = reference.rescaled.at(pt, 0).value
    kappa = np.real(model.coframe(pt, 0)[ELL].value)
    weight = (model.lambda0_at(pt) - params.ulambda / (2 * params.m + 2)) / np.cos(pt[0]) ** 2
    diff = g_hat - g_fe - weight * np.outer(kappa, kappa)
    return Residual(max_abs(diff), max_abs(g_hat))


def dual_robinson_check(
    model: SpacetimeModel, pt: Sequence[float]
) -> Optional[Dict[str, Residual]]:
    """
    The second optical structure λ of an Einstein model.

    Where λ₀ ≠ 0, with λ′ = 2λ/λ₀ and κ′ = ½λ₀κ:

        ∇λ′ = 2ih θ∧θ̄ − ½λ̇₀ λ′⊗λ′,   ∇κ′ = iλ₀h θ∧θ̄ + ½λ̇₀ λ′⊗κ′,

    and the congruence of ℓ = g⁻¹λ is geodesic, non-shearing and non-expanding.
    For λ₀ ≡ 0, λ is parallel.

    Returns
    -------
    Optional[Dict[str, Residual]] - None when λ₀ vanishes at pt but not identically.
    """
    params = _require_params(model)
    pt = np.asarray(pt, dtype=float)
    m = model.m
    hol, anti, k = frame_blocks(m)
    size = 2 * m + 2
    coframe = model.coframe(pt, 1)
    lam0, dot, _ = _profile(params, pt[0])

    if params.cosmological == 0.0 and params.ulambda == 0.0 and params.c == 0.0:
        (nabla_lambda,) = _coframe_nabla(model, pt, [coframe[k]])
        return {"parallel": Residual(max_abs(nabla_lambda), 1.0)}
    if abs(lam0) < ZERO_LAMBDA_TOLERANCE:
        logger.warning("%s: λ₀ vanishes at %s, dual Robinson check skipped", model.name, list(pt))
        return None

    _, zero = model.lambda_parts(pt, 1)
    lam_prime = einsum(",b->b", 2.0 / zero, coframe[k])
    kappa_prime = einsum(",b->b", zero, coframe[ELL]) * 0.5
    found_lam, found_kappa = _coframe_nabla(model, pt, [lam_prime, kappa_prime])

    i = 1j
    delta = np.eye(m)
    expected_lam = np.zeros((size, size), dtype=complex)
    expected_lam[hol, anti] = i * delta
    expected_lam[anti, hol] = -i * delta
    expected_lam[k, k] = -2.0 * dot / lam0**2
    expected_kappa = np.zeros((size, size), dtype=complex)
    expected_kappa[hol, anti] = 0.5 * i * lam0 * delta
    expected_kappa[anti, hol] = -0.5 * i * lam0 * delta
    expected_kappa[k, ELL] = 0.5 * dot

    ell = congruence_invariants(
        model.metric, pt, vector=frame_vector(model, ELL), dual=frame_vector(model, k)
    )
    scale = max(max_abs(model.metric.at(pt, 0).value), 1.0)
    result = {
        "lambda_prime": Residual(
            max_abs(found_lam - expected_lam), max(max_abs(found_lam), max_abs(expected_lam))
        ),
        "kappa_prime": Residual(
            max_abs(found_kappa - expected_kappa),
            max(max_abs(found_kappa), max_abs(expected_kappa)),
        ),
        "ell_geodesy": Residual(ell.geodesy, scale),
        "ell_shear": Residual(max_abs(ell.shear), scale),
        "ell_expansion": Residual(abs(ell.expansion), scale),
    }
    logger.debug("dual Robinson residuals of %s at %s: %s", model.name, list(pt), result)
    return result
