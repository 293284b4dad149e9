import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cr_base import CRBase
from .errors import ArgumentError, NumericError, StructureError
from .jets import (
    MAX_ORDER,
    Jet3,
    assemble,
    concatenate,
    constant,
    coordinate_jets,
    einsum,
    inv,
    stack,
)
from .tensors import DOWN, UP, exterior_derivative
from .utils import Residual, combine, max_abs, residual

logger = logging.getLogger(__name__)

STRUCTURE_TOLERANCE = 1e-8
COFRAME_CONDITION_LIMIT = 1e8

# einsum letters for tensor slots; p, q and z are taken by the derivative formula
_SLOT_LETTERS = "abcdefgh"


def _blocks(m: int) -> Tuple[slice, slice]:
    return slice(1, m + 1), slice(m + 1, 2 * m + 1)


@dataclass(frozen=True)
class WebsterSolution:
    """
    Solved structure equations of a CR base at a point, in the unitarized frame
    {e_0, e_α, e_ᾱ} dual to {θ⁰, θ^α, θ̄^α}.

    Attributes:
    ----------
    base: CRBase - The base the equations were solved for
    point: np.ndarray - The chart point
    frame: Jet3 - E[a, K], chart components of the frame vectors
    structure: Jet3 - F[I, K, L] = dθ^I(e_K, e_L)
    gamma: Jet3 - Γ_β^α(e_K) stored as [K, β, α]
    torsion: Jet3 - A_{αβ}
    nijenhuis: Jet3 - N_{βγα}
    """

    base: CRBase
    point: np.ndarray
    frame: Jet3
    structure: Jet3
    gamma: Jet3
    torsion: Jet3
    nijenhuis: Jet3

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def reeb(self) -> np.ndarray:
        return np.real(self.frame.value[:, 0])


@dataclass(frozen=True)
class WebsterPack:
    """
    Webster–Tanaka curvature of a CR base at a point.

    ``curvature[K, L, I, J]`` is the curvature 2-form Ω_I^J(e_K, e_L) of the full
    connection, so the Webster curvature R_{αβ̄γ}^δ is ``curvature[α, β̄, γ, δ]``.
    ``ricci[γ, δ]`` is Ric_γ^δ and ``chern_moser[α, β, γ, δ]`` is S_{αβ̄γδ̄}.
    """

    solution: WebsterSolution
    connection: Jet3
    torsion_form: Jet3
    curvature: Jet3
    ricci: np.ndarray
    scalar: float
    schouten: np.ndarray
    rho: float
    chern_moser: np.ndarray
    ulambda: float
    ulambda_jet: Jet3 = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.solution.m


@dataclass(frozen=True)
class CREinsteinRecord:
    """
    Residuals of the CR–Einstein equations at one point.

    Attributes:
    ----------
    point: List[float] - The chart point
    a_res: float - max |A_{αβ}|
    div_n_res: float - max |∇^γ N_{γ(αβ)}|
    ricci_res: float - max |Ric_α^β − N_{αδγ}N^{βδγ} − Λ̲ δ_α^β|
    ulambda: float - Λ̲ at the point
    grad_ulambda_res: float - max |e_K Λ̲| over the frame
    """

    point: List[float]
    a_res: float
    div_n_res: float
    ricci_res: float
    ulambda: float
    grad_ulambda_res: float

    def passes(self, tol: float) -> bool:
        return max(self.a_res, self.div_n_res, self.ricci_res, self.grad_ulambda_res) < tol


def _coefficient(labels: Sequence[str], index: Tuple[int, int, int]) -> str:
    i, k, l = index
    return f"dtheta{labels[i]}(e{labels[k]},e{labels[l]})"


def _structure_defects(
    structure: np.ndarray, gamma: np.ndarray, torsion: np.ndarray, nijenhuis: np.ndarray, m: int
) -> Dict[str, Tuple[np.ndarray, object]]:
    """
    Defect arrays of the structure equations, each with a map from a defect
    index to the index of the dθ coefficient it is read from.
    """
    hol, anti = _blocks(m)
    expected0 = np.zeros_like(structure[0])
    expected0[hol, anti] = 1j * np.eye(m)
    expected0[anti, hol] = -1j * np.eye(m)

    g_hol = gamma[hol]
    g_reeb = gamma[0]
    predicted = np.einsum("gba->abg", g_hol) - np.einsum("bga->abg", g_hol)
    cyclic = (
        nijenhuis
        + np.einsum("gab->bga", nijenhuis)
        + np.einsum("abg->bga", nijenhuis)
    )
    return {
        "theta0": (structure[0] - expected0, lambda k, l: (0, k, l)),
        "hol_hol": (
            structure[hol, hol, hol] - predicted,
            lambda a, b, g: (1 + a, 1 + b, 1 + g),
        ),
        "reeb_connection": (
            g_reeb + g_reeb.conj().T,
            lambda b, a: (1 + a, 1 + b, 0),
        ),
        "torsion_symmetry": (
            torsion - torsion.T,
            lambda a, b: (1 + a, 0, m + 1 + b),
        ),
        "nijenhuis_cyclic": (
            cyclic,
            lambda b, g, a: (1 + a, m + 1 + b, m + 1 + g),
        ),
    }


def webster_solve(
    base: CRBase, pt: Sequence[float], order: int = MAX_ORDER, strict: bool = True
) -> WebsterSolution:
    """
    Solve the structure equations

        dθ⁰ = i δ_{αβ} θ^α∧θ̄^β,
        dθ^α = θ^β∧Γ_β^α + A^α_β̄ θ⁰∧θ̄^β − ½ N_{β̄γ̄}^α θ̄^β∧θ̄^γ

    of the unitarized coframe for the Webster–Tanaka connection, its torsion and
    the Nijenhuis tensor.

    The θ^β∧θ̄^γ and θ^β∧θ⁰ coefficients of dθ^α determine Γ_β^α along e_γ̄
    and e_0; the θ^β∧θ^γ coefficients must then agree with the anti-Hermitian
    extension of Γ along e_γ.

    Parameters
    ----------
    base : CRBase - The base.
    pt : Sequence[float] - The chart point.
    order : int - Jet order of the coframe, 2 or 3 (3 is needed for curvature derivatives).
    strict : bool - Raise StructureError when the equations cannot be solved consistently.

    Returns
    -------
    WebsterSolution - The solved data with jets one order below the coframe.
    """

    if not 2 <= order <= MAX_ORDER:
        raise ArgumentError(f"Webster solve needs coframe jets of order 2 or 3, got {order}")
    pt = np.asarray(pt, dtype=float)
    coframe = base.full_coframe(base.coordinates(pt, order))
    condition = float(np.linalg.cond(coframe.value))
    if not np.isfinite(condition) or condition > COFRAME_CONDITION_LIMIT:
        raise NumericError(
            f"{base.name}: ill-conditioned coframe at {list(pt)} (condition {condition:.3e})",
            condition,
        )
    frame = inv(coframe)
    d_theta = exterior_derivative(coframe)
    structure = einsum("ikb,bl->ikl", einsum("iab,ak->ikb", d_theta, frame), frame)

    m = base.m
    hol, anti = _blocks(m)
    mixed = structure[hol, hol, anti]
    gamma = concatenate(
        [
            stack([einsum("ab->ba", structure[hol, hol, 0])]),
            -einsum("bac->cba", mixed).conj(),
            einsum("abc->cba", mixed),
        ]
    )
    torsion = structure[hol, 0, anti].conj()
    nijenhuis = -einsum("abc->bca", structure[hol, anti, anti]).conj()

    solution = WebsterSolution(base, pt, frame, structure, gamma, torsion, nijenhuis)
    scale = 1.0 + max_abs(structure.value)
    defects = _structure_defects(
        structure.value, gamma.value, torsion.value, nijenhuis.value, m
    )
    for name, (defect, locate) in defects.items():
        worst = max_abs(defect)
        logger.debug("%s at %s: %s defect %.3e", base.name, list(pt), name, worst)
        if strict and worst > STRUCTURE_TOLERANCE * scale:
            index = np.unravel_index(int(np.argmax(np.abs(defect))), defect.shape)
            raise StructureError(
                f"{base.name}: structure equations are inconsistent at {list(pt)}",
                _coefficient(base.labels, locate(*index)),
                worst,
            )
    return solution


def reconstruct_structure(solution: WebsterSolution) -> np.ndarray:
    """
    dθ^α(e_K, e_L) reassembled from Γ, A and N.
    """
    m, dim = solution.m, solution.dim
    hol, anti = _blocks(m)
    gamma = solution.gamma.value
    torsion = solution.torsion.value
    nijenhuis = solution.nijenhuis.value
    out = np.zeros((m, dim, dim), dtype=complex)
    for b in range(m):
        out[:, 1 + b, :] += gamma[:, b, :].T
        out[:, :, 1 + b] -= gamma[:, b, :].T
    out[:, 0, anti] += torsion.conj()
    out[:, anti, 0] -= torsion.conj()
    out[:, anti, anti] -= np.einsum("bga->abg", nijenhuis.conj())
    return out


def structure_residuals(solution: WebsterSolution) -> Dict[str, Residual]:
    """
    Residuals of the solved structure equations: the round trip of dθ^α, the
    adapted form of dθ⁰ and each consistency condition.
    """
    hol, _ = _blocks(solution.m)
    structure = solution.structure.value
    results = {"theta": residual(reconstruct_structure(solution), structure[hol])}
    defects = _structure_defects(
        structure,
        solution.gamma.value,
        solution.torsion.value,
        solution.nijenhuis.value,
        solution.m,
    )
    scale = max_abs(structure)
    for name, (defect, _) in defects.items():
        results[name] = Residual(max_abs(defect), scale)
    return results


def connection_jet(solution: WebsterSolution) -> Jet3:
    """
    ω[K, I, J] = ω_I^J(e_K) of the full frame: Γ on the holomorphic block, its
    conjugate on the antiholomorphic block, e_0 parallel.
    """
    m, dim = solution.m, solution.dim
    hol, anti = _blocks(m)
    gamma = solution.gamma
    conjugate = concatenate([gamma[0:1], gamma[anti], gamma[hol]]).conj()
    everywhere = slice(None)
    return assemble(
        (dim, dim, dim),
        [((everywhere, hol, hol), gamma), ((everywhere, anti, anti), conjugate)],
    )


def torsion_jet(solution: WebsterSolution, connection: Jet3) -> Jet3:
    """
    T^J_{KL} = dθ^J(e_K, e_L) + ω_L^J(e_K) − ω_K^J(e_L), stored as [J, K, L].
    """
    return (
        solution.structure
        + einsum("kli->ikl", connection)
        - einsum("lki->ikl", connection)
    )


def frame_derivative(jet: Jet3, frame: Jet3) -> Jet3:
    """
    e_K of every component of a jet; the frame index is appended last.
    """
    return einsum("...z,zk->...k", jet.d(), frame)


def frame_covariant_derivative(
    tensor: Jet3, valence: Sequence[str], connection: Jet3, frame: Jet3
) -> Jet3:
    """
    Covariant derivative of a tensor in frame components; derivative slot first.

    Parameters
    ----------
    tensor : Jet3 - Frame components, every slot of size 2m+1.
    valence : Sequence[str] - UP or DOWN per slot.
    connection : Jet3 - ω[K, I, J] from connection_jet.
    frame : Jet3 - E[a, K].

    Returns
    -------
    Jet3 - ∇_q T, one order below the lower of tensor and connection.
    """

    if len(valence) != len(tensor.shape) or len(valence) > len(_SLOT_LETTERS):
        raise ArgumentError(f"valence {tuple(valence)} does not fit shape {tensor.shape}")
    slots = _SLOT_LETTERS[: len(valence)]
    nabla = einsum(f"{slots}z,zq->q{slots}", tensor.d(), frame)
    for letter, kind in zip(slots, valence):
        moved = slots.replace(letter, "p")
        if kind == DOWN:
            nabla = nabla - einsum(f"q{letter}p,{moved}->q{slots}", connection, tensor)
        elif kind == UP:
            nabla = nabla + einsum(f"qp{letter},{moved}->q{slots}", connection, tensor)
        else:
            raise ArgumentError(f"unknown valence {kind!r}")
    return nabla


def curvature_jet(solution: WebsterSolution, connection: Jet3) -> Jet3:
    """
    Ω_I^J(e_K, e_L) = dω_I^J(e_K, e_L) − (ω_I^P∧ω_P^J)(e_K, e_L), stored as [K, L, I, J].
    """
    d_connection = einsum("lija,ak->klij", connection.d(), solution.frame)
    return (
        d_connection
        - einsum("lkij->klij", d_connection)
        + einsum("mij,mkl->klij", connection, solution.structure)
        + einsum("lip,kpj->klij", connection, connection)
        - einsum("kip,lpj->klij", connection, connection)
    )


def chern_moser(curvature: np.ndarray, m: int) -> np.ndarray:
    """
    Totally trace-free part of the symmetrized Webster curvature R_{αβ̄γδ̄}.
    """
    hol, anti = _blocks(m)
    return trace_free_symmetric(curvature[hol, anti, hol, hol])


def trace_free_symmetric(lowered: np.ndarray) -> np.ndarray:
    """
    Symmetrize T_{αβ̄γδ̄} in (α, γ) and (β̄, δ̄) and remove all Levi traces.
    """
    m = lowered.shape[0]
    symmetric = 0.25 * (
        lowered
        + np.einsum("cbad->abcd", lowered)
        + np.einsum("adcb->abcd", lowered)
        + np.einsum("cdab->abcd", lowered)
    )
    trace = np.einsum("aacd->cd", symmetric)
    total = np.trace(trace)
    delta = np.eye(m)
    trace_delta = 0.25 * (
        np.einsum("ab,cd->abcd", trace, delta)
        + np.einsum("cb,ad->abcd", trace, delta)
        + np.einsum("ad,cb->abcd", trace, delta)
        + np.einsum("cd,ab->abcd", trace, delta)
    )
    delta_delta = 0.5 * (
        np.einsum("ab,cd->abcd", delta, delta) + np.einsum("cb,ad->abcd", delta, delta)
    )
    return (
        symmetric
        - 4.0 / (m + 2) * trace_delta
        + 2.0 * total / ((m + 1) * (m + 2)) * delta_delta
    )


def webster_curvature_from(solution: WebsterSolution) -> WebsterPack:
    if solution.frame.order < 3:
        raise ArgumentError("Webster curvature needs a solution from order-3 coframe jets")
    m = solution.m
    hol, anti = _blocks(m)
    connection = connection_jet(solution)
    torsion_form = torsion_jet(solution, connection)
    curvature = curvature_jet(solution, connection)

    ricci = einsum("aacd->cd", curvature[hol, anti, hol, hol])
    scalar = einsum("cc->", ricci)
    nijenhuis = solution.nijenhuis
    norm = einsum("abc,abc->", nijenhuis, nijenhuis.conj())
    ulambda = (scalar - norm) * (1.0 / m)

    sc = float(np.real(scalar.value))
    schouten = (ricci.value - sc / (2 * m + 2) * np.eye(m)) / (m + 2)
    pack = WebsterPack(
        solution=solution,
        connection=connection,
        torsion_form=torsion_form,
        curvature=curvature,
        ricci=ricci.value,
        scalar=sc,
        schouten=schouten,
        rho=sc / (2 * m + 2),
        chern_moser=chern_moser(curvature.value, m),
        ulambda=float(np.real(ulambda.value)),
        ulambda_jet=ulambda,
    )
    logger.debug(
        "Webster curvature of %s at %s: Sc=%.6e, Λ̲=%.6e",
        solution.base.name,
        list(solution.point),
        pack.scalar,
        pack.ulambda,
    )
    return pack


def webster_curvature(base: CRBase, pt: Sequence[float]) -> WebsterPack:
    """
    Webster–Tanaka curvature, Ricci and scalar curvature, Schouten tensor,
    Chern–Moser tensor and Λ̲ = (Sc − |N|²)/m of a base at a point.
    """
    return webster_curvature_from(webster_solve(base, pt, MAX_ORDER))


def random_test_function(
    point: Sequence[float], rng: np.random.Generator, order: int = MAX_ORDER
) -> Jet3:
    """
    Jet of a cubic polynomial with random complex coefficients.
    """
    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    coords = coordinate_jets(point, order)

    def coefficient() -> complex:
        return complex(rng.normal(), rng.normal())

    f = constant(coefficient(), point, order)
    for a in range(dim):
        f = f + coefficient() * coords[a] + coefficient() * coords[a] ** 3
        for b in range(a, dim):
            f = f + coefficient() * coords[a] * coords[b]
    return f


def commutation_residuals(pack: WebsterPack, functions: Sequence[Jet3]) -> Dict[str, Residual]:
    """
    Commutators of second covariant derivatives of functions:

        [∇_α, ∇_β̄] f = −i δ_{αβ} ∇_0 f
        [∇_α, ∇_0] f = A_{αβ} ∇_β̄ f
        [∇_α, ∇_β] f = N_{αβγ} ∇_γ̄ f
    """
    solution = pack.solution
    m = solution.m
    hol, anti = _blocks(m)
    frame = solution.frame
    torsion = solution.torsion.value
    nijenhuis = solution.nijenhuis.value
    omega = pack.connection.value
    blocks: Dict[str, List[Residual]] = {"hol_antihol": [], "hol_reeb": [], "hol_hol": []}
    for f in functions:
        gradient = einsum("a,ak->k", f.d(), frame)
        g = gradient.value
        second = einsum("la,ak->kl", gradient.d(), frame).value - np.einsum(
            "klp,p->kl", omega, g
        )
        commutator = second - second.T
        blocks["hol_antihol"].append(residual(commutator[hol, anti], -1j * g[0] * np.eye(m)))
        blocks["hol_reeb"].append(residual(commutator[hol, 0], torsion @ g[anti]))
        blocks["hol_hol"].append(
            residual(commutator[hol, hol], np.einsum("abg,g->ab", nijenhuis, g[anti]))
        )
    return {name: combine(values) for name, values in blocks.items()}


def _embedded(solution: WebsterSolution) -> Tuple[Jet3, Jet3]:
    m, dim = solution.m, solution.dim
    hol, _ = _blocks(m)
    torsion = assemble((dim, dim), [((hol, hol), solution.torsion)])
    nijenhuis = assemble((dim, dim, dim), [((hol, hol, hol), solution.nijenhuis)])
    return torsion, nijenhuis


def torsion_derivatives(pack: WebsterPack) -> Tuple[np.ndarray, np.ndarray]:
    """
    ∇A and ∇N in frame components, as [q, i, j] and [q, i, j, k].
    """
    solution = pack.solution
    torsion, nijenhuis = _embedded(solution)
    nabla_a = frame_covariant_derivative(
        torsion, (DOWN, DOWN), pack.connection, solution.frame
    )
    nabla_n = frame_covariant_derivative(
        nijenhuis, (DOWN, DOWN, DOWN), pack.connection, solution.frame
    )
    return nabla_a.value, nabla_n.value


def first_bianchi_residuals(pack: WebsterPack) -> Dict[str, Residual]:
    """
    The first Bianchi identities relating the Webster curvature to derivatives
    of the pseudo-Hermitian torsion and the Nijenhuis tensor:

        a: R_{βγ̄α}^δ − R_{βδ̄α}^γ = −N_{εβα} N̄_{γδε}
        b: R_{α0β}^γ = ∇_γ̄ A_{αβ} + Ā_{δγ} N_{δαβ}
        c: R_{βγα}^δ = ∇_δ̄ N_{βγα} − i(A_{αβ} δ_{δγ} − A_{αγ} δ_{δβ})
        d: ∇_0 N_{βγα} = −(∇_β A_{γα} − ∇_γ A_{βα})
        e: the cyclic sum of ∇_δ N_{βγα} over (δ, β, γ) vanishes
    """
    solution = pack.solution
    m = solution.m
    hol, anti = _blocks(m)
    r = pack.curvature.value
    a = solution.torsion.value
    n = solution.nijenhuis.value
    delta = np.eye(m)
    nabla_a, nabla_n = torsion_derivatives(pack)

    mixed = r[hol, anti, hol, hol]
    lhs_a = mixed - np.einsum("bdag->bgad", mixed)
    rhs_a = -np.einsum("eba,gde->bgad", n, n.conj())

    lhs_b = r[hol, 0, hol, hol]
    rhs_b = np.einsum("gab->abg", nabla_a[anti, hol, hol]) + np.einsum(
        "dg,dab->abg", a.conj(), n
    )

    lhs_c = r[hol, hol, hol, hol]
    rhs_c = np.einsum("dbga->bgad", nabla_n[anti, hol, hol, hol]) - 1j * (
        np.einsum("ab,dg->bgad", a, delta) - np.einsum("ag,db->bgad", a, delta)
    )

    lhs_d = nabla_n[0, hol, hol, hol]
    holomorphic_a = nabla_a[hol, hol, hol]
    rhs_d = -(holomorphic_a - np.einsum("gba->bga", holomorphic_a))

    y = nabla_n[hol, hol, hol, hol]
    cyclic_e = y + np.einsum("bgda->dbga", y) + np.einsum("gdba->dbga", y)

    return {
        "a": residual(lhs_a, rhs_a),
        "b": residual(lhs_b, rhs_b),
        "c": residual(lhs_c, rhs_c),
        "d": residual(lhs_d, rhs_d),
        "e": Residual(max_abs(cyclic_e), max_abs(y)),
    }


def _cyclic(x: np.ndarray) -> np.ndarray:
    return x + np.einsum("lmk...->klm...", x) + np.einsum("mkl...->klm...", x)


def torsion_bianchi_residuals(pack: WebsterPack) -> Dict[str, Residual]:
    """
    Bianchi identities of a connection with torsion, checked on the full frame:

        Σ R(e_K, e_L)e_M = Σ [T(T(e_K, e_L), e_M) + (∇_K T)(e_L, e_M)]
        Σ [(∇_K R)(e_L, e_M) + R(T(e_K, e_L), e_M)] = 0

    with cyclic sums over (K, L, M).
    """
    solution = pack.solution
    connection, frame = pack.connection, solution.frame
    torsion = pack.torsion_form
    curvature = pack.curvature
    t = torsion.value
    r = curvature.value

    nabla_t = frame_covariant_derivative(torsion, (UP, DOWN, DOWN), connection, frame).value
    first_rhs = np.einsum("pkl,jpm->klmj", t, t) + np.einsum("kjlm->klmj", nabla_t)
    first = residual(_cyclic(r), _cyclic(first_rhs))

    nabla_r = frame_covariant_derivative(
        curvature, (DOWN, DOWN, DOWN, UP), connection, frame
    ).value
    second_terms = nabla_r + np.einsum("pkl,pmij->klmij", t, r)
    second = Residual(max_abs(_cyclic(second_terms)), max(max_abs(nabla_r), max_abs(r)))
    return {"first": first, "second": second}


def cr_einstein_check(
    base: CRBase, pt: Sequence[float], pack: Optional[WebsterPack] = None
) -> CREinsteinRecord:
    """
    Residuals of the almost CR–Einstein equations

        A_{αβ} = 0,  ∇^γ N_{γ(αβ)} = 0,  Ric_α^β − N_{αδγ}N^{βδγ} = Λ̲ δ_α^β

    with Λ̲ = (Sc − |N|²)/m, and the variation of Λ̲ along the frame.

    Parameters
    ----------
    base : CRBase - The base.
    pt : Sequence[float] - The chart point.
    pack : WebsterPack, optional - A precomputed pack at pt.

    Returns
    -------
    CREinsteinRecord - The residual record.
    """

    if pack is None:
        pack = webster_curvature(base, pt)
    solution = pack.solution
    m = solution.m
    hol, anti = _blocks(m)
    n = solution.nijenhuis.value
    _, nabla_n = torsion_derivatives(pack)
    divergence = np.einsum("ggab->ab", nabla_n[anti, hol, hol, hol])
    squared = np.einsum("adg,bdg->ab", n, n.conj())
    gradient = frame_derivative(pack.ulambda_jet, solution.frame).value
    record = CREinsteinRecord(
        point=[float(x) for x in solution.point],
        a_res=max_abs(solution.torsion.value),
        div_n_res=max_abs(0.5 * (divergence + divergence.T)),
        ricci_res=max_abs(pack.ricci - squared - pack.ulambda * np.eye(m)),
        ulambda=pack.ulambda,
        grad_ulambda_res=max_abs(gradient),
    )
    logger.debug("CR-Einstein residuals of %s: %s", base.name, record)
    return record


def cr_einstein_constant(base: CRBase, points: Sequence[Sequence[float]]) -> Tuple[float, float]:
    """
    Mean and spread of Λ̲ over sample points.
    """
    if len(points) == 0:
        raise ArgumentError("no sample points")
    values = [webster_curvature(base, p).ulambda for p in points]
    mean = float(np.mean(values))
    spread = float(max(values) - min(values))
    logger.info("%s: Λ̲ = %.12g (spread %.3e over %d points)", base.name, mean, spread, len(values))
    return mean, spread
