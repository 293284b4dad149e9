import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .curvature import curvature_pack
from .jets import assemble
from .robinson import ELL, SpacetimeModel, bce_coefficients, frame_blocks
from .tensors import DOWN
from .utils import Residual, max_abs
from .webster import frame_covariant_derivative, torsion_derivatives, webster_curvature_from

logger = logging.getLogger(__name__)

# Frame slots in family names: h = e_α, a = ē_α, l = ℓ, k = k.


@dataclass(frozen=True)
class CorpusData:
    """
    Values at a point of everything the closed-form curvature components are
    written in: λ, B, C, E and their φ-derivatives (``*_dot``), their ∇̲
    derivatives in the base frame (``nabla_*[q, ...]``, derivative slot first,
    base slots 0, 1..m, m+1..2m) and the Webster data of the base.
    """

    m: int
    lam: np.ndarray
    lam0: float
    b: np.ndarray
    b_mixed: np.ndarray
    c: np.ndarray
    e: np.ndarray
    e0: float
    b_dot: np.ndarray
    b_mixed_dot: np.ndarray
    c_dot: np.ndarray
    e_dot: np.ndarray
    e0_dot: float
    nabla_b: np.ndarray
    nabla_c: np.ndarray
    nabla_e: np.ndarray
    torsion: np.ndarray
    nijenhuis: np.ndarray
    nabla_torsion: np.ndarray
    nabla_nijenhuis: np.ndarray
    webster: np.ndarray
    webster_ricci: np.ndarray
    webster_scalar: float


def corpus_data(model: SpacetimeModel, pt: Sequence[float]) -> CorpusData:
    pt = np.asarray(pt, dtype=float)
    m = model.m
    size = 2 * m + 1
    hol, anti = slice(1, m + 1), slice(m + 1, 2 * m + 1)
    co = bce_coefficients(model, pt)
    pack = webster_curvature_from(co.solution)
    nabla_a, nabla_n = torsion_derivatives(pack)
    connection, frame = co.connection, co.frame

    b_full = assemble((size, size), [((hol, hol), co.b_hol), ((hol, anti), co.b_mixed)])
    c_full = assemble((size,), [((hol,), co.c), ((anti,), co.c.conj())])
    nabla_b = frame_covariant_derivative(b_full, (DOWN, DOWN), connection, frame)
    nabla_c = frame_covariant_derivative(c_full, (DOWN,), connection, frame)

    return CorpusData(
        m=m,
        lam=co.alpha.value,
        lam0=float(np.real(co.zero.value)),
        b=co.b_hol.value,
        b_mixed=co.b_mixed.value,
        c=co.c.value,
        e=co.e.value,
        e0=float(np.real(co.e0.value)),
        b_dot=co.b_hol.partial(0).value,
        b_mixed_dot=co.b_mixed.partial(0).value,
        c_dot=co.c.partial(0).value,
        e_dot=co.e.partial(0).value,
        e0_dot=float(np.real(co.e0.partial(0).value)),
        nabla_b=nabla_b.value,
        nabla_c=nabla_c.value,
        nabla_e=0.5 * co.nabla.partial(0).value,
        torsion=co.solution.torsion.value,
        nijenhuis=co.solution.nijenhuis.value,
        nabla_torsion=nabla_a,
        nabla_nijenhuis=nabla_n,
        webster=pack.curvature.value[hol, anti, hol, hol],
        webster_ricci=pack.ricci,
        webster_scalar=pack.scalar,
    )


def _parts(d: CorpusData):
    m = d.m
    hol, anti = slice(1, m + 1), slice(m + 1, 2 * m + 1)
    return m, hol, anti, np.eye(m)


def riemann_corpus(d: CorpusData) -> Dict[str, np.ndarray]:
    """
    The Riemann components R_{abcd} = g(R(e_a, e_b)e_d, e_c) of g in closed form.
    """
    m, hol, anti, delta = _parts(d)
    lam, lam_b = d.lam, d.lam.conj()
    e, e_b, e_dot = d.e, d.e.conj(), d.e_dot
    b, bm, c = d.b, d.b_mixed, d.c
    a, n = d.torsion, d.nijenhuis
    ne, nb, nc = d.nabla_e, d.nabla_b, d.nabla_c
    na, nn = d.nabla_torsion, d.nabla_nijenhuis
    i = 1j
    out = {}

    out["R_hkkh"] = np.zeros((m, m))
    out["R_akkh"] = -delta
    out["R_lkkh"] = e_dot - i * e
    out["R_hhkh"] = -2 * i * n
    out["R_hakh"] = -2 * i * np.einsum("a,bg->bga", e, delta) - i * np.einsum(
        "b,ag->bga", e, delta
    )
    out["R_hlkh"] = (
        -ne[hol, hol]
        + np.einsum("g,a->ga", lam, e_dot)
        + np.einsum("a,g->ga", e, e)
        + np.einsum("b,bag->ga", e_b, n)
        - 0.5 * i * a.T
        - i * b
    )
    out["R_alkh"] = (
        -ne[anti, hol]
        + np.einsum("b,a->ba", lam_b, e_dot)
        + np.einsum("a,b->ba", e, e_b)
        + i * d.e0 * delta
        - i * bm.T
    )
    out["R_lkkl"] = np.array(d.e0_dot - 2 * np.sum(np.abs(e) ** 2))
    hhhh = nn[hol, hol, hol, hol]
    out["R_hhhh"] = np.einsum("gabd->gdab", hhhh) - np.einsum("dabg->gdab", hhhh)
    out["R_hahh"] = (
        2 * i * np.einsum("ab,gd->gdab", b, delta)
        - i * (np.einsum("ga,bd->gdab", b, delta) - np.einsum("gb,ad->gdab", b, delta))
        - np.einsum("dabg->gdab", nn[anti, hol, hol, hol])
        + 0.5 * i * (np.einsum("ga,bd->gdab", a, delta) - np.einsum("gb,ad->gdab", a, delta))
    )
    out["R_haah"] = (
        np.einsum("gdab->gdba", d.webster)
        - 2 * i * np.einsum("ab,gd->gdba", bm, delta)
        - 2 * i * np.einsum("gd,ab->gdba", bm, delta)
        - i * np.einsum("gb,ad->gdba", bm, delta)
        - i * np.einsum("ad,gb->gdba", bm, delta)
        + np.einsum("eag,ebd->gdba", n, n.conj())
    )
    out["R_lkhl"] = (
        0.5 * ne[0, hol]
        - 0.5 * d.lam0 * e_dot
        + np.einsum("b,ab->a", e_b, b)
        + np.einsum("b,ab->a", e, bm)
        + i * c
        - d.c_dot
    )
    out["R_hlhh"] = (
        nb[hol, hol, hol]
        - np.einsum("g,ab->gab", lam, d.b_dot)
        + np.einsum("ad,bdg->gab", bm, n)
        - np.einsum("bd,adg->gab", bm, n)
        + 0.5 * (np.einsum("a,bg->gab", e, a) - np.einsum("b,ag->gab", e, a))
        + np.einsum("a,bg->gab", e, b)
        - np.einsum("b,ag->gab", e, b)
        - 0.5 * np.einsum("abg->gab", nn[0, hol, hol, hol])
    )
    out["R_hahl"] = (
        -np.einsum("gab->bga", nb[anti, hol, hol])
        + np.einsum("g,ab->bga", lam_b, d.b_dot)
        + np.einsum("bag->bga", nb[hol, hol, anti])
        - np.einsum("b,ag->bga", lam, d.b_mixed_dot)
        - 2 * np.einsum("a,bg->bga", e, bm)
        + np.einsum("b,ag->bga", e, bm)
        - np.einsum("g,ab->bga", e_b, b)
        + 2 * i * np.einsum("a,bg->bga", c, delta)
        - 0.5 * np.einsum("g,ab->bga", e_b, a)
        + np.einsum("gd,dab->bga", b.conj(), n)
        - 0.5 * np.einsum("gab->bga", na[anti, hol, hol])
        - 0.5 * np.einsum("gd,dab->bga", a.conj(), n)
    )
    out["R_hlhl"] = (
        -0.5 * nb[0, hol, hol].T
        + 0.5 * d.lam0 * d.b_dot.T
        + nc[hol, hol]
        - np.einsum("b,a->ba", lam, d.c_dot)
        - np.einsum("ag,bg->ba", bm, a)
        - np.einsum("a,b->ba", e, c)
        + np.einsum("ag,bg->ba", b, bm)
        - np.einsum("g,gab->ba", c.conj(), n)
        + np.einsum("bg,ag->ba", b, bm)
        + np.einsum("b,a->ba", e, c)
        - 0.5 * d.e0 * a.T
        - d.e0 * b.T
        - 0.25 * na[0, hol, hol].T
    )
    out["R_alhl"] = (
        -0.5 * nb[0, hol, anti].T
        + 0.5 * d.lam0 * d.b_mixed_dot.T
        + nc[anti, hol]
        - np.einsum("b,a->ba", lam_b, d.c_dot)
        - np.einsum("ag,bg->ba", b, a.conj())
        - np.einsum("a,b->ba", e, c.conj())
        + np.einsum("ag,bg->ba", b, b.conj())
        - np.einsum("ag,gb->ba", bm, bm)
        + np.einsum("b,a->ba", e_b, c)
        - d.e0 * bm.T
        - 0.25 * np.einsum("ag,bg->ba", a, a.conj())
    )
    return out


def ricci_corpus(d: CorpusData) -> Dict[str, np.ndarray]:
    """
    The Ricci components of g and its scalar curvature in closed form.
    """
    m, hol, anti, delta = _parts(d)
    lam, lam_b = d.lam, d.lam.conj()
    e, e_b, e_dot = d.e, d.e.conj(), d.e_dot
    b, bm, c = d.b, d.b_mixed, d.c
    a, n = d.torsion, d.nijenhuis
    ne, nb, nc = d.nabla_e, d.nabla_b, d.nabla_c
    na, nn = d.nabla_torsion, d.nabla_nijenhuis
    i = 1j
    e_norm = np.sum(np.abs(e) ** 2)
    div_e = np.trace(ne[hol, anti]) + np.trace(ne[anti, hol])
    lam_e_dot = lam @ e_dot.conj() + lam_b @ e_dot
    n_norm = np.sum(np.abs(n) ** 2)
    out = {}

    out["Ric_kk"] = np.array(2.0 * m)
    out["Ric_hk"] = e_dot - 4 * i * e
    divergence = np.einsum("ggab->ab", nn[anti, hol, hol, hol])
    out["Ric_hh"] = (
        ne[hol, hol]
        + ne[hol, hol].T
        - np.einsum("a,b->ab", lam, e_dot)
        - np.einsum("b,a->ab", lam, e_dot)
        - 2 * np.einsum("a,b->ab", e, e)
        + i * m * a
        + divergence
        + divergence.T
        - np.einsum("gab,g->ab", n, e_b)
        - np.einsum("gba,g->ab", n, e_b)
    )
    out["Ric_ha"] = (
        ne[hol, anti]
        + ne[anti, hol].T
        - np.einsum("a,b->ab", lam, e_dot.conj())
        - np.einsum("a,b->ab", e_dot, lam_b)
        - 2 * np.einsum("a,b->ab", e, e_b)
        - 4 * i * bm
        + d.webster_ricci
        - np.einsum("adg,bdg->ab", n, n.conj())
    )
    out["Ric_lk"] = np.array(div_e - lam_e_dot - 4 * e_norm + 2 * i * np.trace(bm) + d.e0_dot)
    out["Ric_lh"] = (
        ne[hol, 0]
        - 0.5 * ne[0, hol]
        - lam * d.e0_dot
        + 0.5 * d.lam0 * e_dot
        - 0.5 * np.einsum("a,ba->b", e_b, a)
        - 2 * np.einsum("a,ab->b", e_b, b)
        + 2 * np.einsum("a,ba->b", e, bm)
        - i * c
        + np.einsum("aab->b", nb[anti, hol, hol])
        - np.einsum("a,ab->b", lam_b, d.b_dot)
        - np.einsum("aba->b", nb[hol, hol, anti])
        + np.einsum("a,ba->b", lam, d.b_mixed_dot)
        + 0.5 * np.einsum("ag,agb->b", b.conj(), n)
        + 0.5 * np.einsum("aba->b", na[anti, hol, hol])
        + 0.5 * np.einsum("ag,bag->b", a.conj(), n)
    )
    out["Ric_ll"] = np.array(
        np.trace(nc[hol, anti])
        + np.trace(nc[anti, hol])
        - lam @ d.c_dot.conj()
        - lam_b @ d.c_dot
        - 0.5 * np.sum(np.abs(a) ** 2)
        + 2 * np.sum(np.abs(b) ** 2)
        - 2 * np.einsum("ab,ba->", bm, bm)
    )
    out["Sc"] = np.array(
        4 * div_e
        - 4 * lam_e_dot
        - 12 * e_norm
        + 2 * d.e0_dot
        - 4 * i * np.trace(bm)
        + 2 * d.webster_scalar
        - 2 * n_norm
    )
    return out


def _cyclic3(t: np.ndarray) -> np.ndarray:
    return t + np.einsum("bga->abg", t) + np.einsum("gab->abg", t)


def bianchi_corpus(d: CorpusData) -> Dict[str, np.ndarray]:
    """
    The first Bianchi identities of g in terms of B, C and E; each entry should vanish.
    """
    m, hol, anti, delta = _parts(d)
    lam, lam_b = d.lam, d.lam.conj()
    e, e_b, e_dot = d.e, d.e.conj(), d.e_dot
    b, bm, c = d.b, d.b_mixed, d.c
    b_dot, bm_dot, c_dot = d.b_dot, d.b_mixed_dot, d.c_dot
    a, n = d.torsion, d.nijenhuis
    ne, nb, nc = d.nabla_e, d.nabla_b, d.nabla_c
    i = 1j

    def skew(x: np.ndarray) -> np.ndarray:
        return x - x.T

    out = {}
    out["b_hol_dot"] = (
        b_dot
        + skew(ne[hol, hol])
        - skew(np.einsum("a,b->ab", lam, e_dot))
        - np.einsum("abg,g->ab", n, e_b)
    )
    out["b_mixed_dot"] = (
        bm_dot
        + ne[hol, anti]
        - ne[anti, hol].T
        - np.einsum("a,b->ab", lam, e_dot.conj())
        + np.einsum("a,b->ab", e_dot, lam_b)
        + i * d.e0 * delta
    )
    out["c_dot"] = (
        c_dot
        + ne[hol, 0]
        - ne[0, hol]
        - lam * d.e0_dot
        + d.lam0 * e_dot
        - np.einsum("ba,b->a", a, e_b)
    )
    t = (
        nb[hol, hol, hol]
        - np.einsum("a,bg->abg", lam, b_dot)
        + np.einsum("ad,bgd->abg", bm, n)
        + 2 * np.einsum("a,bg->abg", e, b)
    )
    out["b_hol_cyclic"] = _cyclic3(t) / 3.0
    hha = nb[hol, hol, anti]
    out["b_mixed_hol"] = (
        hha
        - np.einsum("bag->abg", hha)
        + np.einsum("gab->abg", nb[anti, hol, hol])
        - np.einsum("a,bg->abg", lam, bm_dot)
        + np.einsum("b,ag->abg", lam, bm_dot)
        - np.einsum("g,ab->abg", lam_b, b_dot)
        + 2 * np.einsum("a,bg->abg", e, bm)
        - 2 * np.einsum("b,ag->abg", e, bm)
        + 2 * np.einsum("g,ab->abg", e_b, b)
        - i * (np.einsum("a,bg->abg", c, delta) - np.einsum("b,ag->abg", c, delta))
        + np.einsum("abd,gd->abg", n, b.conj())
    )
    out["c_hol"] = (
        0.5 * skew(nc[hol, hol])
        - 0.5 * skew(np.einsum("a,b->ab", lam, c_dot))
        + 0.5 * nb[0, hol, hol]
        - 0.5 * d.lam0 * b_dot
        + skew(np.einsum("a,b->ab", e, c))
        + d.e0 * b
        + 0.5 * skew(np.einsum("ag,bg->ab", bm, a))
        - 0.5 * np.einsum("abg,g->ab", n, c.conj())
    )
    out["c_mixed"] = (
        nc[hol, anti]
        - nc[anti, hol].T
        - np.einsum("a,b->ab", lam, c_dot.conj())
        + np.einsum("a,b->ab", c_dot, lam_b)
        + nb[0, hol, anti]
        - d.lam0 * bm_dot
        + 2 * np.einsum("a,b->ab", e, c.conj())
        - 2 * np.einsum("a,b->ab", c, e_b)
        + 2 * d.e0 * bm
        - np.einsum("bg,ga->ab", b.conj(), a)
        - np.einsum("bg,ga->ab", a.conj(), b)
    )
    return out


_RIEMANN_SLOTS = {
    "R_hkkh": "hkkh",
    "R_akkh": "akkh",
    "R_lkkh": "lkkh",
    "R_hhkh": "hhkh",
    "R_hakh": "hakh",
    "R_hlkh": "hlkh",
    "R_alkh": "alkh",
    "R_lkkl": "lkkl",
    "R_hhhh": "hhhh",
    "R_hahh": "hahh",
    "R_haah": "haah",
    "R_lkhl": "lkhl",
    "R_hlhh": "hlhh",
    "R_hahl": "hahl",
    "R_hlhl": "hlhl",
    "R_alhl": "alhl",
}

_RICCI_SLOTS = {
    "Ric_kk": "kk",
    "Ric_hk": "hk",
    "Ric_hh": "hh",
    "Ric_ha": "ha",
    "Ric_lk": "lk",
    "Ric_lh": "lh",
    "Ric_ll": "ll",
}


def _select(tensor: np.ndarray, slots: str, m: int) -> np.ndarray:
    hol, anti, k = frame_blocks(m)
    index = {"h": hol, "a": anti, "l": ELL, "k": k}
    return tensor[tuple(index[s] for s in slots)]


@dataclass(frozen=True)
class CorpusRecord:
    """
    Residuals of the closed-form curvature corpus at one point, per component family.

    Attributes:
    ----------
    point: List[float] - The chart point
    riemann: Dict[str, Residual] - Riemann families, scaled by the largest frame component
    ricci: Dict[str, Residual] - Ricci families and the scalar curvature
    bianchi: Dict[str, Residual] - First Bianchi identities, each expected to vanish
    """

    point: List[float]
    riemann: Dict[str, Residual]
    ricci: Dict[str, Residual]
    bianchi: Dict[str, Residual]

    def families(self) -> Dict[str, Residual]:
        return {**self.riemann, **self.ricci, **self.bianchi}

    def worst(self) -> Residual:
        return max(self.families().values(), key=lambda r: r.max_rel)


def appendix_oracle(model: SpacetimeModel, pt: Sequence[float]) -> CorpusRecord:
    """
    Compare the closed-form Riemann, Ricci and scalar curvature of g with the
    numerically computed frame components, and evaluate the first Bianchi
    identities of B, C and E.

    Parameters
    ----------
    model : SpacetimeModel - A model from assemble_general or assemble_einstein.
    pt : Sequence[float] - The chart point (φ, base coordinates).

    Returns
    -------
    CorpusRecord - Residuals per component family.
    """

    pt = np.asarray(pt, dtype=float)
    m = model.m
    data = corpus_data(model, pt)
    pack = curvature_pack(model.metric, pt)
    riemann = model.to_frame(pack.riemann_lowered, pt)
    ricci = model.to_frame(pack.ricci, pt)

    r_scale = max_abs(riemann)
    riemann_res = {}
    for name, expected in riemann_corpus(data).items():
        found = _select(riemann, _RIEMANN_SLOTS[name], m)
        riemann_res[name] = Residual(max_abs(found - expected), r_scale)

    ric_scale = max(max_abs(ricci), abs(pack.scalar))
    ricci_res = {}
    closed = ricci_corpus(data)
    for name, slots in _RICCI_SLOTS.items():
        found = _select(ricci, slots, m)
        ricci_res[name] = Residual(max_abs(found - closed[name]), ric_scale)
    ricci_res["Sc"] = Residual(abs(pack.scalar - complex(closed["Sc"])), ric_scale)

    b_scale = max(
        max_abs(data.nabla_b), max_abs(data.nabla_c), max_abs(data.nabla_e),
        max_abs(data.b_dot), max_abs(data.c_dot), max_abs(data.e_dot), 1.0,
    )
    bianchi_res = {
        name: Residual(max_abs(value), b_scale) for name, value in bianchi_corpus(data).items()
    }
    record = CorpusRecord([float(x) for x in pt], riemann_res, ricci_res, bianchi_res)
    worst = record.worst()
    logger.debug("corpus residual of %s at %s: %.3e", model.name, list(pt), worst.max_rel)
    return record
