import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from .curvature import MetricField, curvature_pack, einstein_residual
from .errors import ArgumentError, NumericError
from .jets import Jet3, constant, coordinate_jets, einsum, stack
from .manifest_compiler import ExpressionCompiler, ManifestOptions
from .manifest_nodes import Manifest
from .manifest_parser import parse
from .tensors import LeviFormPoint, exterior_derivative, unitarize
from .utils import Residual, residual

logger = logging.getLogger(__name__)

Builder = Callable[[Sequence[Jet3]], Jet3]

EINSTEIN_TOLERANCE = 1e-7


def chart_names(m: int) -> Tuple[str, ...]:
    names = ["t"]
    for a in range(1, m + 1):
        names += [f"x{a}", f"y{a}"]
    return tuple(names)


def frame_labels(m: int) -> Tuple[str, ...]:
    return ("0",) + tuple(str(a) for a in range(1, m + 1)) + tuple(
        f"{a}b" for a in range(1, m + 1)
    )


@dataclass(frozen=True)
class KahlerLift:
    """
    Kähler data a base was lifted from.

    Attributes:
    ----------
    potential: sympy.Expr - Kähler potential in the real coordinates x1, y1, ..., xm, ym
    m: int - Complex dimension of the Kähler base
    einstein_constant: float - Λ̃ with Ric = Λ̃ h̃ (0 for the flat branch)
    levi: Builder - coordinate jets of the (t, x, y) chart -> jet of K_{αβ̄}
    """

    potential: sympy.Expr
    m: int
    einstein_constant: float
    levi: Builder

    def hermitian_form(self, coords: Sequence[Jet3]) -> Jet3:
        """
        The pulled back Hermitian 2-form i K_{αβ̄}(dz^α⊗dz̄^β − dz̄^β⊗dz^α) in chart components.
        """
        z = _dz_rows(self.m)
        k = self.levi(coords)
        lowered = einsum("ka,kl->al", z, k)
        product = einsum("al,lb->ab", lowered, np.conj(z))
        return 1j * (product - einsum("ab->ba", product))


@dataclass(frozen=True)
class CRBase:
    """
    A chart (t, x1, y1, ..., xm, ym) on a contact almost CR manifold with an
    adapted coframe {θ⁰, θ^α} and Levi form.

    Attributes:
    ----------
    m: int - Holomorphic rank
    coframe_builder: Builder - coordinate jets -> jet of shape (m+1, 2m+1), row 0 the real θ⁰
    levi_builder: Builder, optional - coordinate jets -> jet of h_{αβ̄}; None for the identity
    name: str - Label used in reports
    coordinate_names: Tuple[str, ...] - Names of the chart coordinates
    z_radius: float, optional - Bound on |z| for sampling, None for the unit box
    einstein_constant: float, optional - The CR–Einstein constant when known in closed form
    kahler: KahlerLift, optional - Kähler data for lifted bases
    """

    m: int
    coframe_builder: Builder
    levi_builder: Optional[Builder] = None
    name: str = "base"
    coordinate_names: Tuple[str, ...] = ()
    z_radius: Optional[float] = None
    einstein_constant: Optional[float] = None
    kahler: Optional[KahlerLift] = None

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ArgumentError(f"holomorphic rank must be at least 1, got {self.m}")
        if not self.coordinate_names:
            object.__setattr__(self, "coordinate_names", chart_names(self.m))
        if len(self.coordinate_names) != self.dim:
            raise ArgumentError(
                f"{len(self.coordinate_names)} coordinate names for a {self.dim}-chart"
            )

    @property
    def dim(self) -> int:
        return 2 * self.m + 1

    @property
    def labels(self) -> Tuple[str, ...]:
        return frame_labels(self.m)

    def coframe(self, coords: Sequence[Jet3]) -> Jet3:
        rows = self.coframe_builder(coords) * (1.0 + 0.0j)
        if rows.shape != (self.m + 1, self.dim):
            raise ArgumentError(
                f"{self.name}: coframe of shape {rows.shape}, expected {(self.m + 1, self.dim)}"
            )
        theta0 = rows.value[0]
        if np.max(np.abs(theta0.imag)) > 1e-12 * (1 + np.max(np.abs(theta0))):
            raise ArgumentError(f"{self.name}: theta0 is not a real form")
        return rows

    def levi(self, coords: Sequence[Jet3]) -> LeviFormPoint:
        if self.levi_builder is None:
            return LeviFormPoint(constant(np.eye(self.m, dtype=complex), coords[0].point,
                                          coords[0].order))
        return LeviFormPoint(self.levi_builder(coords) * (1.0 + 0.0j))

    def unitary_coframe(self, coords: Sequence[Jet3]) -> Jet3:
        """
        The coframe with the θ^α rows transformed to an identity Levi form.
        """
        rows = self.coframe(coords)
        if self.levi_builder is None:
            return rows
        theta = unitarize(rows[1:], self.levi(coords))
        return stack([rows[0]] + [theta[a] for a in range(self.m)])

    def full_coframe(self, coords: Sequence[Jet3], unitary: bool = True) -> Jet3:
        """
        Jet of the (2m+1) x (2m+1) complex coframe matrix with rows θ⁰, θ^α, θ̄^α.
        """
        rows = self.unitary_coframe(coords) if unitary else self.coframe(coords)
        conj = rows[1:].conj()
        return stack([rows[a] for a in range(self.m + 1)] + [conj[a] for a in range(self.m)])

    def coordinates(self, pt: Sequence[float], order: int) -> List[Jet3]:
        pt = np.asarray(pt, dtype=float)
        if pt.shape != (self.dim,):
            raise ArgumentError(f"{self.name}: point of shape {pt.shape} on a {self.dim}-chart")
        return coordinate_jets(pt, order)


def _dz_rows(m: int) -> np.ndarray:
    z = np.zeros((m, 2 * m + 1), dtype=complex)
    for a in range(m):
        z[a, 1 + 2 * a] = 1.0
        z[a, 2 + 2 * a] = 1.0j
    return z


def heisenberg(m: int) -> CRBase:
    """
    The flat model: θ⁰ = dt + Σ(x dy − y dx), θ^α = dz^α, identity Levi form.
    """
    if m < 1:
        raise ArgumentError(f"heisenberg needs m >= 1, got {m}")
    dz = _dz_rows(m)

    def builder(coords: Sequence[Jet3]) -> Jet3:
        point, order = coords[0].point, coords[0].order
        one = constant(1.0, point, order)
        entries = [one]
        for a in range(m):
            entries += [-coords[2 + 2 * a], coords[1 + 2 * a]]
        theta0 = stack([e * (1.0 + 0.0j) for e in entries])
        theta = constant(dz, point, order)
        return stack([theta0] + [theta[a] for a in range(m)])

    return CRBase(m, builder, name="heisenberg", einstein_constant=0.0)


def _real_symbols(m: int) -> Tuple[sympy.Symbol, ...]:
    return tuple(sympy.Symbol(name, real=True) for name in chart_names(m)[1:])


def _levi_expressions(potential: sympy.Expr, m: int) -> List[List[sympy.Expr]]:
    xy = _real_symbols(m)
    rows = []
    for a in range(m):
        xa, ya = xy[2 * a], xy[2 * a + 1]
        row = []
        for b in range(m):
            xb, yb = xy[2 * b], xy[2 * b + 1]
            d_z = sympy.diff(potential, xa) - sympy.I * sympy.diff(potential, ya)
            entry = (sympy.diff(d_z, xb) + sympy.I * sympy.diff(d_z, yb)) / 4
            row.append(sympy.cancel(entry))
        rows.append(row)
    return rows


def _compile_matrix(
    compiler: ExpressionCompiler, exprs: Sequence[Sequence[sympy.Expr]]
) -> Builder:
    fields = [[compiler.compile(e) for e in row] for row in exprs]

    def builder(coords: Sequence[Jet3]) -> Jet3:
        return stack([stack([f(coords) * (1.0 + 0.0j) for f in row]) for row in fields])

    return builder


def _check_potential(potential: sympy.Expr, m: int) -> sympy.Expr:
    potential = sympy.sympify(potential)
    names = {s.name for s in _real_symbols(m)}
    free = {s.name for s in potential.free_symbols}
    if not free <= names:
        raise ArgumentError(
            f"Kähler potential depends on {sorted(free - names)}, expected only {sorted(names)}"
        )
    real = sympy.simplify(potential.subs({sympy.Symbol(n): sympy.Symbol(n, real=True)
                                          for n in free}))
    return real


def kahler_metric(potential: sympy.Expr, m: int) -> MetricField:
    """
    The Riemannian metric K_{αβ̄}(dz^α⊗dz̄^β + dz̄^β⊗dz^α) on the 2m-dimensional chart.
    """
    potential = _check_potential(potential, m)
    levi = _compile_matrix(ExpressionCompiler(_real_symbols(m)), _levi_expressions(potential, m))
    z = _dz_rows(m)[:, 1:]

    def builder(coords: List[Jet3]) -> Jet3:
        lowered = einsum("ka,kl->al", z, levi(coords))
        product = einsum("al,lb->ab", lowered, np.conj(z))
        return (product + einsum("ab->ba", product)).real

    return MetricField.from_coordinates(2 * m, (2 * m, 0), builder, name="kahler base")


def kahler_einstein_constant(
    potential: sympy.Expr, m: int, sample_points: Optional[np.ndarray] = None
) -> float:
    """
    Einstein constant Λ̃ (Ric = Λ̃ h̃) of the Kähler metric of a potential,
    computed by the curvature engine at sample points.

    Parameters
    ----------
    potential : sympy.Expr - The Kähler potential in x1, y1, ..., xm, ym.
    m : int - Complex dimension.
    sample_points : np.ndarray, optional - Points of shape (n, 2m); a fixed small set by default.

    Returns
    -------
    float - The Einstein constant.
    """

    metric = kahler_metric(potential, m)
    if sample_points is None:
        sample_points = np.random.default_rng(7).uniform(-0.5, 0.5, size=(4, 2 * m))
    constants = []
    for p in sample_points:
        if np.min(np.linalg.eigvalsh(metric.at(p, 0).value)) <= 0:
            raise ArgumentError(f"Kähler metric is not positive definite at {list(p)}")
        pack = curvature_pack(metric, p)
        value = pack.scalar / (2 * m)
        res = einstein_residual(pack, value)
        if res.max_rel > EINSTEIN_TOLERANCE:
            raise ArgumentError(
                f"Kähler base is not Einstein at {list(p)} (residual {res.max_rel:.3e})"
            )
        constants.append(value)
    spread = max(constants) - min(constants)
    if spread > EINSTEIN_TOLERANCE * (1 + abs(constants[0])):
        raise ArgumentError(f"Kähler Einstein constant varies by {spread:.3e}")
    value = float(np.mean(constants))
    logger.info("Kähler base Einstein constant %.12g", value)
    return value


def lift_from_kahler(
    potential: sympy.Expr,
    m: int,
    einstein_constant: Union[float, str] = 0.0,
    name: str = "kahler-lift",
    z_radius: Optional[float] = None,
) -> CRBase:
    """
    Circle-bundle lift of a Kähler base given by a potential K.

    θ⁰ = c dt + ½Σ(∂K/∂x^α dy^α − ∂K/∂y^α dx^α) with c = 1/Λ̃ (c = 1 when Λ̃ = 0), so
    that dθ⁰ is the pulled back Hermitian form; θ^α = dz^α with Levi form K_{αβ̄}.

    Parameters
    ----------
    potential : sympy.Expr - The potential in x1, y1, ..., xm, ym.
    m : int - Complex dimension of the base.
    einstein_constant : float | "derive" - Λ̃; "derive" computes it, non-zero values are verified.
    name : str - Base label.
    z_radius : float, optional - Sampling bound on |z|.

    Returns
    -------
    CRBase - The lifted base.
    """

    if m < 1:
        raise ArgumentError(f"Kähler lift needs m >= 1, got {m}")
    potential = _check_potential(potential, m)
    if isinstance(einstein_constant, str):
        if einstein_constant != "derive":
            raise ArgumentError(f"unknown Einstein constant {einstein_constant!r}")
        lam = kahler_einstein_constant(potential, m)
    else:
        lam = float(einstein_constant)
        if lam != 0:
            derived = kahler_einstein_constant(potential, m)
            if abs(derived - lam) > EINSTEIN_TOLERANCE * (1 + abs(lam)):
                raise ArgumentError(
                    f"Einstein constant {lam} does not match the base value {derived}"
                )
    scale = 1.0 / lam if lam != 0 else 1.0

    t = sympy.Symbol("t", real=True)
    xy = _real_symbols(m)
    compiler = ExpressionCompiler((t,) + xy)
    theta0 = [sympy.Float(scale)]
    for a in range(m):
        xa, ya = xy[2 * a], xy[2 * a + 1]
        theta0 += [-sympy.diff(potential, ya) / 2, sympy.diff(potential, xa) / 2]
    theta0_fields = [compiler.compile(e) for e in theta0]
    levi = _compile_matrix(compiler, _levi_expressions(potential, m))
    dz = _dz_rows(m)

    def builder(coords: Sequence[Jet3]) -> Jet3:
        point, order = coords[0].point, coords[0].order
        row = stack([f(coords) * (1.0 + 0.0j) for f in theta0_fields])
        theta = constant(dz, point, order)
        return stack([row] + [theta[a] for a in range(m)])

    return CRBase(
        m,
        builder,
        levi_builder=levi,
        name=name,
        z_radius=z_radius,
        einstein_constant=lam if lam != 0 else None,
        kahler=KahlerLift(potential, m, lam, levi),
    )


def fubini_study_potential(m: int) -> sympy.Expr:
    xy = _real_symbols(m)
    return sympy.log(1 + sum(s**2 for s in xy))


def fs_lift(m: int) -> CRBase:
    """
    Lift of the Fubini–Study metric, a CR–Einstein base with Λ̲ = m + 1.
    """
    if m < 2:
        raise ArgumentError(f"fs_lift needs m >= 2, got {m}")
    return lift_from_kahler(
        fubini_study_potential(m), m, einstein_constant="derive", name="fs-lift", z_radius=2.0
    )


def from_manifest(manifest: Manifest, options: ManifestOptions = ManifestOptions()) -> CRBase:
    """
    Compile a parsed manifest into a base.
    """
    m = manifest.m
    symbols = tuple(sympy.Symbol(n, real=True) for n in manifest.coordinate_names)
    compiler = ExpressionCompiler(symbols)
    rows = [
        [compiler.compile(c.expr) for c in manifest.forms[k].components] for k in range(m + 1)
    ]
    coframe = _compile_rows(rows)

    levi_builder = None
    if manifest.levi:
        entries = {}
        for entry in manifest.levi:
            entries[(entry.row - 1, entry.column - 1)] = compiler.compile(entry.value.expr)
        levi_builder = _hermitian_builder(m, entries)

    return CRBase(
        m,
        coframe,
        levi_builder=levi_builder,
        name=manifest.name,
        coordinate_names=tuple(manifest.coordinate_names),
    )


def _compile_rows(rows) -> Builder:
    def builder(coords: Sequence[Jet3]) -> Jet3:
        return stack([stack([f(coords) * (1.0 + 0.0j) for f in row]) for row in rows])

    return builder


def _hermitian_builder(m: int, entries) -> Builder:
    def builder(coords: Sequence[Jet3]) -> Jet3:
        point, order = coords[0].point, coords[0].order
        rows = []
        for a in range(m):
            row = []
            for b in range(m):
                if (a, b) in entries:
                    value = entries[(a, b)](coords) * (1.0 + 0.0j)
                elif (b, a) in entries:
                    value = (entries[(b, a)](coords) * (1.0 + 0.0j)).conj()
                else:
                    value = constant(1.0 + 0.0j if a == b else 0.0j, point, order)
                row.append(value)
            rows.append(stack(row))
        return stack(rows)

    return builder


def load_base(
    source: str, m: int, options: ManifestOptions = ManifestOptions(), dump_path: Optional[str] = None
) -> CRBase:
    """
    Resolve a base name: "heisenberg", "fs-lift" or "file:<path>" to a manifest.
    """
    if source == "heisenberg":
        return heisenberg(m)
    if source == "fs-lift":
        return fs_lift(m)
    if source.startswith("file:"):
        path = source[len("file:"):]
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise ArgumentError(f"cannot read base manifest {path}: {e.strerror}") from e
        manifest = parse(
            text, options, dump_json=dump_path is not None, dump_path=dump_path or "./out",
            name=source,
        )
        if manifest.m != m:
            raise ArgumentError(f"manifest {path} declares m={manifest.m}, run uses m={m}")
        return from_manifest(manifest, options)
    raise ArgumentError(f"unknown base {source!r}: use heisenberg, fs-lift or file:<path>")


def _contact_data(base: CRBase, pt: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    coords = base.coordinates(pt, 1)
    theta0 = base.coframe(coords)[0].real
    return theta0.value, exterior_derivative(theta0).value


def validate_adapted(base: CRBase, pt: Sequence[float]) -> Residual:
    """
    Residual of dθ⁰ = i h_{αβ̄} θ^α∧θ̄^β in frame components of the given coframe.
    """
    coords = base.coordinates(pt, 1)
    levi = base.levi(coords)
    full = base.full_coframe(coords, unitary=False)
    frame = np.linalg.inv(full.value)
    d_theta0 = exterior_derivative(full[0]).value
    components = frame.T @ d_theta0 @ frame
    m = base.m
    expected = np.zeros_like(components)
    hol = slice(1, m + 1)
    anti = slice(m + 1, 2 * m + 1)
    expected[hol, anti] = 1j * levi.h.value
    expected[anti, hol] = -1j * levi.h.value.T
    return residual(components, expected)


def contact_volume(base: CRBase, pt: Sequence[float]) -> float:
    """
    |θ⁰∧(dθ⁰)^m| up to normalization, as the square root of the bordered determinant.
    """
    theta0, d_theta0 = _contact_data(base, pt)
    bordered = np.zeros((base.dim + 1, base.dim + 1))
    bordered[:-1, :-1] = d_theta0
    bordered[:-1, -1] = theta0
    bordered[-1, :-1] = -theta0
    return float(np.sqrt(abs(np.linalg.det(bordered))))


def reeb(base: CRBase, pt: Sequence[float]) -> np.ndarray:
    """
    The Reeb vector field: θ⁰(e₀) = 1 and dθ⁰(e₀, ·) = 0.

    Returns
    -------
    np.ndarray - Chart components of e₀.
    """

    theta0, d_theta0 = _contact_data(base, pt)
    dim = base.dim
    bordered = np.zeros((dim + 1, dim + 1))
    bordered[:-1, :-1] = d_theta0.T
    bordered[:-1, -1] = theta0
    bordered[-1, :-1] = theta0
    cond = np.linalg.cond(bordered)
    if not np.isfinite(cond) or cond > 1e10:
        raise NumericError(f"{base.name}: contact degeneracy at {list(pt)} (condition {cond:.3e})",
                           cond)
    rhs = np.zeros(dim + 1)
    rhs[-1] = 1.0
    solution = np.linalg.solve(bordered, rhs)
    vector = solution[:-1]
    logger.debug("Reeb field of %s at %s: %s", base.name, list(pt), vector)
    return vector


def reeb_residuals(base: CRBase, pt: Sequence[float]) -> Tuple[float, float]:
    theta0, d_theta0 = _contact_data(base, pt)
    vector = reeb(base, pt)
    return abs(float(theta0 @ vector) - 1.0), float(np.max(np.abs(vector @ d_theta0)))


def lift_residual(base: CRBase, pt: Sequence[float]) -> Residual:
    """
    Residual of dθ⁰ against the pulled back Hermitian form of the Kähler base.
    """
    if base.kahler is None:
        raise ArgumentError(f"{base.name} is not a Kähler lift")
    coords = base.coordinates(pt, 1)
    d_theta0 = exterior_derivative(base.coframe(coords)[0]).value
    omega = base.kahler.hermitian_form(coords).value
    return residual(d_theta0, omega)
