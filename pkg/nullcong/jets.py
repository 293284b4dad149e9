import itertools
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ArgumentError, EvaluationError, NumericError

MAX_ORDER = 3

# einsum letters reserved for derivative slots; user subscripts are lowercase
_DERIVATIVE_LETTERS = "WXYZ"

ELEMENTARY_FUNCTIONS = (
    "sin",
    "cos",
    "tan",
    "sec",
    "exp",
    "log",
    "atan",
    "sqrt",
    "powi",
    "reciprocal",
)

Number = Union[int, float, complex]


class Jet3:
    """
    Value and all partial derivatives (up to order 3) of a tensor-valued field at
    one point of a d-coordinate chart.

    ``parts[k]`` has shape ``shape + (d,) * k`` and holds the k-th partial
    derivatives in its trailing axes, which are totally symmetric. Jets are
    immutable by convention; every operation returns a new jet whose order is the
    minimum order of its operands.

    Attributes:
    ----------
    parts: Tuple[np.ndarray, ...] - The value followed by the derivative arrays
    point: np.ndarray - The chart point the jet was taken at
    """

    __slots__ = ("parts", "point")
    __array_ufunc__ = None

    def __init__(self, parts: Sequence[np.ndarray], point: Sequence[float]) -> None:
        if not 1 <= len(parts) <= MAX_ORDER + 1:
            raise ArgumentError(f"a jet holds 1 to {MAX_ORDER + 1} parts, got {len(parts)}")
        self.parts: Tuple[np.ndarray, ...] = tuple(np.asarray(p) for p in parts)
        self.point: np.ndarray = np.asarray(point, dtype=float)

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(shape={self.shape}, dim={self.dim}, "
            f"order={self.order}, value={self.value!r})"
        )

    @property
    def dim(self) -> int:
        return self.point.shape[0]

    @property
    def order(self) -> int:
        return len(self.parts) - 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.parts[0].shape

    @property
    def value(self) -> np.ndarray:
        return self._part(0)

    @property
    def grad(self) -> np.ndarray:
        return self._part(1)

    @property
    def hess(self) -> np.ndarray:
        return self._part(2)

    @property
    def third(self) -> np.ndarray:
        return self._part(3)

    def _part(self, k: int) -> np.ndarray:
        if k > self.order:
            raise ArgumentError(
                f"jet of order {self.order} carries no derivatives of order {k}"
            )
        return self.parts[k]

    def truncate(self, order: int) -> "Jet3":
        if order > self.order:
            raise ArgumentError(f"cannot raise jet order {self.order} to {order}")
        return _wrap(self.parts[: order + 1], self.point)

    def d(self) -> "Jet3":
        """
        The jet of the gradient field: one extra trailing axis, one order less.
        """
        if self.order < 1:
            raise ArgumentError("jet order insufficient for a derivative")
        return _wrap(self.parts[1:], self.point)

    def partial(self, axis: int) -> "Jet3":
        if not 0 <= axis < self.dim:
            raise ArgumentError(f"axis {axis} out of range for dimension {self.dim}")
        if self.order < 1:
            raise ArgumentError("jet order insufficient for a derivative")
        return _wrap([p[..., axis] for p in self.parts[1:]], self.point)

    def conj(self) -> "Jet3":
        return _wrap([np.conj(p) for p in self.parts], self.point)

    @property
    def real(self) -> "Jet3":
        return _wrap([np.real(p) for p in self.parts], self.point)

    @property
    def imag(self) -> "Jet3":
        return _wrap([np.imag(p) for p in self.parts], self.point)

    def sum(self, axis: int = 0) -> "Jet3":
        if not 0 <= axis < len(self.shape):
            raise ArgumentError(f"cannot sum over axis {axis} of shape {self.shape}")
        return _wrap([p.sum(axis=axis) for p in self.parts], self.point)

    def __getitem__(self, key) -> "Jet3":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise ArgumentError("jets index their leading axes only")
        return _wrap([p[key] for p in self.parts], self.point)

    def __neg__(self) -> "Jet3":
        return _wrap([-p for p in self.parts], self.point)

    def __add__(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            _check_same_point(self, other)
            order = min(self.order, other.order)
            return _wrap(
                [self.parts[k] + other.parts[k] for k in range(order + 1)], self.point
            )
        c = np.asarray(other)
        shape = np.broadcast_shapes(self.shape, c.shape)
        parts = [self.parts[0] + c]
        for k, p in enumerate(self.parts[1:], start=1):
            parts.append(np.broadcast_to(p, shape + (self.dim,) * k).copy())
        return _wrap(parts, self.point)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet3":
        return self + (-other)

    def __rsub__(self, other) -> "Jet3":
        return (-self) + other

    def __mul__(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            return einsum("...,...->...", self, other)
        c = np.asarray(other)
        return _wrap(
            [p * c.reshape(c.shape + (1,) * k) for k, p in enumerate(self.parts)],
            self.point,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            return self * jet_apply("reciprocal", other)
        c = np.asarray(other)
        if np.any(c == 0):
            raise EvaluationError("division by a zero constant", self.point)
        return self * (1.0 / c)

    def __rtruediv__(self, other) -> "Jet3":
        return jet_apply("reciprocal", self) * other

    def __pow__(self, exponent: int) -> "Jet3":
        return jet_apply("powi", self, exponent=exponent)


class ComplexJet3(Jet3):
    """
    A jet with complex entries, e.g. of the complex coframe components.
    """

    __slots__ = ()


def _wrap(parts: Sequence[np.ndarray], point: np.ndarray) -> Jet3:
    if any(np.iscomplexobj(p) for p in parts):
        return ComplexJet3(parts, point)
    return Jet3(parts, point)


def _check_same_point(a: Jet3, b: Jet3) -> None:
    if a.dim != b.dim:
        raise ArgumentError(f"jets live on charts of dimension {a.dim} and {b.dim}")


@lru_cache(maxsize=None)
def _canonical_index(dim: int, n: int) -> np.ndarray:
    index = np.empty(dim**n, dtype=np.intp)
    for flat, multi in enumerate(itertools.product(range(dim), repeat=n)):
        index[flat] = np.ravel_multi_index(tuple(sorted(multi)), (dim,) * n)
    return index


def _symmetrize(part: np.ndarray, n: int, dim: int) -> np.ndarray:
    """
    Copy every derivative entry from its sorted index so the trailing n axes are
    exactly symmetric.
    """
    if n < 2:
        return part
    lead = part.shape[: part.ndim - n]
    flat = part.reshape(lead + (dim**n,))
    return flat[..., _canonical_index(dim, n)].reshape(part.shape)


def _parse_subscripts(subscripts: str, count: int) -> Tuple[List[str], str]:
    if "->" not in subscripts:
        raise ArgumentError(f"explicit output subscripts required: {subscripts!r}")
    inputs, output = subscripts.replace(" ", "").split("->")
    specs = inputs.split(",")
    if len(specs) != count:
        raise ArgumentError(f"{subscripts!r} expects {len(specs)} operands, got {count}")
    if any(letter in subscripts for letter in _DERIVATIVE_LETTERS):
        raise ArgumentError(f"subscripts {subscripts!r} use reserved letters")
    return specs, output


def einsum(subscripts: str, *operands) -> Jet3:
    """
    Contract one or two jets (or a jet and a constant array) by numpy einsum
    subscripts, applying the Leibniz rule to the derivative parts.

    Parameters
    ----------
    subscripts : str - Explicit einsum subscripts over the leading axes, e.g. "ab,bc->ac".
    operands : Jet3 | np.ndarray - One or two operands, at least one of them a jet.

    Returns
    -------
    Jet3 - The contracted jet.
    """

    specs, output = _parse_subscripts(subscripts, len(operands))
    jets = [op for op in operands if isinstance(op, Jet3)]
    if not jets:
        raise ArgumentError("einsum needs at least one jet operand")
    dim = jets[0].dim
    point = jets[0].point
    letters = _DERIVATIVE_LETTERS

    if len(operands) == 1:
        (jet,) = operands
        parts = [
            np.einsum(f"{specs[0]}{letters[:k]}->{output}{letters[:k]}", p)
            for k, p in enumerate(jet.parts)
        ]
        return _wrap(parts, point)

    a, b = operands
    if not isinstance(a, Jet3) or not isinstance(b, Jet3):
        jet, const = (a, b) if isinstance(a, Jet3) else (b, a)
        parts = []
        for k, p in enumerate(jet.parts):
            tail = letters[:k]
            if jet is a:
                subscripts = f"{specs[0]}{tail},{specs[1]}->{output}{tail}"
                parts.append(np.einsum(subscripts, p, np.asarray(const)))
            else:
                subscripts = f"{specs[0]},{specs[1]}{tail}->{output}{tail}"
                parts.append(np.einsum(subscripts, np.asarray(const), p))
        return _wrap(parts, point)

    _check_same_point(a, b)
    parts = []
    for n in range(min(a.order, b.order) + 1):
        total = None
        for k in range(n + 1):
            for chosen in itertools.combinations(range(n), k):
                la = "".join(letters[i] for i in chosen)
                lb = "".join(letters[i] for i in range(n) if i not in chosen)
                term = np.einsum(
                    f"{specs[0]}{la},{specs[1]}{lb}->{output}{letters[:n]}",
                    a.parts[k],
                    b.parts[n - k],
                )
                total = term if total is None else total + term
        parts.append(_symmetrize(total, n, dim))
    return _wrap(parts, point)


def lift_coordinate(
    point: Sequence[float], axis: int, order: int = MAX_ORDER
) -> Jet3:
    """
    The jet of the coordinate function x^axis at a point.

    Parameters
    ----------
    point : Sequence[float] - The chart point.
    axis : int - The coordinate index, 0 <= axis < len(point).
    order : int - The jet order, at most 3.

    Returns
    -------
    Jet3 - value point[axis], gradient the axis-th basis vector, higher parts zero.
    """

    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    if not 0 <= axis < dim:
        raise ArgumentError(f"axis {axis} out of range for a {dim}-dimensional chart")
    if not 0 <= order <= MAX_ORDER:
        raise ArgumentError(f"jet order must lie in [0, {MAX_ORDER}], got {order}")
    parts = [np.array(point[axis])]
    for k in range(1, order + 1):
        parts.append(np.zeros((dim,) * k))
    if order >= 1:
        parts[1][axis] = 1.0
    return Jet3(parts, point)


def coordinate_jets(point: Sequence[float], order: int = MAX_ORDER) -> List[Jet3]:
    return [lift_coordinate(point, axis, order) for axis in range(len(point))]


def constant(
    value: Union[Number, np.ndarray], point: Sequence[float], order: int = MAX_ORDER
) -> Jet3:
    value = np.asarray(value)
    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    parts = [value.copy()]
    for k in range(1, order + 1):
        parts.append(np.zeros(value.shape + (dim,) * k, dtype=value.dtype))
    return _wrap(parts, point)


def stack(jets: Sequence[Jet3]) -> Jet3:
    """
    Stack equally shaped jets along a new leading axis.
    """
    if not jets:
        raise ArgumentError("nothing to stack")
    order = min(j.order for j in jets)
    parts = [np.stack([j.parts[k] for j in jets]) for k in range(order + 1)]
    return _wrap(parts, jets[0].point)


def embed(jet: Jet3, point: Sequence[float], axes: Sequence[int]) -> Jet3:
    """
    Re-express a jet taken on a sub-chart in a larger chart whose coordinates
    ``axes`` are the sub-chart coordinates; the remaining derivatives vanish.

    Parameters
    ----------
    jet : Jet3 - The jet on the sub-chart.
    point : Sequence[float] - The point of the larger chart.
    axes : Sequence[int] - Positions of the sub-chart coordinates in the larger chart.

    Returns
    -------
    Jet3 - The embedded jet.
    """

    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    axes = list(axes)
    if len(axes) != jet.dim:
        raise ArgumentError(f"{len(axes)} axes given for a jet of dimension {jet.dim}")
    parts = [jet.parts[0].copy()]
    for n, p in enumerate(jet.parts[1:], start=1):
        out = np.zeros(jet.shape + (dim,) * n, dtype=p.dtype)
        out[(Ellipsis,) + np.ix_(*([axes] * n))] = p
        parts.append(out)
    return _wrap(parts, point)


def inv(a: Jet3) -> Jet3:
    """
    Jet of the inverse of a square-matrix valued jet, order by order from A·A⁻¹ = 1.
    """
    if len(a.shape) != 2 or a.shape[0] != a.shape[1]:
        raise ArgumentError(f"cannot invert a jet of shape {a.shape}")
    try:
        v = np.linalg.inv(a.value)
    except np.linalg.LinAlgError as e:
        raise NumericError(
            f"singular matrix (det={np.linalg.det(a.value):.3e})",
            np.linalg.det(a.value),
        ) from e
    letters = _DERIVATIVE_LETTERS
    parts = [v]
    for n in range(1, a.order + 1):
        total = None
        for k in range(1, n + 1):
            for chosen in itertools.combinations(range(n), k):
                la = "".join(letters[i] for i in chosen)
                lb = "".join(letters[i] for i in range(n) if i not in chosen)
                term = np.einsum(
                    f"ij{la},jk{lb}->ik{letters[:n]}", a.parts[k], parts[n - k]
                )
                total = term if total is None else total + term
        part = -np.einsum(f"ij,jk{letters[:n]}->ik{letters[:n]}", v, total)
        parts.append(_symmetrize(part, n, a.dim))
    return _wrap(parts, a.point)


def _powi_derivatives(x: np.ndarray, n: int) -> List[np.ndarray]:
    out = []
    coef = 1.0
    for k in range(MAX_ORDER + 1):
        if coef == 0:
            out.append(np.zeros_like(x))
        else:
            out.append(coef * x ** (n - k))
        coef *= n - k
    return out


def _elementary_derivatives(
    tag: str, x: np.ndarray, point: np.ndarray, exponent: Optional[int]
) -> List[np.ndarray]:
    is_real = not np.iscomplexobj(x)
    if tag == "sin":
        s, c = np.sin(x), np.cos(x)
        return [s, c, -s, -c]
    if tag == "cos":
        s, c = np.sin(x), np.cos(x)
        return [c, -s, -c, s]
    if tag == "exp":
        e = np.exp(x)
        return [e, e, e, e]
    if tag in ("tan", "sec"):
        c = np.cos(x)
        if np.any(np.abs(c) < 1e-14):
            raise EvaluationError(f"{tag} evaluated where cos vanishes", point)
        t = np.sin(x) / c
        if tag == "tan":
            u = 1 + t * t
            return [t, u, 2 * t * u, 2 * u * (1 + 3 * t * t)]
        s = 1 / c
        return [s, s * t, s * (t * t + s * s), s * t**3 + 5 * s**3 * t]
    if tag == "log":
        if np.any(x == 0) or (is_real and np.any(x < 0)):
            raise EvaluationError("log outside its domain", point)
        return [np.log(x), 1 / x, -1 / x**2, 2 / x**3]
    if tag == "atan":
        u = 1 + x * x
        if np.any(u == 0):
            raise EvaluationError("atan at a branch point", point)
        return [np.arctan(x), 1 / u, -2 * x / u**2, (6 * x * x - 2) / u**3]
    if tag == "sqrt":
        if np.any(x == 0) or (is_real and np.any(x < 0)):
            raise EvaluationError("sqrt outside its differentiable domain", point)
        r = np.sqrt(x)
        return [r, 1 / (2 * r), -1 / (4 * x * r), 3 / (8 * x * x * r)]
    if tag == "reciprocal":
        if np.any(x == 0):
            raise EvaluationError("division by a zero value", point)
        return [1 / x, -1 / x**2, 2 / x**3, -6 / x**4]
    if tag == "powi":
        if exponent is None or int(exponent) != exponent:
            raise ArgumentError(f"powi needs an integer exponent, got {exponent!r}")
        if exponent < 0 and np.any(x == 0):
            raise EvaluationError("negative power of a zero value", point)
        return _powi_derivatives(x, int(exponent))
    raise ArgumentError(f"unknown elementary function {tag!r}")


def jet_apply(tag: str, x: Jet3, exponent: Optional[int] = None) -> Jet3:
    """
    Apply an elementary function entrywise, composing derivatives by the chain
    rule (Faà di Bruno) to the order of the argument.

    Parameters
    ----------
    tag : str - One of ELEMENTARY_FUNCTIONS.
    x : Jet3 - The argument.
    exponent : int, optional - The exponent for "powi".

    Returns
    -------
    Jet3 - The jet of f∘x.
    """

    f = _elementary_derivatives(tag, x.parts[0], x.point, exponent)
    u = x.parts
    parts = [f[0]]
    if x.order >= 1:
        parts.append(f[1][..., None] * u[1])
    if x.order >= 2:
        square = u[1][..., :, None] * u[1][..., None, :]
        parts.append(f[2][..., None, None] * square + f[1][..., None, None] * u[2])
    if x.order >= 3:
        u1, u2 = u[1], u[2]
        cube = u1[..., :, None, None] * u1[..., None, :, None] * u1[..., None, None, :]
        mixed = (
            u2[..., :, :, None] * u1[..., None, None, :]
            + u2[..., :, None, :] * u1[..., None, :, None]
            + u2[..., None, :, :] * u1[..., :, None, None]
        )
        parts.append(
            f[3][..., None, None, None] * cube
            + f[2][..., None, None, None] * mixed
            + f[1][..., None, None, None] * u[3]
        )
    return _wrap([_symmetrize(p, k, x.dim) for k, p in enumerate(parts)], x.point)


def jet_arith(op: str, a: Jet3, b: Jet3) -> Jet3:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if isinstance(b, Jet3) and np.any(b.value == 0):
            raise EvaluationError("division by a zero value", b.point)
        return a / b
    raise ArgumentError(f"unknown arithmetic operation {op!r}")


def along(jet: Jet3, vector: Union[Jet3, np.ndarray]) -> Jet3:
    """
    Directional derivative v^a ∂_a of every component of a jet.
    """
    return einsum("...a,a->...", jet.d(), vector)


def concatenate(jets: Sequence[Jet3], axis: int = 0) -> Jet3:
    """
    Join jets along an existing leading axis.
    """
    if not jets:
        raise ArgumentError("nothing to concatenate")
    if not 0 <= axis < len(jets[0].shape):
        raise ArgumentError(f"cannot concatenate along axis {axis} of shape {jets[0].shape}")
    order = min(j.order for j in jets)
    parts = [np.concatenate([j.parts[k] for j in jets], axis=axis) for k in range(order + 1)]
    return _wrap(parts, jets[0].point)


def assemble(shape: Tuple[int, ...], blocks: Sequence[Tuple[tuple, Jet3]]) -> Jet3:
    """
    Jet of an array of the given shape whose entries at each block index are
    taken from the block's jet; all other entries vanish.

    Parameters
    ----------
    shape : Tuple[int, ...] - Shape of the assembled value.
    blocks : Sequence[Tuple[tuple, Jet3]] - (index into the leading axes, jet) pairs.

    Returns
    -------
    Jet3 - The assembled jet, of the lowest block order.
    """

    if not blocks:
        raise ArgumentError("nothing to assemble")
    first = blocks[0][1]
    order = min(jet.order for _, jet in blocks)
    dtype = np.result_type(*[jet.parts[0].dtype for _, jet in blocks])
    parts = []
    for k in range(order + 1):
        out = np.zeros(tuple(shape) + (first.dim,) * k, dtype=dtype)
        for index, jet in blocks:
            out[index] = jet.parts[k]
        parts.append(out)
    return _wrap(parts, first.point)
