import logging
from typing import Callable, Dict, List, Sequence

import sympy
from typing_extensions import override

from .errors import ArgumentError
from .jets import MAX_ORDER, Jet3, constant, jet_apply

logger = logging.getLogger(__name__)

JetField = Callable[[Sequence[Jet3]], Jet3]

# sympy function classes a manifest expression may apply, keyed by jet tag
ALLOWED_FUNCTIONS = {
    sympy.sin: "sin",
    sympy.cos: "cos",
    sympy.tan: "tan",
    sympy.sec: "sec",
    sympy.exp: "exp",
    sympy.log: "log",
    sympy.atan: "atan",
}


class ManifestOptions:
    def __init__(
        self,
        order: int = MAX_ORDER,
        dump_json: bool = False,
        dump_path: str = "./out",
    ):
        """
        Contains options for reading a base manifest

        Parameters
        ----------
        order : int, optional, default 3 - jet order the compiled coframe fields are evaluated to
        dump_json : bool, optional, default False - write the parsed manifest as manifest.json
        dump_path : str, optional, default "./out" - directory of the JSON dump
        """
        if not 1 <= order <= MAX_ORDER:
            raise ArgumentError(f"manifest jet order must lie in [1, {MAX_ORDER}]")
        self.order: int = order
        self.dump_json: bool = dump_json
        self.dump_path: str = dump_path


class ExpressionVisitor:
    """
    Walks a sympy expression tree, dispatching on the node class name.
    """

    def visit(self, node: sympy.Basic):
        visitor = getattr(self, "visit" + _method_suffix(node), None)
        if visitor is None:
            return self.visitDefault(node)
        return visitor(node)

    def visitDefault(self, node: sympy.Basic):
        raise ArgumentError(f"unsupported expression node {type(node).__name__}")


def _method_suffix(node: sympy.Basic) -> str:
    name = type(node).__name__
    return name[:1].upper() + name[1:]


class ExpressionCompiler(ExpressionVisitor):
    """
    Compiles a closed-form sympy expression in the chart coordinates into a
    jet field: a callable taking the coordinate jets of a point and returning
    the jet of the expression there.

    Sub-expressions without free symbols are folded to complex constants.
    """

    def __init__(self, symbols: Sequence[sympy.Symbol]):
        super().__init__()
        self._index: Dict[sympy.Symbol, int] = {s: i for i, s in enumerate(symbols)}

    def compile(self, expr: sympy.Basic) -> JetField:
        logger.debug("compiling %s", expr)
        return self.visit(sympy.sympify(expr))

    @override
    def visit(self, node: sympy.Basic) -> JetField:
        if not node.free_symbols:
            return self._constant(node)
        return super().visit(node)

    def _constant(self, node: sympy.Basic) -> JetField:
        try:
            value = complex(sympy.N(node, 17))
        except TypeError as e:
            raise ArgumentError(f"cannot evaluate constant {node}") from e
        c = value.real if value.imag == 0 else value

        def field(coords: Sequence[Jet3]) -> Jet3:
            return constant(c, coords[0].point, coords[0].order)

        return field

    def visitSymbol(self, node: sympy.Symbol) -> JetField:
        if node not in self._index:
            raise ArgumentError(f"unknown coordinate {node}")
        axis = self._index[node]
        return lambda coords: coords[axis]

    def visitAdd(self, node: sympy.Add) -> JetField:
        terms = [self.visit(arg) for arg in node.args]

        def field(coords: Sequence[Jet3]) -> Jet3:
            total = terms[0](coords)
            for term in terms[1:]:
                total = total + term(coords)
            return total

        return field

    def visitMul(self, node: sympy.Mul) -> JetField:
        factors = [self.visit(arg) for arg in node.args]

        def field(coords: Sequence[Jet3]) -> Jet3:
            product = factors[0](coords)
            for factor in factors[1:]:
                product = product * factor(coords)
            return product

        return field

    def visitPow(self, node: sympy.Pow) -> JetField:
        base, exponent = node.args
        b = self.visit(base)
        if exponent.is_Integer:
            n = int(exponent)
            return lambda coords: jet_apply("powi", b(coords), exponent=n)
        if exponent == sympy.Rational(1, 2):
            return lambda coords: jet_apply("sqrt", b(coords))
        if exponent == sympy.Rational(-1, 2):
            return lambda coords: jet_apply("reciprocal", jet_apply("sqrt", b(coords)))
        e = self.visit(exponent)
        return lambda coords: jet_apply("exp", e(coords) * jet_apply("log", b(coords)))

    def _function(self, node: sympy.Function) -> JetField:
        tag = ALLOWED_FUNCTIONS.get(node.func)
        if tag is None or len(node.args) != 1:
            raise ArgumentError(f"unsupported function {node.func}")
        arg = self.visit(node.args[0])
        return lambda coords: jet_apply(tag, arg(coords))

    visitSin = _function
    visitCos = _function
    visitTan = _function
    visitSec = _function
    visitExp = _function
    visitLog = _function
    visitAtan = _function


def disallowed_functions(expr: sympy.Basic) -> List[str]:
    names = []
    for f in expr.atoms(sympy.Function):
        if f.func not in ALLOWED_FUNCTIONS:
            names.append(str(f.func))
    return sorted(set(names))
