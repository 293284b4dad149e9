import logging
import os
import re
from typing import Dict, List, Optional, Tuple

import simplejson
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from .manifest_compiler import ManifestOptions, disallowed_functions
from .manifest_error_listener import ManifestErrorListener
from .manifest_nodes import (
    CoordinatesDeclaration,
    ExpressionNode,
    FormDeclaration,
    LeviEntry,
    Location,
    Manifest,
    RankDeclaration,
)
from .utils import string_from_snake_to_camel_case

logger = logging.getLogger(__name__)

_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_FORM = re.compile(r"^theta(\d+)$")
_RESERVED = {"I", "E", "pi", "sin", "cos", "tan", "sec", "exp", "log", "atan", "sqrt", "powi"}


class ManifestParserError(Exception):
    """
    An exception raised when a base manifest cannot be read.
    """

    def __init__(self, errors) -> None:
        """
        Parameters
        ----------
        errors : List[ManifestError] - The errors collected while reading the manifest.
        """
        error = errors[0]
        self.message = f"{error.message} ({error.line}:{error.column})"
        self.errors = errors
        super().__init__(self.message)


def _split_components(text: str, offset: int) -> List[Tuple[str, int]]:
    """
    Split a comma separated list at parenthesis depth zero, keeping the column
    of each stripped item.
    """
    items = []
    depth = 0
    start = 0
    for i, ch in enumerate(text + ","):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            raw = text[start:i]
            lead = len(raw) - len(raw.lstrip())
            items.append((raw.strip(), offset + start + lead))
            start = i + 1
    return items


def _is_real(expr: sympy.Expr) -> bool:
    """
    True when the imaginary part of expr vanishes identically for real coordinates.
    """
    return sympy.simplify(sympy.im(sympy.expand_complex(expr))) == 0


class _ManifestReader:
    def __init__(self, listener: ManifestErrorListener) -> None:
        self._listener = listener
        self.rank: Optional[RankDeclaration] = None
        self.coordinates: Optional[CoordinatesDeclaration] = None
        self.forms: Dict[int, FormDeclaration] = {}
        self.levi: List[LeviEntry] = []
        self._symbols: Dict[str, sympy.Symbol] = {}
        self._pending: List[Tuple[int, int, str, object]] = []

    def error(self, line: int, column: int, msg: str) -> None:
        self._listener.declaration_error(line, column, msg)

    def expression_error(self, line: int, column: int, msg: str, source: str) -> None:
        self._listener.expression_error(line, column, msg, source)

    def read(self, input_string: str) -> None:
        for number, raw in enumerate(input_string.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            column = len(line) - len(line.lstrip())
            keyword, _, rest = line.strip().partition(" ")
            rest_column = column + len(keyword) + 1 + (len(rest) - len(rest.lstrip()))
            rest = rest.strip()
            loc = Location((number, column), (number, len(line)))
            if keyword == "m":
                self._rank(number, column, rest, rest_column, loc)
            elif keyword == "coords":
                self._coordinates(number, column, rest, rest_column, loc)
            elif _FORM.match(keyword):
                self._pending.append((number, rest_column, keyword, (rest, loc)))
            elif keyword == "levi":
                self._pending.append((number, rest_column, keyword, (rest, loc)))
            else:
                self.error(number, column, f"unknown declaration '{keyword}'")
        if self.rank is None:
            self.error(1, 0, "missing rank declaration 'm'")
            return
        if self.coordinates is None:
            self.error(1, 0, "missing coordinate declaration 'coords'")
            return
        if len(self.coordinates.names) != 2 * self.rank.m + 1:
            start = self.coordinates.loc.start
            self.error(
                start.line,
                start.column,
                f"expected {2 * self.rank.m + 1} coordinates for rank {self.rank.m}",
            )
            return
        for number, rest_column, keyword, (rest, loc) in self._pending:
            if keyword == "levi":
                self._levi_entry(number, rest_column, rest, loc)
            else:
                self._form(number, rest_column, keyword, rest, loc)
        for index in range(self.rank.m + 1):
            if index not in self.forms:
                self.error(1, 0, f"missing coframe form 'theta{index}'")

    def _rank(self, number: int, column: int, rest: str, rest_column: int, loc: Location) -> None:
        if self.rank is not None:
            self.error(number, column, "duplicate rank declaration")
            return
        if not rest.isdigit() or int(rest) < 1:
            self.error(number, rest_column, f"rank must be a positive integer, got '{rest}'")
            return
        self.rank = RankDeclaration(int(rest))
        self.rank.add_loc(loc)

    def _coordinates(
        self, number: int, column: int, rest: str, rest_column: int, loc: Location
    ) -> None:
        if self.coordinates is not None:
            self.error(number, column, "duplicate coordinate declaration")
            return
        names = rest.split()
        seen = set()
        for name in names:
            col = rest_column + rest.index(name)
            if not _NAME.match(name) or name in _RESERVED:
                self.error(number, col, f"invalid coordinate name '{name}'")
                return
            if name in seen:
                self.error(number, col, f"duplicate coordinate '{name}'")
                return
            seen.add(name)
        if self.rank is not None and len(names) != 2 * self.rank.m + 1:
            self.error(
                number,
                rest_column,
                f"expected {2 * self.rank.m + 1} coordinates for rank {self.rank.m}, "
                f"got {len(names)}",
            )
            return
        self.coordinates = CoordinatesDeclaration(names)
        self.coordinates.add_loc(loc)
        self._symbols = {name: sympy.Symbol(name, real=True) for name in names}

    def _expression(self, number: int, column: int, source: str) -> Optional[ExpressionNode]:
        if not source:
            self.expression_error(number, column, "empty expression", source)
            return None
        local_dict = dict(self._symbols)
        local_dict.update(
            {
                "I": sympy.I,
                "E": sympy.E,
                "pi": sympy.pi,
                "sin": sympy.sin,
                "cos": sympy.cos,
                "tan": sympy.tan,
                "sec": sympy.sec,
                "exp": sympy.exp,
                "log": sympy.log,
                "atan": sympy.atan,
                "sqrt": sympy.sqrt,
                "powi": lambda base, n: sympy.Pow(base, sympy.Integer(n)),
            }
        )
        try:
            expr = parse_expr(
                source,
                local_dict=local_dict,
                global_dict={"Integer": sympy.Integer, "Float": sympy.Float,
                             "Rational": sympy.Rational, "Symbol": sympy.Symbol,
                             "Function": sympy.Function},
                transformations=_TRANSFORMATIONS,
            )
        except Exception as e:
            self.expression_error(
                number, column, f"cannot parse expression '{source}': {type(e).__name__}", source
            )
            return None
        if not isinstance(expr, sympy.Expr):
            self.expression_error(number, column, f"'{source}' is not an expression", source)
            return None
        unknown = sorted(str(s) for s in expr.free_symbols if s.name not in self._symbols
                         or s != self._symbols[s.name])
        if unknown:
            self.expression_error(
                number, column, f"unknown symbol(s) {', '.join(unknown)} in '{source}'", source
            )
            return None
        functions = disallowed_functions(expr)
        if functions:
            self.expression_error(
                number, column, f"unsupported function(s) {', '.join(functions)} in '{source}'", source
            )
            return None
        node = ExpressionNode(source, expr)
        node.add_loc(Location((number, column), (number, column + len(source))))
        return node

    def _form(self, number: int, column: int, keyword: str, rest: str, loc: Location) -> None:
        index = int(_FORM.match(keyword).group(1))
        if index > self.rank.m:
            self.error(number, column - len(keyword) - 1, f"form index {index} exceeds rank {self.rank.m}")
            return
        if index in self.forms:
            self.error(number, column - len(keyword) - 1, f"duplicate form '{keyword}'")
            return
        items = _split_components(rest, column)
        dim = len(self.coordinates.names)
        if len(items) != dim:
            self.error(number, column, f"'{keyword}' needs {dim} components, got {len(items)}")
            return
        components = []
        for source, col in items:
            node = self._expression(number, col, source)
            if node is None:
                return
            components.append(node)
        if index == 0 and not all(_is_real(c.expr) for c in components):
            self.error(number, column, "theta0 must be a real form")
            return
        form = FormDeclaration(keyword, index, components)
        form.add_loc(loc)
        self.forms[index] = form

    def _levi_entry(self, number: int, column: int, rest: str, loc: Location) -> None:
        parts = rest.split(None, 2)
        if len(parts) != 3 or not parts[0].isdigit() or not parts[1].isdigit():
            self.error(number, column, "levi entry needs 'row column expression'")
            return
        row, col = int(parts[0]), int(parts[1])
        if not (1 <= row <= self.rank.m and 1 <= col <= self.rank.m):
            self.error(number, column, f"levi index ({row}, {col}) outside 1..{self.rank.m}")
            return
        if any(e.row == row and e.column == col or e.row == col and e.column == row
               for e in self.levi):
            self.error(number, column, f"duplicate levi entry ({row}, {col})")
            return
        source = parts[2]
        node = self._expression(number, column + rest.index(source, len(parts[0]) + len(parts[1])), source)
        if node is None:
            return
        entry = LeviEntry(row, col, node)
        entry.add_loc(loc)
        self.levi.append(entry)


def parse(
    input_string: str,
    options: ManifestOptions = ManifestOptions(),
    dump_json: bool = False,
    dump_path: str = "./out",
    name: str = "manifest",
) -> Manifest:
    """
    Parse a base manifest into its node tree.

    The format is line based: ``m <rank>``, ``coords <2m+1 names>``, one
    ``theta<k> <components>`` line per coframe form (``theta0`` real, the
    ``theta1..theta<m>`` complex, components separated by commas in coordinate
    order) and optional ``levi <row> <column> <expression>`` entries. Text after
    ``#`` is ignored and ``I`` is the imaginary unit.

    Parameters
    ----------
    input_string : str - The manifest text.
    options : ManifestOptions - Options for reading and compiling the manifest.
    dump_json : bool - Whether to dump the manifest as a JSON file.
    dump_path : str - The path to dump the manifest JSON file to.
    name : str - Name recorded on the root node.

    Returns
    -------
    Manifest - The root of the parsed manifest.
    """

    listener = ManifestErrorListener()
    reader = _ManifestReader(listener)
    reader.read(input_string)

    if listener.has_errors():
        raise ManifestParserError(errors=listener.get_errors())

    manifest = Manifest(reader.rank, reader.coordinates, reader.forms, reader.levi, name=name)
    logger.info(
        "parsed manifest %s: m=%d, coordinates %s",
        name,
        manifest.m,
        " ".join(manifest.coordinate_names),
    )

    if dump_json or options.dump_json:
        path = dump_path if dump_json else options.dump_path
        os.makedirs(path, exist_ok=True)
        with open(os.path.join(path, "manifest.json"), "w") as f:
            s = simplejson.dumps(
                manifest,
                default=lambda obj: {
                    string_from_snake_to_camel_case(k): v
                    for k, v in obj.__dict__.items()
                    if not k.startswith("_")
                },
                sort_keys=True,
            )
            f.write(s)
    return manifest
