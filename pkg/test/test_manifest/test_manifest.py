import os
import pathlib
import tempfile
import unittest

import numpy as np
import simplejson
import sympy

from nullcong.errors import ArgumentError
from nullcong.jets import coordinate_jets
from nullcong.manifest_compiler import ExpressionCompiler, ManifestOptions, disallowed_functions
from nullcong.manifest_error_listener import (
    DECLARATION,
    EXPRESSION,
    ManifestError,
    ManifestErrorListener,
)
from nullcong.manifest_parser import ManifestParserError, parse

HEISENBERG1 = "m 1\ncoords t x y\ntheta0 1, -y, x\ntheta1 0, 1, I\n"


def _read(name):
    current_directory = pathlib.Path(__file__).parent.resolve()
    with open(os.path.join(current_directory, name), "r") as f:
        return f.read()


class TestParsing(unittest.TestCase):
    def test_parse_base(self) -> None:
        manifest = parse(_read("base.manifest"), name="base")
        self.assertEqual(manifest.m, 2)
        self.assertEqual(manifest.coordinate_names, ["t", "x1", "y1", "x2", "y2"])
        self.assertEqual(sorted(manifest.forms), [0, 1, 2])
        self.assertEqual(len(manifest.forms[1].components), 5)
        self.assertEqual(manifest.forms[0].components[1].source, "-y1")
        self.assertEqual(len(manifest.levi), 1)
        self.assertEqual((manifest.levi[0].row, manifest.levi[0].column), (1, 1))
        self.assertEqual(manifest.forms[2].loc.start.line, 6)

    def test_comments_and_blank_lines(self) -> None:
        text = "# header\n\n" + HEISENBERG1.replace("theta1 0, 1, I", "theta1 0, 1, I  # dz")
        manifest = parse(text)
        self.assertEqual(manifest.m, 1)
        self.assertEqual(manifest.forms[1].components[2].source, "I")

    def test_contact_form_reality(self) -> None:
        manifest = parse(HEISENBERG1.replace("theta0 1, -y, x", "theta0 exp(x), -y*cos(t), x**2"))
        x = sympy.Symbol("x", real=True)
        self.assertEqual(manifest.forms[0].components[0].expr, sympy.exp(x))
        self.assertEqual(manifest.forms[0].components[0].canonical, "exp(x)")
        for source in ("1, x + I*x*y, x", "1, sqrt(-1)*y, x", "exp(I*t), -y, x"):
            with self.subTest(source):
                with self.assertRaises(ManifestParserError) as context:
                    parse(HEISENBERG1.replace("1, -y, x", source))
                self.assertIn("theta0 must be a real form", context.exception.errors[0].message)

    def test_errors(self) -> None:
        cases = [
            ("unknown declaration", HEISENBERG1 + "foo 1\n", 5, 0, "unknown declaration 'foo'"),
            (
                "unknown symbol",
                HEISENBERG1.replace("theta0 1, -y, x", "theta0 1, -y, q"),
                3,
                14,
                "unknown symbol(s) q",
            ),
            (
                "coordinate count",
                "m 2\ncoords t x1 y1 x2\n",
                2,
                7,
                "expected 5 coordinates for rank 2, got 4",
            ),
            ("rank", HEISENBERG1.replace("m 1", "m two"), 1, 2, "rank must be a positive integer"),
        ]
        for name, text, line, column, message in cases:
            with self.subTest(name):
                with self.assertRaises(ManifestParserError) as context:
                    parse(text)
                error = context.exception.errors[0]
                self.assertEqual((error.line, error.column), (line, column))
                self.assertIn(message, error.message)
                self.assertEqual(str(context.exception), f"{error.message} ({line}:{column})")

    def test_error_messages(self) -> None:
        cases = [
            ("unsupported function", HEISENBERG1.replace("0, 1, I", "0, cosh(x), I"), 4,
             "unsupported function(s) cosh"),
            ("complex contact form", HEISENBERG1.replace("1, -y, x", "1, I*y, x"), 3,
             "theta0 must be a real form"),
            ("component count", HEISENBERG1.replace("0, 1, I", "0, 1"), 4,
             "'theta1' needs 3 components, got 2"),
            ("missing form", "m 1\ncoords t x y\ntheta0 1, -y, x\n", 1,
             "missing coframe form 'theta1'"),
            ("form index", HEISENBERG1 + "theta2 0, 1, I\n", 5, "form index 2 exceeds rank 1"),
            ("duplicate form", HEISENBERG1 + "theta1 0, 1, I\n", 5, "duplicate form 'theta1'"),
            ("levi range", HEISENBERG1 + "levi 1 2 0\n", 5, "levi index (1, 2) outside 1..1"),
            ("unparsable", HEISENBERG1.replace("0, 1, I", "0, 1 +* 2, I"), 4,
             "cannot parse expression"),
            ("missing rank", "coords t x y\n", 1, "missing rank declaration"),
            ("reserved coordinate", "m 1\ncoords t x I\n", 2, "invalid coordinate name 'I'"),
        ]
        for name, text, line, message in cases:
            with self.subTest(name):
                with self.assertRaises(ManifestParserError) as context:
                    parse(text)
                error = context.exception.errors[0]
                self.assertEqual(error.line, line)
                self.assertIn(message, error.message)

    def test_dump_json(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            parse(_read("base.manifest"), dump_json=True, dump_path=directory)
            with open(os.path.join(directory, "manifest.json"), "r") as f:
                data = simplejson.loads(f.read())
        self.assertEqual(data["type"], "Manifest")
        self.assertEqual(data["rank"]["m"], 2)
        self.assertEqual(data["coordinates"]["names"], ["t", "x1", "y1", "x2", "y2"])
        self.assertEqual(data["forms"]["1"]["components"][1]["source"], "1 + 0.3*t")
        self.assertEqual(data["levi"][0]["loc"]["start"]["line"], 7)
        self.assertNotIn("_expr", data["forms"]["0"]["components"][0])


class TestErrorListener(unittest.TestCase):
    def test_listener(self) -> None:
        listener = ManifestErrorListener()
        self.assertFalse(listener.has_errors())
        listener.declaration_error(3, 4, "bad")
        listener.expression_error(5, 7, "unknown symbol(s) q", "x + q")
        self.assertTrue(listener.has_errors())
        first, second = listener.get_errors()
        self.assertIsInstance(first, ManifestError)
        self.assertEqual(str(first), "bad (3:4)")
        self.assertEqual((first.kind, first.source), (DECLARATION, None))
        self.assertEqual((second.kind, second.source), (EXPRESSION, "x + q"))

    def test_expression_errors_keep_source(self) -> None:
        with self.assertRaises(ManifestParserError) as context:
            parse(HEISENBERG1.replace("theta0 1, -y, x", "theta0 1, -y, q"))
        error = context.exception.errors[0]
        self.assertEqual(error.kind, EXPRESSION)
        self.assertEqual(error.source, "q")


class TestCompiler(unittest.TestCase):
    def test_compiled_jet_matches_symbolic_derivatives(self) -> None:
        x, y = sympy.symbols("x y", real=True)
        expressions = [
            sympy.sin(x) * y**2 + sympy.exp(x * y) / (1 + x**2),
            sympy.sqrt(2 + x) * sympy.atan(y) - sympy.log(3 + y) * sympy.tan(x),
            sympy.sec(x) ** 3 - sympy.cos(x * y) * sympy.I,
            (1 + x**2) ** sympy.Rational(-1, 2) + (2 + y) ** sympy.Rational(3, 2),
        ]
        point = np.array([0.3, -0.7])
        subs = {x: point[0], y: point[1]}
        coords = coordinate_jets(point, 2)
        compiler = ExpressionCompiler([x, y])
        for expr in expressions:
            with self.subTest(str(expr)):
                jet = compiler.compile(expr)(coords)
                self.assertAlmostEqual(complex(jet.value), complex(expr.evalf(subs=subs)), places=12)
                for a, s in enumerate((x, y)):
                    expected = complex(sympy.diff(expr, s).evalf(subs=subs))
                    self.assertAlmostEqual(complex(jet.grad[a]), expected, places=11)
                    for b, r in enumerate((x, y)):
                        expected = complex(sympy.diff(expr, s, r).evalf(subs=subs))
                        self.assertAlmostEqual(complex(jet.hess[a, b]), expected, places=10)

    def test_constant_folding(self) -> None:
        x = sympy.Symbol("x", real=True)
        jet = ExpressionCompiler([x]).compile(sympy.pi * sympy.I + 2 * x)(coordinate_jets([0.5], 3))
        self.assertAlmostEqual(complex(jet.value), complex(1.0, np.pi))
        self.assertEqual(jet.order, 3)

    def test_unsupported(self) -> None:
        x = sympy.Symbol("x", real=True)
        with self.assertRaises(ArgumentError):
            ExpressionCompiler([x]).compile(sympy.cosh(x))
        with self.assertRaises(ArgumentError):
            ExpressionCompiler([x]).compile(sympy.Symbol("q"))
        self.assertEqual(disallowed_functions(sympy.cosh(x) + sympy.sin(x)), ["cosh"])

    def test_options(self) -> None:
        self.assertEqual(ManifestOptions().order, 3)
        for order in (0, 4):
            with self.subTest(order=order):
                with self.assertRaises(ArgumentError):
                    ManifestOptions(order=order)
