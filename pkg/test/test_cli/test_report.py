import csv
import io
import json
import math
import pathlib
import unittest

import numpy as np
import simplejson

from nullcong.errors import ArgumentError
from nullcong.report import CSV_HEADER, CheckResult, ResidualReport, RunConfig, emit
from nullcong.utils import Residual

SCHEMA = pathlib.Path(__file__).parents[2] / "nullcong" / "schema" / "report.schema.json"

_JSON_TYPES = {
    "string": (str,),
    "integer": (int,),
    "number": (int, float),
    "boolean": (bool,),
    "null": (type(None),),
    "array": (list,),
    "object": (dict,),
}


def _report(checks):
    config = RunConfig("lambda0")
    return ResidualReport("lambda0", config.echo(), checks, wall_ms=12.5)


def _conforms(value, schema) -> bool:
    if "enum" in schema and value not in schema["enum"]:
        return False
    if "const" in schema and value != schema["const"]:
        return False
    if "oneOf" in schema:
        return sum(_conforms(value, option) for option in schema["oneOf"]) == 1
    kinds = schema.get("type")
    if kinds is None:
        return True
    kinds = [kinds] if isinstance(kinds, str) else kinds
    for kind in kinds:
        if isinstance(value, bool) and kind != "boolean":
            continue
        if isinstance(value, _JSON_TYPES[kind]):
            break
    else:
        return False
    if isinstance(value, dict):
        properties = schema.get("properties", {})
        if schema.get("additionalProperties") is False and not set(value) <= set(properties):
            return False
        if not set(schema.get("required", [])) <= set(value):
            return False
        return all(_conforms(v, properties[k]) for k, v in value.items() if k in properties)
    if isinstance(value, list) and "items" in schema:
        return all(_conforms(v, schema["items"]) for v in value)
    return True


class TestRunConfig(unittest.TestCase):
    def test_invalid(self) -> None:
        cases = [
            {"m": 0},
            {"samples": 0},
            {"phi_margin": 0.0},
            {"phi_margin": 2.0},
            {"tol": 0.0},
            {"format": "xml"},
            {"jobs": 0},
        ]
        for kwargs in cases:
            with self.subTest(**kwargs):
                with self.assertRaises(ArgumentError):
                    RunConfig("einstein", **kwargs)

    def test_phi_max(self) -> None:
        self.assertAlmostEqual(RunConfig("einstein", phi_margin=0.3).phi_max, math.pi / 2 - 0.3)

    def test_echo(self) -> None:
        echo = RunConfig("einstein", phi_margin=0.25).echo()
        self.assertEqual(echo["ulambda"], "auto")
        self.assertEqual(echo["lambda"], 1.0)
        self.assertEqual(echo["phiMargin"], 0.25)
        self.assertNotIn("cosmological", echo)
        self.assertEqual(RunConfig("einstein", ulambda=2.0).echo()["ulambda"], 2.0)


class TestCheckResult(unittest.TestCase):
    def test_from_residuals(self) -> None:
        result = CheckResult.from_residuals(
            "x.y", [Residual(1e-9, 1.0), Residual(4e-9, 2.0), Residual(1e-12, 1e-3)], 1e-7
        )
        self.assertEqual(result.samples, 3)
        self.assertEqual(result.max_abs, 4e-9)
        self.assertEqual(result.max_rel, 2e-9)
        self.assertTrue(result.passed)

    def test_empty_bucket(self) -> None:
        result = CheckResult.from_residuals("x.y", [], 1e-7)
        self.assertEqual(result.samples, 0)
        self.assertTrue(result.passed)

    def test_tolerance(self) -> None:
        self.assertFalse(CheckResult.from_residuals("x.y", [Residual(1e-3, 1.0)], 1e-7).passed)

    def test_failure(self) -> None:
        result = CheckResult.failure("x.evaluation", "boom", [0.1, 0.2], 1e-7)
        self.assertFalse(result.passed)
        self.assertTrue(math.isnan(result.max_abs))
        self.assertEqual(result.point, [0.1, 0.2])

    def test_numpy_residuals_serialize(self) -> None:
        result = CheckResult.from_residuals(
            "x.y", [Residual(np.float64(1e-10), np.float64(2.0)), Residual(np.float32(0.0))], 1e-7
        )
        self.assertIs(type(result.passed), bool)
        self.assertIs(type(result.max_abs), float)
        document = simplejson.loads(emit(_report([result])))
        self.assertIs(document["checks"][0]["pass"], True)
        self.assertIs(document["pass"], True)


class TestResidual(unittest.TestCase):
    def test_coerces_to_float(self) -> None:
        r = Residual(np.float64(3e-12), np.float32(0.5))
        self.assertIs(type(r.max_abs), float)
        self.assertIs(type(r.scale), float)

    def test_vanishing_sides(self) -> None:
        r = Residual(1.8e-15, 1e-16)
        self.assertEqual(r.max_rel, 1.8e-15)
        self.assertTrue(CheckResult.from_residuals("x.y", [r], 1e-7).passed)
        self.assertEqual(Residual(0.0, 0.0).max_rel, 0.0)

    def test_large_scale_is_relative(self) -> None:
        self.assertAlmostEqual(Residual(2e-6, 100.0).max_rel, 2e-8)
        self.assertEqual(Residual(4e-9, 2.0).max_rel, 2e-9)



class TestEmit(unittest.TestCase):
    def test_json_keys(self) -> None:
        document = simplejson.loads(emit(_report([CheckResult("a.b", 2, 1e-12, 1e-13, 1e-7)])))
        self.assertEqual(sorted(document), ["checks", "config", "pass", "suite", "wall_ms"])
        self.assertTrue(document["pass"])
        self.assertEqual(document["wall_ms"], 12.5)
        check = document["checks"][0]
        self.assertEqual(sorted(check), ["max_abs", "max_rel", "name", "pass", "samples", "tol"])
        self.assertEqual(check["max_rel"], 1e-13)

    def test_document_matches_schema(self) -> None:
        with open(SCHEMA) as f:
            schema = json.load(f)
        checks = [
            CheckResult("a.b", 2, 1e-12, 1e-13, 1e-7),
            CheckResult.from_residuals("a.c", [Residual(np.float64(1e-9), np.float64(1.0))], 1e-7),
            CheckResult.failure("a.evaluation", "boom", [0.5, 0.0], 1e-7),
        ]
        for report in (_report([]), _report(checks)):
            document = simplejson.loads(emit(report))
            with self.subTest(checks=len(report.checks)):
                self.assertEqual(sorted(schema["required"]), sorted(document))
                config = schema["properties"]["config"]
                self.assertEqual(sorted(config["required"]), sorted(document["config"]))
                self.assertTrue(_conforms(document, schema))
                self.assertIs(type(document["pass"]), bool)
                for check in document["checks"]:
                    self.assertIs(type(check["pass"]), bool)
        self.assertFalse(_conforms({"pass": 1}, schema["properties"]["checks"]["items"]))
        self.assertFalse(_conforms("xml", schema["properties"]["config"]["properties"]["format"]))


    def test_empty_passes(self) -> None:
        document = simplejson.loads(emit(_report([])))
        self.assertEqual(document["checks"], [])
        self.assertTrue(document["pass"])

    def test_failure_in_json(self) -> None:
        failure = CheckResult.failure("lambda0.evaluation", "boom", [0.5, 0.0], 1e-7)
        document = simplejson.loads(emit(_report([failure])))
        check = document["checks"][0]
        self.assertFalse(document["pass"])
        self.assertIsNone(check["max_abs"])
        self.assertIsNone(check["max_rel"])
        self.assertEqual(check["message"], "boom")
        self.assertEqual(check["point"], [0.5, 0.0])

    def test_csv(self) -> None:
        report = _report(
            [CheckResult("a.b", 2, 1e-12, 1e-13, 1e-7), CheckResult("a.c", 1, 0.5, 0.5, 1e-7)]
        )
        rows = list(csv.reader(io.StringIO(emit(report, "csv"))))
        self.assertEqual(tuple(rows[0]), CSV_HEADER)
        self.assertEqual(rows[1][0], "a.b")
        self.assertEqual(float(rows[1][3]), 1e-13)
        self.assertEqual(rows[1][5], "true")
        self.assertEqual(rows[2][5], "false")

    def test_unknown_format(self) -> None:
        with self.assertRaises(ArgumentError):
            emit(_report([]), "xml")
