import contextlib
import io
import os
import tempfile
import unittest

import simplejson

from nullcong.main import EXIT_PASS, EXIT_USAGE, main


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


class TestMain(unittest.TestCase):
    def test_pass(self) -> None:
        code, out, _ = _run(["lambda0", "--samples", "2", "--c", "0.5"])
        self.assertEqual(code, EXIT_PASS)
        document = simplejson.loads(out)
        self.assertTrue(document["pass"])
        self.assertEqual(document["suite"], "lambda0")
        self.assertEqual(document["config"]["ulambda"], "auto")

    def test_csv_output_file(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.csv")
            code, out, _ = _run(["lambda0", "--samples", "2", "--format", "csv", "--output", path])
            self.assertEqual(code, EXIT_PASS)
            self.assertEqual(out, "")
            with open(path) as f:
                self.assertTrue(f.readline().startswith("check,samples"))

    def test_usage_errors(self) -> None:
        cases = [
            ["taubnut", "--ulambda", "0"],
            ["lambda0", "--base", "nowhere"],
            ["lambda0", "--samples", "0"],
        ]
        for argv in cases:
            with self.subTest(argv=argv):
                code, out, err = _run(argv)
                self.assertEqual(code, EXIT_USAGE)
                self.assertEqual(out, "")
                self.assertIn("nullcong: error:", err)

    def test_bad_arguments(self) -> None:
        for argv in (["nope"], ["lambda0", "--ulambda", "many"]):
            with self.subTest(argv=argv):
                with contextlib.redirect_stderr(io.StringIO()):
                    with self.assertRaises(SystemExit) as ctx:
                        main(argv)
                self.assertEqual(ctx.exception.code, EXIT_USAGE)
