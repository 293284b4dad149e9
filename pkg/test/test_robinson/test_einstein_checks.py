import unittest

import numpy as np

from nullcong.cr_base import fs_lift, heisenberg
from nullcong.errors import ArgumentError, PreconditionError
from nullcong.einstein_checks import (
    coframe_derivative_check,
    conformal_flatness_check,
    dual_robinson_check,
    fefferman_criteria,
    kerr_schild_check,
    killing_check,
    weyl_einstein_components,
)
from nullcong.robinson import (
    EinsteinParams,
    assemble_einstein,
    assemble_general,
    base_einstein_constant,
    polynomial_lambda,
)


def _spacetime_points(seed, dim, count, phi_max=0.8, radius=0.4):
    rng = np.random.default_rng(seed)
    points = rng.uniform(-radius, radius, size=(count, dim))
    points[:, 0] = rng.uniform(-phi_max, phi_max, size=count)
    return points


def _fefferman_model(base):
    return assemble_einstein(base, EinsteinParams.fefferman(base.m, base_einstein_constant(base)))


class TestEinsteinChecks(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        base = fs_lift(2)
        cls.models = [
            assemble_einstein(heisenberg(2), EinsteinParams(2, 1.5, 0.0, 0.7)),
            assemble_einstein(heisenberg(3), EinsteinParams(3, -0.8, 0.0, 0.4)),
            assemble_einstein(base, EinsteinParams.for_base(base, 2.0, c=-0.3)),
        ]
        cls.fefferman = [_fefferman_model(heisenberg(2)), _fefferman_model(base)]
        cls.general = assemble_general(
            heisenberg(2), polynomial_lambda(2, np.random.default_rng(17))
        )

    def test_weyl_components(self) -> None:
        for k, model in enumerate(self.models + self.fefferman):
            pt = _spacetime_points(200 + k, model.dim, 1)[0]
            for name, res in weyl_einstein_components(model, pt).items():
                with self.subTest(name, model=model.name):
                    self.assertLess(res.max_rel, 1e-7)

    def test_chern_moser_reported_for_integrable_bases(self) -> None:
        model = self.models[2]
        pt = _spacetime_points(210, model.dim, 1)[0]
        self.assertIn("chern_moser", weyl_einstein_components(model, pt))

    def test_weyl_components_need_params(self) -> None:
        with self.assertRaises(ArgumentError):
            weyl_einstein_components(self.general, np.zeros(self.general.dim))

    def test_coframe_derivatives(self) -> None:
        for k, model in enumerate(self.models + [self.general]):
            for pt in _spacetime_points(220 + k, model.dim, 2):
                for name, res in coframe_derivative_check(model, pt).items():
                    with self.subTest(name, model=model.name, pt=list(pt)):
                        self.assertLess(res.max_rel, 1e-8)

    def test_killing(self) -> None:
        for k, model in enumerate(self.models + self.fefferman):
            pt = _spacetime_points(230 + k, model.dim, 1)[0]
            record = killing_check(model, pt)
            with self.subTest(model.name):
                self.assertLess(record.sym_residual.max_rel, 1e-8)
                self.assertLess(record.norm_residual.max_rel, 1e-10)

    def test_conformal_killing_only_for_fefferman(self) -> None:
        for k, model in enumerate(self.fefferman):
            pt = _spacetime_points(240 + k, model.dim, 1)[0]
            with self.subTest(model.name):
                self.assertLess(killing_check(model, pt).conformal_killing.max_rel, 1e-10)
        pt = np.array([0.4, 0.1, -0.2, 0.3, 0.05, -0.1])
        self.assertGreater(killing_check(self.models[0], pt).conformal_killing.max_rel, 1e-4)

    def test_fefferman_criteria(self) -> None:
        for k, model in enumerate(self.fefferman):
            pt = _spacetime_points(250 + k, model.dim, 1)[0]
            record = fefferman_criteria(model, pt)
            with self.subTest(model.name):
                self.assertLess(record.weyl_res.max_rel, 1e-7)
                self.assertLess(record.cotton_res.max_rel, 1e-6)
                self.assertAlmostEqual(record.scalar_value, -1.0, delta=1e-6)

    def test_fefferman_precondition(self) -> None:
        with self.assertRaises(PreconditionError):
            fefferman_criteria(self.models[0], np.zeros(self.models[0].dim))

    def test_kerr_schild(self) -> None:
        for k, model in enumerate(self.models + self.fefferman):
            for pt in _spacetime_points(260 + k, model.dim, 2):
                with self.subTest(model.name, pt=list(pt)):
                    self.assertLess(kerr_schild_check(model, pt).max_rel, 1e-9)

    def test_dual_robinson(self) -> None:
        for k, model in enumerate(self.models + self.fefferman[1:]):
            pt = _spacetime_points(270 + k, model.dim, 1)[0]
            result = dual_robinson_check(model, pt)
            if result is None:
                continue
            for name, res in result.items():
                with self.subTest(name, model=model.name):
                    self.assertLess(res.max_rel, 1e-8)

    def test_dual_robinson_parallel(self) -> None:
        model = assemble_einstein(heisenberg(2), EinsteinParams(2, 0.0, 0.0, 0.0))
        pt = _spacetime_points(280, model.dim, 1)[0]
        result = dual_robinson_check(model, pt)
        self.assertEqual(list(result), ["parallel"])
        self.assertLess(result["parallel"].max_abs, 1e-10)

    def test_dual_robinson_skips_zero(self) -> None:
        model = assemble_einstein(heisenberg(2), EinsteinParams(2, 0.0, 0.0, 0.5))
        pt = np.array([0.0, 0.1, 0.0, 0.0, 0.2, 0.0])
        with self.assertLogs("nullcong.einstein_checks", level="WARNING"):
            self.assertIsNone(dual_robinson_check(model, pt))

    def test_conformally_flat_for_zero_parameters(self) -> None:
        model = assemble_einstein(heisenberg(2), EinsteinParams(2, 0.0, 0.0, 0.0))
        for pt in _spacetime_points(290, model.dim, 3):
            with self.subTest(pt=list(pt)):
                self.assertLess(conformal_flatness_check(model, pt).max_abs, 1e-7)
        self.assertGreater(conformal_flatness_check(self.models[0], pt).max_abs, 1e-4)
