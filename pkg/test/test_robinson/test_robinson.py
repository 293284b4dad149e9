import os
import pathlib
import unittest

import numpy as np

from nullcong.cr_base import fs_lift, heisenberg, load_base
from nullcong.errors import ArgumentError, EvaluationError, PreconditionError
from nullcong.jets import lift_coordinate
from nullcong.robinson import (
    EinsteinParams,
    GeneralLambda,
    aj_coefficients,
    assemble_einstein,
    assemble_general,
    base_einstein_constant,
    bce_residuals,
    einstein_check,
    frame_metric,
    frame_pattern_residual,
    lambda0,
    lambda0_ode_residuals,
    lambda0_spread,
    polynomial_lambda,
    pure_radiation,
    schouten_steps,
)


def _torsion_manifest():
    return os.path.join(pathlib.Path(__file__).parent.parent.resolve(), "test_cr", "torsion2.manifest")


def _spacetime_points(seed, dim, count, phi_max=0.8, radius=0.4):
    rng = np.random.default_rng(seed)
    points = rng.uniform(-radius, radius, size=(count, dim))
    points[:, 0] = rng.uniform(-phi_max, phi_max, size=count)
    return points


class TestEinsteinParams(unittest.TestCase):
    def test_aj_coefficients(self) -> None:
        np.testing.assert_allclose(aj_coefficients(1), [1.0, 4.0])
        np.testing.assert_allclose(aj_coefficients(2), [1.0, 2.0, 8.0])
        np.testing.assert_allclose(aj_coefficients(3), [1.0, 1.6, 3.2, 12.8])
        with self.assertRaises(ArgumentError):
            aj_coefficients(0)

    def test_rank(self) -> None:
        with self.assertRaises(ArgumentError):
            EinsteinParams(1, 1.0, 0.0)

    def test_fefferman(self) -> None:
        params = EinsteinParams.fefferman(2, 3.0)
        self.assertAlmostEqual(params.cosmological, 2.5)
        self.assertTrue(params.is_fefferman)
        self.assertAlmostEqual(params.slope, 0.0)
        self.assertFalse(EinsteinParams(2, 2.5, 3.0, c=0.1).is_fefferman)
        self.assertFalse(EinsteinParams(2, 2.0, 3.0).is_fefferman)

    def test_for_base(self) -> None:
        params = EinsteinParams.for_base(fs_lift(2), 1.0)
        self.assertAlmostEqual(params.ulambda, 3.0, delta=1e-7)
        with self.assertRaises(ArgumentError):
            EinsteinParams.for_base(fs_lift(2), 1.0, ulambda=2.0)

    def test_base_einstein_constant(self) -> None:
        self.assertEqual(base_einstein_constant(heisenberg(2)), 0.0)
        with self.assertRaises(PreconditionError):
            base_einstein_constant(load_base(f"file:{_torsion_manifest()}", 2))


class TestLambdaZero(unittest.TestCase):
    def test_values(self) -> None:
        heis = EinsteinParams(2, 5.0, 0.0)
        self.assertAlmostEqual(float(lambda0(heis, 0.0).value), -5.0, places=12)
        feff = EinsteinParams.fefferman(2, 3.0)
        for phi in (-1.2, 0.0, 0.7):
            self.assertAlmostEqual(float(lambda0(feff, phi).value), 0.5, places=12)
        odd = EinsteinParams(3, 0.0, 0.0, c=1.0)
        phi = 0.4
        self.assertAlmostEqual(
            float(lambda0(odd, phi).value), np.cos(phi) ** 7 * np.sin(phi), places=12
        )

    def test_outside_strip(self) -> None:
        params = EinsteinParams(2, 1.0, 0.0)
        for phi in (np.pi / 2, -2.0):
            with self.assertRaises(EvaluationError):
                lambda0(params, phi)

    def test_ode_residuals(self) -> None:
        cases = [
            EinsteinParams(2, 1.5, 0.0, 0.7),
            EinsteinParams(2, -0.4, 3.0, -0.3),
            EinsteinParams(3, 2.0, 4.0, 0.2),
            EinsteinParams(4, 0.3, -1.0, 1.1),
            EinsteinParams.fefferman(3, 4.0),
        ]
        for params in cases:
            for phi in (-1.1, -0.3, 0.0, 0.5, 1.2):
                for name, res in lambda0_ode_residuals(params, phi).items():
                    with self.subTest(name, m=params.m, phi=phi):
                        self.assertLess(res.max_rel, 1e-9)

    def test_jet_argument(self) -> None:
        params = EinsteinParams(2, 1.0, 0.0, 0.5)
        jet = lambda0(params, lift_coordinate([0.3, 0.0], 0, 2))
        self.assertEqual(jet.dim, 2)
        self.assertEqual(float(jet.grad[1]), 0.0)


class TestAssembly(unittest.TestCase):
    def test_frame_metric(self) -> None:
        g = frame_metric(2)
        self.assertEqual(g.shape, (6, 6))
        self.assertEqual(g[0, 5], 1.0)
        self.assertEqual(g[1, 3], 1.0)
        self.assertEqual(int(np.sum(g)), 6)
        np.testing.assert_array_equal(g, g.T)

    def test_general_pattern_and_signature(self) -> None:
        rng = np.random.default_rng(5)
        model = assemble_general(heisenberg(1), polynomial_lambda(1, rng))
        self.assertEqual(model.dim, 4)
        self.assertEqual(model.coordinate_names[0], "phi")
        for pt in _spacetime_points(6, 4, 3):
            with self.subTest(pt=list(pt)):
                self.assertLess(frame_pattern_residual(model, pt).max_abs, 1e-12)
                self.assertEqual(model.metric.signature_at(pt), (3, 1))
                self.assertEqual(model.rescaled.signature_at(pt), (3, 1))

    def test_rank_mismatch(self) -> None:
        with self.assertRaises(ArgumentError):
            assemble_general(heisenberg(2), polynomial_lambda(1, np.random.default_rng(0)))
        with self.assertRaises(ArgumentError):
            assemble_einstein(heisenberg(3), EinsteinParams(2, 1.0, 0.0))

    def test_ulambda_mismatch(self) -> None:
        with self.assertRaises(ArgumentError):
            assemble_einstein(heisenberg(2), EinsteinParams(2, 1.0, 1.0))

    def test_point_outside_strip(self) -> None:
        model = assemble_einstein(heisenberg(2), EinsteinParams(2, 1.0, 0.0))
        with self.assertRaises(EvaluationError):
            model.metric.at(np.array([1.6, 0.0, 0.0, 0.0, 0.0, 0.0]), 0)
        with self.assertRaises(ArgumentError):
            model.coordinates(np.zeros(5), 0)

    def test_complex_lambda_zero(self) -> None:
        lam = GeneralLambda(1, lambda coords: coords[0] * 1j)
        model = assemble_general(heisenberg(1), lam)
        with self.assertRaises(ArgumentError):
            model.coframe(np.array([0.1, 0.0, 0.0, 0.0]))


class TestBCE(unittest.TestCase):
    def test_flat_base(self) -> None:
        rng = np.random.default_rng(11)
        model = assemble_general(heisenberg(2), polynomial_lambda(2, rng))
        for pt in _spacetime_points(12, 6, 2):
            for name, res in bce_residuals(model, pt).items():
                with self.subTest(name, pt=list(pt)):
                    self.assertLess(res.max_rel, 1e-9)

    def test_torsion_base(self) -> None:
        base = load_base(f"file:{_torsion_manifest()}", 2)
        model = assemble_general(base, polynomial_lambda(2, np.random.default_rng(13)))
        for pt in _spacetime_points(14, 6, 2):
            for name, res in bce_residuals(model, pt).items():
                with self.subTest(name, pt=list(pt)):
                    self.assertLess(res.max_rel, 1e-8)


class TestEinsteinFamily(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.models = [
            assemble_einstein(heisenberg(2), EinsteinParams(2, 1.5, 0.0, 0.7)),
            assemble_einstein(heisenberg(3), EinsteinParams(3, -0.8, 0.0, 0.0)),
            assemble_einstein(fs_lift(2), EinsteinParams.for_base(fs_lift(2), 2.0, c=-0.3)),
            assemble_einstein(fs_lift(2), EinsteinParams.fefferman(2, 3.0)),
        ]

    def test_einstein(self) -> None:
        for k, model in enumerate(self.models):
            for pt in _spacetime_points(20 + k, model.dim, 2):
                with self.subTest(model.name, pt=list(pt)):
                    self.assertLess(einstein_check(model, pt).max_rel, 1e-7)

    def test_schouten_steps(self) -> None:
        for k, model in enumerate(self.models):
            for pt in _spacetime_points(30 + k, model.dim, 1):
                for name, res in schouten_steps(model, pt).items():
                    with self.subTest(name, model=model.name):
                        self.assertLess(res.max_rel, 1e-7)

    def test_pure_radiation_vanishes(self) -> None:
        model = self.models[0]
        for pt in _spacetime_points(40, model.dim, 2):
            self.assertAlmostEqual(pure_radiation(model, pt), 0.0, delta=1e-8)

    def test_lambda0_is_base_independent(self) -> None:
        model = self.models[2]
        points = np.random.default_rng(41).uniform(-0.4, 0.4, size=(3, 5))
        self.assertLess(lambda0_spread(model, 0.3, list(points)), 1e-12)
        with self.assertRaises(ArgumentError):
            lambda0_spread(model, 0.3, [])

    def test_not_einstein_family(self) -> None:
        model = assemble_general(heisenberg(2), polynomial_lambda(2, np.random.default_rng(2)))
        with self.assertRaises(ArgumentError):
            einstein_check(model, np.zeros(6))
        with self.assertRaises(ArgumentError):
            schouten_steps(model, np.zeros(6))

    def test_generic_lambda_is_not_einstein(self) -> None:
        lam = GeneralLambda(2, lambda coords: coords[0] * coords[0] + 0.2)
        model = assemble_general(heisenberg(2), lam)
        pt = np.array([0.3, 0.1, 0.2, -0.1, 0.0, 0.1])
        params = EinsteinParams(2, 1.0, 0.0)
        fake = type(model)(
            model.base, model.lam, model.coframe_builder, model.metric, model.rescaled, params
        )
        self.assertGreater(einstein_check(fake, pt).max_rel, 1e-3)
