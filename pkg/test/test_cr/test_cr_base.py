import os
import pathlib
import tempfile
import unittest

import numpy as np
import sympy

from nullcong.cr_base import (
    CRBase,
    contact_volume,
    fs_lift,
    fubini_study_potential,
    heisenberg,
    kahler_einstein_constant,
    lift_from_kahler,
    lift_residual,
    load_base,
    reeb,
    reeb_residuals,
    validate_adapted,
)
from nullcong.errors import ArgumentError, NumericError
from nullcong.jets import constant, stack


def _fixture(name):
    return os.path.join(pathlib.Path(__file__).parent.resolve(), name)


def _point(seed, dim, radius=0.5):
    return np.random.default_rng(seed).uniform(-radius, radius, size=dim)


def _scaled(base, factor, levi_factor=None):
    """
    The base with θ⁰ multiplied by a constant, optionally with the Levi form rescaled.
    """

    def builder(coords):
        rows = base.coframe_builder(coords) * (1.0 + 0.0j)
        return stack([rows[0] * factor] + [rows[a] for a in range(1, base.m + 1)])

    levi = None
    if levi_factor is not None:

        def levi(coords):
            return constant(levi_factor * np.eye(base.m, dtype=complex), coords[0].point,
                            coords[0].order)

    return CRBase(base.m, builder, levi_builder=levi, name=f"scaled {base.name}")


def _flat_potential(m):
    symbols = sympy.symbols(" ".join(f"x{a} y{a}" for a in range(1, m + 1)), real=True)
    return sum(s**2 for s in symbols)


class TestHeisenberg(unittest.TestCase):
    def test_adapted(self) -> None:
        for m in (1, 2, 3):
            base = heisenberg(m)
            with self.subTest(m=m):
                self.assertEqual(base.dim, 2 * m + 1)
                self.assertEqual(base.coordinate_names[:3], ("t", "x1", "y1"))
                for seed in range(3):
                    self.assertLess(validate_adapted(base, _point(seed, base.dim)).max_abs, 1e-12)

    def test_reeb(self) -> None:
        base = heisenberg(2)
        expected = np.zeros(5)
        expected[0] = 1.0
        for seed in range(3):
            pt = _point(seed, 5)
            np.testing.assert_allclose(reeb(base, pt), expected, atol=1e-12)
            self.assertTrue(all(r < 1e-10 for r in reeb_residuals(base, pt)))
            self.assertGreater(contact_volume(base, pt), 0.0)

    def test_rank(self) -> None:
        with self.assertRaises(ArgumentError):
            heisenberg(0)


class TestAdaptedness(unittest.TestCase):
    def test_scaled_contact_form_is_reported(self) -> None:
        res = validate_adapted(_scaled(heisenberg(2), 2.0), _point(4, 5))
        self.assertAlmostEqual(res.max_abs, 1.0, places=12)

    def test_rescaled_reeb(self) -> None:
        c = 3.0
        base = _scaled(heisenberg(2), c, levi_factor=c)
        pt = _point(5, 5)
        self.assertLess(validate_adapted(base, pt).max_abs, 1e-12)
        np.testing.assert_allclose(reeb(base, pt), reeb(heisenberg(2), pt) / c, atol=1e-12)

    def test_contact_degeneracy(self) -> None:
        flat = heisenberg(1)

        def builder(coords):
            rows = flat.coframe_builder(coords) * (1.0 + 0.0j)
            dt = constant(np.array([1.0, 0.0, 0.0], dtype=complex), coords[0].point,
                          coords[0].order)
            return stack([dt, rows[1]])

        base = CRBase(1, builder, name="degenerate")
        with self.assertRaises(NumericError):
            reeb(base, _point(6, 3))

    def test_complex_contact_form(self) -> None:
        flat = heisenberg(1)

        def builder(coords):
            rows = flat.coframe_builder(coords) * (1.0 + 0.0j)
            return stack([rows[0] * (1.0 + 0.5j), rows[1]])

        with self.assertRaises(ArgumentError):
            validate_adapted(CRBase(1, builder), _point(7, 3))


class TestKahlerLift(unittest.TestCase):
    def test_flat_potential_reproduces_heisenberg(self) -> None:
        for m in (1, 2):
            base = lift_from_kahler(_flat_potential(m), m)
            with self.subTest(m=m):
                self.assertIsNone(base.einstein_constant)
                pt = _point(8, base.dim)
                ours = base.full_coframe(base.coordinates(pt, 2))
                model = heisenberg(m).full_coframe(base.coordinates(pt, 2))
                for k in range(3):
                    np.testing.assert_allclose(ours.parts[k], model.parts[k], atol=1e-12)

    def test_fubini_study_einstein_constant(self) -> None:
        for m in (1, 2):
            with self.subTest(m=m):
                value = kahler_einstein_constant(fubini_study_potential(m), m)
                self.assertAlmostEqual(value, m + 1, places=7)

    def test_fs_lift(self) -> None:
        base = fs_lift(2)
        self.assertEqual(base.name, "fs-lift")
        self.assertAlmostEqual(base.einstein_constant, 3.0, places=7)
        for seed in range(3):
            pt = _point(seed, 5)
            with self.subTest(seed=seed):
                self.assertLess(validate_adapted(base, pt).max_abs, 1e-9)
                self.assertLess(lift_residual(base, pt).max_abs, 1e-9)
                expected = np.zeros(5)
                expected[0] = base.einstein_constant
                np.testing.assert_allclose(reeb(base, pt), expected, atol=1e-9)

    def test_non_einstein_branch_rejected(self) -> None:
        x1 = sympy.Symbol("x1", real=True)
        potential = _flat_potential(2) + x1**4 / 10
        with self.assertRaises(ArgumentError):
            lift_from_kahler(potential, 2, einstein_constant=1.0)
        with self.assertRaises(ArgumentError):
            lift_from_kahler(potential, 2, einstein_constant="derive")

    def test_wrong_einstein_constant(self) -> None:
        with self.assertRaises(ArgumentError):
            lift_from_kahler(fubini_study_potential(2), 2, einstein_constant=5.0)

    def test_foreign_symbols(self) -> None:
        with self.assertRaises(ArgumentError):
            lift_from_kahler(sympy.Symbol("w") ** 2, 1)

    def test_fs_lift_rank(self) -> None:
        with self.assertRaises(ArgumentError):
            fs_lift(1)

    def test_lift_residual_needs_kahler_data(self) -> None:
        with self.assertRaises(ArgumentError):
            lift_residual(heisenberg(1), _point(9, 3))


class TestLoadBase(unittest.TestCase):
    def test_builtins(self) -> None:
        self.assertEqual(load_base("heisenberg", 2).name, "heisenberg")
        self.assertEqual(load_base("fs-lift", 2).m, 2)

    def test_manifest(self) -> None:
        base = load_base(f"file:{_fixture('torsion2.manifest')}", 2)
        self.assertEqual(base.coordinate_names, ("t", "x1", "y1", "x2", "y2"))
        pt = np.array([0.5, 0.1, -0.2, 0.3, 0.1])
        levi = base.levi(base.coordinates(pt, 1)).h.value
        np.testing.assert_allclose(levi, np.diag([1.0 / (1.0 - 0.0225), 1.0]), atol=1e-14)
        self.assertLess(validate_adapted(base, pt).max_abs, 1e-12)

    def test_manifest_dump(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            load_base(f"file:{_fixture('torsion1.manifest')}", 1, dump_path=directory)
            self.assertTrue(os.path.exists(os.path.join(directory, "manifest.json")))

    def test_errors(self) -> None:
        cases = [
            ("unknown", "sphere", 2),
            ("rank mismatch", f"file:{_fixture('torsion1.manifest')}", 2),
            ("missing file", f"file:{_fixture('missing.manifest')}", 1),
        ]
        for name, source, m in cases:
            with self.subTest(name):
                with self.assertRaises(ArgumentError):
                    load_base(source, m)
