import os
import pathlib
import unittest

import numpy as np

from nullcong.appendix import appendix_oracle, corpus_data
from nullcong.cr_base import fs_lift, heisenberg, load_base
from nullcong.robinson import (
    EinsteinParams,
    GeneralLambda,
    assemble_einstein,
    assemble_general,
    polynomial_lambda,
)

# Families whose closed forms hold for every λ over every base.
GENERAL_FAMILIES = (
    "R_hkkh",
    "R_akkh",
    "R_lkkh",
    "R_hhkh",
    "Ric_kk",
    "Ric_hk",
    "b_hol_dot",
    "b_mixed_dot",
    "c_dot",
)


def _torsion_manifest():
    return os.path.join(
        pathlib.Path(__file__).parent.parent.resolve(), "test_cr", "torsion2.manifest"
    )


def _spacetime_points(seed, dim, count, phi_max=0.7, radius=0.35):
    rng = np.random.default_rng(seed)
    points = rng.uniform(-radius, radius, size=(count, dim))
    points[:, 0] = rng.uniform(-phi_max, phi_max, size=count)
    return points


class TestGeneralLambda(unittest.TestCase):
    def test_flat_base(self) -> None:
        model = assemble_general(heisenberg(2), polynomial_lambda(2, np.random.default_rng(3)))
        for pt in _spacetime_points(4, 6, 2):
            families = appendix_oracle(model, pt).families()
            for name in GENERAL_FAMILIES:
                with self.subTest(name, pt=list(pt)):
                    self.assertLess(families[name].max_rel, 1e-8)

    def test_torsion_base(self) -> None:
        base = load_base(f"file:{_torsion_manifest()}", 2)
        model = assemble_general(base, polynomial_lambda(2, np.random.default_rng(5)))
        pt = _spacetime_points(6, 6, 1)[0]
        data = corpus_data(model, pt)
        self.assertGreater(np.max(np.abs(data.torsion)), 1e-3)
        families = appendix_oracle(model, pt).families()
        for name in GENERAL_FAMILIES:
            with self.subTest(name):
                self.assertLess(families[name].max_rel, 1e-7)

    def test_null_normalization(self) -> None:
        model = assemble_general(heisenberg(1), polynomial_lambda(1, np.random.default_rng(7)))
        pt = _spacetime_points(8, 4, 1)[0]
        record = appendix_oracle(model, pt)
        self.assertEqual(record.point, [float(x) for x in pt])
        self.assertLess(record.ricci["Ric_kk"].max_rel, 1e-8)
        self.assertLess(record.riemann["R_akkh"].max_rel, 1e-8)


class TestEinsteinFamily(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        base = fs_lift(2)
        cls.models = [
            assemble_einstein(heisenberg(2), EinsteinParams(2, 1.5, 0.0, 0.7)),
            assemble_einstein(base, EinsteinParams.for_base(base, 2.0, c=-0.3)),
        ]

    def test_all_ricci_families(self) -> None:
        for k, model in enumerate(self.models):
            pt = _spacetime_points(10 + k, model.dim, 1)[0]
            record = appendix_oracle(model, pt)
            for name, res in record.ricci.items():
                with self.subTest(name, model=model.name):
                    self.assertLess(res.max_rel, 1e-7)

    def test_riemann_families(self) -> None:
        names = GENERAL_FAMILIES[:4] + ("R_alkh", "R_lkkl", "R_haah")
        for k, model in enumerate(self.models):
            pt = _spacetime_points(20 + k, model.dim, 1)[0]
            riemann = appendix_oracle(model, pt).riemann
            for name in names:
                with self.subTest(name, model=model.name):
                    self.assertLess(riemann[name].max_rel, 1e-7)

    def test_bianchi_identities(self) -> None:
        for k, model in enumerate(self.models):
            pt = _spacetime_points(30 + k, model.dim, 1)[0]
            for name, res in appendix_oracle(model, pt).bianchi.items():
                with self.subTest(name, model=model.name):
                    self.assertLess(res.max_rel, 1e-8)


class TestBaseDependentLambdaZero(unittest.TestCase):
    def test_bianchi_identities(self) -> None:
        def zero(coords):
            phi, x = coords[0], coords[2]
            return phi * phi * 0.4 + x * phi * 0.3 + coords[3] * coords[3] * 0.2 + 0.1

        model = assemble_general(fs_lift(2), GeneralLambda(2, zero, name="base-dependent"))
        pt = np.array([0.25, 0.1, 0.2, -0.15, 0.05, 0.1])
        record = appendix_oracle(model, pt)
        for name, res in record.bianchi.items():
            with self.subTest(name):
                self.assertLess(res.max_rel, 1e-8)
