import unittest

import numpy as np

from nullcong.curvature import (
    MetricField,
    christoffel_jets,
    commutator_residual,
    conformal_rescale,
    covariant_derivative,
    covariant_derivative_jet,
    curvature_pack,
    first_bianchi_residual,
    second_bianchi_residual,
    transform_law_residuals,
    weyl_mixed,
    weyl_trace_residual,
)
from nullcong.errors import ArgumentError
from nullcong.jets import constant, coordinate_jets, jet_apply, stack
from nullcong.tensors import PointTensor, contract


def _random_metric(seed, dim, lorentzian=True, size=0.08):
    """
    A polynomial perturbation of a flat metric.
    """
    rng = np.random.default_rng(seed)
    eta = np.eye(dim)
    if lorentzian:
        eta[-1, -1] = -1.0
    linear = rng.normal(scale=size, size=(dim, dim, dim))
    quadratic = rng.normal(scale=size, size=(dim, dim, dim, dim))
    cubic = rng.normal(scale=size, size=(dim, dim, dim))

    def builder(x):
        rows = []
        for a in range(dim):
            row = []
            for b in range(dim):
                i, j = min(a, b), max(a, b)
                entry = constant(eta[i, j], x[0].point, x[0].order)
                for k in range(dim):
                    entry = entry + x[k] * linear[i, j, k]
                    for m in range(k, dim):
                        entry = entry + x[k] * x[m] * quadratic[i, j, k, m]
                    entry = entry + x[k] * x[k] * x[(k + 1) % dim] * cubic[i, j, k]
                row.append(entry)
            rows.append(stack(row))
        return stack(rows)

    signature = (dim - 1, 1) if lorentzian else (dim, 0)
    return MetricField.from_coordinates(dim, signature, builder, f"random-{seed}")


def _random_point(seed, dim, radius=0.4):
    return np.random.default_rng(seed + 1000).uniform(-radius, radius, size=dim)


def _sphere(radius):
    def builder(x):
        theta = x[0]
        zero = theta * 0.0
        r2 = radius * radius
        return stack(
            [stack([zero + r2, zero]), stack([zero, jet_apply("sin", theta) ** 2 * r2])]
        )

    return MetricField.from_coordinates(2, (2, 0), builder, "sphere")


class TestCurvaturePack(unittest.TestCase):
    def test_minkowski_affine_chart(self) -> None:
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 4)) + 3 * np.eye(4)
        eta = np.diag([1.0, 1.0, 1.0, -1.0])
        g0 = a.T @ eta @ a

        def builder(x):
            return constant(g0, x[0].point, x[0].order)

        pack = curvature_pack(MetricField.from_coordinates(4, (3, 1), builder), np.zeros(4), 3)
        for name in ("riemann", "ricci", "weyl", "cotton", "schouten"):
            with self.subTest(tensor=name):
                np.testing.assert_allclose(getattr(pack, name), 0.0, atol=1e-12)

    def test_sphere_scalar_curvature(self) -> None:
        for radius in (0.5, 1.0, 3.0):
            with self.subTest(radius=radius):
                pack = curvature_pack(_sphere(radius), [0.9, 0.3])
                self.assertAlmostEqual(2.0 / radius**2, pack.scalar, places=10)
                self.assertIsNone(pack.weyl)

    def test_order_validation(self) -> None:
        with self.assertRaises(ArgumentError):
            curvature_pack(_sphere(1.0), [0.9, 0.3], order=1)

    def test_ricci_is_riemann_contraction(self) -> None:
        for seed in range(5):
            pack = curvature_pack(_random_metric(seed, 4), _random_point(seed, 4))
            riemann = PointTensor(pack.riemann, ("d", "d", "u", "d"))
            np.testing.assert_allclose(contract(riemann, 0, 2).components, pack.ricci, atol=1e-12)
            np.testing.assert_allclose(pack.ricci, pack.ricci.T, atol=1e-10)

    def test_einstein_sphere_has_no_cotton(self) -> None:
        def builder(x):
            r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
            factor = 4.0 / ((1 + r2) ** 2)
            zero = factor * 0.0
            return stack([stack([factor if i == j else zero for j in range(3)]) for i in range(3)])

        g = MetricField.from_coordinates(3, (3, 0), builder, "three-sphere")
        pack = curvature_pack(g, [0.2, -0.3, 0.5], order=3)
        np.testing.assert_allclose(pack.ricci, 2.0 * pack.metric, atol=1e-10)
        np.testing.assert_allclose(pack.cotton, 0.0, atol=1e-9)


class TestCurvatureProperties(unittest.TestCase):
    def test_commutator_property(self) -> None:
        for dim in (4, 6):
            for seed in range(10):
                g = _random_metric(seed, dim)
                coefficients = np.random.default_rng(seed + 50).normal(size=(dim, dim))

                def vector(point, order, coefficients=coefficients, dim=dim):
                    x = coordinate_jets(point, order)
                    return stack(
                        [
                            jet_apply("sin", x[c] * coefficients[c, 0])
                            + x[(c + 1) % dim] * x[c] * coefficients[c, 1]
                            for c in range(dim)
                        ]
                    )

                with self.subTest(dim=dim, seed=seed):
                    r = commutator_residual(g, vector, _random_point(seed, dim))
                    self.assertLess(r.max_rel, 1e-7)

    def test_bianchi_identities(self) -> None:
        for seed in range(5):
            pack = curvature_pack(_random_metric(seed, 4), _random_point(seed, 4), order=3)
            with self.subTest(seed=seed):
                self.assertLess(first_bianchi_residual(pack).max_rel, 1e-8)
                self.assertLess(second_bianchi_residual(pack).max_rel, 1e-6)

    def test_weyl_trace_free_and_conformally_invariant(self) -> None:
        for dim in (4, 6):
            for seed in range(5):
                g = _random_metric(seed, dim)
                point = _random_point(seed, dim)
                rng = np.random.default_rng(seed + 7)
                c = rng.normal(scale=0.3, size=(dim, 2))

                def phi(p, order, c=c):
                    x = coordinate_jets(p, order)
                    out = x[0] * 0.0
                    for k in range(len(x)):
                        out = out + x[k] * c[k, 0] + x[k] * x[k] * c[k, 1]
                    return out

                pack = curvature_pack(g, point)
                rescaled = curvature_pack(conformal_rescale(g, phi), point)
                with self.subTest(dim=dim, seed=seed):
                    self.assertLess(weyl_trace_residual(pack).max_rel, 1e-9)
                    lhs, rhs = weyl_mixed(pack), weyl_mixed(rescaled)
                    scale = np.max(np.abs(lhs)) + 1e-30
                    self.assertLess(np.max(np.abs(lhs - rhs)) / scale, 1e-8)

    def test_transform_laws(self) -> None:
        for seed in range(5):
            g = _random_metric(seed, 4)

            def phi(p, order, seed=seed):
                q = np.random.default_rng(seed).normal(scale=0.2, size=(4, 4))
                x = coordinate_jets(p, order)
                out = x[0] * 0.0
                for i in range(4):
                    for j in range(4):
                        out = out + x[i] * x[j] * q[i, j]
                return out

            residuals = transform_law_residuals(g, phi, _random_point(seed, 4))
            with self.subTest(seed=seed):
                self.assertLess(residuals["connection_residual"].max_rel, 1e-8)
                self.assertLess(residuals["schouten_residual"].max_rel, 1e-8)

    def test_constant_factor_is_trivial(self) -> None:
        g = _random_metric(3, 4)

        def phi(p, order):
            return constant(0.7, p, order)

        residuals = transform_law_residuals(g, phi, _random_point(3, 4))
        self.assertLess(residuals["connection_residual"].max_abs, 1e-12)
        self.assertLess(residuals["schouten_residual"].max_abs, 1e-10)

    def test_metric_compatibility_and_torsion_free(self) -> None:
        for seed in range(5):
            g = _random_metric(seed, 4)
            point = _random_point(seed, 4)
            nabla_g = covariant_derivative(g.at, ("d", "d"), g, point)
            np.testing.assert_allclose(nabla_g.components, 0.0, atol=1e-10)

            x = coordinate_jets(point, 2)
            f = jet_apply("exp", x[0] * x[1]) + x[2] * x[3] * x[3]
            _, christoffel = christoffel_jets(g.at(point, 1))
            hessian = covariant_derivative_jet(f.d(), ("d",), christoffel).value
            np.testing.assert_allclose(hessian, hessian.T, atol=1e-12)


if __name__ == "__main__":
    unittest.main()
