"""
Unit tests for the hermitian metric, curvature and the real tensor route.

Covers:
  - metric.metric_at against the jet complex Hessian and closed forms
  - determinant identity, eigenvalues, the ⟨z, V⟩_g inner-product identity
  - metric.curvature_at: Christoffel, Ricci-flatness, Kretschmann profile,
    Kähler symmetries of the glued metric in the neck
  - metric.psi_at outside and inside the neck, neck scaling slopes
  - bundle charts: zero-section metric, pullback consistency in both patches,
    the rescaled chart, the exceptional sphere curvature 2/a
  - riemannian.local_geometry: Kretschmann relation and the Ricci identity

Run from the project root:
    python -m pytest tests/test_metric.py -v
"""

import sys
import os
import unittest

import numpy as np

# ── project root on path ──────────────────────────────────────────────────────
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

# ── imports under test ────────────────────────────────────────────────────────
from configs.defaults import SCALING_DELTA
from geometry import metric, riemannian
from geometry.metric import (
    BundleField,
    HermitianMetric,
    RadialField,
    bundle_chart_metric,
    bundle_metric_jets,
    bundle_pullback_metric,
    complex_hessian,
    cross_term_factor,
    curvature_at,
    holomorphic_sectional_curvature,
    loglog_slope,
    metric_at,
    neck_curvature_sup,
    neck_psi_sup,
    potential_jet,
    psi_at,
    radial_christoffel,
)
from geometry.potentials import RadialPotentialSpec, radial_determinant
from utils.error_handler import (
    CapabilityError,
    DegenerateMetricError,
    OrbifoldPointError,
    WrongPatchError,
)

EH1 = RadialPotentialSpec.eguchi_hanson(1.0)


def _random_points(rng, n: int, u_low: float = 0.2, u_high: float = 3.0) -> list:
    points = []
    for _ in range(n):
        direction = rng.normal(size=2) + 1j * rng.normal(size=2)
        direction /= np.linalg.norm(direction)
        points.append(np.sqrt(rng.uniform(u_low, u_high)) * direction)
    return points


# ═════════════════════════════════════════════════════════════════════════════
# Metric
# ═════════════════════════════════════════════════════════════════════════════

class TestMetric(unittest.TestCase):
    def test_eguchi_hanson_reference_point(self):
        g = metric_at(EH1, [1.0, 0.0])
        np.testing.assert_allclose(np.diag([2 ** -0.5, 2 ** 0.5]), g.components, atol=1e-14)
        self.assertAlmostEqual(1.0, g.determinant, places=13)

    def test_euclidean_is_identity(self):
        g = metric_at(RadialPotentialSpec.euclidean(), [0.3 + 0.1j, -0.7j])
        np.testing.assert_allclose(np.eye(2), g.components, atol=1e-15)

    def test_matches_jet_hessian(self):
        rng = np.random.default_rng(42)
        specs = (EH1, RadialPotentialSpec.glued(0.03, 0.1), RadialPotentialSpec.euclidean())
        for spec in specs:
            for z in _random_points(rng, 5, 0.5, 1.2):
                hessian = complex_hessian(potential_jet(spec, z, 2))
                np.testing.assert_allclose(metric_at(spec, z).components, hessian, atol=1e-12)

    def test_eigenvalues(self):
        rng = np.random.default_rng(42)
        for a in (0.1, 1.0):
            spec = RadialPotentialSpec.eguchi_hanson(a)
            for z in _random_points(rng, 10):
                u = float(np.vdot(z, z).real)
                w = np.hypot(a, u)
                np.testing.assert_allclose(sorted([u / w, w / u]), metric_at(spec, z).eigenvalues, rtol=1e-11)

    def test_determinant_identity(self):
        specs = (
            RadialPotentialSpec.eguchi_hanson(0.5),
            RadialPotentialSpec.glued(0.03, 0.1),
            RadialPotentialSpec.euclidean(),
        )
        direction = np.array([0.6, 0.8j])
        for spec in specs:
            for u in np.geomspace(0.05, 10.0, 25):
                z = np.sqrt(u) * direction
                self.assertAlmostEqual(
                    radial_determinant(spec, float(u)), metric_at(spec, z).determinant, delta=1e-11
                )

    def test_inner_product_identity(self):
        rng = np.random.default_rng(42)
        a = 0.7
        spec = RadialPotentialSpec.eguchi_hanson(a)
        for z in _random_points(rng, 20):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            u = float(np.vdot(z, z).real)
            expected = u / np.hypot(a, u) * np.vdot(z, v)
            actual = metric_at(spec, z).inner(z, v)
            self.assertLess(abs(expected - actual), 1e-12 * (1 + abs(expected)))
            self.assertAlmostEqual(u / np.hypot(a, u), metric.zeta_inner_product_factor(spec, z), places=13)

    def test_orbifold_point_rejected(self):
        with self.assertRaises(OrbifoldPointError):
            metric_at(EH1, [0.0, 0.0])

    def test_degenerate_metric_rejected(self):
        with self.assertRaises(DegenerateMetricError):
            HermitianMetric(np.diag([1.0, -1.0]))
        with self.assertRaises(DegenerateMetricError):
            HermitianMetric(np.array([[1.0, 1j], [1j, 1.0]]))

    def test_jet_order_ceiling(self):
        with self.assertRaises(CapabilityError):
            metric.radial_metric_jets(EH1, [1.0, 0.0], 5)


# ═════════════════════════════════════════════════════════════════════════════
# Curvature
# ═════════════════════════════════════════════════════════════════════════════

class TestCurvature(unittest.TestCase):
    def test_christoffel_reference_value(self):
        bundle = curvature_at(EH1, [1.0, 0.0])
        self.assertAlmostEqual(0.5, bundle.christoffel[0, 0, 0].real, places=12)
        self.assertAlmostEqual(0.0, bundle.christoffel[0, 0, 0].imag, places=12)

    def test_christoffel_closed_form(self):
        rng = np.random.default_rng(42)
        spec = RadialPotentialSpec.eguchi_hanson(0.6)
        for z in _random_points(rng, 25):
            closed = radial_christoffel(spec, z)
            jet = curvature_at(spec, z).christoffel
            np.testing.assert_allclose(closed, jet, atol=1e-11 * (1 + np.abs(closed).max()))
            np.testing.assert_allclose(jet, np.einsum("lma->lam", jet), atol=1e-12)

    def test_kretschmann_reference_value(self):
        self.assertAlmostEqual(3.0, curvature_at(EH1, [1.0, 0.0]).kretschmann, places=10)

    def test_kretschmann_profile(self):
        for a in (0.1, 1.0):
            spec = RadialPotentialSpec.eguchi_hanson(a)
            for u in np.linspace(0.1, 5.0, 20):
                expected = 24 * a ** 4 / (a * a + u * u) ** 3
                actual = curvature_at(spec, [np.sqrt(u), 0.0]).kretschmann
                self.assertLess(abs(actual - expected), 1e-9 * expected)

    def test_eguchi_hanson_is_ricci_flat(self):
        rng = np.random.default_rng(42)
        for z in _random_points(rng, 20):
            bundle = curvature_at(EH1, z)
            self.assertLess(np.abs(bundle.ricci).max(), 1e-10)
            self.assertLess(abs(bundle.scalar), 1e-10)

    def test_euclidean_is_flat(self):
        bundle = curvature_at(RadialPotentialSpec.euclidean(), [0.4, 0.2j])
        self.assertEqual(0.0, np.abs(bundle.riemann).max())
        self.assertEqual(0.0, bundle.kretschmann)

    def test_kahler_symmetries_in_the_neck(self):
        spec = RadialPotentialSpec.glued(0.03, 0.1)
        rng = np.random.default_rng(42)
        for _ in range(5):
            direction = rng.normal(size=2) + 1j * rng.normal(size=2)
            z = np.sqrt(rng.uniform(1.01, 1.09)) * direction / np.linalg.norm(direction)
            r = curvature_at(spec, z).riemann
            self.assertGreater(np.abs(r).max(), 1e-6)
            np.testing.assert_allclose(r, np.einsum("mnab->anmb", r), atol=1e-11)
            np.testing.assert_allclose(r, np.einsum("mnab->mban", r), atol=1e-11)
            np.testing.assert_allclose(np.conj(r), np.einsum("mnab->nmba", r), atol=1e-11)

    def test_holomorphic_sectional_curvature_is_real_contraction(self):
        z = np.array([0.9, 0.3j])
        bundle = curvature_at(EH1, z)
        geometry = riemannian.local_geometry(EH1, z)
        v = np.array([1.0, 0.0, 0.0, 0.0])
        iv = np.array([0.0, 1.0, 0.0, 0.0])
        norm = v @ geometry.metric @ v
        direct = riemannian.sectional_form(geometry, v, iv) / norm ** 2
        self.assertAlmostEqual(direct, holomorphic_sectional_curvature(bundle, v), places=10)


# ═════════════════════════════════════════════════════════════════════════════
# ψ and neck scaling
# ═════════════════════════════════════════════════════════════════════════════

class TestPsi(unittest.TestCase):
    def test_zero_outside_neck(self):
        self.assertEqual((0.0, 0.0), psi_at(RadialPotentialSpec.eguchi_hanson(0.1), [0.5, 0.1]))
        self.assertEqual((0.0, 0.0), psi_at(RadialPotentialSpec.euclidean(), [0.5, 0.1]))
        self.assertEqual((0.0, 0.0), psi_at(RadialPotentialSpec.glued(0.03, 0.1), [0.5, 0.1]))
        self.assertEqual((0.0, 0.0), psi_at(RadialPotentialSpec.glued(0.03, 0.1), [1.2, 0.0]))

    def test_neck_value_is_log_determinant(self):
        spec = RadialPotentialSpec.glued(0.03, 0.1)
        u = 1.05
        psi, laplacian = psi_at(spec, [np.sqrt(u), 0.0])
        self.assertAlmostEqual(-np.log(radial_determinant(spec, u)), psi, places=13)
        self.assertTrue(np.isfinite(laplacian))

    def test_bundle_chart_psi_vanishes(self):
        for rescaled in (False, True):
            psi, laplacian = psi_at(BundleField(0.3, rescaled=rescaled), [0.2 + 0.1j, 0.4 - 0.3j])
            self.assertAlmostEqual(0.0, psi, places=12)
            self.assertAlmostEqual(0.0, laplacian, places=9)

    def test_psi_scales_like_a_squared(self):
        a_values = (0.005, 0.01, 0.02)
        sups = [neck_psi_sup(a, SCALING_DELTA, n=101) for a in a_values]
        self.assertAlmostEqual(2.0, loglog_slope(a_values, sups), delta=0.05)

    def test_curvature_scales_like_a_squared(self):
        a_values = (0.005, 0.01, 0.02)
        sups = [neck_curvature_sup(a, SCALING_DELTA, n=21) for a in a_values]
        self.assertAlmostEqual(2.0, loglog_slope(a_values, sups), delta=0.1)


# ═════════════════════════════════════════════════════════════════════════════
# Bundle charts
# ═════════════════════════════════════════════════════════════════════════════

class TestBundleCharts(unittest.TestCase):
    def test_zero_section_origin(self):
        g = bundle_chart_metric(0.1, [0.0, 0.0])
        np.testing.assert_allclose(np.diag([10.0, 0.1]), g.components, atol=1e-14)

    def test_zero_section_eigenvalues(self):
        a = 0.2
        for base in (0.3, 0.5 - 0.5j, 1j):
            s = 1 + abs(base) ** 2
            g = bundle_chart_metric(a, [0.0, base])
            np.testing.assert_allclose(sorted([a / s ** 2, s ** 2 / a]), g.eigenvalues, rtol=1e-10)

    def test_wrong_patch(self):
        with self.assertRaises(WrongPatchError):
            bundle_chart_metric(0.1, [0.1, 1.5])
        with self.assertRaises(WrongPatchError):
            bundle_chart_metric(0.1, [0.1, 0.5], patch="north")

    def test_pullback_consistency(self):
        rng = np.random.default_rng(42)
        for patch in ("zeta", "upsilon"):
            for _ in range(10):
                fiber = complex(rng.normal(scale=0.5), rng.normal(scale=0.5))
                base = complex(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))
                for rescaled in (False, True):
                    closed = bundle_metric_jets(0.4, [fiber, base], 0, rescaled)[0]
                    pulled = bundle_pullback_metric(0.4, [fiber, base], patch, rescaled)
                    np.testing.assert_allclose(closed, pulled, atol=1e-10 * np.abs(closed).max())

    def test_cross_term_factor_is_one(self):
        for patch in ("zeta", "upsilon"):
            self.assertAlmostEqual(1.0, cross_term_factor(0.5, [0.3 + 0.2j, 0.4 - 0.1j], patch), places=10)

    def test_rescaled_eigenvalue_ratio_bounded(self):
        ratios = []
        for a in (0.02, 0.05, 0.1, 0.2):
            g = bundle_chart_metric(a, [0.5, 0.0], rescaled=True)
            low, high = g.eigenvalues
            self.assertGreater(low, 0.1 * a)
            self.assertLess(high, 10.0 * a)
            ratios.append(high / low)
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)

    def test_exceptional_sphere_curvature(self):
        for a in (0.1, 1.0):
            bundle = curvature_at(BundleField(a), [0.0, 0.0])
            base = np.array([0.0, 0.0, 1.0, 0.0])
            self.assertAlmostEqual(2.0 / a, holomorphic_sectional_curvature(bundle, base), delta=1e-8 / a)

    def test_bundle_curvature_matches_orbifold(self):
        a = 0.5
        coords = np.array([0.3 + 0.1j, 0.2 - 0.4j])
        z = metric.bundle_to_orbifold(coords)
        bundle_k = curvature_at(BundleField(a), coords).kretschmann
        orbifold_k = curvature_at(RadialPotentialSpec.eguchi_hanson(a), z).kretschmann
        self.assertAlmostEqual(orbifold_k, bundle_k, delta=1e-9 * orbifold_k)

    def test_fields_agree_with_module_functions(self):
        field = RadialField(EH1)
        z = np.array([0.6, 0.5j])
        np.testing.assert_allclose(metric_at(EH1, z).components, field.metric(z))
        np.testing.assert_allclose(radial_christoffel(EH1, z), field.christoffel(z))


# ═════════════════════════════════════════════════════════════════════════════
# Real tensor route
# ═════════════════════════════════════════════════════════════════════════════

class TestRiemannian(unittest.TestCase):
    def test_real_kretschmann_is_four_times_hermitian(self):
        z = np.array([1.0, 0.0])
        geometry = riemannian.local_geometry(EH1, z)
        self.assertAlmostEqual(12.0, riemannian.real_kretschmann(geometry), places=9)

    def test_real_metric_blocks(self):
        g = metric_at(EH1, [0.8, 0.4j]).components
        real = metric.real_metric(g)
        np.testing.assert_allclose(real, real.T, atol=1e-15)
        v = np.array([0.3, -0.2, 0.5, 0.1])
        xi = metric.hol_vector(v)
        self.assertAlmostEqual(v @ real @ v, HermitianMetric(g).norm_squared(xi), places=13)

    def test_riemann_symmetries(self):
        rm = riemannian.local_geometry(EH1, [0.7, 0.4 + 0.2j]).riemann
        np.testing.assert_allclose(rm, -np.einsum("xyzw->yxzw", rm), atol=1e-11)
        np.testing.assert_allclose(rm, np.einsum("xyzw->zwxy", rm), atol=1e-11)
        bianchi = rm + np.einsum("xyzw->yzxw", rm) + np.einsum("xyzw->zxyw", rm)
        self.assertLess(np.abs(bianchi).max(), 1e-11)

    def test_ricci_identity(self):
        geometry = riemannian.local_geometry(EH1, [0.8, 0.3j], derivatives=2)
        self.assertLess(riemannian.ricci_identity_residual(geometry), 1e-8)

    def test_ricci_identity_needs_second_derivatives(self):
        geometry = riemannian.local_geometry(EH1, [0.8, 0.3j])
        with self.assertRaises(CapabilityError):
            riemannian.ricci_identity_residual(geometry)


if __name__ == "__main__":
    unittest.main()
