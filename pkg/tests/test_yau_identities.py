"""
Unit tests for the curvature identities of Ricci-flat Kähler surfaces.

Covers:
  - yau_identities.laplacian_riemann_identity: jets route and geodesic finite
    differences against the σ right-hand side, the fixed-set special case
  - yau_identity_residuals on Eguchi-Hanson, flat space and the glued neck
    (not Ricci-flat), with polynomial and radial perturbations
  - lower bounds: gradient inequality, arithmetic-geometric slack
  - degenerate perturbations are rejected

Run from the project root:
    python -m pytest tests/test_yau_identities.py -v
"""

import sys
import os
import unittest

import numpy as np

# ── project root on path ──────────────────────────────────────────────────────
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

# ── imports under test ────────────────────────────────────────────────────────
from geometry.hyperkahler import SigmaInvariants
from geometry.potentials import RadialPotentialSpec
from geometry.yau_identities import (
    PolynomialPerturbation,
    laplacian_rhs,
    laplacian_riemann_identity,
    radial_perturbation,
    random_perturbation,
    random_radial_perturbation,
    yau_identity_residuals,
)
from utils.error_handler import DegenerateMetricError

EH1 = RadialPotentialSpec.eguchi_hanson(1.0)
POINT = np.array([0.7 + 0.2j, -0.3 + 0.5j])


# ═════════════════════════════════════════════════════════════════════════════
# Laplacian of the curvature
# ═════════════════════════════════════════════════════════════════════════════

class TestLaplacianIdentity(unittest.TestCase):
    def test_rhs_formula(self):
        sigma = SigmaInvariants(sII=1.0, sJJ=-0.5, sKK=-0.5, sIJ=0.1, sIK=0.2, sJK=0.3)
        expected = -4.0 * (1.0 + 2.0 * 0.25 + 0.01 + 0.04 - 2.0 * 0.09)
        self.assertAlmostEqual(expected, laplacian_rhs(sigma), places=14)

    def test_jets_route(self):
        report = laplacian_riemann_identity(EH1, POINT, [0.3, -1.0, 0.4, 0.2])
        self.assertNotEqual(0.0, report.rhs)
        self.assertLess(report.tensorial_error, 1e-8)

    def test_finite_difference_route(self):
        report = laplacian_riemann_identity(EH1, POINT, [1.0, 0.0, 0.5, 0.0])
        self.assertLess(report.finite_difference_error, 1e-5)

    def test_fixed_set_value(self):
        report = laplacian_riemann_identity(EH1, [1.0, 0.0], [1.0, 0.0, 0.0, 0.0])
        self.assertAlmostEqual(report.fixed_set_rhs, report.rhs, delta=1e-9 * abs(report.rhs))
        self.assertLess(report.tensorial_error, 1e-8)


# ═════════════════════════════════════════════════════════════════════════════
# Monge-Ampère identities
# ═════════════════════════════════════════════════════════════════════════════

class TestYauIdentities(unittest.TestCase):
    def test_eguchi_hanson_background(self):
        rng = np.random.default_rng(21)
        for _ in range(3):
            report = yau_identity_residuals(EH1, random_perturbation(rng), POINT)
            self.assertTrue(report.ricci_flat)
            self.assertIsNotNone(report.trace_laplacian_frame)
            self.assertLess(report.worst_identity(), 1e-9)

    def test_lower_bounds(self):
        rng = np.random.default_rng(8)
        report = yau_identity_residuals(EH1, random_perturbation(rng), POINT)
        self.assertGreaterEqual(report.gradient_slack, -1e-9)
        self.assertGreaterEqual(report.am_gm_slack, -1e-12)
        for c, slack in report.curvature_bound_slack.items():
            with self.subTest(c=c):
                self.assertGreaterEqual(slack, -1e-9)

    def test_flat_background(self):
        report = yau_identity_residuals(RadialPotentialSpec.euclidean(), random_perturbation(np.random.default_rng(2)),
                                        POINT)
        self.assertTrue(report.ricci_flat)
        self.assertEqual(0.0, report.values["R_1122"])
        self.assertLess(report.worst_identity(), 1e-10)

    def test_glued_neck_is_not_ricci_flat(self):
        glued = RadialPotentialSpec.glued(0.3, 0.5)
        z = np.array([np.sqrt(1.2), 0.0])
        report = yau_identity_residuals(glued, random_perturbation(np.random.default_rng(3)), z)
        self.assertFalse(report.ricci_flat)
        self.assertIsNone(report.trace_laplacian_frame)
        self.assertEqual({}, report.curvature_bound_slack)
        self.assertLess(report.worst_identity(), 1e-9)

    def test_radial_perturbations(self):
        quadratic = radial_perturbation(lambda u: u * u, scale=0.01)
        wavy = random_radial_perturbation(np.random.default_rng(5))
        for perturbation in (quadratic, wavy):
            report = yau_identity_residuals(EH1, perturbation, POINT, A=1.0)
            self.assertLess(report.worst_identity(), 1e-9)

    def test_zero_perturbation(self):
        report = yau_identity_residuals(EH1, PolynomialPerturbation({}), POINT)
        self.assertAlmostEqual(2.0, report.values["trace"], places=14)
        self.assertAlmostEqual(1.0, report.values["det_ratio"], places=14)
        self.assertAlmostEqual(0.0, report.am_gm_slack, places=14)
        self.assertAlmostEqual(0.0, report.norm_ma, places=14)

    def test_degenerate_perturbation(self):
        perturbation = PolynomialPerturbation({(2, 0, 0, 0): -10.0, (0, 2, 0, 0): -10.0})
        with self.assertRaises(DegenerateMetricError):
            yau_identity_residuals(EH1, perturbation, POINT)


if __name__ == "__main__":
    unittest.main()
