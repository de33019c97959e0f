"""
Unit tests for the radial Monge-Ampère solver and the neck correction.

Covers:
  - ma_radial.solve_radial_ma: Eguchi-Hanson and Euclidean recovery, the
    potential itself, the pointwise residual
  - input guards: negative right-hand side, bad ranges, negative h0,
    residual above tolerance
  - lower_bound_check and norm_ma_residual
  - neck_correction_experiment: the annulus constant A, Dirichlet data,
    the Euclidean neck, annuli that miss the neck
  - ma_scaling: quadratic scaling of sup|φ| in a

Run from the project root:
    python -m pytest tests/test_ma_radial.py -v
"""

import sys
import os
import unittest

import numpy as np

# ── project root on path ──────────────────────────────────────────────────────
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

# ── imports under test ────────────────────────────────────────────────────────
from geometry.ma_radial import (
    correction_laplacian,
    lower_bound_check,
    ma_scaling,
    neck_correction_experiment,
    norm_ma_residual,
    solve_radial_ma,
)
from geometry.potentials import RadialPotentialSpec, potential_value
from utils.error_handler import IntegrationError, NonKahlerRhsError, ParameterRangeError


# ═════════════════════════════════════════════════════════════════════════════
# Solver
# ═════════════════════════════════════════════════════════════════════════════

class TestSolveRadialMA(unittest.TestCase):
    def test_recovers_eguchi_hanson(self):
        solution = solve_radial_ma(lambda u: 1.0, 1.0, (0.0, 5.0), n_grid=26)
        grid = solution.grid[1:]
        np.testing.assert_allclose(np.sqrt(1.0 + grid ** 2) / grid, solution.phi_prime[1:], rtol=0, atol=1e-12)
        self.assertEqual(1.0, solution.h[0])
        self.assertEqual(-np.inf, solution.Phi[0])
        self.assertLess(solution.residual, 1e-10)

    def test_recovers_euclidean(self):
        solution = solve_radial_ma(lambda u: 1.0, 0.0, (0.0, 2.0), n_grid=11)
        np.testing.assert_allclose(solution.grid, solution.h, atol=1e-13)
        np.testing.assert_allclose(solution.grid, solution.Phi, atol=1e-12)

    def test_potential_matches_eguchi_hanson(self):
        a, u0 = 0.7, 0.5
        spec = RadialPotentialSpec.eguchi_hanson(a)
        solution = solve_radial_ma(lambda u: 1.0, float(np.hypot(a, u0)), (u0, 3.0), n_grid=21)
        expected = np.array([potential_value(spec, float(u)) for u in solution.grid])
        np.testing.assert_allclose(expected - expected[0], solution.Phi - solution.Phi[0], atol=1e-10)

    def test_negative_rhs_is_rejected(self):
        with self.assertRaises(NonKahlerRhsError):
            solve_radial_ma(lambda u: 1.0 - u, 1.0, (0.5, 2.0))

    def test_bad_parameters(self):
        with self.assertRaises(ParameterRangeError):
            solve_radial_ma(lambda u: 1.0, 1.0, (2.0, 1.0))
        with self.assertRaises(ParameterRangeError):
            solve_radial_ma(lambda u: 1.0, -1.0, (0.5, 2.0))

    def test_identities_for_varying_rhs(self):
        solution = solve_radial_ma(lambda u: 1.0 + 0.1 * u, 0.5, (0.5, 2.0), n_grid=31)
        self.assertLess(norm_ma_residual(solution), 1e-10)
        self.assertGreaterEqual(lower_bound_check(solution), -1e-12)
        self.assertEqual(31, len(correction_laplacian(solution)))

    def test_residual_above_tolerance_is_an_error(self):
        solution = solve_radial_ma(lambda u: 1.0 + 0.1 * u, 0.5, (0.5, 2.0), n_grid=11)
        self.assertGreater(solution.residual, 0.0)
        with self.assertRaises(IntegrationError):
            solve_radial_ma(lambda u: 1.0 + 0.1 * u, 0.5, (0.5, 2.0), n_grid=11, residual_tol=0.0)

    def test_norm_ma_skips_the_orbifold_node(self):
        solution = solve_radial_ma(lambda u: 1.0, 1.0, (0.0, 5.0), n_grid=26)
        self.assertLess(norm_ma_residual(solution), 1e-10)


# ═════════════════════════════════════════════════════════════════════════════
# Neck experiment
# ═════════════════════════════════════════════════════════════════════════════

class TestNeckCorrection(unittest.TestCase):
    def test_annulus_constant_and_boundary_data(self):
        a = 0.1
        result = neck_correction_experiment(a, 0.5, n_grid=41)
        self.assertAlmostEqual(1.0 - a * a / 3.75, result.row.A, places=12)
        self.assertEqual(0.0, result.phi[0])
        self.assertLess(result.row.boundary_mismatch, 1e-9)
        self.assertGreater(result.row.sup_phi, 0.0)
        self.assertGreaterEqual(result.row.min_slack, -1e-12)

    def test_euclidean_neck_needs_no_correction(self):
        result = neck_correction_experiment(0.0, 0.5, n_grid=21)
        self.assertEqual(1.0, result.row.A)
        self.assertLess(result.row.sup_phi, 1e-12)
        self.assertLess(result.row.sup_laplacian, 1e-12)

    def test_annulus_must_contain_neck(self):
        with self.assertRaises(ParameterRangeError):
            neck_correction_experiment(0.1, 0.5, u_range=(1.2, 2.0))
        with self.assertRaises(ParameterRangeError):
            neck_correction_experiment(0.1, 0.5, u_range=(0.5, 1.2))

    def test_row_keys(self):
        row = neck_correction_experiment(0.05, 0.5, n_grid=21).row.as_dict()
        self.assertEqual(
            ["a", "delta", "A", "sup_phi", "sup_lap_phi", "min_lap_phi", "min_slack", "boundary_mismatch"],
            list(row.keys()),
        )


class TestScaling(unittest.TestCase):
    def test_quadratic_scaling(self):
        report = ma_scaling((0.05, 0.1, 0.2), delta=0.5, threads=2, n_grid=41)
        self.assertEqual([0.05, 0.1, 0.2], [row.a for row in report.rows])
        self.assertAlmostEqual(2.0, report.phi_slope, delta=0.2)
        self.assertEqual(3, len(report.as_dict()["rows"]))

    def test_single_point_has_no_slope(self):
        report = ma_scaling((0.1,), delta=0.5, threads=1, n_grid=21)
        self.assertTrue(np.isnan(report.phi_slope))


if __name__ == "__main__":
    unittest.main()
