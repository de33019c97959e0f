"""
Unit tests for the geodesic integrator and the radial distance quantities.

Covers:
  - geodesics.integrate_geodesic: straight lines of the flat field, energy
    conservation and time reversal on Eguchi-Hanson, the closed equator of E
  - guards: bad T, too large a step, energy drift, orbifold proximity
  - geodesics.parallel_transport: G-inner products are preserved
  - PatchworkField chart labels: hysteresis band around the gluing radius
  - sqrt_distance, radial_theta_first_integral, divisor_distance_profile
  - christoffel_defect and the acceleration identity

Run from the project root:
    python -m pytest tests/test_geodesics.py -v
"""

import sys
import os
import unittest

import numpy as np

# ── project root on path ──────────────────────────────────────────────────────
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

# ── imports under test ────────────────────────────────────────────────────────
from geometry.geodesics import (
    FlatField,
    GeodesicState,
    PatchworkField,
    acceleration_identity_residual,
    christoffel_defect,
    divisor_distance_profile,
    energy,
    equator_field,
    equator_state,
    integrate_geodesic,
    parallel_transport,
    radial_theta_first_integral,
    reverse_state,
    sqrt_distance,
)
from geometry.kummer import ChartKind, ChartPoint, KummerSurface, half_lattice_points
from geometry.metric import RadialField, hol_vector, real_metric
from geometry.potentials import RadialPotentialSpec
from utils.error_handler import AccuracyError, IntegrationError, OrbifoldProximityError

EH1 = RadialPotentialSpec.eguchi_hanson(1.0)


def _unit_state(field, z0, direction) -> GeodesicState:
    z0 = np.asarray(z0, dtype=complex)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.sqrt(energy(field.metric(z0), hol_vector(direction)))
    return GeodesicState(ChartPoint(ChartKind.EGUCHI_HANSON, z0), direction)


# ═════════════════════════════════════════════════════════════════════════════
# Integration
# ═════════════════════════════════════════════════════════════════════════════

class TestIntegrateGeodesic(unittest.TestCase):
    def test_flat_geodesics_are_straight_lines(self):
        state = GeodesicState(ChartPoint(ChartKind.FLAT, np.array([1.0, 2.0j])), np.array([0.5, 0.0, 0.0, 0.5]))
        path = integrate_geodesic(FlatField(), state, 2.0, step=0.01)
        np.testing.assert_allclose(np.array([2.0, 3.0j]), path.positions[-1], atol=1e-13)
        self.assertEqual(0.0, path.energy_drift)
        self.assertEqual(0.0, float(np.abs(path.accelerations).max()))

    def test_energy_is_conserved(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.3j], [0.3, 1.0, 0.2, -0.4])
        path = integrate_geodesic(field, state, 2.0, step=1e-3)
        self.assertAlmostEqual(1.0, path.energies[0], places=12)
        self.assertLess(path.energy_drift, 1e-9)

    def test_time_reversal_returns_to_start(self):
        field = RadialField(EH1)
        state = _unit_state(field, [0.8, 0.2], [0.0, 1.0, 0.5, 0.0])
        forward = integrate_geodesic(field, state, 1.0, step=1e-3)
        end = GeodesicState.from_complex(ChartKind.EGUCHI_HANSON, forward.positions[-1], forward.velocities[-1])
        back = integrate_geodesic(field, reverse_state(end), 1.0, step=1e-3)
        np.testing.assert_allclose(forward.positions[0], back.positions[-1], atol=1e-9)

    def test_spec_is_accepted_as_source(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.0], [0.0, 1.0, 0.0, 0.0])
        by_spec = integrate_geodesic(EH1, state, 0.1, step=2e-3)
        by_field = integrate_geodesic(field, state, 0.1, step=2e-3)
        np.testing.assert_allclose(by_field.positions, by_spec.positions)

    def test_equator_closes(self):
        a = 1.0
        state, period = equator_state(a)
        path = integrate_geodesic(equator_field(a), state, period, step=2e-3)
        self.assertAlmostEqual(1.0, path.energies[0], places=10)
        self.assertLess(path.closure_error(), 1e-6)

    def test_rejects_non_positive_time(self):
        state = GeodesicState(ChartPoint(ChartKind.FLAT, np.zeros(2, dtype=complex)), np.array([1.0, 0, 0, 0]))
        with self.assertRaises(IntegrationError):
            integrate_geodesic(FlatField(), state, 0.0)

    def test_step_doubling_monitor(self):
        field = RadialField(EH1)
        state = _unit_state(field, [0.5, 0.0], [1.0, 0.5, 0.0, 0.0])
        with self.assertRaises(AccuracyError):
            integrate_geodesic(field, state, 2.0, step=0.5)

    def test_energy_drift_gate(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.3j], [0.3, 1.0, 0.2, -0.4])
        with self.assertRaises(AccuracyError):
            integrate_geodesic(field, state, 2.0, step=0.2, tolerance=1.0)
        path = integrate_geodesic(field, state, 2.0, step=0.2, tolerance=1.0, drift_tol=1.0)
        self.assertGreater(path.energy_drift, 2e-9)

    def test_transport_shares_the_drift_gate(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.3j], [0.3, 1.0, 0.2, -0.4])
        with self.assertRaises(AccuracyError):
            parallel_transport(field, state, [[1.0, 0.0, 0.0, 0.0]], 2.0, step=0.2, tolerance=1.0)

    def test_orbifold_proximity(self):
        field = RadialField(EH1)
        state = _unit_state(field, [0.1, 0.0], [-1.0, 0.0, 0.0, 0.0])
        with self.assertRaises(OrbifoldProximityError):
            integrate_geodesic(field, state, 1.0, step=1e-3, u_min=0.02)


# ═════════════════════════════════════════════════════════════════════════════
# Parallel transport and patchwork labels
# ═════════════════════════════════════════════════════════════════════════════

class TestParallelTransport(unittest.TestCase):
    def test_inner_products_are_preserved(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.5j], [0.2, 1.0, -0.3, 0.1])
        vectors = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.5]])
        result = parallel_transport(field, state, vectors, 1.0, step=1e-3)
        start = real_metric(field.metric(result.path.positions[0]))
        end = real_metric(field.metric(result.path.positions[-1]))
        gram_start = result.vectors[0] @ start @ result.vectors[0].T
        gram_end = result.vectors[-1] @ end @ result.vectors[-1].T
        np.testing.assert_allclose(gram_start, gram_end, atol=1e-9)

    def test_flat_transport_is_trivial(self):
        state = GeodesicState(ChartPoint(ChartKind.FLAT, np.zeros(2, dtype=complex)), np.array([1.0, 0, 0, 0]))
        result = parallel_transport(FlatField(), state, [[0.0, 1.0, 2.0, 3.0]], 1.0, step=0.1)
        np.testing.assert_allclose([0.0, 1.0, 2.0, 3.0], result.vectors[-1, 0], atol=1e-14)


class TestPatchworkField(unittest.TestCase):
    def setUp(self):
        self.surface = KummerSurface.uniform(0.05, delta=0.1)
        self.field = PatchworkField(self.surface)
        self.q = half_lattice_points(self.surface)[4]

    def _at(self, u: float) -> np.ndarray:
        return self.q + np.array([np.sqrt(u), 0.0])

    def test_labels_without_history_split_at_gluing_radius(self):
        self.assertEqual("EH_4", self.field.chart_label(self._at(0.9)))
        self.assertEqual("EH_4", self.field.chart_label(self._at(0.97)))
        self.assertEqual("Flat", self.field.chart_label(self._at(1.03)))

    def test_leaving_a_neck_needs_upper_band_edge(self):
        self.assertEqual("EH_4", self.field.chart_label(self._at(1.03), previous="EH_4"))
        self.assertEqual("Flat", self.field.chart_label(self._at(1.06), previous="EH_4"))
        self.assertEqual("Flat", self.field.chart_label(self._at(1.15), previous="EH_4"))

    def test_entering_a_neck_needs_lower_band_edge(self):
        self.assertEqual("Flat", self.field.chart_label(self._at(0.97), previous="Flat"))
        self.assertEqual("EH_4", self.field.chart_label(self._at(0.94), previous="Flat"))
        self.assertEqual("Flat", self.field.chart_label(self._at(1.15), previous="Flat"))

    def test_flat_region_has_no_christoffel(self):
        z = self.q + np.array([np.sqrt(1.5), 0.0])
        self.assertEqual(0.0, float(np.abs(self.field.christoffel(z)).max()))


# ═════════════════════════════════════════════════════════════════════════════
# Radial distance to E
# ═════════════════════════════════════════════════════════════════════════════

class TestDivisorDistance(unittest.TestCase):
    def test_sqrt_distance_without_blow_up(self):
        for u in (0.25, 1.0, 4.0):
            self.assertAlmostEqual(np.sqrt(u), sqrt_distance(0.0, u), places=12)

    def test_sqrt_distance_increases_with_u(self):
        values = [sqrt_distance(1.0, u) for u in (0.5, 1.0, 2.0, 4.0)]
        self.assertTrue(np.all(np.diff(values) > 0.0))

    def test_theta_first_integral(self):
        for a, u in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.3)):
            profile = radial_theta_first_integral(a, u)
            self.assertLess(profile.first_integral_residual, 1e-8)
            self.assertLess(profile.inversion_residual, 1e-7)
            self.assertAlmostEqual(1.0, profile.theta[-1], places=12)

    def test_theta_rejects_bad_input(self):
        with self.assertRaises(IntegrationError):
            radial_theta_first_integral(1.0, 0.0)

    def test_profile_matches_finite_differences(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.0], [0.4, 1.0, 0.3, 0.0])
        path = integrate_geodesic(field, state, 0.5, step=1e-3)
        profile = divisor_distance_profile(1.0, path, every=10)
        h = profile.times[1] - profile.times[0]
        fd_dot = (profile.d[2:] - profile.d[:-2]) / (2.0 * h)
        np.testing.assert_allclose(fd_dot, profile.d_dot[1:-1], atol=1e-4)
        np.testing.assert_allclose(profile.fd_ddot[1:-1], profile.d_ddot[1:-1], atol=1e-3)
        self.assertTrue(np.isnan(profile.fd_ddot[0]))


# ═════════════════════════════════════════════════════════════════════════════
# Christoffel defect
# ═════════════════════════════════════════════════════════════════════════════

class TestChristoffelDefect(unittest.TestCase):
    def test_same_metric_has_no_defect(self):
        defect = christoffel_defect(EH1, EH1, [0.7, 0.4j])
        self.assertEqual(0.0, defect.norm)

    def test_defect_against_flat_metric(self):
        defect = christoffel_defect(RadialPotentialSpec.euclidean(), EH1, [0.7, 0.4j])
        self.assertGreater(defect.norm, 0.0)
        np.testing.assert_allclose(np.zeros(2), defect.apply([0.0, 0.0]))

    def test_acceleration_identity(self):
        field = RadialField(EH1)
        state = _unit_state(field, [1.0, 0.2], [0.1, 1.0, 0.0, 0.3])
        path = integrate_geodesic(field, state, 0.5, step=1e-3)
        residual = acceleration_identity_residual(RadialPotentialSpec.euclidean(), EH1, path, every=50)
        self.assertLess(residual, 1e-9)


if __name__ == "__main__":
    unittest.main()
