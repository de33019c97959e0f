"""
Unit tests for jet arithmetic.

Covers:
  - jets.Jet arithmetic against polynomial identities and brute-force products
  - jets elementary functions against closed-form derivatives
  - graded-lex prefix truncation, partials, derivative tensors
  - tensor-valued jets: einsum products and the Neumann-series inverse
  - domain and singularity errors

Run from the project root:
    python -m pytest tests/test_jets.py -v
"""

import sys
import os
import unittest
from math import factorial

import numpy as np

# ── project root on path ──────────────────────────────────────────────────────
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

# ── imports under test ────────────────────────────────────────────────────────
from geometry import jets
from geometry.jets import Jet, jet_arithmetic, jet_elementary
from utils.error_handler import JetDomainError, SingularJetError


def _polynomial_jet(terms: dict, nvars: int, order: int) -> Jet:
    """Jet at the origin of a polynomial given as {multi_index: coefficient}."""
    coeffs = np.zeros(jets.ncoeff(nvars, order))
    index = jets.index_map(nvars, order)
    for alpha, c in terms.items():
        coeffs[index[alpha]] += c
    return Jet(coeffs, nvars, order)


def _random_polynomial(rng, nvars: int, degree: int) -> dict:
    return {alpha: rng.uniform(-1, 1) for alpha in jets.multi_indices(nvars, degree)}


# ═════════════════════════════════════════════════════════════════════════════
# Layout
# ═════════════════════════════════════════════════════════════════════════════

class TestLayout(unittest.TestCase):
    def test_coefficient_count(self):
        self.assertEqual(210, jets.ncoeff(4, 6))
        self.assertEqual(210, len(jets.multi_indices(4, 6)))
        self.assertEqual(7, len(jets.multi_indices(1, 6)))

    def test_graded_order_makes_truncation_a_prefix(self):
        full = jets.multi_indices(3, 5)
        low = jets.multi_indices(3, 2)
        self.assertEqual(low, full[:len(low)])

    def test_truncate_keeps_prefix(self):
        rng = np.random.default_rng(42)
        jet = Jet(rng.normal(size=jets.ncoeff(2, 4)), 2, 4)
        low = jet.truncate(2)
        self.assertEqual(2, low.order)
        np.testing.assert_array_equal(jet.coeffs[:6], low.coeffs)

    def test_order_of_round_trips(self):
        for order in range(7):
            self.assertEqual(order, jets.order_of(jets.ncoeff(4, order), 4))

    def test_bad_shapes_rejected(self):
        with self.assertRaises(JetDomainError):
            Jet.constant(1.0, 5, 2)
        with self.assertRaises(JetDomainError):
            Jet.constant(1.0, 2, 7)
        with self.assertRaises(JetDomainError):
            Jet(np.zeros(4), 2, 2)

    def test_non_finite_rejected(self):
        coeffs = np.zeros(jets.ncoeff(1, 2))
        coeffs[1] = np.nan
        with self.assertRaises(JetDomainError):
            Jet(coeffs, 1, 2)


# ═════════════════════════════════════════════════════════════════════════════
# Arithmetic
# ═════════════════════════════════════════════════════════════════════════════

class TestArithmetic(unittest.TestCase):
    def test_square_of_one_plus_epsilon(self):
        x = Jet.variable(0, 1.0, 1, 2)
        np.testing.assert_allclose([1.0, 2.0, 1.0], jet_arithmetic(x, x, "mul").coeffs)

    def test_geometric_series(self):
        one = Jet.constant(1.0, 1, 2)
        x = Jet.variable(0, 1.0, 1, 2)
        np.testing.assert_allclose([1.0, -1.0, 1.0], jet_arithmetic(one, x, "div").coeffs)

    def test_product_matches_brute_force_polynomial_product(self):
        rng = np.random.default_rng(42)
        for nvars in (2, 3):
            p = _random_polynomial(rng, nvars, 3)
            q = _random_polynomial(rng, nvars, 3)
            expected = {}
            for a, ca in p.items():
                for b, cb in q.items():
                    key = tuple(x + y for x, y in zip(a, b))
                    expected[key] = expected.get(key, 0.0) + ca * cb
            product = _polynomial_jet(p, nvars, 6) * _polynomial_jet(q, nvars, 6)
            np.testing.assert_allclose(
                _polynomial_jet(expected, nvars, 6).coeffs, product.coeffs, atol=1e-14
            )

    def test_associative_and_distributive(self):
        rng = np.random.default_rng(42)
        size = jets.ncoeff(3, 4)
        a, b, c = (Jet(rng.uniform(-1, 1, size), 3, 4) for _ in range(3))
        np.testing.assert_allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-13)
        np.testing.assert_allclose((a * (b + c)).coeffs, (a * b + a * c).coeffs, atol=1e-13)

    def test_scalar_operands(self):
        x = Jet.variable(0, 2.0, 1, 3)
        np.testing.assert_allclose([5.0, 1.0, 0.0, 0.0], (x + 3).coeffs)
        np.testing.assert_allclose([1.0, -1.0, 0.0, 0.0], (3 - x).coeffs)
        np.testing.assert_allclose([1.0, 0.5, 0.0, 0.0], (x / 2).coeffs)
        np.testing.assert_allclose([8.0, 12.0, 6.0, 1.0], (x ** 3).coeffs)

    def test_division_by_zero_constant_term(self):
        x = Jet.variable(0, 0.0, 1, 2)
        with self.assertRaises(SingularJetError):
            _ = 1.0 / x

    def test_mismatched_jets_rejected(self):
        with self.assertRaises(JetDomainError):
            jet_arithmetic(Jet.constant(1.0, 1, 2), Jet.constant(1.0, 2, 2), "add")
        with self.assertRaises(JetDomainError):
            jet_arithmetic(Jet.constant(1.0, 1, 2), Jet.constant(1.0, 1, 3), "add")

    def test_mixed_orders_truncate_to_lower(self):
        x = Jet.variable(0, 1.0, 1, 4)
        y = Jet.variable(0, 1.0, 1, 2)
        self.assertEqual(2, (x * y).order)


# ═════════════════════════════════════════════════════════════════════════════
# Elementary functions
# ═════════════════════════════════════════════════════════════════════════════

class TestElementary(unittest.TestCase):
    def test_sqrt_first_order(self):
        x = Jet.variable(0, 4.0, 1, 1)
        np.testing.assert_allclose([2.0, 0.25], jet_elementary(x, "sqrt").coeffs)

    def test_arsinh_at_zero(self):
        x = Jet.variable(0, 0.0, 1, 3)
        np.testing.assert_allclose([0.0, 1.0, 0.0, -1.0 / 6.0], jet_elementary(x, "arsinh").coeffs, atol=1e-15)

    def test_ln_derivatives(self):
        x0 = 2.0
        jet = jet_elementary(Jet.variable(0, x0, 1, 6), "ln")
        for k in range(1, 7):
            expected = (-1) ** (k + 1) * factorial(k - 1) / x0 ** k
            self.assertAlmostEqual(expected, jet.derivative((k,)), places=13)

    def test_exp_sin_cos(self):
        x0 = 0.3
        x = Jet.variable(0, x0, 1, 6)
        e, s, c = jets.exp(x), jets.sin(x), jets.cos(x)
        for k in range(7):
            self.assertAlmostEqual(np.exp(x0), e.derivative((k,)), places=13)
            self.assertAlmostEqual(np.sin(x0 + k * np.pi / 2), s.derivative((k,)), places=13)
            self.assertAlmostEqual(np.cos(x0 + k * np.pi / 2), c.derivative((k,)), places=13)

    def test_arsinh_against_finite_differences(self):
        x0, h = 0.7, 1e-3
        jet = jets.arsinh(Jet.variable(0, x0, 1, 4))
        f = np.arcsinh
        first = (f(x0 + h) - f(x0 - h)) / (2 * h)
        first_half = (f(x0 + h / 2) - f(x0 - h / 2)) / h
        richardson = (4 * first_half - first) / 3
        self.assertAlmostEqual(1.0, jet.derivative((1,)) / richardson, places=9)
        second = (f(x0 + h) - 2 * f(x0) + f(x0 - h)) / h ** 2
        self.assertAlmostEqual(jet.derivative((2,)), second, places=6)

    def test_chain_rule_round_trip(self):
        rng = np.random.default_rng(42)
        size = jets.ncoeff(2, 5)
        coeffs = rng.uniform(-0.5, 0.5, size)
        coeffs[0] = 2.0
        jet = Jet(coeffs, 2, 5)
        np.testing.assert_allclose(jet.coeffs, (jets.sqrt(jet) * jets.sqrt(jet)).coeffs, atol=1e-13)
        np.testing.assert_allclose(jet.coeffs, jets.exp(jets.ln(jet)).coeffs, atol=1e-13)
        np.testing.assert_allclose(
            jets.power(jet, 1.5).coeffs, (jet * jets.sqrt(jet)).coeffs, atol=1e-13
        )

    def test_arsinh_compensated_small_argument(self):
        t = 1e-9
        self.assertAlmostEqual(t - t ** 3 / 6, jets.arsinh_compensated(t), places=20)
        self.assertAlmostEqual(-jets.arsinh_compensated(0.4), jets.arsinh_compensated(-0.4), places=15)

    def test_domain_errors(self):
        negative = Jet.variable(0, -1.0, 1, 2)
        with self.assertRaises(JetDomainError):
            jets.sqrt(negative)
        with self.assertRaises(JetDomainError):
            jets.ln(negative)
        with self.assertRaises(JetDomainError):
            jet_elementary(negative, "tan")

    def test_multivariate_mixed_partial(self):
        x, y = Jet.variables([0.5, 1.5], 4)
        f = jets.exp(x * y)
        # d^2/dxdy e^{xy} = (1 + xy) e^{xy}
        self.assertAlmostEqual((1 + 0.75) * np.exp(0.75), f.derivative((1, 1)), places=12)
        self.assertAlmostEqual((1 + 0.75) * np.exp(0.75), f.hessian()[0, 1], places=12)


# ═════════════════════════════════════════════════════════════════════════════
# Derivatives and tensors
# ═════════════════════════════════════════════════════════════════════════════

class TestTensors(unittest.TestCase):
    def test_partial_lowers_order(self):
        x, y = Jet.variables([1.0, 2.0], 3)
        f = x * x * y
        fx = f.partial(0)
        self.assertEqual(2, fx.order)
        self.assertAlmostEqual(4.0, fx.value)
        self.assertAlmostEqual(2.0, fx.partial(0).value)

    def test_derivative_tensor_symmetry(self):
        x, y, w = Jet.variables([0.2, -0.4, 0.9], 4)
        f = jets.sin(x * y + w * w * x)
        t3 = f.derivative_tensor(3)
        self.assertEqual((3, 3, 3), t3.shape)
        np.testing.assert_allclose(t3, np.transpose(t3, (1, 0, 2)))
        np.testing.assert_allclose(t3, np.transpose(t3, (2, 1, 0)))

    def test_complex_coefficients(self):
        x, y = Jet.variables([0.3, 0.4], 2)
        z = x + 1j * y
        w = z * z
        # holomorphic derivative (d_x - i d_y)/2 of z^2 is 2z
        dz = 0.5 * (w.partial(0) - 1j * w.partial(1))
        self.assertAlmostEqual(2 * (0.3 + 0.4j), dz.value)

    def test_tensor_product_matches_jet_product(self):
        x, y = Jet.variables([0.3, 0.8], 3)
        a = np.stack([(x * y).coeffs, jets.exp(x).coeffs], axis=1)
        b = np.stack([jets.sin(y).coeffs, (x + y).coeffs], axis=1)
        dot = jets.tensor_product(a, b, 2, "i,i->")
        expected = x * y * jets.sin(y) + jets.exp(x) * (x + y)
        np.testing.assert_allclose(expected.coeffs, dot, atol=1e-14)

    def test_matrix_inverse(self):
        rng = np.random.default_rng(42)
        nvars, order = 3, 4
        size = jets.ncoeff(nvars, order)
        matrix = rng.uniform(-0.2, 0.2, (size, 3, 3))
        matrix[0] += 3 * np.eye(3)
        inverse = jets.matrix_inverse(matrix, nvars)
        identity = jets.tensor_product(matrix, inverse, nvars, "ij,jk->ik")
        np.testing.assert_allclose(np.eye(3), identity[0], atol=1e-14)
        np.testing.assert_allclose(0.0, identity[1:], atol=1e-13)

    def test_matrix_det2(self):
        x, y = Jet.variables([0.5, 0.1], 2)
        m = np.empty((jets.ncoeff(2, 2), 2, 2))
        m[:, 0, 0] = (1 + x).coeffs
        m[:, 0, 1] = y.coeffs
        m[:, 1, 0] = y.coeffs
        m[:, 1, 1] = (2 + x * x).coeffs
        expected = (1 + x) * (2 + x * x) - y * y
        np.testing.assert_allclose(expected.coeffs, jets.matrix_det2(m, 2), atol=1e-15)

    def test_derivative_beyond_order(self):
        jet = Jet.variable(0, 1.0, 1, 2)
        with self.assertRaises(JetDomainError):
            jet.derivative_tensor(3)
        with self.assertRaises(JetDomainError):
            Jet.constant(1.0, 1, 0).partial(0)


# ═════════════════════════════════════════════════════════════════════════════
# Univariate series helpers
# ═════════════════════════════════════════════════════════════════════════════

class TestSeries(unittest.TestCase):
    def test_power_series_is_binomial(self):
        series = jets.taylor_series("power", 1.0, 3, p=-0.5)
        np.testing.assert_allclose([1.0, -0.5, 0.375, -0.3125], series)

    def test_antiderivative(self):
        series = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose([5.0, 1.0, 1.0, 1.0], jets.antiderivative(series, 5.0))

    def test_unknown_function(self):
        with self.assertRaises(JetDomainError):
            jets.taylor_series("gamma", 1.0, 2)


if __name__ == "__main__":
    unittest.main()
