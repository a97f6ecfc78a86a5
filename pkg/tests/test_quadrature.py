import unittest
from unittest.mock import patch
import math
import numpy as np
import sys
import os

from numpy.polynomial import Polynomial
from numpy.polynomial.hermite import hermgauss
from scipy.linalg import LinAlgError

# Add the project root to the Python path to allow importing dunkl_oscillator
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

from dunkl_oscillator import hermite_basis, quadrature
from dunkl_oscillator.errors import ConvergenceError, DegreeTooHigh, DomainError

SIGMAS = (-0.3, 0.0, 0.5, 2.0)


class TestBuildRule(unittest.TestCase):

    def test_order_one(self):
        """A single node at 0 carrying the whole mass."""
        params = hermite_basis.make_params(0.7, 1.3)
        rule = quadrature.build_rule(params, 1)
        np.testing.assert_array_equal(rule.nodes, [0.0])
        mu0 = hermite_basis.recurrence_coeffs(params, 1).mu0
        self.assertAlmostEqual(rule.weights[0], mu0, delta=1e-13 * mu0)

    def test_order_two_nodes(self):
        """x_{2,1}^2 = (1 + 2 sigma) / (2 s), so the nodes are +-1 at sigma=0.5, s=1."""
        rule = quadrature.build_rule(hermite_basis.make_params(0.5, 1.0), 2)
        np.testing.assert_allclose(rule.nodes, [1.0, -1.0], rtol=0, atol=1e-15)

    def test_classical_gauss_hermite(self):
        """sigma=0, s=1 reproduces the classical rule for e^{-x^2}."""
        rule = quadrature.build_rule(hermite_basis.make_params(0.0, 1.0), 10)
        nodes, weights = hermgauss(10)
        np.testing.assert_allclose(rule.nodes, nodes[::-1], rtol=0, atol=1e-12)
        np.testing.assert_allclose(rule.weights, weights[::-1], rtol=1e-11)

    def test_rejects_order_zero(self):
        with self.assertRaises(DomainError):
            quadrature.build_rule(hermite_basis.make_params(0.0, 1.0), 0)

    def test_symmetry_positivity_and_mass(self):
        """Nodes strictly decreasing and symmetric, weights positive, total weight mu0."""
        for sigma in SIGMAS:
            params = hermite_basis.make_params(sigma, 1.5)
            mu0 = hermite_basis.recurrence_coeffs(params, 1).mu0
            for k in (1, 2, 7, 40, 151):
                rule = quadrature.build_rule(params, k)
                self.assertTrue(np.all(np.diff(rule.nodes) < 0), msg=f"k={k}, sigma={sigma}")
                np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
                self.assertTrue(np.all(rule.weights > 0))
                self.assertAlmostEqual(rule.weights.sum(), mu0, delta=1e-12 * mu0, msg=f"k={k}, sigma={sigma}")

    def test_nodes_are_zeros(self):
        """p_k vanishes at every node relative to its size between nodes."""
        params = hermite_basis.make_params(-0.3, 1.0)
        for k in (5, 64, 200):
            rule = quadrature.build_rule(params, k)
            at_nodes = np.abs(hermite_basis.basis_values(params, k, rule.nodes, 'phi'))
            scale = np.max(np.abs(hermite_basis.basis_values(params, k, np.linspace(-rule.nodes[0], rule.nodes[0], 2001), 'phi')))
            self.assertLess(np.max(at_nodes) / scale, 1e-11, msg=f"k={k}")

    def test_sign_changes_between_nodes(self):
        """p_k has one sign change between consecutive nodes for every k <= 200."""
        params = hermite_basis.make_params(0.5, 1.0)
        for k in range(2, 201):
            rule = quadrature.build_rule(params, k)
            midpoints = 0.5 * (rule.nodes[:-1] + rule.nodes[1:])
            signs = np.sign(hermite_basis.basis_values(params, k, midpoints, 'poly'))
            self.assertTrue(np.all(signs[:-1] * signs[1:] < 0), msg=f"k={k}")

    def test_product_form(self):
        """p_k = gamma_k prod (x - x_i) for small k."""
        params = hermite_basis.make_params(0.8, 0.6)
        x = np.linspace(-2.5, 2.5, 23)
        for k in range(1, 13):
            rule = quadrature.build_rule(params, k)
            product = math.exp(hermite_basis.leading_coeff(params, k)) * np.prod(x[:, None] - rule.nodes[None, :], axis=1)
            direct = hermite_basis.basis_values(params, k, x, 'poly')
            np.testing.assert_allclose(direct, product, rtol=1e-10, atol=1e-12, err_msg=f"k={k}")

    def test_eigensolver_failure(self):
        """A LAPACK failure surfaces as ConvergenceError."""
        params = hermite_basis.make_params(0.1234, 1.0)
        with patch('dunkl_oscillator.quadrature.eigvalsh_tridiagonal', side_effect=LinAlgError('no convergence')):
            with self.assertRaises(ConvergenceError):
                quadrature.build_rule(params, 12)

    def test_weight_crosscheck_warns_on_mismatch(self):
        """Disagreeing eigenvector weights are logged, the closed form is kept."""
        params = hermite_basis.make_params(0.4321, 1.0)
        with patch('dunkl_oscillator.quadrature.eigenvector_weights', side_effect=lambda p, k: np.full(k, 123.0)):
            with self.assertLogs(level='WARNING') as logs:
                rule = quadrature.build_rule(params, 6)
        self.assertTrue(any('differ' in line for line in logs.output))
        mu0 = hermite_basis.recurrence_coeffs(params, 1).mu0
        self.assertAlmostEqual(rule.weights.sum(), mu0, delta=1e-12 * mu0)

    def test_build_rules_matches_single_builds(self):
        params = hermite_basis.make_params(0.25, 1.0)
        rules = quadrature.build_rules(params, [3, 4, 5], jobs=1)
        for rule, k in zip(rules, (3, 4, 5)):
            self.assertEqual(rule.k, k)
            np.testing.assert_array_equal(rule.nodes, quadrature.build_rule(params, k).nodes)


class TestWeights(unittest.TestCase):

    def test_weight_identity(self):
        """p_k'(x_i)^2 lambda_i = 2s at nonzero nodes and 2s/(1+2 sigma) at the node 0 of odd rules."""
        for sigma in SIGMAS:
            for s in (0.5, 2.0):
                params = hermite_basis.make_params(sigma, s)
                for k in (1, 2, 9, 50, 51, 120, 200):
                    rule = quadrature.build_rule(params, k)
                    expected = np.where(rule.nodes == 0, 2 * s / (1 + 2 * sigma), 2 * s)
                    deriv = hermite_basis.basis_derivative(params, k, rule.nodes, 'poly')
                    err = np.max(np.abs(deriv ** 2 * rule.weights - expected) / expected)
                    self.assertLess(err, 1e-8, msg=f"k={k}, sigma={sigma}, s={s}")

    def test_odd_rule_weights_match_eigenvectors(self):
        """Golub-Welsch weights agree with the closed form for odd orders and sigma != 0."""
        for sigma in (-0.3, 0.5, 2.0):
            params = hermite_basis.make_params(sigma, 1.0)
            for k in (3, 7, 21):
                rule = quadrature.build_rule(params, k)
                large = rule.weights > 1e-6 * rule.weights.max()
                eig = quadrature.eigenvector_weights(params, k)
                np.testing.assert_allclose(eig[large], rule.weights[large], rtol=1e-8, err_msg=f"k={k}, sigma={sigma}")

    def test_christoffel_weights_agree(self):
        """1 / sum_{j<k} p_j(x_i)^2 reproduces the closed-form weights."""
        for sigma in SIGMAS:
            params = hermite_basis.make_params(sigma, 1.0)
            for k in (3, 10, 57, 200):
                rule = quadrature.build_rule(params, k)
                independent = quadrature.christoffel_weights(params, rule)
                np.testing.assert_allclose(independent, rule.weights, rtol=1e-9, err_msg=f"k={k}, sigma={sigma}")

    def test_eigenvector_weights_agree_where_large(self):
        params = hermite_basis.make_params(-0.3, 1.0)
        rule = quadrature.build_rule(params, 60)
        eig = quadrature.eigenvector_weights(params, 60)
        large = rule.weights > 1e-6 * rule.weights.max()
        np.testing.assert_allclose(eig[large], rule.weights[large], rtol=1e-8)

    def test_interlacing(self):
        """Nodes of consecutive orders strictly interlace up to order 200."""
        for sigma in (-0.3, 2.0):
            params = hermite_basis.make_params(sigma, 1.0)
            rules = [quadrature.build_rule(params, k) for k in range(1, 201)]
            for rule, next_rule in zip(rules, rules[1:]):
                self.assertTrue(quadrature.interlaces(rule, next_rule), msg=f"k={rule.k}, sigma={sigma}")

    def test_interlacing_needs_consecutive_orders(self):
        params = hermite_basis.make_params(0.0, 1.0)
        with self.assertRaises(DomainError):
            quadrature.interlaces(quadrature.build_rule(params, 3), quadrature.build_rule(params, 5))


class TestInnerProduct(unittest.TestCase):

    def test_orthonormal_pairs(self):
        """<phi_3, phi_3> = 1 and <phi_2, phi_4> = 0."""
        params = hermite_basis.make_params(0.5, 1.0)

        def phi(k):
            return lambda x: hermite_basis.basis_values(params, k, x, 'phi')

        self.assertAlmostEqual(quadrature.inner_product(params, phi(3), phi(3), 40), 1.0, delta=1e-10)
        self.assertAlmostEqual(quadrature.inner_product(params, phi(2), phi(4), 40), 0.0, delta=1e-10)

    def test_second_moment(self):
        """Integral of x^2 |x| e^{-x^2} is Gamma(2) = 1."""
        params = hermite_basis.make_params(0.5, 1.0)

        def f(x):
            return x * np.exp(-x ** 2 / 2)

        self.assertAlmostEqual(quadrature.inner_product(params, f, f, 10), 1.0, delta=1e-12)
        self.assertAlmostEqual(quadrature.moment(params, 2), 1.0, delta=1e-14)
        self.assertEqual(quadrature.moment(params, 3), 0.0)


class TestExactness(unittest.TestCase):

    def test_classical_order_five(self):
        self.assertLess(quadrature.exactness_residual(hermite_basis.make_params(0.0, 1.0), 5), 1e-10)

    def test_negative_sigma_order_fifty(self):
        self.assertLess(quadrature.exactness_residual(hermite_basis.make_params(-0.3, 1.0), 50), 1e-8)

    def test_every_order_up_to_fifty(self):
        """Moments up to degree 2k - 1 are exact for all k <= 50, odd orders included."""
        for sigma in SIGMAS:
            for s in (0.5, 1.0, 2.0):
                params = hermite_basis.make_params(sigma, s)
                for k in range(1, 51):
                    self.assertLessEqual(quadrature.exactness_residual(params, k), 1e-8,
                                         msg=f"k={k}, sigma={sigma}, s={s}")

    def test_odd_order_inner_product(self):
        """<phi_3, phi_3> = 1 under an odd-order rule with sigma != 0."""
        params = hermite_basis.make_params(0.5, 1.0)

        def phi3(x):
            return hermite_basis.basis_values(params, 3, x, 'phi')

        for order in (41, 40, 7):
            self.assertAlmostEqual(quadrature.inner_product(params, phi3, phi3, order), 1.0, delta=1e-10,
                                   msg=f"order={order}")

    def test_beyond_exactness_is_reported(self):
        """Degree 2k is not integrated exactly; the residual is reported, not hidden."""
        params = hermite_basis.make_params(0.0, 1.0)
        self.assertGreater(quadrature.exactness_residual(params, 5, max_degree=10), 1e-6)

    def test_odd_moments_vanish(self):
        for sigma in SIGMAS:
            params = hermite_basis.make_params(sigma, 1.0)
            for k in (4, 7, 30):
                self.assertLessEqual(quadrature.odd_moment_residual(params, k), 1e-13)


class TestChristoffelSum(unittest.TestCase):

    def test_basis_polynomial(self):
        """p = p_3, x = 0.7, k = 5: p(x)^2 <= ||p||^2 sum p_l(x)^2."""
        params = hermite_basis.make_params(0.5, 1.0)
        lhs, rhs = quadrature.christoffel_sum_check(params, 5, 0.7, hermite_basis.hermite_poly(params, 3))
        self.assertLessEqual(lhs, rhs)
        self.assertGreater(lhs, 0)

    def test_constant_polynomial(self):
        """||c||^2 = c^2 mu0."""
        params = hermite_basis.make_params(-0.2, 2.0)
        mu0 = hermite_basis.recurrence_coeffs(params, 1).mu0
        lhs, rhs = quadrature.christoffel_sum_check(params, 4, 1.1, [3.0])
        self.assertAlmostEqual(lhs, 9.0)
        column = hermite_basis.basis_table(params, 4, [1.1], 'poly')[:, 0]
        self.assertAlmostEqual(rhs, 9.0 * mu0 * np.sum(column ** 2), delta=1e-10 * rhs)
        self.assertLessEqual(lhs, rhs)

    def test_random_polynomials(self):
        params = hermite_basis.make_params(1.5, 0.8)
        rng = np.random.default_rng(7)
        for _ in range(25):
            coeffs = rng.normal(size=8)
            x = rng.uniform(-3, 3)
            lhs, rhs = quadrature.christoffel_sum_check(params, 8, x, Polynomial(coeffs))
            self.assertLessEqual(lhs, rhs * (1 + 1e-12))

    def test_degree_too_high(self):
        params = hermite_basis.make_params(0.0, 1.0)
        with self.assertRaises(DegreeTooHigh):
            quadrature.christoffel_sum_check(params, 5, 0.3, np.ones(6))


if __name__ == '__main__':
    unittest.main()
