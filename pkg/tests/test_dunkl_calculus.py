import unittest
import numpy as np
import sys
import os

from hypothesis import given, settings, strategies as st

# Add the project root to the Python path to allow importing dunkl_oscillator
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

from dunkl_oscillator import dunkl_calculus, hermite_basis, quadrature
from dunkl_oscillator.dunkl_calculus import SampledFn
from dunkl_oscillator.errors import DomainError, GridAsymmetric, NearZeroDivision, SingularPoint

SIGMAS = (-0.3, 0.0, 0.5, 2.0)


def _phi_combination(params, coeffs, grid, derivative=False):
    total = np.zeros_like(grid)
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        if derivative:
            total += c * hermite_basis.basis_derivative(params, k, grid, 'phi')
        else:
            total += c * hermite_basis.basis_values(params, k, grid, 'phi')
    return total


class TestSampledFn(unittest.TestCase):

    def test_rejects_unsorted_grid(self):
        with self.assertRaises(DomainError):
            SampledFn(grid=np.array([0.0, 2.0, 1.0]), values=np.zeros(3))

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(DomainError):
            SampledFn(grid=np.linspace(-1, 1, 5), values=np.zeros(4))

    def test_parity_needs_symmetric_grid(self):
        with self.assertRaises(GridAsymmetric):
            SampledFn(grid=np.linspace(-1, 2, 7), values=np.zeros(7), parity='even')
        f = SampledFn(grid=np.linspace(-1, 2, 7), values=np.zeros(7))
        self.assertEqual(f.parity, 'none')

    def test_unknown_parity(self):
        with self.assertRaises(DomainError):
            SampledFn(grid=np.linspace(-1, 1, 5), values=np.zeros(5), parity='both')


class TestApplyTPointwise(unittest.TestCase):

    def setUp(self):
        self.grid = np.linspace(-2.0, 2.0, 401)

    def test_identity_function(self):
        """T_sigma x = 1 + 2 sigma, including the removable point 0."""
        params = hermite_basis.make_params(0.5, 1.0)
        f = SampledFn(self.grid, self.grid.copy(), 'odd')
        df = SampledFn(self.grid, np.ones_like(self.grid), 'even')
        result = dunkl_calculus.apply_T_pointwise(params, f, df)
        np.testing.assert_allclose(result.values, 2.0, rtol=1e-14)
        self.assertEqual(result.parity, 'even')

    def test_even_function_is_plain_derivative(self):
        """T_sigma x^2 = 2x for any sigma."""
        for sigma in SIGMAS:
            params = hermite_basis.make_params(sigma, 1.0)
            f = SampledFn(self.grid, self.grid ** 2, 'even')
            df = SampledFn(self.grid, 2 * self.grid, 'odd')
            result = dunkl_calculus.apply_T_pointwise(params, f, df)
            np.testing.assert_allclose(result.values, 2 * self.grid, rtol=0, atol=1e-12, err_msg=f"sigma={sigma}")
            self.assertEqual(result.parity, 'odd')

    def test_classical_case_returns_derivative(self):
        params = hermite_basis.make_params(0.0, 1.0)
        f = SampledFn(self.grid, np.sin(self.grid) + self.grid ** 2)
        df = SampledFn(self.grid, np.cos(self.grid) + 2 * self.grid)
        result = dunkl_calculus.apply_T_pointwise(params, f, df)
        np.testing.assert_array_equal(result.values, df.values)

    def test_asymmetric_grid(self):
        params = hermite_basis.make_params(0.5, 1.0)
        grid = np.linspace(-1.0, 3.0, 41)
        f = SampledFn(grid, grid ** 3)
        with self.assertRaises(GridAsymmetric):
            dunkl_calculus.apply_T_pointwise(params, f, SampledFn(grid, 3 * grid ** 2))

    def test_matches_lowering_operator(self):
        """B = s x + T_sigma pointwise agrees with the banded B on e_k for k <= 40."""
        grid = np.linspace(-3.0, 3.0, 241)
        for sigma in (-0.3, 0.5):
            params = hermite_basis.make_params(sigma, 1.0)
            B = dunkl_calculus.op_matrix(params, 'B', 42).entries
            for k in range(0, 41):
                f = SampledFn(grid, hermite_basis.basis_values(params, k, grid, 'phi'))
                df = SampledFn(grid, hermite_basis.basis_derivative(params, k, grid, 'phi'))
                pointwise = params.s * grid * f.values + dunkl_calculus.apply_T_pointwise(params, f, df).values
                coeffs = B[:, k]
                synthesized = _phi_combination(params, coeffs, grid)
                np.testing.assert_allclose(pointwise, synthesized, rtol=0, atol=1e-8, err_msg=f"k={k}, sigma={sigma}")

    @settings(max_examples=20, deadline=None)
    @given(coeffs=st.lists(st.floats(min_value=-1, max_value=1), min_size=2, max_size=12),
           other=st.lists(st.floats(min_value=-1, max_value=1), min_size=2, max_size=12))
    def test_lowering_and_raising_are_adjoint(self, coeffs, other):
        """<B phi, psi>_sigma = <phi, B' psi>_sigma with T_sigma applied on quadrature nodes."""
        params = hermite_basis.make_params(0.7, 1.0)
        rule = quadrature.build_rule(params, 40)
        grid = rule.nodes[::-1].copy()
        weights = rule.compensated_weights()[::-1]

        def sampled(c):
            return (SampledFn(grid, _phi_combination(params, c, grid)),
                    SampledFn(grid, _phi_combination(params, c, grid, derivative=True)))

        phi, dphi = sampled(coeffs)
        psi, dpsi = sampled(other)
        lowered = params.s * grid * phi.values + dunkl_calculus.apply_T_pointwise(params, phi, dphi).values
        raised = params.s * grid * psi.values - dunkl_calculus.apply_T_pointwise(params, psi, dpsi).values
        lhs = np.sum(weights * lowered * psi.values)
        rhs = np.sum(weights * phi.values * raised)
        self.assertAlmostEqual(lhs, rhs, delta=1e-9 * (1 + abs(lhs)))


class TestOpMatrix(unittest.TestCase):

    def test_number_operator(self):
        """L = diag((2k+1+2 sigma) s) = diag(2, 4, 6, 8) at sigma=0.5, s=1."""
        L = dunkl_calculus.op_matrix(hermite_basis.make_params(0.5, 1.0), 'L', 4)
        np.testing.assert_allclose(L.entries, np.diag([2.0, 4.0, 6.0, 8.0]), rtol=1e-15)
        self.assertEqual(L.dim, 4)

    def test_lowering_kills_ground_state(self):
        B = dunkl_calculus.op_matrix(hermite_basis.make_params(-0.2, 1.5), 'B', 10).entries
        e0 = np.zeros(10)
        e0[0] = 1.0
        np.testing.assert_array_equal(B @ e0, np.zeros(10))

    def test_lowering_coefficients(self):
        """B phi_k = sqrt(2ks) phi_{k-1} for even k, sqrt(2(k+2 sigma)s) phi_{k-1} for odd k."""
        params = hermite_basis.make_params(0.5, 2.0)
        B = dunkl_calculus.op_matrix(params, 'B', 6).entries
        self.assertAlmostEqual(B[0, 1], np.sqrt(2 * (1 + 1.0) * 2.0), places=13)
        self.assertAlmostEqual(B[1, 2], np.sqrt(2 * 2 * 2.0), places=13)
        Bp = dunkl_calculus.op_matrix(params, 'Bp', 6).entries
        np.testing.assert_array_equal(Bp, B.T)

    def test_raising_lowering_product(self):
        """B'B = L - (1 + 2 Sigma) s entrywise."""
        params = hermite_basis.make_params(0.5, 1.0)
        dim = 16
        m = {name: dunkl_calculus.op_matrix(params, name, dim).entries for name in ('B', 'Bp', 'L', 'Sigma')}
        expected = m['L'] - (np.eye(dim) + 2 * m['Sigma']) * params.s
        np.testing.assert_allclose(m['Bp'] @ m['B'], expected, rtol=0, atol=1e-12)

    def test_sigma_alternates(self):
        S = dunkl_calculus.op_matrix(hermite_basis.make_params(0.3, 1.0), 'Sigma', 5).entries
        np.testing.assert_allclose(np.diag(S), [0.3, -0.3, 0.3, -0.3, 0.3])

    def test_multiplication_matches_recurrence(self):
        """X carries b_k off the diagonal and equals (B + B') / (2s)."""
        params = hermite_basis.make_params(1.2, 0.8)
        m = {name: dunkl_calculus.op_matrix(params, name, 12).entries for name in ('B', 'Bp', 'X')}
        np.testing.assert_allclose(np.diag(m['X'], 1), hermite_basis.recurrence_coeffs(params, 11).b, rtol=1e-15)
        np.testing.assert_allclose(m['X'], (m['B'] + m['Bp']) / (2 * params.s), rtol=1e-14, atol=0)

    def test_errors(self):
        params = hermite_basis.make_params(0.0, 1.0)
        with self.assertRaises(DomainError):
            dunkl_calculus.op_matrix(params, 'L', 1)
        with self.assertRaises(DomainError):
            dunkl_calculus.op_matrix(params, 'K', 4)


class TestCommutators(unittest.TestCase):

    def test_identities_hold_on_interior_block(self):
        for sigma in SIGMAS:
            for s in (0.5, 2.0):
                params = hermite_basis.make_params(sigma, s)
                for which in dunkl_calculus.IDENTITIES:
                    res = dunkl_calculus.commutator_residual(params, 128, which)
                    self.assertLessEqual(res, 1e-12, msg=f"{which} at sigma={sigma}, s={s}: {res:.2e}")

    def test_smallest_dimension(self):
        res = dunkl_calculus.commutator_residual(hermite_basis.make_params(0.5, 1.0), 8, 'BBp')
        self.assertTrue(np.isfinite(res))

    def test_rejects_small_dimension_and_unknown_identity(self):
        params = hermite_basis.make_params(0.5, 1.0)
        with self.assertRaises(DomainError):
            dunkl_calculus.commutator_residual(params, 7, 'LB')
        with self.assertRaises(DomainError):
            dunkl_calculus.commutator_residual(params, 16, 'XY')

    def test_truncation_corrupts_last_rows(self):
        """Without trimming, [B, B'] differs from 2s(1+2 Sigma) in the last row."""
        params = hermite_basis.make_params(0.5, 1.0)
        m = {name: dunkl_calculus.op_matrix(params, name, 10).entries for name in ('B', 'Bp', 'Sigma')}
        full = m['B'] @ m['Bp'] - m['Bp'] @ m['B'] - 2 * params.s * (np.eye(10) + 2 * m['Sigma'])
        self.assertGreater(abs(full[-1, -1]), 1.0)


class TestPointwiseIdentities(unittest.TestCase):

    def test_ground_state_ode(self):
        """xi_0 is a Gaussian at sigma=0 and solves xi'' + (s - s^2 x^2) xi = 0."""
        params = hermite_basis.make_params(0.0, 1.0)
        self.assertLessEqual(dunkl_calculus.xi_ode_residual(params, 0, np.linspace(-3, 3, 121)), 1e-6)

    def test_ode_residual_away_from_zero(self):
        for sigma in (-0.3, 0.5):
            params = hermite_basis.make_params(sigma, 1.0)
            for k in (0, 5, 50):
                grid = np.linspace(0.2, np.sqrt(2 * k + 2) + 3.0, 400)
                res = dunkl_calculus.xi_ode_residual(params, k, grid)
                self.assertLessEqual(res, 1e-5, msg=f"k={k}, sigma={sigma}: {res:.2e}")

    def test_ode_residual_high_degree(self):
        params = hermite_basis.make_params(0.5, 1.0)
        grid = np.linspace(1.0, 35.0, 600)
        self.assertLessEqual(dunkl_calculus.xi_ode_residual(params, 500, grid), 1e-4)

    def test_ode_residual_rejects_zero(self):
        params = hermite_basis.make_params(-0.3, 1.0)
        with self.assertRaises(SingularPoint):
            dunkl_calculus.xi_ode_residual(params, 50, np.linspace(-1, 1, 21))

    def test_k_block(self):
        """(-d^2 + s^2 x^2 + sigma_bar x^-2) xi_k = (2k+1+2 sigma) s xi_k away from 0."""
        for sigma in (-0.3, 0.5):
            params = hermite_basis.make_params(sigma, 1.0)
            for k in (4, 7, 20):
                grid = np.linspace(0.3, 8.0, 300)
                self.assertLessEqual(dunkl_calculus.k_block_residual(params, k, grid), 1e-5, msg=f"k={k}, sigma={sigma}")

    def test_log_derivative_ground_state(self):
        """xi_0'/xi_0 = -s x at sigma=0."""
        params = hermite_basis.make_params(0.0, 1.0)
        lhs, rhs = dunkl_calculus.log_derivative_check(params, 0, 0.8)
        self.assertAlmostEqual(rhs, -0.8, places=12)
        self.assertAlmostEqual(lhs, -0.8, delta=1e-8)

    def test_log_derivative_odd_degree(self):
        params = hermite_basis.make_params(0.5, 1.0)
        lhs, rhs = dunkl_calculus.log_derivative_check(params, 7, 1.3)
        self.assertLessEqual(abs(lhs - rhs), 1e-6 * (1 + abs(rhs)))

    def test_log_derivative_even_degree_negative_sigma(self):
        params = hermite_basis.make_params(-0.3, 2.0)
        for x in (-1.3, 0.45, 2.2):
            lhs, rhs = dunkl_calculus.log_derivative_check(params, 6, x)
            self.assertLessEqual(abs(lhs - rhs), 1e-6 * (1 + abs(rhs)), msg=f"x={x}")

    def test_log_derivative_at_zero_of_p(self):
        params = hermite_basis.make_params(0.5, 1.0)
        largest_zero = quadrature.build_rule(params, 7).nodes[0]
        with self.assertRaises(NearZeroDivision):
            dunkl_calculus.log_derivative_check(params, 7, largest_zero)
        with self.assertRaises(SingularPoint):
            dunkl_calculus.log_derivative_check(params, 7, 0.0)


class TestPowersAtZero(unittest.TestCase):

    def test_monomials_give_perturbed_factorial(self):
        """(T_sigma^m x^m)(0) = m!_sigma for m <= 8."""
        for sigma in SIGMAS:
            params = hermite_basis.make_params(sigma, 1.0)
            for m in range(9):
                expected = hermite_basis.perturbed_factorial(params, m)
                self.assertAlmostEqual(dunkl_calculus.tm_at_zero(params, m), expected, delta=1e-10 * expected)

    def test_apply_T_poly_lowers_degree(self):
        params = hermite_basis.make_params(0.5, 1.0)
        np.testing.assert_allclose(dunkl_calculus.apply_T_poly(params, [5.0, 1.0, 1.0]), [2.0, 2.0])
        np.testing.assert_array_equal(dunkl_calculus.apply_T_poly(params, [5.0]), [0.0])


if __name__ == '__main__':
    unittest.main()
