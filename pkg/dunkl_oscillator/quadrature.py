"""Gauss quadrature for the weight |x|^{2 sigma} e^{-s x^2}.

Nodes are the zeros of p_k: eigenvalues of the Jacobi matrix (zero diagonal,
off-diagonal b_1..b_{k-1}) polished by Newton steps on the scaled recurrence.
Weights come from the closed form p_k'(x_i)^2 lambda_i = 2s at nonzero nodes and
2s/(1+2 sigma) at the node 0 of an odd rule, kept in log space.
"""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from numpy.polynomial import Polynomial
from scipy.linalg import LinAlgError, eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.special import gammaln, logsumexp

from . import config
from .errors import ConvergenceError, DegreeTooHigh, DomainError
from .hermite_basis import (basis_table, dp_at_zero, ladder_coeff, log_mu0,
                            recurrence_coeffs, scaled_recurrence)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes x_{k,1} > ... > x_{k,k} and log Christoffel numbers."""
    params: object
    k: int
    nodes: np.ndarray
    log_weights: np.ndarray

    @property
    def weights(self):
        return np.exp(self.log_weights)

    def compensated_weights(self):
        """lambda_i * e^{s x_i^2}: the weights to use with phi-like evaluands."""
        return np.exp(self.log_weights + self.params.s * self.nodes ** 2)


def _weight_constant(params, x):
    return 2.0 * params.s if x != 0 else 2.0 * params.s / (1.0 + 2.0 * params.sigma)


def _derivative_mantissas(params, k, x):
    """Mantissas of p_k and p_k' at positive x, plus the shared exponent."""
    prev, curr, exponent = scaled_recurrence(params, k, x)
    deriv = ladder_coeff(params, k) * prev
    if k % 2:
        deriv = deriv - 2.0 * params.sigma * curr / x
    return curr, deriv, exponent


def _newton_refine(params, k, x):
    if x.size == 0:
        return x
    for step in range(config.NEWTON_STEPS):
        curr, deriv, _ = _derivative_mantissas(params, k, x)
        delta = curr / deriv
        x = x - delta
        logging.debug(f"Newton step {step + 1} for order {k}: max correction {np.max(np.abs(delta)):.3e}")
    return x


def _jacobi_eigenvalues(params, k):
    if k == 1:
        return np.zeros(1)
    b = recurrence_coeffs(params, k - 1).b
    try:
        return eigvalsh_tridiagonal(np.zeros(k), b)
    except LinAlgError as e:
        logging.error(f"Tridiagonal eigensolver failed for order {k}: {e}")
        raise ConvergenceError(f"eigensolver did not converge for order {k}") from e


@functools.lru_cache(maxsize=config.RULE_CACHE_SIZE)
def build_rule(params, k):
    """Gauss rule of order k (exact for polynomials of degree <= 2k - 1)."""
    if k < 1:
        raise DomainError(f"rule order must be at least 1, got {k}")
    raw = _jacobi_eigenvalues(params, k)
    half = k // 2
    positive = _newton_refine(params, k, np.sort(raw)[::-1][:half].copy())

    _, deriv, exponent = _derivative_mantissas(params, k, positive)
    log_pos = math.log(_weight_constant(params, 1.0)) - 2.0 * (np.log(np.abs(deriv)) + exponent * math.log(2.0))

    middle_nodes = np.array([0.0]) if k % 2 else np.empty(0)
    middle_logs = np.array([math.log(_weight_constant(params, 0.0)) - 2.0 * math.log(abs(dp_at_zero(params, k)))]) if k % 2 else np.empty(0)
    nodes = np.concatenate((positive, middle_nodes, -positive[::-1]))
    log_weights = np.concatenate((log_pos, middle_logs, log_pos[::-1]))
    nodes.setflags(write=False)
    log_weights.setflags(write=False)
    rule = QuadratureRule(params=params, k=k, nodes=nodes, log_weights=log_weights)

    if k <= config.EIGVEC_WEIGHT_MAX_ORDER:
        _crosscheck_weights(params, rule)
    logging.debug(f"Built rule of order {k} for sigma={params.sigma}, s={params.s}")
    return rule


def eigenvector_weights(params, k):
    """Golub-Welsch weights mu0 * v_0^2, ordered like the rule nodes."""
    if k == 1:
        return np.array([math.exp(log_mu0(params))])
    b = recurrence_coeffs(params, k - 1).b
    try:
        values, vectors = eigh_tridiagonal(np.zeros(k), b)
    except LinAlgError as e:
        raise ConvergenceError(f"eigensolver did not converge for order {k}") from e
    order = np.argsort(values)[::-1]
    return math.exp(log_mu0(params)) * vectors[0, order] ** 2


def _crosscheck_weights(params, rule):
    eig = eigenvector_weights(params, rule.k)
    closed = rule.weights
    large = closed >= 1e-6 * closed.max()
    mismatch = np.max(np.abs(eig[large] / closed[large] - 1.0))
    if mismatch > config.WEIGHT_CROSSCHECK_TOL:
        logging.warning(f"Eigenvector and closed-form weights differ by {mismatch:.3e} at order {rule.k}")


def christoffel_weights(params, rule):
    """Independent weights 1 / sum_{j<k} p_j(x_i)^2, evaluated through phi_j to stay in range."""
    table = basis_table(params, rule.k - 1, rule.nodes, 'phi')
    log_sums = logsumexp(2.0 * np.log(np.abs(table) + config.EPSILON), axis=0)
    return np.exp(-params.s * rule.nodes ** 2 - log_sums)


def build_rules(params, orders, jobs=config.DEFAULT_JOBS):
    return Parallel(n_jobs=jobs)(delayed(build_rule)(params, int(k)) for k in orders)


def interlaces(rule, next_rule):
    """True when each gap between consecutive nodes of rule holds exactly one node of next_rule."""
    if next_rule.k != rule.k + 1:
        raise DomainError("interlacing compares orders k and k + 1")
    outer, inner = next_rule.nodes, rule.nodes
    return bool(np.all(outer[:-1] > inner) and np.all(inner > outer[1:]))


def inner_product(params, f, g, order):
    """<f, g>_sigma for phi-like callables f and g."""
    rule = build_rule(params, order)
    x = rule.nodes
    return float(np.sum(rule.compensated_weights() * f(x) * g(x)))


def moment(params, degree):
    """Integral of x^degree |x|^{2 sigma} e^{-s x^2} over the line."""
    if degree % 2:
        return 0.0
    a = degree / 2 + params.sigma + 0.5
    return math.exp(gammaln(a) - a * math.log(params.s))


def exactness_residual(params, k, max_degree=None):
    """Largest relative error of the rule on even monomials up to max_degree (default 2k - 1)."""
    rule = build_rule(params, k)
    if max_degree is None:
        max_degree = 2 * k - 1
    nonzero = rule.nodes != 0
    log_abs_x = np.log(np.abs(rule.nodes[nonzero]))
    worst = 0.0
    for degree in range(0, max_degree + 1, 2):
        if degree == 0:
            log_sum = logsumexp(rule.log_weights)
        else:
            log_sum = logsumexp(rule.log_weights[nonzero] + degree * log_abs_x)
        a = degree / 2 + params.sigma + 0.5
        log_exact = gammaln(a) - a * math.log(params.s)
        worst = max(worst, abs(math.expm1(log_sum - log_exact)))
    logging.debug(f"Exactness residual for order {k} up to degree {max_degree}: {worst:.3e}")
    return worst


def odd_moment_residual(params, k, max_degree=None):
    """Largest |sum_i lambda_i x_i^d| / sum_i lambda_i |x_i|^d over odd d, paired over mirrored nodes."""
    rule = build_rule(params, k)
    if max_degree is None:
        max_degree = 2 * k - 1
    half = k // 2
    if half == 0:
        return 0.0
    x, w = rule.nodes[:half], rule.weights[:half]
    x_mirror, w_mirror = rule.nodes[::-1][:half], rule.weights[::-1][:half]
    worst = 0.0
    for degree in range(1, max_degree + 1, 2):
        pairs = w * x ** degree + w_mirror * x_mirror ** degree
        scale = float(np.sum((w + w_mirror) * np.abs(x) ** degree))
        worst = max(worst, abs(float(np.sum(pairs))) / scale)
    return worst


def christoffel_sum_check(params, k, x, poly):
    """(p(x)^2, ||p||^2 sum_{l<=k} p_l(x)^2) for a polynomial p of degree <= k - 1.

    Args:
        poly: numpy Polynomial or power-basis coefficients, ascending.
    """
    if not isinstance(poly, Polynomial):
        poly = Polynomial(poly)
    poly = poly.trim()
    if poly.degree() > k - 1:
        raise DegreeTooHigh(f"degree {poly.degree()} exceeds k - 1 = {k - 1}")
    rule = build_rule(params, k)
    norm_sq = float(np.sum(rule.weights * poly(rule.nodes) ** 2))
    column = basis_table(params, k, [x], 'poly')[:, 0]
    lhs = float(poly(x) ** 2)
    rhs = norm_sq * float(np.sum(column ** 2))
    return lhs, rhs
