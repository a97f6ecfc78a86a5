"""Generalized Hermite polynomials p_k and functions phi_k, xi_k.

The p_k are orthonormal for the weight |x|^{2 sigma} e^{-s x^2} on the line.
They satisfy x p_{k-1} = b_k p_k + b_{k-1} p_{k-2}, which is run forward on
mantissas that share a base-2 exponent, so degrees in the thousands stay finite.
The Gaussian and |x|^sigma factors of phi_k and xi_k enter through that exponent.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gammaln

from . import config
from .errors import DomainError, ParityError, SingularPoint

KINDS = ('poly', 'phi', 'xi')
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Params:
    """Weight parameters: sigma > -1/2 and s > 0."""
    sigma: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > config.SIGMA_MIN):
            logging.error(f"Rejected sigma={self.sigma}")
            raise DomainError(f"sigma must be greater than {config.SIGMA_MIN}, got {self.sigma}")
        if not (math.isfinite(self.s) and self.s > 0):
            logging.error(f"Rejected s={self.s}")
            raise DomainError(f"s must be positive, got {self.s}")


@dataclass(frozen=True, eq=False)
class RecurrenceCoeffs:
    b: np.ndarray  # b[j - 1] holds b_j
    p0: float
    mu0: float


@dataclass(frozen=True)
class BasisEval:
    """Scaled value mantissa * 2**exponent of p_k, phi_k or xi_k at x."""
    k: int
    x: float
    mantissa: float
    exponent: int
    kind: str

    @property
    def value(self):
        return float(np.ldexp(self.mantissa, self.exponent))

    @property
    def log_abs(self):
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exponent * LN2


def make_params(sigma, s):
    return Params(float(sigma), float(s))


def log_mu0(params):
    """Log of the total mass s^{-(sigma+1/2)} Gamma(sigma+1/2)."""
    a = params.sigma + 0.5
    return float(gammaln(a) - a * math.log(params.s))


def recurrence_coeffs(params, k_max):
    if k_max < 1:
        raise DomainError(f"k_max must be at least 1, got {k_max}")
    j = np.arange(1, k_max + 1, dtype=float)
    shift = np.where(j % 2 == 1, 2.0 * params.sigma, 0.0)
    b = np.sqrt((j + shift) / (2.0 * params.s))
    b.setflags(write=False)
    lm = log_mu0(params)
    return RecurrenceCoeffs(b=b, p0=math.exp(-0.5 * lm), mu0=math.exp(lm))


def _padded_b(params, n):
    """b_0 = 0 followed by b_1..b_n."""
    if n < 1:
        return np.zeros(1)
    return np.concatenate(([0.0], recurrence_coeffs(params, n).b))


def ladder_coeff(params, k):
    """beta_k with B phi_k = beta_k phi_{k-1}; beta_0 = 0."""
    if k == 0:
        return 0.0
    shift = 2.0 * params.sigma if k % 2 else 0.0
    return math.sqrt(2.0 * (k + shift) * params.s)


def _check_degree(k):
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    if k > config.K_MAX_DEFAULT:
        logging.warning(f"Degree {k} exceeds {config.K_MAX_DEFAULT}; expect precision loss")


def _log2_factor(params, x, kind):
    """Base-2 log of the factor multiplying p_k for the requested kind (x = 0 maps to |x|^sigma = 1)."""
    if kind not in KINDS:
        raise DomainError(f"Unknown basis kind '{kind}'")
    if kind == 'poly':
        return np.zeros_like(x)
    log2f = -params.s * x * x / (2.0 * LN2)
    if kind == 'xi' and params.sigma != 0:
        log2f = log2f + params.sigma * np.log2(np.where(x == 0, 1.0, np.abs(x)))
    return log2f


def _iterate_recurrence(params, n, x, log2_factor):
    """Yield (j, prev, curr, exponent) for j = 0..n; value of p_j times the factor is curr * 2**exponent."""
    b = _padded_b(params, n)
    p0 = math.exp(-0.5 * log_mu0(params))
    e0 = np.floor(log2_factor)
    curr = p0 * np.exp2(log2_factor - e0)
    exponent = e0.astype(np.int64)
    prev = np.zeros_like(curr)
    yield 0, prev, curr, exponent
    for j in range(1, n + 1):
        prev, curr = curr, (x * curr - b[j - 1] * prev) / b[j]
        big = np.maximum(np.abs(prev), np.abs(curr))
        out = (big > config.MANTISSA_HI) | ((big < config.MANTISSA_LO) & (big > 0))
        if out.any():
            _, shift = np.frexp(big[out])
            prev[out] = np.ldexp(prev[out], -shift)
            curr[out] = np.ldexp(curr[out], -shift)
            exponent[out] += shift
        yield j, prev, curr, exponent


def scaled_recurrence(params, k, x, log2_factor=None):
    """Mantissas of p_{k-1}, p_k (times the folded factor) and their shared exponent at the points x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if log2_factor is None:
        log2_factor = np.zeros_like(x)
    for _, prev, curr, exponent in _iterate_recurrence(params, k, x, log2_factor):
        pass
    return prev, curr, exponent


def _reconstruct(mantissa, exponent):
    return np.ldexp(mantissa, exponent.astype(np.int32))


def _xi_at_zero(params, k, values, zero):
    if not zero.any() or params.sigma == 0:
        return values
    if params.sigma < 0 and k % 2 == 0:
        logging.error(f"xi_{k} evaluated at 0 with sigma={params.sigma}")
        raise SingularPoint(f"xi_{k} is unbounded at 0 when sigma < 0 and k is even")
    values[zero] = 0.0
    return values


def basis_values(params, k, x, kind='phi', log_factor=None):
    """Values of p_k, phi_k or xi_k at x (scalar or array).

    Args:
        log_factor: optional natural-log factor folded into the exponent before
            reconstruction, so a large polynomial never meets a tiny weight.
    """
    _check_degree(k)
    scalar = np.ndim(x) == 0
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    log2f = _log2_factor(params, x_arr, kind)
    if log_factor is not None:
        log2f = log2f + np.asarray(log_factor, dtype=float) / LN2
    _, curr, exponent = scaled_recurrence(params, k, x_arr, log2f)
    values = _reconstruct(curr, exponent)
    if kind == 'xi':
        values = _xi_at_zero(params, k, values, x_arr == 0)
    return float(values[0]) if scalar else values


def eval_basis(params, k, x, kind='poly'):
    """Scaled evaluation of a single basis value."""
    _check_degree(k)
    x = float(x)
    if kind == 'xi' and x == 0 and params.sigma < 0 and k % 2 == 0:
        logging.error(f"xi_{k} evaluated at 0 with sigma={params.sigma}")
        raise SingularPoint(f"xi_{k} is unbounded at 0 when sigma < 0 and k is even")
    x_arr = np.array([x])
    _, curr, exponent = scaled_recurrence(params, k, x_arr, _log2_factor(params, x_arr, kind))
    mantissa, shift = math.frexp(float(curr[0]))
    if kind == 'xi' and x == 0 and params.sigma > 0:
        mantissa, shift = 0.0, 0
    exp_total = int(exponent[0]) + shift if mantissa != 0 else 0
    return BasisEval(k=k, x=x, mantissa=mantissa, exponent=exp_total, kind=kind)


def basis_table(params, n, x, kind='phi'):
    """Array of shape (n + 1, len(x)) holding degrees 0..n at the points x."""
    _check_degree(n)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty((n + 1, x_arr.size))
    for j, _, curr, exponent in _iterate_recurrence(params, n, x_arr, _log2_factor(params, x_arr, kind)):
        table[j] = _reconstruct(curr, exponent)
    if kind == 'xi':
        zero = x_arr == 0
        for j in range(n + 1):
            table[j] = _xi_at_zero(params, j, table[j], zero)
    return table


def basis_derivative(params, k, x, kind='phi'):
    """Exact derivative of p_k, phi_k or xi_k from the ladder identities.

    p_k' = beta_k p_{k-1} - [k odd] 2 sigma p_k / x, phi_k' = p_k' e^{-s x^2/2} - s x phi_k
    and xi_k' = (p_k' + (sigma/x - s x) p_k) |x|^sigma e^{-s x^2/2}.
    """
    _check_degree(k)
    scalar = np.ndim(x) == 0
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    zero = x_arr == 0
    if kind == 'xi' and zero.any() and params.sigma != 0:
        raise SingularPoint(f"xi_{k}' is not defined at 0 when sigma != 0")
    prev, curr, exponent = scaled_recurrence(params, k, x_arr, _log2_factor(params, x_arr, kind))
    safe_x = np.where(zero, 1.0, x_arr)
    mant = ladder_coeff(params, k) * prev
    if k % 2:
        mant = mant - 2.0 * params.sigma * curr / safe_x
    if kind != 'poly':
        mant = mant - params.s * x_arr * curr
    if kind == 'xi':
        mant = mant + params.sigma * curr / safe_x
    values = _reconstruct(mant, exponent)
    if k % 2 and zero.any() and kind != 'xi':
        values[zero] = dp_at_zero(params, k)
    return float(values[0]) if scalar else values


def p_at_zero(params, k):
    """p_k(0) for even k, accumulated in log space."""
    if k % 2:
        raise ParityError(f"p_k(0) closed form needs even k, got {k}")
    j = np.arange(1, k // 2 + 1, dtype=float)
    log_ratio = 0.5 * float(np.sum(np.log(2 * j - 1 + 2 * params.sigma) - np.log(2 * j)))
    sign = -1.0 if (k // 2) % 2 else 1.0
    return sign * math.exp(-0.5 * log_mu0(params) + log_ratio)


def dp_at_zero(params, k):
    """p_k'(0) for odd k, accumulated in log space."""
    if k % 2 == 0:
        raise ParityError(f"p_k'(0) closed form needs odd k, got {k}")
    n = (k - 1) // 2
    odd_factors = 2 * np.arange(0, n + 1, dtype=float) + 1 + 2 * params.sigma
    even_factors = 2 * np.arange(1, n + 1, dtype=float)
    log_val = (-0.5 * log_mu0(params)
               + 0.5 * (float(np.sum(np.log(odd_factors))) + math.log(2 * params.s)
                        - float(np.sum(np.log(even_factors))))
               - math.log(1 + 2 * params.sigma))
    sign = -1.0 if n % 2 else 1.0
    return sign * math.exp(log_val)


def leading_coeff(params, k):
    """log gamma_k, the log of the (positive) leading coefficient of p_k."""
    _check_degree(k)
    if k == 0:
        return -0.5 * log_mu0(params)
    return -0.5 * log_mu0(params) - float(np.sum(np.log(recurrence_coeffs(params, k).b)))


def perturbed_factorial(params, m):
    """m!_sigma: multiply by j for even j and by j + 2 sigma for odd j."""
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    return math.prod(j if j % 2 == 0 else j + 2.0 * params.sigma for j in range(1, m + 1))


def hermite_poly(params, k):
    """p_k as a numpy Polynomial in the power basis (small k only)."""
    b = _padded_b(params, k)
    x = Polynomial([0.0, 1.0])
    prev, curr = Polynomial([0.0]), Polynomial([recurrence_coeffs(params, 1).p0])
    for j in range(1, k + 1):
        prev, curr = curr, (x * curr - b[j - 1] * prev) / b[j]
    return curr


if __name__ == '__main__':
    params = make_params(0.5, 1.0)
    for k in (0, 1, 2, 10, 1000):
        ev = eval_basis(params, k, 1.3, 'phi')
        print(f"phi_{k}(1.3) = {ev.value:.12g} (mantissa {ev.mantissa:.6f}, exponent {ev.exponent})")
