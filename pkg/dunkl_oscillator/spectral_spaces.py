"""Coefficient-space view of functions: phi_k expansions, weighted sequence
norms, Sobolev-type norms and the map realising x^-1 on odd sequences.
"""
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import config
from .dunkl_calculus import SampledFn, is_symmetric, op_matrix
from .errors import DomainError, ParityError, TruncationWarning
from .hermite_basis import basis_table
from .quadrature import build_rule

SEQ_PARITIES = ('even', 'odd', 'mixed')
FLAVORS = ('S', 'S_sigma')


@dataclass(frozen=True, eq=False)
class CoeffSeq:
    """Coefficients c_0..c_N of sum c_k phi_k."""
    coeffs: np.ndarray
    parity: str = 'mixed'

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise DomainError("coefficients must be a nonempty 1-d array")
        if self.parity not in SEQ_PARITIES:
            raise DomainError(f"Unknown parity '{self.parity}'")
        if self.parity == 'even' and np.any(coeffs[1::2] != 0):
            raise ParityError("even sequence with nonzero odd-index coefficients")
        if self.parity == 'odd' and np.any(coeffs[0::2] != 0):
            raise ParityError("odd sequence with nonzero even-index coefficients")
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def N(self):
        return self.coeffs.size - 1

    def to_dict(self, params):
        return {'sigma': params.sigma, 's': params.s, 'parity': self.parity,
                'coeffs': self.coeffs.tolist()}


@dataclass(frozen=True)
class SeqNorms:
    m: float
    ell2_m: float
    C_m: float


@dataclass(frozen=True)
class MConstants:
    ev: float
    odd: float


def _as_coeffs(c):
    return c.coeffs if isinstance(c, CoeffSeq) else np.asarray(c, dtype=float)


def _with_parity(coeffs):
    """Classify a sequence, zeroing wrong-parity entries that are pure rounding noise."""
    coeffs = np.array(coeffs, dtype=float)
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    even_size = float(np.max(np.abs(coeffs[0::2]), initial=0.0))
    odd_size = float(np.max(np.abs(coeffs[1::2]), initial=0.0))
    if odd_size <= config.PARITY_TOL * scale:
        coeffs[1::2] = 0.0
        return CoeffSeq(coeffs, 'even')
    if even_size <= config.PARITY_TOL * scale:
        coeffs[0::2] = 0.0
        return CoeffSeq(coeffs, 'odd')
    return CoeffSeq(coeffs, 'mixed')


def analyze(params, f, N, order=None):
    """c_k = <phi_k, f>_sigma for k <= N by Gauss quadrature.

    Args:
        f: callable on arrays, decaying like a Gaussian at infinity.
        order: rule order, default ANALYSIS_ORDER_FACTOR * (N + 1).
    """
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    if order is None:
        order = config.ANALYSIS_ORDER_FACTOR * (N + 1)
    if order < 2 * N:
        raise DomainError(f"quadrature order {order} is below 2N = {2 * N}")
    rule = build_rule(params, order)
    samples = np.asarray(f(rule.nodes), dtype=float)
    coeffs = basis_table(params, N, rule.nodes, 'phi') @ (rule.compensated_weights() * samples)
    seq = _with_parity(coeffs)
    logging.debug(f"Analysed function into {N + 1} coefficients ({seq.parity})")
    return seq


def coeff_function(params, c):
    """Callable x -> sum c_k phi_k(x)."""
    coeffs = _as_coeffs(c)

    def evaluate(x):
        return coeffs @ basis_table(params, coeffs.size - 1, x, 'phi')

    return evaluate


def synthesize(params, c, grid):
    grid = np.asarray(grid, dtype=float)
    values = coeff_function(params, c)(grid)
    parity = c.parity if isinstance(c, CoeffSeq) else 'mixed'
    if parity == 'mixed' or not is_symmetric(grid):
        parity = 'none'
    return SampledFn(grid=grid, values=values, parity=parity)


def _weighted_ell2(coeffs, weights):
    """sqrt(sum c_k^2 w_k), scaled by the largest term so tiny coefficients do not underflow."""
    terms = np.abs(coeffs) * np.sqrt(weights)
    scale = float(np.max(terms, initial=0.0))
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    return scale * math.sqrt(float(np.sum((terms / scale) ** 2)))


def seq_norms(c, m):
    """ell^2_m and C_m norms of a finite sequence."""
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    coeffs = _as_coeffs(c)
    k1 = 1.0 + np.arange(coeffs.size)
    ell2 = _weighted_ell2(coeffs, k1 ** m)
    sup = float(np.max(np.abs(coeffs) * k1 ** m))
    return SeqNorms(m=m, ell2_m=ell2, C_m=sup)


def _one_plus_eigenvalues(params, size):
    return 1.0 + (2 * np.arange(size) + 1 + 2 * params.sigma) * params.s


def w_sigma_norm(params, c, m):
    """sqrt(<(1 + L)^m phi, phi>_sigma) on the eigenbasis; any real m >= 0."""
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    coeffs = _as_coeffs(c)
    return _weighted_ell2(coeffs, _one_plus_eigenvalues(params, coeffs.size) ** m)


def w_sigma_norm_via_operators(params, c, m):
    """Same norm for integer m, with L = -T^2 + s^2 X^2 built from the operator matrices
    and the inner product taken by quadrature."""
    if m < 0 or int(m) != m:
        raise DomainError(f"operator form needs an integer m >= 0, got {m}")
    m = int(m)
    coeffs = _as_coeffs(c)
    N = coeffs.size - 1
    dim = N + 2 * m + 3
    T = op_matrix(params, 'T', dim).entries
    X = op_matrix(params, 'X', dim).entries
    one_plus_L = np.eye(dim) - T @ T + params.s ** 2 * X @ X
    padded = np.zeros(dim)
    padded[:N + 1] = coeffs
    applied = np.linalg.matrix_power(one_plus_L, m) @ padded
    rule = build_rule(params, N + 2 * m + 4)
    table = basis_table(params, dim - 1, rule.nodes, 'phi')
    value = float(np.sum(rule.compensated_weights() * (applied @ table) * (padded @ table)))
    return math.sqrt(max(value, 0.0))


def quasi_isometry_bounds(params, m, N):
    """(min, max) of ||phi||_{W^m} / ||c||_{ell^2_m} over sequences supported on 0..N."""
    k = np.arange(N + 1)
    ratios = (_one_plus_eigenvalues(params, N + 1) / (1.0 + k)) ** (m / 2)
    return float(np.min(ratios)), float(np.max(ratios))


def _xi_log_table(params, n_half):
    """Prefix sums of log(2t) and log(2t + 1 + 2 sigma)."""
    t = np.arange(1, n_half + 1, dtype=float)
    evens = np.concatenate(([0.0], np.cumsum(np.log(2 * t))))
    t0 = np.arange(0, n_half + 1, dtype=float)
    odds = np.concatenate(([0.0], np.cumsum(np.log(2 * t0 + 1 + 2 * params.sigma))))
    return evens, odds


def xi_map(params, c):
    """Coefficients of phi / x for an odd sequence; products kept in log space."""
    if not isinstance(c, CoeffSeq):
        c = _with_parity(c)
    if c.parity != 'odd':
        raise ParityError(f"x^-1 map needs an odd sequence, got {c.parity}")
    coeffs = c.coeffs
    N = coeffs.size - 1
    n_half = N // 2 + 1
    evens, odds = _xi_log_table(params, n_half)
    a = np.arange(n_half)[:, None]   # l = 2a
    b = np.arange(n_half)[None, :]   # k = 2b + 1
    upper = b >= a
    bb, aa = np.where(upper, b, a), a
    log_ratio = 0.5 * (evens[bb] - evens[aa] + math.log(2 * params.s) - (odds[bb + 1] - odds[aa]))
    sign = np.where((bb - aa) % 2, -1.0, 1.0)
    matrix = np.where(upper, sign * np.exp(log_ratio), 0.0)
    odd_coeffs = np.zeros(n_half)
    odd_part = coeffs[1::2]
    odd_coeffs[:odd_part.size] = odd_part
    out = np.zeros(N + 1)
    out[0::2] = (matrix @ odd_coeffs)[:out[0::2].size]
    return CoeffSeq(out, 'even')


def xi_map_bound(params, c, m, m_prime):
    """(||Xi c||_{C_m}, the bound through ||c||_{ell^2_{m'}}), needs m' - 2m > 1."""
    if m_prime - 2 * m <= 1:
        raise DomainError(f"bound needs m' - 2m > 1, got m={m}, m'={m_prime}")
    c = c if isinstance(c, CoeffSeq) else _with_parity(c)
    lhs = seq_norms(xi_map(params, c), m).C_m
    k1 = 1.0 + np.arange(c.coeffs.size)
    factor = math.sqrt(2 * params.s) * max(1.0, (1 + 2 * params.sigma) ** -0.5)
    rhs = factor * seq_norms(c, m_prime).ell2_m * math.sqrt(float(np.sum(k1 ** (2 * m - m_prime))))
    return lhs, rhs


def ell1_bound(c, m, m_prime):
    """(sum |c_k| (1+k)^{m/2}, ||c||_{ell^2_{m'}} (sum (1+k)^{m-m'})^{1/2})."""
    coeffs = _as_coeffs(c)
    k1 = 1.0 + np.arange(coeffs.size)
    lhs = float(np.sum(np.abs(coeffs) * k1 ** (m / 2)))
    rhs = seq_norms(coeffs, m_prime).ell2_m * math.sqrt(float(np.sum(k1 ** (m - m_prime))))
    return lhs, rhs


def m_constants(sigma, m_prime):
    """Orders M_ev, M_odd for which the weak perturbed Schwartz norms of those orders
    control the perturbed ones of order m'."""
    if m_prime < 0 or int(m_prime) != m_prime:
        raise DomainError(f"m' must be a natural number, got {m_prime}")
    mp = int(m_prime)
    c = math.ceil(sigma)
    if sigma >= 0:
        if mp % 2 == 0:
            value = 3 * mp / 2 + mp / 4 * c * (c + 3) + c
            return MConstants(ev=value, odd=value)
        return MConstants(ev=(3 * mp - 1) / 2 + (mp - 1) / 4 * c * (c + 3) + c,
                          odd=(3 * mp + 1) / 2 + (mp + 1) / 4 * c * (c + 3) + c)
    if mp % 2 == 0:
        return MConstants(ev=5 * mp / 2, odd=5 * mp / 2)
    return MConstants(ev=(5 * mp + 1) / 2, odd=(5 * mp + 7) / 2)


def sobolev_threshold(sigma):
    """Order gap beyond which W^m_sigma embeds into the perturbed Schwartz norms."""
    if sigma >= 0:
        c = math.ceil(sigma)
        return 4 + 0.5 * c * (c + 1)
    return 4.0


def derivative_coeffs(params, c):
    """d/dx in coefficient space: T_sigma minus 2 sigma times x^-1 on the odd part."""
    coeffs = _as_coeffs(c)
    N = coeffs.size - 1
    dim = N + 2
    padded = np.zeros(dim)
    padded[:N + 1] = coeffs
    out = op_matrix(params, 'T', dim).entries @ padded
    if params.sigma != 0 and np.any(coeffs[1::2] != 0):
        odd = np.zeros(N + 1)
        odd[1::2] = coeffs[1::2]
        correction = xi_map(params, CoeffSeq(odd, 'odd')).coeffs
        out[:N + 1] -= 2 * params.sigma * correction
    return out


def _warn_on_truncation(coeffs):
    total = float(np.sum(coeffs ** 2))
    if total == 0:
        return
    tail_len = max(1, int(math.ceil(config.TRUNCATION_TAIL_FRACTION * coeffs.size)))
    tail = float(np.sum(coeffs[-tail_len:] ** 2))
    if tail / total > config.TRUNCATION_MASS_THRESHOLD:
        logging.warning(f"Coefficient tail carries {tail / total:.2e} of the l2 mass")
        warnings.warn(f"last {tail_len} coefficients carry {tail / total:.2e} of the mass",
                      TruncationWarning, stacklevel=3)


def _default_grid(params, N):
    radius = (math.sqrt((2 * (N + config.SCHWARTZ_MAX_ORDER) + 1 + 2 * abs(params.sigma)) / params.s)
              + 4 / math.sqrt(params.s))
    return np.linspace(-radius, radius, config.SCHWARTZ_GRID_POINTS)


def _apply(matrix_name, params, coeffs, times):
    for _ in range(times):
        dim = coeffs.size + 1
        padded = np.zeros(dim)
        padded[:coeffs.size] = coeffs
        coeffs = op_matrix(params, matrix_name, dim).entries @ padded
    return coeffs


def _apply_derivative(params, coeffs, times):
    for _ in range(times):
        coeffs = derivative_coeffs(params, coeffs)
    return coeffs


def _component_estimate(params, coeffs, parity, m, flavor, grid):
    if params.sigma >= 0:
        keep = np.ones(grid.shape, dtype=bool)
        abs_weight = np.abs(grid) ** params.sigma
    else:
        keep = grid != 0
        abs_weight = np.abs(np.where(keep, grid, 1.0)) ** params.sigma
    total = 0.0
    for j in range(m + 1):
        if flavor == 'S':
            derived = _apply_derivative(params, coeffs, j)
        else:
            derived = _apply('T', params, coeffs, j)
        for i in range(m - j + 1):
            values = coeff_function(params, _apply('X', params, derived, i))(grid)
            if flavor == 'S':
                total += float(np.max(np.abs(values)))
                continue
            result_is_odd = (parity == 'odd') != ((i + j) % 2 == 1)
            weighted = params.sigma >= 0 or result_is_odd
            if weighted:
                total += float(np.max(np.abs(values[keep]) * abs_weight[keep]))
            else:
                total += float(np.max(np.abs(values)))
    return total


def schwartz_norm_estimate(params, c, m, flavor='S_sigma', grid=None):
    """Grid estimate (a lower bound) of the order-m Schwartz norm of sum c_k phi_k.

    flavor 'S' sums sup |x^i f^(j)|; 'S_sigma' uses T_sigma^j and the |x|^sigma weight,
    which for sigma < 0 falls only on the terms whose function is odd. Mixed sequences
    are split and the larger of the two parity norms is reported.
    """
    if m < 0 or m > config.SCHWARTZ_MAX_ORDER:
        raise DomainError(f"m must lie in [0, {config.SCHWARTZ_MAX_ORDER}], got {m}")
    if flavor not in FLAVORS:
        raise DomainError(f"Unknown flavor '{flavor}', expected one of {FLAVORS}")
    seq = c if isinstance(c, CoeffSeq) else _with_parity(c)
    coeffs = seq.coeffs
    _warn_on_truncation(coeffs)
    grid = _default_grid(params, seq.N) if grid is None else np.asarray(grid, dtype=float)

    if seq.parity != 'mixed' or flavor == 'S' or params.sigma >= 0:
        parity = 'odd' if seq.parity == 'odd' else 'even'
        return _component_estimate(params, coeffs, parity, m, flavor, grid)

    even, odd = coeffs.copy(), coeffs.copy()
    even[1::2] = 0.0
    odd[0::2] = 0.0
    return max(_component_estimate(params, even, 'even', m, flavor, grid),
               _component_estimate(params, odd, 'odd', m, flavor, grid))
