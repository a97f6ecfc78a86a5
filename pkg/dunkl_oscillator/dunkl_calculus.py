"""Dunkl operator T_sigma and the ladder algebra.

Pointwise, T_sigma f(x) = f'(x) + sigma (f(x) - f(-x)) / x, which is d/dx on
even functions and d/dx + 2 sigma / x on odd ones. On the eigenbasis phi_k the
operators are banded matrices: B phi_k = beta_k phi_{k-1}, B' phi_{k-1} = beta_k phi_k,
T = (B - B')/2, x = (B + B')/(2s), L diagonal with (2k+1+2 sigma) s.
"""
import logging
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import DomainError, GridAsymmetric, NearZeroDivision, SingularPoint
from .hermite_basis import basis_values, ladder_coeff, recurrence_coeffs, scaled_recurrence
from .oscillation_estimates import q_k, sigma_bar

OPERATORS = ('T', 'B', 'Bp', 'L', 'Sigma', 'X')
IDENTITIES = ('LB', 'LBp', 'BBp', 'DxRel', 'LSigma', 'L')
PARITIES = ('even', 'odd', 'none')


@dataclass(frozen=True, eq=False)
class SampledFn:
    grid: np.ndarray
    values: np.ndarray
    parity: str = 'none'

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise DomainError("grid and values must be 1-d arrays of equal length")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if self.parity not in PARITIES:
            raise DomainError(f"Unknown parity '{self.parity}'")
        if self.parity != 'none' and not is_symmetric(grid):
            raise GridAsymmetric("a grid carrying a parity must be symmetric about 0")
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)


@dataclass(frozen=True, eq=False)
class OpMatrix:
    name: str
    dim: int
    entries: np.ndarray


def is_symmetric(grid):
    grid = np.asarray(grid, dtype=float)
    atol = 1e-12 * max(1.0, float(np.max(np.abs(grid)))) if grid.size else 0.0
    return bool(np.allclose(grid, -grid[::-1], rtol=0.0, atol=atol))


def _flip_parity(parity):
    return {'even': 'odd', 'odd': 'even'}.get(parity, 'none')


def apply_T_pointwise(params, f, dfdx):
    """T_sigma f on a symmetric grid, given samples of f' on the same grid."""
    if not is_symmetric(f.grid):
        raise GridAsymmetric("T_sigma needs f(-x), so the grid must be symmetric about 0")
    if dfdx.grid.shape != f.grid.shape or not np.allclose(dfdx.grid, f.grid, rtol=0.0, atol=0.0):
        raise GridAsymmetric("derivative samples must share the function's grid")
    x = f.grid
    atol = 1e-12 * max(1.0, float(np.max(np.abs(x))))
    zero = np.abs(x) <= atol
    safe_x = np.where(zero, 1.0, x)
    values = dfdx.values + params.sigma * (f.values - f.values[::-1]) / safe_x
    # removable limit at 0
    values[zero] = (1.0 + 2.0 * params.sigma) * dfdx.values[zero]
    return SampledFn(grid=x, values=values, parity=_flip_parity(f.parity))


def op_matrix(params, name, dim):
    """Finite section of an operator on phi_0..phi_{dim-1}."""
    if dim < 2:
        raise DomainError(f"dim must be at least 2, got {dim}")
    k = np.arange(dim)
    b = recurrence_coeffs(params, dim - 1).b
    beta = 2.0 * params.s * b
    if name == 'L':
        entries = np.diag((2 * k + 1 + 2 * params.sigma) * params.s)
    elif name == 'Sigma':
        entries = np.diag(np.where(k % 2 == 0, params.sigma, -params.sigma))
    elif name == 'B':
        entries = np.diag(beta, 1)
    elif name == 'Bp':
        entries = np.diag(beta, -1)
    elif name == 'X':
        entries = np.diag(b, 1) + np.diag(b, -1)
    elif name == 'T':
        entries = 0.5 * (np.diag(beta, 1) - np.diag(beta, -1))
    else:
        raise DomainError(f"Unknown operator '{name}', expected one of {OPERATORS}")
    return OpMatrix(name=name, dim=dim, entries=entries)


def _relative(residual, *terms):
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return float(np.max(np.abs(residual))) / scale if scale > 0 else float(np.max(np.abs(residual)))


def commutator_residual(params, dim, which):
    """Relative max-norm residual of an operator identity on the interior block."""
    if dim < 8:
        raise DomainError(f"dim must be at least 8, got {dim}")
    m = {name: op_matrix(params, name, dim).entries for name in OPERATORS}
    L, B, Bp, X, T, S = m['L'], m['B'], m['Bp'], m['X'], m['T'], m['Sigma']
    one_two_sigma = np.eye(dim) + 2.0 * S
    s = params.s
    n = dim - config.INTERIOR_TRIM

    def block(a):
        return a[:n, :n]

    if which == 'LB':
        res = _relative(block(L @ B - B @ L + 2 * s * B), block(L @ B), block(B @ L))
    elif which == 'LBp':
        res = _relative(block(L @ Bp - Bp @ L - 2 * s * Bp), block(L @ Bp), block(Bp @ L))
    elif which == 'BBp':
        res = _relative(block(B @ Bp - Bp @ B - 2 * s * one_two_sigma), block(B @ Bp), block(Bp @ B))
    elif which == 'DxRel':
        res = _relative(block(T @ X - X @ T - one_two_sigma), block(T @ X), block(X @ T))
    elif which == 'LSigma':
        res = max(_relative(block(L @ S - S @ L), block(L @ S)),
                  _relative(block(B @ S + S @ B), block(B @ S)),
                  _relative(block(Bp @ S + S @ Bp), block(Bp @ S)))
    elif which == 'L':
        res = max(_relative(block(L - Bp @ B - s * one_two_sigma), block(L)),
                  _relative(block(L - B @ Bp + s * one_two_sigma), block(L)))
    else:
        raise DomainError(f"Unknown identity '{which}', expected one of {IDENTITIES}")
    logging.debug(f"Identity {which} at dim {dim}: relative residual {res:.3e}")
    return res


def _fd_step(k):
    return config.FD_STEP_FACTOR * min(1.0, k ** -0.5 if k > 0 else 1.0)


def _second_difference(func, x, h):
    """Five-point central second derivative of func at x."""
    return (-func(x + 2 * h) + 16 * func(x + h) - 30 * func(x)
            + 16 * func(x - h) - func(x - 2 * h)) / (12 * h * h)


def _first_difference(func, x, h):
    return (-func(x + 2 * h) + 8 * func(x + h) - 8 * func(x - h) + func(x - 2 * h)) / (12 * h)


def _check_away_from_zero(params, grid, h):
    if params.sigma != 0 and np.any(np.abs(grid) <= 2 * h):
        logging.error(f"Grid reaches the singular point 0 (step {h:.2e})")
        raise SingularPoint("grid points must stay away from 0 by more than the stencil width")


def xi_ode_residual(params, k, grid):
    """max |xi_k'' + q_k xi_k| / (1 + |q_k xi_k|) over the grid, xi_k'' by finite differences."""
    grid = np.asarray(grid, dtype=float)
    h = _fd_step(k)
    _check_away_from_zero(params, grid, h)

    def xi(x):
        return basis_values(params, k, x, 'xi')

    xi0 = xi(grid)
    q_xi = q_k(params, k, grid) * xi0
    d2 = _second_difference(xi, grid, h)
    return float(np.max(np.abs(d2 + q_xi) / (1.0 + np.abs(q_xi))))


def k_block_residual(params, k, grid):
    """(H + sigma_bar_k x^-2) xi_k against (2k+1+2 sigma) s xi_k, relative to the eigenvalue and sup |xi_k|."""
    grid = np.asarray(grid, dtype=float)
    h = _fd_step(k)
    _check_away_from_zero(params, grid, h)

    def xi(x):
        return basis_values(params, k, x, 'xi')

    xi0 = xi(grid)
    eigenvalue = (2 * k + 1 + 2 * params.sigma) * params.s
    with np.errstate(divide='ignore', invalid='ignore'):
        inverse_square = np.where(grid == 0, 0.0, sigma_bar(params, k) / grid ** 2)
    applied = -_second_difference(xi, grid, h) + (params.s ** 2 * grid ** 2 + inverse_square) * xi0
    return float(np.max(np.abs(applied - eigenvalue * xi0)) / (eigenvalue * np.max(np.abs(xi0))))


def log_derivative_check(params, k, x):
    """(xi_k'/xi_k by finite differences, closed form through p_{k+1}/p_k) at x."""
    x = float(x)
    if x == 0:
        raise SingularPoint("the log-derivative identity needs x != 0")
    prev_next, curr_next, _ = scaled_recurrence(params, k + 1, [x])
    p_k, p_next = float(prev_next[0]), float(curr_next[0])
    if abs(p_k) < config.NEAR_ZERO_RATIO * max(abs(p_k), abs(p_next)):
        logging.error(f"p_{k} vanishes numerically at x={x}")
        raise NearZeroDivision(f"x={x} is a zero of p_{k}")
    ratio = p_next / p_k
    beta_next = ladder_coeff(params, k + 1)
    sign = 1.0 if k % 2 == 0 else -1.0
    rhs = params.s * x + sign * params.sigma / x - beta_next * ratio

    h = config.FD_STEP_FACTOR * min(1.0, abs(x) / 4, (k + 1) ** -0.5)

    def xi(t):
        return basis_values(params, k, t, 'xi')

    lhs = float(_first_difference(xi, np.array([x]), h)[0] / xi(x))
    return lhs, rhs


def apply_T_poly(params, coeffs):
    """T_sigma on power-basis coefficients: x^n -> (n + 2 sigma [n odd]) x^{n-1}."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size <= 1:
        return np.zeros(1)
    n = np.arange(1, coeffs.size)
    factors = n + np.where(n % 2 == 1, 2.0 * params.sigma, 0.0)
    return coeffs[1:] * factors


def tm_at_zero(params, m):
    """(T_sigma^m x^m)(0), which equals m!_sigma."""
    coeffs = np.zeros(m + 1)
    coeffs[m] = 1.0
    for _ in range(m):
        coeffs = apply_T_poly(params, coeffs)
    return float(coeffs[0])
