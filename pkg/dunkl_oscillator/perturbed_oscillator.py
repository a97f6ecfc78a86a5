"""Perturbations P = H - 2 f1 d/dx + f2 of the harmonic oscillator on the half line.

With f2 = sigma(sigma-1) x^-2 - f1^2 - f1' and h = x^sigma e^{-F1} (F1' = f1),
P = h L_{sigma,ev} h^-1, so P has eigenvalues (4k+1+2 sigma) s with normalised
eigenfunctions sqrt(2) h phi_{2k} in L^2(R+, e^{2 F1} dx).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from . import config
from .dunkl_calculus import SampledFn
from .errors import BadFamily, DomainError, SingularPoint
from .hermite_basis import basis_values, make_params
from .quadrature import build_rule

FAMILIES = ('inverse_multiple', 'power', 'log_derivative')
G_CHOICES = ('x', 'cos', 'exp', 'exp_xn')


@dataclass(frozen=True)
class F1Spec:
    """f1 = c1/x (inverse_multiple), c x^r (power) or c g'/g (log_derivative)."""
    family: str
    params: tuple
    g: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'params', tuple(float(p) for p in self.params))
        if self.family not in FAMILIES:
            raise BadFamily(f"Unknown family '{self.family}', expected one of {FAMILIES}")
        expected = {'inverse_multiple': 1, 'power': 2}.get(self.family)
        if self.family == 'log_derivative':
            if self.g not in G_CHOICES:
                raise BadFamily(f"log_derivative needs g in {G_CHOICES}, got {self.g}")
            expected = 2 if self.g == 'exp_xn' else 1
        if len(self.params) != expected:
            raise BadFamily(f"{self.family} takes {expected} parameter(s), got {len(self.params)}")
        if self.family == 'power' and self.params[1] == -1:
            raise BadFamily("power family excludes r = -1; use inverse_multiple")
        if self.g == 'exp_xn' and self.params[1] <= 0:
            raise BadFamily(f"exp_xn needs n > 0, got {self.params[1]}")

    @property
    def c(self):
        return self.params[0]

    def boundary_distance(self, x):
        """Distance from x > 0 to the complement of U (0 included)."""
        x = np.asarray(x, dtype=float)
        dist = x.copy()
        if self.g == 'cos':
            nearest = (np.floor(x / math.pi) + 0.5) * math.pi
            dist = np.minimum(dist, np.abs(x - nearest))
        return dist

    def in_domain(self, x):
        return self.boundary_distance(x) > 0

    def clip_grid(self, grid, margin=config.COS_BOUNDARY_MARGIN):
        """Positive grid points at least margin away from the excluded points of U."""
        grid = np.asarray(grid, dtype=float)
        grid = grid[grid > 0]
        if self.g == 'cos':
            nearest = (np.floor(grid / math.pi) + 0.5) * math.pi
            grid = grid[np.abs(grid - nearest) >= margin]
        return grid

    def to_dict(self):
        return {'family': self.family, 'params': list(self.params), 'g': self.g}


def _g_ratios(spec, x):
    """(g'/g, g''/g) for the log-derivative family."""
    if spec.g == 'x':
        return 1.0 / x, np.zeros_like(x)
    if spec.g == 'cos':
        return -np.tan(x), -np.ones_like(x)
    if spec.g == 'exp':
        return np.ones_like(x), np.ones_like(x)
    n = spec.params[1]
    return n * x ** (n - 1), n * (n - 1) * x ** (n - 2) + n * n * x ** (2 * n - 2)


def _f1_terms(spec, x):
    """(f1, f1', F1) at x > 0."""
    x = np.asarray(x, dtype=float)
    c = spec.c
    if spec.family == 'inverse_multiple':
        return c / x, -c / x ** 2, c * np.log(x)
    if spec.family == 'power':
        r = spec.params[1]
        return c * x ** r, c * r * x ** (r - 1), c * x ** (r + 1) / (r + 1)
    u, v = _g_ratios(spec, x)
    if spec.g == 'x':
        primitive = c * np.log(x)
    elif spec.g == 'cos':
        primitive = c * np.log(np.abs(np.cos(x)))
    elif spec.g == 'exp':
        primitive = c * x
    else:
        primitive = c * x ** spec.params[1]
    return c * u, c * (v - u * u), primitive


def family_f2(spec, sigma, x):
    """Closed-form f2 for each family."""
    x = np.asarray(x, dtype=float)
    base = sigma * (sigma - 1) / x ** 2
    c = spec.c
    if spec.family == 'inverse_multiple':
        return base - c * (c - 1) / x ** 2
    if spec.family == 'power':
        r = spec.params[1]
        return base - c * c * x ** (2 * r) - c * r * x ** (r - 1)
    u, v = _g_ratios(spec, x)
    return base - c * (c - 1) * u * u - c * v


@dataclass(frozen=True)
class PerturbedOperator:
    spec: F1Spec
    sigma: float
    s: float
    a: Optional[float] = None
    params: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'params', make_params(self.sigma, self.s))

    def f1(self, x):
        return _f1_terms(self.spec, x)[0]

    def df1(self, x):
        return _f1_terms(self.spec, x)[1]

    def F1(self, x):
        return _f1_terms(self.spec, x)[2]

    def f2(self, x):
        """sigma(sigma-1) x^-2 - f1^2 - f1'."""
        x = np.asarray(x, dtype=float)
        f1, df1, _ = _f1_terms(self.spec, x)
        return self.sigma * (self.sigma - 1) / x ** 2 - f1 * f1 - df1

    def log_h(self, x):
        x = np.asarray(x, dtype=float)
        return self.sigma * np.log(x) - self.F1(x)

    def h(self, x):
        return np.exp(self.log_h(x))

    def eigenvalue(self, k):
        return (4 * k + 1 + 2 * self.sigma) * self.s


def derive_f2_h(spec, sigma, s):
    """Operator for the given f1 with f2 and h fixed by sigma."""
    if not sigma > config.SIGMA_MIN:
        raise DomainError(f"sigma must be greater than {config.SIGMA_MIN}, got {sigma}")
    a = None
    if spec.family == 'inverse_multiple' or spec.g == 'x':
        a = sigma - spec.c
    op = PerturbedOperator(spec=spec, sigma=float(sigma), s=float(s), a=a)
    logging.debug(f"Built perturbed operator {spec.family} {spec.params} with sigma={sigma}")
    return op


def solve_c1c2(c1, c2, s):
    """Operators H - 2 c1/x d/dx + c2 x^-2 of this kind: roots a of a^2 + (2 c1 - 1) a - c2 = 0
    with sigma = a + c1 > -1/2, ordered by a."""
    disc = (2 * c1 - 1) ** 2 + 4 * c2
    if disc < 0:
        logging.info(f"No admissible branch for c1={c1}, c2={c2}: discriminant {disc:.3g} < 0")
        return []
    root = math.sqrt(disc)
    roots = sorted({(1 - 2 * c1 - root) / 2, (1 - 2 * c1 + root) / 2})
    spec = F1Spec('inverse_multiple', (c1,))
    ops = []
    for a in roots:
        sigma = a + c1
        if sigma > config.SIGMA_MIN:
            ops.append(derive_f2_h(spec, sigma, s))
        else:
            logging.debug(f"Dropped branch a={a}: sigma={sigma} is not admissible")
    return ops


def _eigen_values(op, k, x):
    return math.sqrt(2.0) * basis_values(op.params, 2 * k, x, 'phi', log_factor=op.log_h(x))


def _check_domain(op, x):
    if np.any(x <= 0) or not np.all(op.spec.in_domain(x)):
        logging.error(f"Eigenfunction requested outside U for {op.spec.family}")
        raise SingularPoint("grid points must lie in U (positive and off the excluded set)")


def eigenfunction(op, k, grid):
    """sqrt(2) h phi_{2k} sampled on a grid inside U."""
    grid = np.asarray(grid, dtype=float)
    _check_domain(op, grid)
    return SampledFn(grid=grid, values=_eigen_values(op, k, grid), parity='none')


def _fd_step(op, k, x_min):
    scale = min(1.0, x_min, op.eigenvalue(k) ** -0.5)
    return max(config.FD_STEP_MIN, config.FD_STEP_FACTOR * scale)


def _derivatives(func, x, h):
    """Five-point first and second derivatives."""
    f_m2, f_m1, f_0, f_p1, f_p2 = (func(x + j * h) for j in (-2, -1, 0, 1, 2))
    d1 = (f_m2 - 8 * f_m1 + 8 * f_p1 - f_p2) / (12 * h)
    d2 = (-f_m2 + 16 * f_m1 - 30 * f_0 + 16 * f_p1 - f_p2) / (12 * h * h)
    return f_0, d1, d2


def _stencil_grid(op, k, grid):
    grid = np.asarray(grid, dtype=float)
    _check_domain(op, grid)
    h = _fd_step(op, k, float(np.min(grid)))
    if np.any(op.spec.boundary_distance(grid) <= config.FD_BOUNDARY_STEPS * h):
        logging.error("Finite-difference stencil reaches 0 or the boundary of U")
        raise SingularPoint(f"grid must clear 0 and the boundary of U by {config.FD_BOUNDARY_STEPS} steps")
    return grid, h


def _apply_P(op, u, du, d2u, x):
    return -d2u + op.s ** 2 * x ** 2 * u - 2 * op.f1(x) * du + op.f2(x) * u


def eigen_residual(op, k, grid):
    """max |P u - lambda u| / (lambda ||u||) for u = sqrt(2) h phi_{2k}."""
    grid, h = _stencil_grid(op, k, grid)
    u, du, d2u = _derivatives(lambda x: _eigen_values(op, k, x), grid, h)
    lam = op.eigenvalue(k)
    return float(np.max(np.abs(_apply_P(op, u, du, d2u, grid) - lam * u)) / (lam * np.max(np.abs(u))))


def conjugation_residual(op, k, grid):
    """h^-1 P (h phi_{2k}) against L_{sigma,ev} phi_{2k} = -phi'' - (2 sigma/x) phi' + s^2 x^2 phi."""
    grid, h = _stencil_grid(op, k, grid)
    u, du, d2u = _derivatives(lambda x: _eigen_values(op, k, x), grid, h)
    left = _apply_P(op, u, du, d2u, grid) / op.h(grid)
    phi, dphi, d2phi = _derivatives(lambda x: math.sqrt(2.0) * basis_values(op.params, 2 * k, x, 'phi'), grid, h)
    right = -d2phi - 2 * op.sigma / grid * dphi + op.s ** 2 * grid ** 2 * phi
    return float(np.max(np.abs(left - right)) / np.max(np.abs(right)))


def overlap(op, k, k2, order=None):
    """<u_k, u_k2> in L^2(R+, e^{2 F1} dx) by the symmetric Gauss rule."""
    if order is None:
        order = 2 * (k + k2 + 2)
    order += order % 2
    rule = build_rule(op.params, order)
    positive = rule.nodes > 0
    x = rule.nodes[positive]
    cw = rule.compensated_weights()[positive]
    integrand = _eigen_values(op, k, x) * _eigen_values(op, k2, x) * np.exp(2 * op.F1(x) - 2 * op.sigma * np.log(x))
    return float(np.sum(cw * integrand))


def normalization(op, k, order=None):
    return overlap(op, k, k, order)


@dataclass(frozen=True, eq=False)
class LogTransformed:
    """P carried to the whole line by x = log y: P1 = a2 d^2 + a1 d + a0."""
    op: PerturbedOperator
    k: int
    x: np.ndarray
    values: np.ndarray
    a2: np.ndarray
    a1: np.ndarray
    a0: np.ndarray
    eigenvalue: float

    def _u(self, x):
        return _eigen_values(self.op, self.k, np.exp(x))

    def residual(self):
        lam = self.eigenvalue
        step = max(config.FD_STEP_MIN,
                   config.FD_STEP_FACTOR * min(1.0, math.exp(-float(np.max(self.x))) / math.sqrt(lam)))
        _check_domain(self.op, np.exp(self.x))
        u, du, d2u = _derivatives(self._u, self.x, step)
        applied = self.a2 * d2u + self.a1 * du + self.a0 * u
        return float(np.max(np.abs(applied - lam * u)) / (lam * np.max(np.abs(u))))

    def normalization(self):
        """Integral over R of u(e^x)^2 e^{2 F1(e^x)} e^x."""
        op, k = self.op, self.k

        def integrand(x):
            y = np.array([math.exp(x)])
            if y[0] == 0.0:
                return 0.0
            log_weight = 2 * float(op.F1(y)[0]) + x
            return float(_eigen_values(op, k, y)[0] ** 2 * math.exp(log_weight))

        # near 0 the integrand behaves like e^{(2 sigma + 1) x}
        floor = max(math.log(config.LOG_QUAD_TAIL) / (2 * op.sigma + 1), config.LOG_QUAD_FLOOR)
        radius = math.sqrt((4 * k + 1 + 2 * abs(op.sigma)) / op.s) + 10 / math.sqrt(op.s)
        lower, _ = quad(integrand, floor, 0.0, limit=200)
        upper, _ = quad(integrand, 0.0, math.log(radius), limit=200)
        logging.debug(f"Log-variable normalization for k={k}: lower limit {floor:.1f}")
        return lower + upper


def log_change_of_variables(op, grid_in_R, k=0):
    x = np.asarray(grid_in_R, dtype=float)
    y = np.exp(x)
    _check_domain(op, y)
    e2 = np.exp(-2 * x)
    return LogTransformed(
        op=op, k=k, x=x,
        values=_eigen_values(op, k, y),
        a2=-e2,
        a1=e2 - 2 * op.f1(y) * np.exp(-x),
        a0=op.s ** 2 * np.exp(2 * x) + op.f2(y),
        eigenvalue=op.eigenvalue(k),
    )


def descriptor(op, n=4):
    """JSON-ready description with the first n eigenvalues."""
    return {
        **op.spec.to_dict(),
        'sigma': op.sigma,
        's': op.s,
        'a': op.a,
        'eigenvalue_law': '(4k+1+2sigma)s',
        'eigenvalues': [op.eigenvalue(k) for k in range(n)],
    }
