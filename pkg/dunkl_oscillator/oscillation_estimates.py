"""Oscillation anatomy of xi_k and empirical scans of its decay estimates.

xi_k solves xi'' + q_k xi = 0 with q_k = (2k+1+2 sigma) s - s^2 x^2 - sigma_bar_k x^-2.
Each scan computes one statistic per k (in parallel over k), then fits the
log-log slope against k over the asymptotic part of the k list.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import brentq
from scipy.stats import linregress

from . import config
from .errors import ConvergenceError, DomainError, ParityError, RegimeError, SingularPoint
from .hermite_basis import basis_table, basis_values, recurrence_coeffs
from .quadrature import build_rule

REGIMES = ('four_zero', 'two_zero_pos', 'two_zero_neg', 'two_zero_zero', 'no_oscillation')

# Rate exponents (per_k = k^exponent * raw statistic)
RATE_EXPONENTS = {
    'thm11_i': 0.0,
    'thm11_ii': 1.0 / 6.0,
    'thm11_iii': 1.0 / 6.0,
    'thm12': 0.0,
    'thm13_i': 1.0 / 6.0,
    'thm13_ii': 1.0 / 6.0,
    'root_spacing': 1.0 / 6.0,
    'lemmaF': 5.0 / 12.0,
    'lemmaG': -1.0 / 6.0,
}
STATISTICS = tuple(RATE_EXPONENTS)
RAW_SLOPE_STATISTICS = ('thm11_i', 'thm11_ii', 'thm11_iii', 'thm12', 'thm13_i', 'thm13_ii')  # slope fitted on the raw statistic


@dataclass(frozen=True)
class OscillationProfile:
    k: int
    sigma_bar: float
    c_max: float
    x_max: Optional[float]
    a_k: Optional[float]
    b_k: float
    b_k_plus: Optional[float]
    regime: str


@dataclass(frozen=True, eq=False)
class EstimateScan:
    sigma: float
    s: float
    statistic: str
    k_list: tuple
    per_k_values: np.ndarray
    fitted_slope: Optional[float]
    intercept: Optional[float] = None

    def summary(self):
        values = self.per_k_values
        return {
            'statistic': self.statistic,
            'sigma': self.sigma,
            's': self.s,
            'slope': self.fitted_slope,
            'intercept': self.intercept,
            'min': float(np.min(values)),
            'max': float(np.max(values)),
            'median': float(np.median(values)),
            'argmax_k': int(self.k_list[int(np.argmax(values))]),
        }


def sigma_bar(params, k):
    """sigma (sigma - (-1)^k)."""
    return params.sigma * (params.sigma - (1.0 if k % 2 == 0 else -1.0))


def q_k(params, k, x):
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sb = sigma_bar(params, k)
    if sb != 0 and np.any(x == 0):
        raise SingularPoint(f"q_{k} is singular at 0 when sigma_bar != 0")
    values = (2 * k + 1 + 2 * params.sigma) * params.s - params.s ** 2 * x ** 2
    if sb != 0:
        values = values - sb / x ** 2
    return float(values[0]) if scalar else values


def b_plus_closed_form(params, k):
    """Smaller positive root of q_k(b) b^2 = 4 pi, or None when there is none."""
    a = 2 * k + 1 + 2 * params.sigma
    c = sigma_bar(params, k) + 4 * math.pi
    disc = a * a - 4 * c
    if disc <= 0:
        return None
    return math.sqrt(2 * c / (params.s * (a + math.sqrt(disc))))


def _find_b_plus(params, k, sb, b_k):
    a = 2 * k + 1 + 2 * params.sigma
    if a * a / 4 - sb - 4 * math.pi <= 0:
        logging.debug(f"No b_plus for k={k}: q_k(b) b^2 stays below 4 pi")
        return None
    s = params.s

    def g(b):
        return a * s * b * b - s * s * b ** 4 - sb - 4 * math.pi

    lo, hi = b_k * config.BPLUS_BRACKET_FACTOR, math.sqrt(a / (2 * s))
    try:
        return brentq(g, lo, hi, xtol=config.BPLUS_XTOL_FACTOR * b_k, maxiter=config.BPLUS_MAXITER)
    except (RuntimeError, ValueError) as e:
        logging.error(f"b_plus bracket [{lo:.3e}, {hi:.3e}] failed for k={k}: {e}")
        raise ConvergenceError(f"could not locate b_plus for k={k}") from e


def profile(params, k):
    """Zeros of q_k and the oscillation regime."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    s = params.s
    a = 2 * k + 1 + 2 * params.sigma
    sb = sigma_bar(params, k)
    a_k = x_max = b_plus = None

    if sb > 0:
        root = math.sqrt(sb)
        c_max = a - 2 * root
        x_max = math.sqrt(root / s)
        if c_max > 0:
            # a^2 - 4 sigma_bar factored to stay nonnegative
            disc = math.sqrt(c_max * (a + 2 * root))
            regime = 'four_zero'
            b_k = math.sqrt((a + disc) / (2 * s))
            a_k = math.sqrt(2 * sb / (s * (a + disc)))
        elif c_max == 0:
            regime, a_k, b_k = 'two_zero_pos', x_max, x_max
        else:
            regime, b_k = 'no_oscillation', math.nan
    else:
        c_max = a
        b_k = math.sqrt((a + math.sqrt(a * a - 4 * sb)) / (2 * s))
        if sb == 0:
            x_max, regime = 0.0, 'two_zero_zero'
        else:
            regime = 'two_zero_neg'
            b_plus = _find_b_plus(params, k, sb, b_k)

    prof = OscillationProfile(k=k, sigma_bar=sb, c_max=c_max, x_max=x_max, a_k=a_k,
                              b_k=b_k, b_k_plus=b_plus, regime=regime)
    logging.debug(f"Profile k={k}: {prof}")
    return prof


def jhat_intervals(prof):
    """Positive halves (lo, hi) of J-hat_k; the set is symmetric about 0."""
    if prof.regime == 'four_zero':
        return [(prof.a_k, prof.b_k)]
    if prof.regime == 'two_zero_zero':
        return [(0.0, prof.b_k)]
    if prof.regime == 'two_zero_neg':
        return [(prof.b_k_plus if prof.b_k_plus is not None else 0.0, prof.b_k)]
    return []


def ihat_intervals(prof):
    """Positive halves of I-hat_k, the union of the oscillation intervals."""
    if prof.regime == 'four_zero':
        return [(prof.a_k, prof.b_k)]
    if prof.regime in ('two_zero_zero', 'two_zero_neg'):
        return [(0.0, prof.b_k)]
    return []


def jhat_contains(prof, x):
    ax = abs(x)
    if prof.regime == 'four_zero':
        return prof.a_k < ax < prof.b_k
    if prof.regime == 'two_zero_zero':
        return ax < prof.b_k
    if prof.regime == 'two_zero_neg':
        if prof.b_k_plus is None:
            return 0 < ax < prof.b_k
        return prof.b_k_plus <= ax < prof.b_k
    return False


def ihat_contains(prof, x):
    ax = abs(x)
    if prof.regime == 'four_zero':
        return prof.a_k < ax < prof.b_k
    if prof.regime == 'two_zero_zero':
        return ax < prof.b_k
    if prof.regime == 'two_zero_neg':
        return 0 < ax < prof.b_k
    return False


def _positive_nodes(params, k):
    nodes = build_rule(params, k).nodes
    return nodes[nodes > 0]


def nodes_outside_oscillation(params, k):
    """Positive nodes of the order-k rule lying outside I-hat_k."""
    prof = profile(params, k)
    positive = _positive_nodes(params, k)
    outside = np.array([x for x in positive if not ihat_contains(prof, x)])
    if outside.size:
        logging.info(f"{outside.size} positive node(s) of order {k} lie outside the oscillation set")
    return outside


def _outer_radius(params, prof):
    if math.isfinite(prof.b_k):
        return prof.b_k
    return math.sqrt((2 * prof.k + 1 + 2 * params.sigma) / params.s)


def _grid(params, k, lo, hi, density, open_ends=False):
    """Uniform grid on [lo, hi] with about density samples per shortest local wavelength."""
    step = 2 * math.pi / (density * math.sqrt((2 * k + 1 + 2 * params.sigma) * params.s))
    n = max(int(math.ceil((hi - lo) / step)), 2) + 1
    grid = np.linspace(lo, hi, n)
    return grid[1:-1] if open_ends else grid


def _refined_max(func, grid, values, lo, hi):
    """max of func over [lo, hi], zooming in on the largest local maxima of the sampled values."""
    best = float(np.max(values))
    if grid.size < 3:
        return best
    inner = values[1:-1]
    peaks = np.flatnonzero((inner >= values[:-2]) & (inner >= values[2:])) + 1
    if peaks.size == 0:
        return best
    top = peaks[np.argsort(values[peaks])[::-1][:config.REFINE_TOP_MAXIMA]]
    centers = grid[top]
    half = grid[1] - grid[0]
    offsets = np.linspace(-1.0, 1.0, config.REFINE_POINTS)
    for _ in range(config.REFINE_ROUNDS):
        window = np.clip(centers[:, None] + half * offsets, lo, hi)
        sampled = func(window.ravel()).reshape(window.shape)
        centers = window[np.arange(centers.size), np.argmax(sampled, axis=1)]
        best = max(best, float(np.max(sampled)))
        half = 2.0 * half / (config.REFINE_POINTS - 1)
    return best


def _sup(func, grid, lo, hi):
    return _refined_max(func, grid, func(grid), lo, hi)


def _singular_even(params, k):
    return params.sigma < 0 and k % 2 == 0


def _check_xi_regime(params, k, statistic):
    if statistic in ('thm11_ii', 'thm13_i') and _singular_even(params, k):
        raise RegimeError(f"{statistic} needs k odd or sigma >= 0 (k={k}); use the restricted variant")
    if statistic in ('thm11_iii', 'thm13_ii') and not _singular_even(params, k):
        raise RegimeError(f"{statistic} applies only to even k with sigma < 0 (k={k})")
    if statistic == 'thm11_i' and not jhat_intervals(profile(params, k)):
        raise RegimeError(f"J-hat_{k} is empty")


def _xi_worker(params, k, statistic, density):
    prof = profile(params, k)

    def xi_squared(x):
        return basis_values(params, k, x, 'xi') ** 2

    if statistic == 'thm11_i':
        def weighted(x):
            return xi_squared(x) * np.sqrt(np.maximum(q_k(params, k, x), 0.0))

        best = 0.0
        for lo, hi in jhat_intervals(prof):
            grid = _grid(params, k, lo, hi, density, open_ends=True)
            if grid.size:
                best = max(best, _sup(weighted, grid, lo, hi))
        return best

    lo = float(np.min(_positive_nodes(params, k))) if _singular_even(params, k) else 0.0
    hi = _outer_radius(params, prof) + config.TAIL_MARGIN / math.sqrt(params.s)
    best = _sup(xi_squared, _grid(params, k, lo, hi, density), lo, hi)
    return k ** RATE_EXPONENTS[statistic] * best


def _thm12_worker(params, k, density, region):
    def phi_squared(x):
        return basis_values(params, k, x, 'phi') ** 2

    hi = _outer_radius(params, profile(params, k)) + config.TAIL_MARGIN / math.sqrt(params.s)
    if region == 'inner':
        hi = min(hi, config.THM12_RADIUS)
    return _sup(phi_squared, _grid(params, k, 0.0, hi, density), 0.0, hi)


def _nearest_distance(sorted_nodes, x):
    idx = np.clip(np.searchsorted(sorted_nodes, x), 1, sorted_nodes.size - 1)
    left, right = sorted_nodes[idx - 1], sorted_nodes[idx]
    return np.minimum(np.abs(x - left), np.abs(x - right))


def _root_spacing_worker(params, k, density):
    intervals = jhat_intervals(profile(params, k))
    nodes = np.sort(build_rule(params, k).nodes)
    if nodes.size == 1:
        nodes = np.repeat(nodes, 2)
    best = 0.0
    for lo, hi in intervals:
        grid = _grid(params, k, lo, hi, density)
        inside = nodes[(nodes > lo) & (nodes < hi)]
        mids = 0.5 * (inside[1:] + inside[:-1])
        candidates = np.concatenate((grid, mids))
        best = max(best, float(np.max(_nearest_distance(nodes, candidates))))
    return k ** RATE_EXPONENTS['root_spacing'] * best


def _lemmaF_worker(params, k):
    b_k = profile(params, k).b_k
    lo = profile(params, k + 1).b_k
    hi = lo + config.LEMMA_F_WINDOW / math.sqrt(params.s)

    def tail(x):
        return np.abs(basis_values(params, k, x, 'xi')) * (x - b_k) ** 2

    grid = np.linspace(lo, hi, config.LEMMA_F_POINTS)
    return k ** RATE_EXPONENTS['lemmaF'] * _sup(tail, grid, lo, hi)


def partial_christoffel_sum(params, k, x):
    """sum_{l < k} xi_l(x)^2."""
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    table = basis_table(params, k - 1, x, 'xi')
    return np.sum(table ** 2, axis=0)


def _lemmaG_worker(params, k, epsilon):
    x1 = float(build_rule(params, k).nodes[0])
    half = epsilon * k ** (-1.0 / 6.0)
    if half == 0:
        x = np.array([x1])
    else:
        if x1 - half <= 0 and params.sigma < 0:
            raise SingularPoint(f"window around x_{{{k},1}} reaches 0 where xi_l is unbounded")
        x = np.linspace(x1 - half, x1 + half, config.LEMMA_G_POINTS)
    return k ** RATE_EXPONENTS['lemmaG'] * float(np.max(partial_christoffel_sum(params, k, x)))


def near_zero_bound(params, k):
    """(sup of phi_k^2 over |x| <= x_{k,k/2}, p_0^2) for even k >= 2."""
    if k % 2:
        raise ParityError(f"near-zero bound needs even k, got {k}")
    if k < 2:
        raise DomainError("near-zero bound needs k >= 2")
    hi = float(np.min(_positive_nodes(params, k)))

    def phi_squared(x):
        return basis_values(params, k, x, 'phi') ** 2

    sup = _sup(phi_squared, _grid(params, k, 0.0, hi, config.GRID_DENSITY), 0.0, hi)
    return sup, recurrence_coeffs(params, 1).p0 ** 2


def node_distance_bound_check(params, k, density=config.GRID_DENSITY):
    """Largest ratio xi_k^2(x) / (C |x - x_{k,i}|) over sampled x in the oscillation
    intervals, x_{k,i} the nearest node in the same interval; C = 8s/3 for even k and
    8s/(3(1+2 sigma)) for odd k. The estimate holds when the ratio is at most 1."""
    prof = profile(params, k)
    c = 8 * params.s / 3 if k % 2 == 0 else 8 * params.s / (3 * (1 + 2 * params.sigma))
    positive = np.sort(_positive_nodes(params, k))
    worst = 0.0
    for lo, hi in ihat_intervals(prof):
        inside = positive[(positive > lo) & (positive < hi)]
        if inside.size == 0:
            continue
        grid = _grid(params, k, lo, hi, density, open_ends=True)
        padded = np.repeat(inside, 2) if inside.size == 1 else inside
        dist = _nearest_distance(padded, grid)
        keep = dist > 0
        ratio = basis_values(params, k, grid[keep], 'xi') ** 2 / (c * dist[keep])
        worst = max(worst, float(np.max(ratio)))
    if worst == 0.0 and not ihat_intervals(prof):
        raise RegimeError(f"xi_{k} has no oscillation interval")
    logging.debug(f"Node-distance bound ratio for k={k}: {worst:.4f}")
    return worst


def log_spaced_ks(kmin, kmax, count, even=False):
    """Up to count distinct integers spread geometrically over [kmin, kmax]."""
    if kmin < 1 or kmax < kmin or count < 1:
        raise DomainError(f"bad k range [{kmin}, {kmax}] with count {count}")
    raw = np.geomspace(kmin, kmax, count)
    if even:
        ks = 2 * np.maximum(np.round(raw / 2), 1)
    else:
        ks = np.round(raw)
    return [int(k) for k in np.unique(ks)]


def _fit_slope(k_list, values, statistic):
    k = np.asarray(k_list, dtype=float)
    mask = k >= config.SLOPE_FIT_MIN_K
    if np.count_nonzero(mask) < 2:
        return None, None
    y = np.log(values[mask])
    if statistic in RAW_SLOPE_STATISTICS:
        y = y - RATE_EXPONENTS[statistic] * np.log(k[mask])
    fit = linregress(np.log(k[mask]), y)
    return float(fit.slope), float(fit.intercept)


def _check_k_list(k_list):
    k_list = tuple(int(k) for k in k_list)
    if not k_list:
        raise DomainError("empty k list")
    if min(k_list) < 1:
        raise DomainError(f"scans need k >= 1, got {min(k_list)}")
    return k_list


def _collect(params, statistic, k_list, tasks, jobs):
    values = np.asarray(Parallel(n_jobs=jobs)(tasks), dtype=float)
    if not np.all(np.isfinite(values) & (values > 0)):
        logging.warning(f"Scan {statistic} produced non-positive or non-finite values")
    slope, intercept = _fit_slope(k_list, values, statistic)
    scan = EstimateScan(sigma=params.sigma, s=params.s, statistic=statistic, k_list=k_list,
                        per_k_values=values, fitted_slope=slope, intercept=intercept)
    logging.info(f"Scan {statistic} over {len(k_list)} orders done, slope={slope}")
    return scan


def scan_thm11(params, k_list, grid_density=config.GRID_DENSITY, statistic='thm11_ii',
               jobs=config.DEFAULT_JOBS):
    """Upper-bound scans: thm11_i (xi^2 sqrt(q) on J-hat), thm11_ii (sup xi^2), thm11_iii
    (sup xi^2 on |x| >= x_{k,k/2}); thm13_i/ii are the same sups read as lower bounds."""
    if statistic not in ('thm11_i', 'thm11_ii', 'thm11_iii', 'thm13_i', 'thm13_ii'):
        raise DomainError(f"'{statistic}' is not a sup-of-xi statistic")
    k_list = _check_k_list(k_list)
    for k in k_list:
        _check_xi_regime(params, k, statistic)
    tasks = (delayed(_xi_worker)(params, k, statistic, grid_density) for k in k_list)
    return _collect(params, statistic, k_list, tasks, jobs)


def scan_thm13(params, k_list, grid_density=config.GRID_DENSITY, statistic='thm13_i',
               jobs=config.DEFAULT_JOBS):
    return scan_thm11(params, k_list, grid_density, statistic, jobs)


def scan_thm12(params, k_list, grid_density=config.GRID_DENSITY, region='inner',
               jobs=config.DEFAULT_JOBS):
    """sup phi_k^2 for even k and sigma < 0; region 'inner' is |x| <= THM12_RADIUS."""
    if params.sigma >= 0:
        raise DomainError(f"thm12 needs sigma < 0, got {params.sigma}")
    if region not in ('inner', 'full'):
        raise DomainError(f"Unknown region '{region}'")
    k_list = _check_k_list(k_list)
    if any(k % 2 for k in k_list):
        raise ParityError("thm12 needs even k")
    tasks = (delayed(_thm12_worker)(params, k, grid_density, region) for k in k_list)
    return _collect(params, 'thm12', k_list, tasks, jobs)


def scan_root_spacing(params, k_list, grid_density=config.GRID_DENSITY, jobs=config.DEFAULT_JOBS):
    k_list = _check_k_list(k_list)
    for k in k_list:
        if not jhat_intervals(profile(params, k)):
            raise RegimeError(f"J-hat_{k} is empty")
    tasks = (delayed(_root_spacing_worker)(params, k, grid_density) for k in k_list)
    return _collect(params, 'root_spacing', k_list, tasks, jobs)


def scan_lemmaF(params, k_list, jobs=config.DEFAULT_JOBS):
    k_list = _check_k_list(k_list)
    tasks = (delayed(_lemmaF_worker)(params, k) for k in k_list)
    return _collect(params, 'lemmaF', k_list, tasks, jobs)


def scan_lemmaG(params, k_list, epsilon=1.0, jobs=config.DEFAULT_JOBS):
    if not (math.isfinite(epsilon) and epsilon >= 0):
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    k_list = _check_k_list(k_list)
    tasks = (delayed(_lemmaG_worker)(params, k, epsilon) for k in k_list)
    return _collect(params, 'lemmaG', k_list, tasks, jobs)


def run_scan(params, statistic, k_list, grid_density=config.GRID_DENSITY, epsilon=1.0,
             region='inner', jobs=config.DEFAULT_JOBS):
    """Dispatch a scan by statistic name."""
    if statistic not in STATISTICS:
        raise DomainError(f"Unknown statistic '{statistic}', expected one of {STATISTICS}")
    if statistic == 'thm12':
        return scan_thm12(params, k_list, grid_density, region, jobs)
    if statistic == 'root_spacing':
        return scan_root_spacing(params, k_list, grid_density, jobs)
    if statistic == 'lemmaF':
        return scan_lemmaF(params, k_list, jobs)
    if statistic == 'lemmaG':
        return scan_lemmaG(params, k_list, epsilon, jobs)
    return scan_thm11(params, k_list, grid_density, statistic, jobs)
