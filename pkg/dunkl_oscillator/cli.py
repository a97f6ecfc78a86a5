"""Command line front end: one subcommand per library area, CSV/JSON on stdout or --output."""
import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from . import config, export
from .dunkl_calculus import IDENTITIES, commutator_residual
from .errors import DomainError, DunklError, SingularPoint
from .hermite_basis import basis_values, log_mu0, make_params
from .logging_setup import setup_logging
from .oscillation_estimates import STATISTICS, log_spaced_ks, run_scan
from .perturbed_oscillator import (F1Spec, derive_f2_h, descriptor, eigenfunction,
                                   solve_c1c2)
from .quadrature import (build_rule, christoffel_weights, exactness_residual,
                         odd_moment_residual)
from .spectral_spaces import analyze, seq_norms, w_sigma_norm, xi_map

EVEN_K_STATISTICS = ('thm12', 'thm11_iii', 'thm13_ii')
FUNCTIONS = ('gaussian', 'odd_gaussian', 'x2_gaussian')
PERTURB_FAMILIES = ('power', 'cos', 'exp', 'exp_xn', 'x')


@dataclass
class RunConfig:
    command: str
    sigma: float
    s: float
    output: Optional[str] = None
    fmt: str = 'csv'
    options: Dict[str, Any] = field(default_factory=dict)

    @property
    def params(self):
        return make_params(self.sigma, self.s)


def _default_jobs():
    return os.environ.get(config.JOBS_ENV_VAR, str(config.DEFAULT_JOBS))


def build_parser():
    parser = argparse.ArgumentParser(prog='dunkl-oscillator',
                                     description='Dunkl harmonic oscillator: basis, quadrature, spectra, estimates')
    parser.add_argument('--log-level', default='WARNING', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Logging level for stderr (default WARNING)')
    parser.add_argument('--log-dir', default=None, help='Also log to a file in this directory')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--sigma', type=float, default=0.0, help='Dunkl parameter, > -1/2')
    common.add_argument('--s', type=float, default=1.0, help='Gaussian scale, > 0')
    common.add_argument('--output', default=None, help='Output file (default stdout)')
    common.add_argument('--format', dest='fmt', choices=['csv', 'json'], default='csv')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('basis', parents=[common],
                       help='p_k, phi_k, xi_k values; CSV columns x,p_k,phi_k,xi_k (or x,value for one kind)')
    p.add_argument('--k', type=int, required=True)
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument('--x', type=float, help='Single point; output is JSON')
    where.add_argument('--points', type=int, help='Number of grid points')
    p.add_argument('--xmin', type=float, default=None)
    p.add_argument('--xmax', type=float, default=None)
    p.add_argument('--kind', choices=['all', 'poly', 'phi', 'xi'], default='all')

    p = sub.add_parser('quad', parents=[common],
                       help='Gauss rule; CSV columns i,x,lambda; --check prints a JSON residual summary')
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--check', action='store_true')

    p = sub.add_parser('spectrum', parents=[common],
                       help='Eigenvalues (2k+1+2sigma)s; CSV columns k,eigenvalue, JSON list')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--check', action='store_true', help='Add operator identity residuals')
    p.add_argument('--dim', type=int, default=128)

    p = sub.add_parser('estimates', parents=[common],
                       help='Scan a decay statistic over k; summary JSON on stdout, CSV columns k,<statistic> to --output')
    p.add_argument('--statistic', choices=STATISTICS, required=True)
    p.add_argument('--kmin', type=int, default=100)
    p.add_argument('--kmax', type=int, default=2000)
    p.add_argument('--count', type=int, default=config.DEFAULT_SCAN_COUNT)
    p.add_argument('--epsilon', type=float, default=1.0)
    p.add_argument('--grid-density', type=int, default=config.GRID_DENSITY)
    p.add_argument('--region', choices=['inner', 'full'], default='inner')
    p.add_argument('--jobs', default=_default_jobs(),
                   help=f'Parallel workers (default ${config.JOBS_ENV_VAR} or {config.DEFAULT_JOBS})')

    p = sub.add_parser('transform', parents=[common],
                       help='Coefficients <phi_k, f>; CSV columns k,c_k, JSON with norms')
    p.add_argument('--function', choices=FUNCTIONS, default='gaussian')
    p.add_argument('--n', type=int, default=20)
    p.add_argument('--m', type=float, default=2.0)
    p.add_argument('--xi', action='store_true', help='Apply the x^-1 map (odd functions only)')

    p = sub.add_parser('perturb', parents=[common],
                       help='Perturbed operators; JSON descriptors, or CSV columns x,u_k with --eigenfunction-k')
    p.add_argument('--c1', type=float)
    p.add_argument('--c2', type=float)
    p.add_argument('--family', choices=PERTURB_FAMILIES)
    p.add_argument('--c', type=float, default=1.0)
    p.add_argument('--exponent', type=float, default=None, help='r for power, n for exp_xn')
    p.add_argument('--levels', type=int, default=4)
    p.add_argument('--eigenfunction-k', type=int, default=None)
    p.add_argument('--points', type=int, default=config.DEFAULT_POINTS)
    p.add_argument('--xmin', type=float, default=0.1)
    p.add_argument('--xmax', type=float, default=4.0)
    p.add_argument('--branch', type=int, default=0)
    return parser


def build_run_config(parser, args):
    """Validate flags; failures exit with status 2 through parser.error."""
    if not (math.isfinite(args.sigma) and args.sigma > config.SIGMA_MIN):
        parser.error(f"--sigma must be greater than {config.SIGMA_MIN}")
    if not (math.isfinite(args.s) and args.s > 0):
        parser.error("--s must be positive")
    options = {k: v for k, v in vars(args).items()
               if k not in ('command', 'sigma', 's', 'output', 'fmt', 'log_level', 'log_dir')}

    if args.command in ('basis', 'quad') and args.k < (1 if args.command == 'quad' else 0):
        parser.error("--k is out of range")
    if args.command == 'basis' and args.points is not None and args.points < 1:
        parser.error("--points must be positive")
    if args.command == 'spectrum' and (args.n < 1 or args.dim < 8):
        parser.error("--n must be positive and --dim at least 8")
    if args.command == 'estimates':
        try:
            options['jobs'] = int(args.jobs)
        except ValueError:
            parser.error(f"--jobs must be an integer, got {args.jobs!r}")
        if args.kmin < 1 or args.kmax < args.kmin or args.count < 1:
            parser.error("need 1 <= kmin <= kmax and count >= 1")
        if args.epsilon < 0:
            parser.error("--epsilon must be nonnegative")
    if args.command == 'transform' and (args.n < 0 or args.m < 0):
        parser.error("--n and --m must be nonnegative")
    if args.command == 'perturb':
        pair = args.c1 is not None or args.c2 is not None
        if pair == (args.family is not None):
            parser.error("give either --c1 and --c2, or --family")
        if pair and (args.c1 is None or args.c2 is None):
            parser.error("--c1 and --c2 go together")
        if args.family in ('power', 'exp_xn') and args.exponent is None:
            parser.error(f"--family {args.family} needs --exponent")
        if args.points < 2 or not (0 < args.xmin < args.xmax):
            parser.error("need --points >= 2 and 0 < xmin < xmax")
    return RunConfig(command=args.command, sigma=args.sigma, s=args.s, output=args.output,
                     fmt=args.fmt, options=options)


def _emit_table(cfg, header, rows):
    if cfg.fmt == 'json':
        export.write_json(export.table_payload(header, rows), cfg.output)
    else:
        export.write_csv(header, rows, cfg.output)


def _xi_or_nan(params, k, x):
    try:
        return basis_values(params, k, x, 'xi')
    except SingularPoint:
        values = np.full(x.shape, np.nan)
        nonzero = x != 0
        if nonzero.any():
            values[nonzero] = basis_values(params, k, x[nonzero], 'xi')
        return values


def cmd_basis(cfg):
    params, opts = cfg.params, cfg.options
    k, kind = opts['k'], opts['kind']
    if opts['x'] is not None:
        x = np.array([opts['x']])
        if kind == 'all':
            xi = _xi_or_nan(params, k, x)[0]
            payload = {'k': k, 'x': opts['x'],
                       'p_k': basis_values(params, k, x, 'poly')[0],
                       'phi_k': basis_values(params, k, x, 'phi')[0],
                       'xi_k': xi}
        else:
            payload = {'k': k, 'x': opts['x'], 'kind': kind, 'value': basis_values(params, k, x, kind)[0]}
        export.write_json(payload, cfg.output)
        return config.EXIT_OK

    radius = math.sqrt((2 * k + 1 + 2 * abs(cfg.sigma)) / cfg.s) + config.TAIL_MARGIN / math.sqrt(cfg.s)
    xmin = opts['xmin'] if opts['xmin'] is not None else -radius
    xmax = opts['xmax'] if opts['xmax'] is not None else radius
    grid = np.linspace(xmin, xmax, opts['points'])
    if kind == 'all':
        columns = [basis_values(params, k, grid, 'poly'), basis_values(params, k, grid, 'phi'),
                   _xi_or_nan(params, k, grid)]
        header = ['x', 'p_k', 'phi_k', 'xi_k']
    else:
        columns = [basis_values(params, k, grid, kind)]
        header = ['x', 'value']
    _emit_table(cfg, header, zip(grid, *columns))
    return config.EXIT_OK


def cmd_quad(cfg):
    params, k = cfg.params, cfg.options['k']
    rule = build_rule(params, k)
    if cfg.options['check']:
        independent = christoffel_weights(params, rule)
        summary = {
            'k': k, 'sigma': cfg.sigma, 's': cfg.s,
            'exactness_residual': exactness_residual(params, k),
            'odd_moment_residual': odd_moment_residual(params, k),
            'weight_sum_error': abs(float(np.sum(rule.weights)) / math.exp(log_mu0(params)) - 1.0),
            'christoffel_weight_deviation': float(np.max(np.abs(independent / rule.weights - 1.0))),
        }
        export.write_json(summary, cfg.output)
        return config.EXIT_OK
    _emit_table(cfg, ['i', 'x', 'lambda'], export.rule_rows(rule))
    return config.EXIT_OK


def cmd_spectrum(cfg):
    n = cfg.options['n']
    eigenvalues = [(2 * k + 1 + 2 * cfg.sigma) * cfg.s for k in range(n)]
    if cfg.options['check']:
        residuals = {name: commutator_residual(cfg.params, cfg.options['dim'], name) for name in IDENTITIES}
        export.write_json({'eigenvalues': eigenvalues, 'residuals': residuals}, cfg.output)
    elif cfg.fmt == 'json':
        export.write_json(eigenvalues, cfg.output)
    else:
        export.write_csv(['k', 'eigenvalue'], enumerate(eigenvalues), cfg.output)
    return config.EXIT_OK


def cmd_estimates(cfg):
    opts = cfg.options
    statistic = opts['statistic']
    ks = log_spaced_ks(opts['kmin'], opts['kmax'], opts['count'], even=statistic in EVEN_K_STATISTICS)
    scan = run_scan(cfg.params, statistic, ks, grid_density=opts['grid_density'], epsilon=opts['epsilon'],
                    region=opts['region'], jobs=opts['jobs'])
    summary = scan.summary()
    if cfg.output is not None:
        if cfg.fmt == 'json':
            export.write_json({**summary, 'k': list(scan.k_list), 'value': scan.per_k_values}, cfg.output)
        else:
            export.write_csv(['k', statistic], export.scan_rows(scan), cfg.output)
    export.write_json(summary)
    return config.EXIT_OK


def _sample_function(name, s):
    if name == 'gaussian':
        return lambda x: np.exp(-s * x * x / 2)
    if name == 'odd_gaussian':
        return lambda x: x * np.exp(-s * x * x / 2)
    return lambda x: x * x * np.exp(-x * x)


def cmd_transform(cfg):
    params, opts = cfg.params, cfg.options
    seq = analyze(params, _sample_function(opts['function'], cfg.s), opts['n'])
    if opts['xi']:
        seq = xi_map(params, seq)
    if cfg.fmt == 'json':
        norms = seq_norms(seq, opts['m'])
        payload = seq.to_dict(params)
        payload.update({'m': opts['m'], 'ell2_m': norms.ell2_m, 'C_m': norms.C_m,
                        'w_sigma_norm': w_sigma_norm(params, seq, opts['m'])})
        export.write_json(payload, cfg.output)
    else:
        export.write_csv(['k', 'c_k'], export.coeff_rows(seq.coeffs), cfg.output)
    return config.EXIT_OK


def _perturbed_operators(cfg):
    opts = cfg.options
    if opts['family'] is None:
        return solve_c1c2(opts['c1'], opts['c2'], cfg.s)
    if opts['family'] == 'power':
        spec = F1Spec('power', (opts['c'], opts['exponent']))
    elif opts['family'] == 'exp_xn':
        spec = F1Spec('log_derivative', (opts['c'], opts['exponent']), g='exp_xn')
    else:
        spec = F1Spec('log_derivative', (opts['c'],), g=opts['family'])
    return [derive_f2_h(spec, cfg.sigma, cfg.s)]


def cmd_perturb(cfg):
    opts = cfg.options
    ops = _perturbed_operators(cfg)
    if opts['eigenfunction_k'] is None:
        export.write_json([descriptor(op, opts['levels']) for op in ops], cfg.output)
        return config.EXIT_OK
    if not 0 <= opts['branch'] < len(ops):
        raise DomainError(f"branch {opts['branch']} does not exist ({len(ops)} admissible)")
    op = ops[opts['branch']]
    grid = op.spec.clip_grid(np.linspace(opts['xmin'], opts['xmax'], opts['points']))
    sampled = eigenfunction(op, opts['eigenfunction_k'], grid)
    _emit_table(cfg, ['x', 'u_k'], zip(sampled.grid, sampled.values))
    return config.EXIT_OK


COMMANDS = {
    'basis': cmd_basis,
    'quad': cmd_quad,
    'spectrum': cmd_spectrum,
    'estimates': cmd_estimates,
    'transform': cmd_transform,
    'perturb': cmd_perturb,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(getattr(logging, args.log_level), args.log_dir)
    cfg = build_run_config(parser, args)
    logging.info(f"Running {cfg.command} with sigma={cfg.sigma}, s={cfg.s}")
    try:
        return COMMANDS[cfg.command](cfg)
    except DunklError as e:
        logging.error(f"{cfg.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
