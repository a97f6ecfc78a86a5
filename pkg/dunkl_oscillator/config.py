# Configuration Constants for the Dunkl Oscillator toolkit

# Parameter Domain
SIGMA_MIN = -0.5          # sigma must be strictly greater than this

# Scaled Recurrence
MANTISSA_HI = 2.0**256    # rescale when |mantissa| rises above this
MANTISSA_LO = 2.0**-256   # ... or falls below this (and is nonzero)
K_MAX_DEFAULT = 5000      # degrees above this log a precision warning

# Quadrature
NEWTON_STEPS = 3          # Newton corrections applied to eigensolver nodes
RULE_CACHE_SIZE = 128     # rules kept in the build_rule LRU cache
ANALYSIS_ORDER_FACTOR = 4 # analysis rule order = factor * (N + 1)
EIGVEC_WEIGHT_MAX_ORDER = 400  # eigenvector weights only computed up to this order
WEIGHT_CROSSCHECK_TOL = 1e-8   # relative tolerance before a weight mismatch is logged

# Operator Identities
INTERIOR_TRIM = 4         # rows/cols dropped from truncated matrix identities

# Finite Differences
FD_STEP_FACTOR = 1e-3     # step = factor * local scale
FD_STEP_MIN = 1e-5        # lower bound for perturbed-operator steps
NEAR_ZERO_RATIO = 1e-12   # |p_k| / |p_{k+1}| below this is treated as a zero of p_k

# Oscillation Scans
GRID_DENSITY = 40         # samples per local wavelength 2*pi/sqrt(q_k)
SLOPE_FIT_MIN_K = 50      # slope fits ignore k below this
REFINE_TOP_MAXIMA = 3     # local maxima refined per scan grid
REFINE_POINTS = 65        # samples per zoom window
REFINE_ROUNDS = 2         # zoom rounds around each local maximum
TAIL_MARGIN = 2.0         # grid extends this far beyond b_k (in units of s^-1/2)
LEMMA_F_WINDOW = 5.0      # tail window [b_{k+1}, b_{k+1} + window]
LEMMA_F_POINTS = 2001     # samples in the tail window
LEMMA_G_POINTS = 41       # samples in the window around x_{k,1}
THM12_RADIUS = 1.0        # phi_k^2 sup taken over |x| <= radius by default
BPLUS_BRACKET_FACTOR = 1e-6    # left end of the b_{k,+} bracket, relative to b_k
BPLUS_MAXITER = 200
BPLUS_XTOL_FACTOR = 1e-15      # root tolerance relative to b_k

# Transforms
TRUNCATION_TAIL_FRACTION = 0.1     # share of trailing coefficients inspected
TRUNCATION_MASS_THRESHOLD = 1e-6   # tail l2 mass fraction that triggers a warning
SCHWARTZ_MAX_ORDER = 4
SCHWARTZ_GRID_POINTS = 4001        # odd, so the default grid contains 0
PARITY_TOL = 1e-12        # relative size below which wrong-parity coefficients are zeroed

# Perturbed Operators
COS_BOUNDARY_MARGIN = 0.05     # grids stay this far from odd multiples of pi/2
FD_BOUNDARY_STEPS = 4          # grid must clear 0 / U-boundary by this many steps
LOG_QUAD_TAIL = 1e-16          # dropped share of the log-variable norm integral below 0
LOG_QUAD_FLOOR = -700.0        # lowest x = log y sampled; e^x stays a normal float

# Command Line
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4
JOBS_ENV_VAR = "DUNKL_JOBS"
DEFAULT_JOBS = 1
CSV_FLOAT_FORMAT = ".17g"      # round-trip decimal formatting
DEFAULT_POINTS = 201
DEFAULT_SCAN_COUNT = 8
LOG_FILENAME = 'dunkl_oscillator.log'

# General
EPSILON = 1e-300          # floor for logarithms of nonnegative quantities
