# Library defaults. The CLI overrides these per run through the config file or flags.

# Matrix algebra
CONDITION_BOUND = 1e12          # mat_inv refuses matrices with a larger condition estimate
EXPONENT_CAP = 700.0            # largest exponent accepted by diag_exp; thicker layers are opaque
DIAGONAL_TOLERANCE = 1e-12      # off-diagonal magnitude tolerated by force_diagonal

# Quadrature
DEFAULT_TOLERANCE = 1e-9
MAX_EVALUATIONS = 2_000_000
QUAD_LIMIT = 200                # subdivision limit handed to scipy.integrate.quad
MATSUBARA_STALL_TERMS = 3       # consecutive negligible terms before the sum is truncated
MAX_MATSUBARA_TERMS = 100_000
TAIL_MARGIN = 30.0              # u_max = ln(1/tol) + TAIL_MARGIN in the decay variable u
IMAG_RESIDUE_TOLERANCE = 1e-10  # |Im|/|value| above this flags a spectral point
ANGLE_PANELS = 2                # zero-temperature polar-angle panels, run in parallel

# Far-boundary emulation
FAR_BOUNDARY_FACTOR = 40.0      # padded width >= FAR_BOUNDARY_FACTOR / k_min
FAR_BOUNDARY_SCALE = 25.0       # k_min = 1 / (FAR_BOUNDARY_SCALE * interior width)

# CLI
VERSION = '0.1.0'
SCHEMA_VERSION = 1
DEFAULT_THREADS = 1
HBAR_C_EV_NM = 197.3269804      # hbar*c in eV*nm, fixed conversion constant
EV_TO_J = 1.602176634e-19
