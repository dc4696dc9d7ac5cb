"""Constant values from .env and built-in defaults"""

import os
from dotenv import load_dotenv

load_dotenv()
EXOCI_SEED = int(os.getenv("EXOCI_SEED", "20170101"))
EXOCI_THREADS = int(os.getenv("EXOCI_THREADS", "1"))
EXOCI_LOG_LEVEL = os.getenv("EXOCI_LOG_LEVEL", "WARNING")

SITE_DATA = {"NAME": "exoci", "VERSION": "0.1.0"}

# Interval construction
DEFAULT_ALPHA = 0.05
DEFAULT_D = 6.0
N_KNOTS = 13
RHO_GRID = (0.0, -0.1, -0.2, -0.3, -0.4, -0.5, -0.6, -0.7, -0.8, -0.9, -0.97)
RHO_DEGENERATE = -0.05

# Quadrature: one subinterval per knot cell
QUAD_POINTS = 20

# Optimizer
PSI_CONSTRAINT_STEP = 0.05
PSI_CONSTRAINT_MAX = 8.0
PSI_VERIFY_STEP = 0.01
PSI_VERIFY_MARGIN = 4.0
EVEN_ENFORCE_STEP = 0.1
EVEN_VERIFY_STEP = 0.01
EVEN_TOL = 1e-7
FD_STEP = 1e-6
CP_SLACK = 5e-4
CP_CUT_TOL = 1e-6
MAX_CUT_ROUNDS = 5
SLSQP_MAXITER = 300
SLSQP_FTOL = 1e-10
PHI_SCAN = tuple(round(0.02 + 0.04 * k, 2) for k in range(25))
GAIN_LOSS_TOL = 1e-3
MIN_GAIN = 1e-3
MAX_BISECTIONS = 12

# Monte Carlo search defaults
GAMMA_GRID = tuple(float(g) for g in range(-200, 201, 10))
DELTA_GRID = (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 20.0, 30.0, 50.0, 80.0)
M1 = 100_000
M2 = 1_000_000
M3 = 4_000_000
BLOCK_SIZE = 500

# Files
GRID_HEADER = "exoci-grid v1"
CSV_DIGITS = 17
