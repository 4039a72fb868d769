"""
Configuration settings for the angular valuation lab.
"""

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Logging
LOG_LEVEL = os.getenv("KLAIN_LOG_LEVEL", "WARNING")

# Exterior algebra tolerances
ONB_TOLERANCE = 1e-9  # pairwise inner products of an orthonormal frame
KERNEL_RELATIVE_THRESHOLD = 1e-8  # singular values below this * sigma_max are zero
ORIENTATION_TOLERANCE = 1e-12

# Polytope geometry
HYPERPLANE_TOLERANCE = 1e-9  # scaled by the coordinate scale of the input
CONE_TOLERANCE = 1e-9
ORTHANT_TOLERANCE = 1e-9
MAX_POLYTOPE_VERTICES = 4096

# Monte Carlo
MC_SAMPLES = int(os.getenv("KLAIN_MC_SAMPLES", "200000"))
MC_WORKERS = int(os.getenv("KLAIN_WORKERS", "1"))
MC_CHUNK_SIZE = 50000  # samples drawn per batch inside one stream
EVENNESS_PROBES = 16  # random rays used to reject odd ray functions

# Extendability
RELATION_PASS_TOLERANCE = 1e-8
RELATION_FAIL_THRESHOLD = 1e-3
MAX_SIGN_SUM_DIMENSION = 20
STRUCTURED_PHI_STEPS = 16  # phi = j*pi/16
SECOND_FAMILY_STEPS = 8  # (phi, psi) grid of j*pi/8
RANK_RELATIVE_THRESHOLD = 1e-8
FIT_CERTIFICATE_TOLERANCE = 1e-6

# Finite differences
DEFAULT_H_GRID = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
JET_NODES = 5  # polynomial nodes t = h, 2h, ..., 5h
EXTRAPOLATION_TOLERANCE = 1e-6

# File paths
ARTIFACTS_DIR = os.getenv("KLAIN_ARTIFACTS_DIR", "artifacts")
REPORTS_DIR = f"{ARTIFACTS_DIR}/reports"

# Validation settings
REQUIRED_REPORT_FIELDS = [
    "command",
    "subcommand",
    "seed",
    "samples",
    "workers",
    "tolerance",
    "values",
    "verdicts",
    "wall_clock_sec",
]

# Shape generators exposed to the CLI with their accepted parameters
SHAPE_KINDS = {
    "cube": ["side"],
    "simplex": ["scale"],
    "regular_simplex": ["scale"],
    "cross_polytope": ["scale"],
    "segment": ["length"],
    "box": ["lows", "highs"],
    "simplex_S": ["basis", "t"],
}

# Counterexample catalogue: (m1, m2, n) or the spherical family
COUNTEREXAMPLE_CASES = {
    "n4-hw20": {"family": "hw", "m1": 2, "m2": 0, "n": 4},
    "n4-hw33": {"family": "hw", "m1": 3, "m2": 3, "n": 4},
    "n5-hw22": {"family": "hw", "m1": 2, "m2": 2, "n": 5},
    "n5-hw33": {"family": "hw", "m1": 3, "m2": 3, "n": 5},
    "n3-sph2": {"family": "sph", "p": 2, "n": 3},
}
