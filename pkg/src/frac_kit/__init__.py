"""Numerical toolkit for fractional-Laplacian Dirichlet problems.

Multiplier and singular-integral forms of the operator, factorization
solvers on the half-line with weighted boundary traces, dense interval
realizations with resolvent scans and heat stepping, and bilinear
boundary-identity checkers.
"""

__version__ = "0.1.0"

from .errors import FracKitError
from .grid import Grid1D, GridFunction
from .symbols import (
    FractionalOrder,
    apply_multiplier,
    apply_pv_integral,
    calibrate_constant,
    riesz_power,
)
from .halfline import (
    decompose_transmission_sample,
    poisson_k0,
    solve_homogeneous,
    solve_nonhomogeneous,
    weighted_trace,
)
from .interval import (
    IntervalMesh,
    assemble,
    heat_evolve,
    principal_eigenvalue,
    resolvent_scan,
    solve_dirichlet_interval,
    solve_nonhomogeneous_interval,
)
from .identities import check_green, check_pohozaev, classify_e_mu

__all__ = [
    "__version__",
    "FracKitError",
    "Grid1D",
    "GridFunction",
    "FractionalOrder",
    "apply_multiplier",
    "apply_pv_integral",
    "calibrate_constant",
    "riesz_power",
    "decompose_transmission_sample",
    "poisson_k0",
    "solve_homogeneous",
    "solve_nonhomogeneous",
    "weighted_trace",
    "IntervalMesh",
    "assemble",
    "heat_evolve",
    "principal_eigenvalue",
    "resolvent_scan",
    "solve_dirichlet_interval",
    "solve_nonhomogeneous_interval",
    "check_green",
    "check_pohozaev",
    "classify_e_mu",
]
