"""Fractional powers of the discrete Laplacian on Z and Z^2.

Closed-form and quadrature kernels, truncated operator application on
mesh windows, the lattice heat semigroup, closed-form reference pairs and
mesh-refinement studies.
"""

from .convergence import ConvergenceReport, consistency_error, rate_study, restrict
from .errors import (ConfigError, ConvergenceError, DomainError, FracLatticeError,
                     QuadratureError, TruncationError)
from .gridops import (GridFunction, GridWindow, HeatConfig, LatticeSampler, OperatorConfig,
                      apply_frint_1d, apply_frint_2d, apply_frlap_1d, apply_frlap_2d,
                      heat_apply)
from .kernels1d import kernel_kminus, kernel_ks, kernel_table, sigma_s
from .kernels2d import build_hybrid_table
from .reference import SolutionPair, get_pair

__version__ = "0.1.0"
