"""Adaptive proximal extragradient methods for relatively strongly monotone
variational inequalities under Bregman geometries."""

from .core import (VIProblem, certify_relative_strong_monotonicity, divergence,
                   prox_optimality_residual, prox_step)
from .errors import (ConvergenceError, DimensionError, InfeasibleError, LineSearchError,
                     MisuseError, NumericError, ReviError, UnsupportedGeometryError)
from .geometry import (BoxSimplexGeometry, DiagonalQuadraticGeometry, EntropyGeometry,
                       EuclideanGeometry, QuadraticGeometry, gen_kl)
from .metrics import (box_simplex_gap, bregman_to_solution, erm_objective,
                      finite_difference_check, grid_prox_oracle)
from .problems import (make_box_simplex, make_erm, make_synthetic_affine, with_radial_noise,
                       load_instance, save_instance)
from .sets import Box, EuclideanBall, Product, Simplex
from .solvers import (AdaptiveConfig, DeltaConfig, SolverRun, solve_adaptive,
                      solve_classical_eg, solve_delta_additive, solve_delta_multiplicative,
                      solve_mirror_descent, solve_nonadaptive_eg, theoretical_bound,
                      trial_budget_check, uniform_bound)

__version__ = "0.1.0"
