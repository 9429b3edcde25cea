"""Numerical toolkit for radial solutions of the critical p-Laplacian
equation with a Hardy potential, and executable checks of their decay,
scaling and regularity estimates."""

from .errors import *  # noqa: F401,F403
from .exponents import ProblemParams, QSpec, Exponents, exponents_for, gamma_roots, validate
from .profile import RadialProfile, log_grid
from .closed_forms import BubbleFamily, aubin_talenti, terracini, scale, residual
from .radial_solver import ShootingConfig, shoot, decay_diagnostics, flux_conservation_residual
from .geometry import BallSpec, CutoffSpec, ball_average, ball_sup, lq_norm, cap_weight
from .regularized_bvp import BVPProblem, NewtonConfig, solve_bvp, epsilon_sweep
from .verification import CheckReport, MoserSchedule, build_moser_schedule

__version__ = "0.1.0"
