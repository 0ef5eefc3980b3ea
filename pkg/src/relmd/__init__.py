"""Online mirror descent for relatively strongly convex losses with functional constraints."""

from .geometry import EntropySimplex, EuclideanBall, bregman, bregman_project, grad_h, mirror_step
from .problems import OnlineProblem, Regularizer, generate_instance, load_instance, save_instance
from .solvers import (
    Algorithm,
    ConfigError,
    RunTrace,
    SolverConfig,
    run,
    run_adaptive_baseline,
    run_alg1,
    run_alg2,
    run_alg3,
    run_alg4,
    run_alg5,
)
from .analysis import check_theorem_bounds, delta_certificate, regret, solve_offline

__version__ = "0.1.0"
