"""Composite optimization with intermittently compensated model gradients.

The package splits an expensive black-box objective into a cheap analytic
model part plus a residual, descends along the model gradient corrected by an
occasionally remeasured constant, and monitors a running staleness bound to
decide when a fresh exact gradient is worth its evaluation cost.  Two seeded
benchmark families (random convex quadratics, linear feedback on a mildly
nonlinear plant) and an experiment harness reproduce evaluation-budget
comparisons against a purely model-free baseline.
"""

from .composite import (CompensationState, CompositeObjective, EvalCounter,
                        accumulate_error_bound, analytic_oracle,
                        central_difference_oracle, compensate,
                        compensated_gradient, forward_difference_oracle,
                        monitor_ok)
from .experiment import (ExperimentConfig, RunResult, default_config,
                         run_experiment, run_sweep)
from .linalg import (NotConverged, NotStabilizable, SpectralRadiusError,
                     gaussian_matrix, make_rng, random_spd,
                     random_spd_with_spectral_radius, solve_dare,
                     solve_discrete_lyapunov, spectral_radius)
from .linesearch import LineSearchOutcome, LineSearchParams, bt_line_search
from .lqr import (Diverged, GenerationFailed, LqrGradientWorkspace, LqrInstance,
                  Rollout, empirical_cost, finite_horizon_model_gradient, h_eval,
                  lqr_objective, make_lqr, model_gradient, reference_optimum,
                  rollout, zeroth_order_grad)
from .quadratic import QuadraticInstance, make_quadratic, quad_objective
from .serialize import ParseError, fingerprint, load_instance, save_instance
from .solver import (DISTANCE_TO_REFERENCE, GRADIENT_NORM, ExitReason, GcConfig,
                     InvalidRegime, MaxItersExceeded, RateDiagnostics,
                     direction_ratio_bounds, gc_solve,
                     guaranteed_model_based_steps, model_based_descent,
                     model_based_gap_bound, model_free_solve, progress_per_eval)
from .trace import ConvergenceTrace, Event, Regime, StepRecord, TraceRecord, Tracer

__version__ = "0.1.0"

__all__ = [
    "CompensationState", "CompositeObjective", "EvalCounter",
    "accumulate_error_bound", "analytic_oracle", "central_difference_oracle",
    "compensate", "compensated_gradient", "forward_difference_oracle",
    "monitor_ok",
    "ExperimentConfig", "RunResult", "default_config", "run_experiment",
    "run_sweep",
    "NotConverged", "NotStabilizable", "SpectralRadiusError", "gaussian_matrix",
    "make_rng", "random_spd", "random_spd_with_spectral_radius", "solve_dare",
    "solve_discrete_lyapunov", "spectral_radius",
    "LineSearchOutcome", "LineSearchParams", "bt_line_search",
    "Diverged", "GenerationFailed", "LqrGradientWorkspace", "LqrInstance",
    "Rollout", "empirical_cost", "finite_horizon_model_gradient", "h_eval",
    "lqr_objective", "make_lqr", "model_gradient", "reference_optimum",
    "rollout", "zeroth_order_grad",
    "QuadraticInstance", "make_quadratic", "quad_objective",
    "ParseError", "fingerprint", "load_instance", "save_instance",
    "DISTANCE_TO_REFERENCE", "GRADIENT_NORM", "ExitReason", "GcConfig",
    "InvalidRegime", "MaxItersExceeded", "RateDiagnostics",
    "direction_ratio_bounds", "gc_solve", "guaranteed_model_based_steps",
    "model_based_descent", "model_based_gap_bound", "model_free_solve",
    "progress_per_eval",
    "ConvergenceTrace", "Event", "Regime", "StepRecord", "TraceRecord", "Tracer",
]
