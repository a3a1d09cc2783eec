"""Descent on composite objectives with intermittently corrected directions.

The main solver alternates two regimes.  In the model-based regime it steps
along the model gradient plus a constant correction, spending evaluations
only on line-search trials; a staleness monitor and the floored line search
decide when the correction has drifted too far.  It then switches to the
model-free regime: measure the exact gradient once (paying the oracle's
evaluation cost), take one standard line-search step with it, refresh the
correction from the same measurement, and re-enter the model-based regime.

A pure model-free baseline (exact gradient every iteration) is provided for
evaluation-budget comparisons, along with closed-form diagnostics: geometric
gap bounds under a quadratic-growth constant, a guaranteed number of
trustworthy model-based steps, and per-evaluation progress rates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .composite import (CompensationState, CompositeObjective,
                        accumulate_error_bound, compensate, compensated_gradient,
                        monitor_ok)
from .linesearch import LineSearchParams, bt_line_search
from .trace import ConvergenceTrace, Event, Regime, StepRecord, Tracer

DISTANCE_TO_REFERENCE = "distance-to-reference"
GRADIENT_NORM = "gradient-norm"


class InvalidRegime(ValueError):
    """Step-size bounds incompatible with a contraction-bounded direction."""


class MaxItersExceeded(RuntimeError):
    """A solve hit its outer-iteration budget before reaching tolerance."""


class ExitReason(enum.Enum):
    MONITOR_VIOLATED = "MonitorViolated"
    LINE_SEARCH_FAILED = "LineSearchFailed"
    ZERO_DIRECTION = "ZeroDirection"
    TOLERANCE_REACHED = "ToleranceReached"
    STALLED = "Stalled"


@dataclass(frozen=True)
class GcConfig:
    """Parameters of the compensated solver.

    ``termination_metric`` selects between distance to a reference point
    (benchmark runs, reference required) and the norm of the measured exact
    gradient (library default when no reference optimum is known).
    """

    gamma: float
    residual_smoothness: float
    ls_model_based: LineSearchParams
    ls_model_free: LineSearchParams
    termination_tol: float
    termination_metric: str = DISTANCE_TO_REFERENCE
    max_outer_iters: int = 100_000

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.residual_smoothness < 0.0:
            raise ValueError("residual smoothness must be nonnegative")
        if self.ls_model_based.eta_min <= 0.0:
            raise ValueError("model-based line search needs a positive step floor")
        if self.ls_model_free.eta_min != 0.0:
            raise ValueError("model-free line search must not have a step floor")
        if self.termination_metric not in (DISTANCE_TO_REFERENCE, GRADIENT_NORM):
            raise ValueError(f"unknown termination metric {self.termination_metric!r}")
        if self.termination_tol <= 0.0:
            raise ValueError("termination tolerance must be positive")


def model_based_descent(obj: CompositeObjective, x: np.ndarray, f_x: float,
                        state: CompensationState, params: LineSearchParams,
                        tracer: Optional[Tracer] = None,
                        stop_below: Optional[float] = None,
                        ) -> tuple[np.ndarray, float, CompensationState, ExitReason, int]:
    """Descend along the corrected model gradient until it stops being trusted.

    Each pass recomputes the corrected direction (free), checks the staleness
    monitor, and runs the floored line search.  Accepted steps grow the
    staleness bound by smoothness times step length.  Returns the last
    accepted point, its objective value, the evolved compensation state, why
    the regime was left, and the number of accepted steps.

    When ``stop_below`` is given (distance termination), the routine also
    exits as soon as an accepted point's error to the tracer's reference
    drops below it.
    """
    if tracer is None:
        tracer = Tracer(obj.counter)
    steps = 0
    while True:
        gtilde = compensated_gradient(obj, state, x)
        if not np.any(gtilde):
            return x, f_x, state, ExitReason.ZERO_DIRECTION, steps
        if not monitor_ok(state, gtilde):
            return x, f_x, state, ExitReason.MONITOR_VIOLATED, steps
        outcome = bt_line_search(
            obj, x, f_x, gtilde, params,
            on_trial=lambda f: tracer.armijo_test(f, Regime.MODEL_BASED))
        if outcome.failed:
            tracer.line_search_fail(f_x, Regime.MODEL_BASED)
            return x, f_x, state, ExitReason.LINE_SEARCH_FAILED, steps
        x_new = outcome.accepted_point
        if np.array_equal(x_new, x):
            # Step too small to move the iterate in double precision.
            return x, f_x, state, ExitReason.STALLED, steps
        tracer.trace.steps.append(StepRecord(
            Regime.MODEL_BASED, x.copy(), x_new.copy(), outcome.eta, f_x,
            outcome.f_at_accepted, gtilde.copy(), state.error_bound,
            state.compensation.copy()))
        tracer.accept(x_new, outcome.f_at_accepted, Regime.MODEL_BASED)
        state = accumulate_error_bound(state, x, x_new)
        x, f_x = x_new, outcome.f_at_accepted
        steps += 1
        if stop_below is not None and tracer.error_at(x) < stop_below:
            return x, f_x, state, ExitReason.TOLERANCE_REACHED, steps


def gc_solve(obj: CompositeObjective, x0: np.ndarray, config: GcConfig,
             reference: Optional[np.ndarray] = None) -> ConvergenceTrace:
    """Run the compensated solver from ``x0``.

    Per outer iteration: a model-based episode with the current correction,
    one exact-gradient measurement at the exit point (reused free when the
    episode did not move), a single standard line-search step along it, and a
    fresh compensation state whose staleness bound is seeded with the length
    of that step.  The very first episode starts with a zero bound because
    the correction is measured at the starting point itself.
    """
    distance_mode = config.termination_metric == DISTANCE_TO_REFERENCE
    if distance_mode and reference is None:
        raise ValueError("distance termination requires a reference point")
    tracer = Tracer(obj.counter, reference)
    x = np.array(x0, dtype=float)
    f_x = obj.eval_f(x)
    tracer.accept(x, f_x, Regime.MODEL_FREE)
    if distance_mode and tracer.error_at(x) < config.termination_tol:
        return tracer.finish(x, True, "tolerance reached at start")

    delta, _ = compensate(obj, x, f_x)
    tracer.compensation(f_x, Regime.MODEL_FREE)
    measured_at = x.copy()
    g_exact = delta + obj.grad_fhat(x)  # exact at the measurement point
    if not distance_mode and np.linalg.norm(g_exact) <= config.termination_tol:
        return tracer.finish(x, True, "gradient norm below tolerance")
    state = CompensationState(delta, 0.0, config.residual_smoothness, config.gamma)

    stop_below = config.termination_tol if distance_mode else None
    for _ in range(config.max_outer_iters):
        x, f_x, state, reason, _ = model_based_descent(
            obj, x, f_x, state, config.ls_model_based, tracer, stop_below)
        if reason is ExitReason.TOLERANCE_REACHED:
            return tracer.finish(x, True, "tolerance reached")

        if not np.array_equal(x, measured_at):
            delta, _ = compensate(obj, x, f_x)
            tracer.compensation(f_x, Regime.MODEL_FREE)
            measured_at = x.copy()
        # else: the episode did not move, so the last measurement still holds.
        g_exact = delta + obj.grad_fhat(x)
        if not distance_mode and np.linalg.norm(g_exact) <= config.termination_tol:
            return tracer.finish(x, True, "gradient norm below tolerance")

        outcome = bt_line_search(
            obj, x, f_x, g_exact, config.ls_model_free,
            on_trial=lambda f: tracer.armijo_test(f, Regime.MODEL_FREE))
        if outcome.failed:
            tracer.line_search_fail(f_x, Regime.MODEL_FREE)
            return tracer.finish(x, False, "model-free line search stalled")
        x_new = outcome.accepted_point
        tracer.trace.steps.append(StepRecord(
            Regime.MODEL_FREE, x.copy(), x_new.copy(), outcome.eta, f_x,
            outcome.f_at_accepted, g_exact.copy(), math.inf, None))
        tracer.accept(x_new, outcome.f_at_accepted, Regime.MODEL_FREE)
        seed = config.residual_smoothness * float(np.linalg.norm(x_new - x))
        state = CompensationState(delta, seed, config.residual_smoothness, config.gamma)
        x, f_x = x_new, outcome.f_at_accepted
        if distance_mode and tracer.error_at(x) < config.termination_tol:
            return tracer.finish(x, True, "tolerance reached")
    return tracer.finish(x, False, "max outer iterations")


def model_free_solve(obj: CompositeObjective, x0: np.ndarray, config: GcConfig,
                     reference: Optional[np.ndarray] = None) -> ConvergenceTrace:
    """Gradient descent with the exact gradient and standard backtracking.

    Every iteration pays the exact-gradient oracle's evaluation cost; the
    model part of the objective is never consulted.
    """
    distance_mode = config.termination_metric == DISTANCE_TO_REFERENCE
    if distance_mode and reference is None:
        raise ValueError("distance termination requires a reference point")
    tracer = Tracer(obj.counter, reference)
    x = np.array(x0, dtype=float)
    f_x = obj.eval_f(x)
    tracer.accept(x, f_x, Regime.MODEL_FREE)
    if distance_mode and tracer.error_at(x) < config.termination_tol:
        return tracer.finish(x, True, "tolerance reached at start")

    for _ in range(config.max_outer_iters):
        g, _ = obj.grad_f_exact(x, f_x)
        tracer.compensation(f_x, Regime.MODEL_FREE)
        if not distance_mode and np.linalg.norm(g) <= config.termination_tol:
            return tracer.finish(x, True, "gradient norm below tolerance")
        outcome = bt_line_search(
            obj, x, f_x, g, config.ls_model_free,
            on_trial=lambda f: tracer.armijo_test(f, Regime.MODEL_FREE))
        if outcome.failed:
            tracer.line_search_fail(f_x, Regime.MODEL_FREE)
            return tracer.finish(x, False, "model-free line search stalled")
        x_new = outcome.accepted_point
        tracer.trace.steps.append(StepRecord(
            Regime.MODEL_FREE, x.copy(), x_new.copy(), outcome.eta, f_x,
            outcome.f_at_accepted, g.copy(), math.inf, None))
        tracer.accept(x_new, outcome.f_at_accepted, Regime.MODEL_FREE)
        x, f_x = x_new, outcome.f_at_accepted
        if distance_mode and tracer.error_at(x) < config.termination_tol:
            return tracer.finish(x, True, "tolerance reached")
    return tracer.finish(x, False, "max outer iterations")


# ---------------------------------------------------------------------------
# Closed-form rate diagnostics.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateDiagnostics:
    """Constants governing the solver's guaranteed rates.

    ``mu`` is a quadratic-growth (PL) constant of the objective, ``l_f`` a
    smoothness constant of the full objective, and ``ratio_min``/``ratio_max``
    bound how much one bounded step can shrink or grow the norm of the update
    direction.  None marks constants that a given diagnostic does not need.
    """

    alpha: float
    gamma: float
    eta_min: float
    eta_max: float
    residual_smoothness: float
    mu: Optional[float] = None
    l_f: Optional[float] = None
    ratio_min: Optional[float] = None
    ratio_max: Optional[float] = None


def model_based_gap_bound(diag: RateDiagnostics, steps: int, initial_gap: float) -> float:
    """Guaranteed suboptimality gap after ``steps`` trusted model-based steps.

    Each step taken while the monitor holds contracts the gap by at least
    (1 - 2 mu alpha gamma^2 eta_min); the factor is clamped at zero when the
    constants make it negative.
    """
    if diag.mu is None or diag.mu <= 0.0:
        raise ValueError("gap bound needs a positive quadratic-growth constant")
    if steps < 0 or initial_gap < 0.0:
        raise ValueError("steps and initial gap must be nonnegative")
    factor = 1.0 - 2.0 * diag.mu * diag.alpha * diag.gamma ** 2 * diag.eta_min
    return max(factor, 0.0) ** steps * initial_gap


def guaranteed_model_based_steps(diag: RateDiagnostics, scan_limit: int = 10_000_000) -> int:
    """Largest number of steps the monitor provably tolerates.

    For a direction with per-step norm ratios in [ratio_min, ratio_max], the
    staleness bound stays under the monitor threshold for at least this many
    steps.  Found by forward scan; both inequalities have monotone
    left-hand sides in the step count, so the first violation is final.
    Returns 0 when even a single step is not guaranteed.
    """
    kmin, kmax = diag.ratio_min, diag.ratio_max
    if kmin is None or kmax is None:
        raise ValueError("step guarantee needs direction ratio bounds")
    if not 0.0 < kmin < 1.0 or kmax <= kmin:
        raise ValueError(f"need 0 < ratio_min < 1 and ratio_max > ratio_min, "
                         f"got ({kmin}, {kmax})")
    if diag.residual_smoothness <= 0.0 or diag.eta_max <= 0.0:
        raise ValueError("step guarantee needs positive smoothness and eta_max")
    budget = math.log((1.0 - diag.gamma)
                      / (diag.gamma * diag.eta_max * diag.residual_smoothness))
    growth = math.log(1.0 / kmin)
    for n in range(1, scan_limit + 1):
        if kmax == 1.0:
            lhs = math.log(n) + n * growth
            rhs = budget
        else:
            lhs = math.log(abs(kmax ** n - 1.0)) + n * growth
            rhs = budget + math.log(abs(kmax - 1.0))
        if lhs > rhs:
            return n - 1
    raise RuntimeError(f"no violation found within {scan_limit} steps")


def direction_ratio_bounds(p: np.ndarray, eta_min: float,
                           eta_max: float) -> tuple[float, float]:
    """Per-step direction-norm ratio bounds for a quadratic model part.

    For a model gradient x -> P x with SPD ``P``, one corrected step with
    size in (eta_min, eta_max) scales the direction norm by a factor inside
    [1 - eta_max * lmax(P), 1 - eta_min * lmin(P)].  Raises ``InvalidRegime``
    when eta_max is too large for the lower factor to stay positive.
    """
    eigs = np.linalg.eigvalsh(np.asarray(p, dtype=float))
    ratio_min = 1.0 - eta_max * float(eigs.max())
    ratio_max = 1.0 - eta_min * float(eigs.min())
    if ratio_min <= 0.0:
        raise InvalidRegime(
            f"eta_max={eta_max} is at or above 1/lmax(P)={1.0 / float(eigs.max())}")
    return ratio_min, ratio_max


def progress_per_eval(diag: RateDiagnostics, max_ls_evals: int,
                      dim: int) -> tuple[float, float]:
    """Guaranteed log-gap progress per evaluation in each regime.

    Model-based steps buy |log(1 - 2 mu alpha gamma^2 eta_min)| of progress
    for at most ``max_ls_evals`` evaluations; model-free steps buy
    |log(1 - mu / l_f)| for at least ``dim`` evaluations.  The model-based
    figure is dimension-free, which is the whole point.
    """
    if diag.mu is None or diag.l_f is None:
        raise ValueError("progress rates need mu and l_f")
    mb_factor = 1.0 - 2.0 * diag.mu * diag.alpha * diag.gamma ** 2 * diag.eta_min
    mf_factor = 1.0 - diag.mu / diag.l_f
    if not 0.0 < mb_factor < 1.0 or not 0.0 < mf_factor < 1.0:
        raise ValueError("contraction factors must lie in (0, 1)")
    if max_ls_evals < 1 or dim < 1:
        raise ValueError("evaluation counts must be positive")
    return (abs(math.log(mb_factor)) / max_ls_evals,
            abs(math.log(mf_factor)) / dim)
