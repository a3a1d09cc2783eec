"""Composite objectives f = fhat + r and the gradient-compensation state.

A composite objective pairs a cheap analytic model part ``fhat`` (closed-form
gradient, zero evaluation cost) with a black-box residual reachable only
through the full objective's evaluation oracle.  Every call to ``eval_f``
bumps a shared counter; exact gradients report how many evaluations they
spent, so a solver's trace accounts for every query.

The compensation mechanism measures the gap between the exact and model
gradients at one point and reuses it as a constant correction nearby.  A
running upper bound on how stale that correction can be (grown from a
Lipschitz constant of the residual gradient) feeds the monitor that decides
when the corrected direction is still trustworthy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

# An exact-gradient oracle maps (x, f_at_x or None) to (gradient, evals_spent).
ExactGradient = Callable[[np.ndarray, Optional[float]], tuple[np.ndarray, int]]


class EvalCounter:
    """Monotone counter of objective evaluations."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def increment(self) -> int:
        self.count += 1
        return self.count


@dataclass
class CompositeObjective:
    """Objective split into an analytic model part and a black-box rest.

    ``raw_value`` is the uncounted objective map; use ``eval_f`` everywhere a
    query should cost an evaluation.  ``exact_grad`` returns the full gradient
    together with the number of evaluations it consumed (zero for analytic
    test oracles, which bypass the counter entirely).
    """

    dim: int
    raw_value: Callable[[np.ndarray], float]
    grad_fhat: Callable[[np.ndarray], np.ndarray]
    exact_grad: ExactGradient
    counter: EvalCounter
    value_fhat: Optional[Callable[[np.ndarray], float]] = None

    def eval_f(self, x: np.ndarray) -> float:
        self.counter.increment()
        return float(self.raw_value(x))

    def grad_f_exact(self, x: np.ndarray,
                     f_x: Optional[float] = None) -> tuple[np.ndarray, int]:
        return self.exact_grad(x, f_x)


def forward_difference_oracle(obj_eval: Callable[[np.ndarray], float], dim: int,
                              step: float = 1e-6) -> ExactGradient:
    """One-sided finite-difference gradient costing ``dim`` evaluations.

    Reuses the caller-supplied value at the base point, so only the ``dim``
    perturbed points are charged (one extra evaluation when it is unknown).
    """

    def grad(x: np.ndarray, f_x: Optional[float]) -> tuple[np.ndarray, int]:
        evals = 0
        if f_x is None:
            f_x = obj_eval(x)
            evals += 1
        g = np.empty(dim)
        for i in range(dim):
            xp = x.copy()
            xp[i] += step
            g[i] = (obj_eval(xp) - f_x) / step
            evals += 1
        return g, evals

    return grad


def central_difference_oracle(obj_eval: Callable[[np.ndarray], float], dim: int,
                              step: float = 1e-6) -> ExactGradient:
    """Two-sided finite-difference gradient costing ``2 * dim`` evaluations."""

    def grad(x: np.ndarray, f_x: Optional[float]) -> tuple[np.ndarray, int]:
        del f_x
        g = np.empty(dim)
        for i in range(dim):
            xp = x.copy()
            xm = x.copy()
            xp[i] += step
            xm[i] -= step
            g[i] = (obj_eval(xp) - obj_eval(xm)) / (2.0 * step)
        return g, 2 * dim

    return grad


def analytic_oracle(grad_f: Callable[[np.ndarray], np.ndarray]) -> ExactGradient:
    """Closed-form exact gradient for tests; consumes zero evaluations."""

    def grad(x: np.ndarray, f_x: Optional[float]) -> tuple[np.ndarray, int]:
        del f_x
        return np.asarray(grad_f(x), dtype=float), 0

    return grad


@dataclass(frozen=True)
class CompensationState:
    """Constant gradient correction plus its staleness bound.

    ``compensation`` is the measured exact-minus-model gradient at the most
    recent measurement point.  ``error_bound`` grows with distance traveled
    since then, at rate ``residual_smoothness`` (the Lipschitz constant of the
    residual gradient).  ``gamma`` in (0, 1) sets how much staleness the
    monitor tolerates relative to the corrected direction's size.
    """

    compensation: np.ndarray
    error_bound: float
    residual_smoothness: float
    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.error_bound < 0.0:
            raise ValueError(f"error bound must be nonnegative, got {self.error_bound}")
        if self.residual_smoothness < 0.0:
            raise ValueError(
                f"residual smoothness must be nonnegative, got {self.residual_smoothness}")


def compensate(obj: CompositeObjective, x_tilde: np.ndarray,
               f_tilde: Optional[float] = None) -> tuple[np.ndarray, int]:
    """Measure the exact-minus-model gradient gap at ``x_tilde``.

    Returns the correction vector and the evaluations the exact-gradient
    oracle reported.  Adding the correction to the model gradient makes the
    corrected direction agree with the exact gradient at ``x_tilde``.
    """
    g_exact, evals = obj.grad_f_exact(x_tilde, f_tilde)
    return g_exact - obj.grad_fhat(x_tilde), evals


def compensated_gradient(obj: CompositeObjective, state: CompensationState,
                         x: np.ndarray) -> np.ndarray:
    """Model gradient plus the stored correction; costs zero evaluations."""
    return obj.grad_fhat(x) + state.compensation


def accumulate_error_bound(state: CompensationState, x_prev: np.ndarray,
                           x_next: np.ndarray) -> CompensationState:
    """Grow the staleness bound by smoothness times the step length."""
    grown = state.residual_smoothness * float(np.linalg.norm(x_next - x_prev)) \
        + state.error_bound
    return replace(state, error_bound=grown)


def monitor_ok(state: CompensationState, gtilde: np.ndarray) -> bool:
    """Whether the corrected direction is still trustworthy.

    True when the staleness bound is at most (1 - gamma)/gamma times the
    corrected direction's norm.  A zero direction returns False: the model
    predicts stationarity, which only an exact gradient can confirm, so the
    caller must leave the model-based regime.
    """
    norm = float(np.linalg.norm(gtilde))
    if norm == 0.0:
        return False
    return state.error_bound <= (1.0 - state.gamma) / state.gamma * norm
