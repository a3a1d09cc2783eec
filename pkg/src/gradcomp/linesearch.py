"""Backtracking line search with an optional step-size floor.

Two variants share one routine.  The standard Armijo search (``eta_min = 0``)
is used with exact gradients and keeps halving until it finds a decrease,
guarded by a hard cap on halvings.  The floored variant (``eta_min > 0``) is
used with corrected model directions, which may fail to be descent
directions; it gives up once the trial step reaches the floor, and that
failure is a signal the caller acts on rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .composite import CompositeObjective

# Halvings allowed when no floor is set.  Far beyond any step distinguishable
# in double precision; reaching it means the direction is not a descent
# direction for the oracle at hand.
STANDARD_HALVING_CAP = 200


@dataclass(frozen=True)
class LineSearchParams:
    """Armijo parameters: decrease fraction, shrink factor, step bounds."""

    alpha: float
    beta: float
    eta_min: float
    eta_max: float

    def __post_init__(self) -> None:
        # alpha = 1/2 is the boundary of the usual Armijo regime; it is
        # allowed so exact worked examples at that value run unmodified.
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2], got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.eta_min < 0.0:
            raise ValueError(f"eta_min must be nonnegative, got {self.eta_min}")
        if self.eta_max <= self.eta_min:
            raise ValueError(
                f"need eta_max > eta_min, got {self.eta_max} <= {self.eta_min}")

    def max_evals(self) -> int:
        """Largest number of trial evaluations one search can spend.

        With a floor this is the smallest m such that beta^(m-1) * eta_max
        drops to the floor; without one it is the halving cap plus the
        initial trial.
        """
        if self.eta_min == 0.0:
            return STANDARD_HALVING_CAP + 1
        return math.ceil(math.log(self.eta_min / self.eta_max) / math.log(self.beta) + 1.0)


@dataclass(frozen=True)
class LineSearchOutcome:
    """Result of one search: step (0 encodes failure) and what it cost."""

    eta: float
    accepted_point: np.ndarray
    f_at_accepted: float
    evals_used: int

    @property
    def failed(self) -> bool:
        return self.eta == 0.0


def bt_line_search(obj: CompositeObjective, x: np.ndarray, f_x: float,
                   direction: np.ndarray, params: LineSearchParams,
                   on_trial: Optional[Callable[[float], None]] = None) -> LineSearchOutcome:
    """Backtrack from ``eta_max`` until the Armijo condition holds.

    ``f_x`` must be the already-known objective value at ``x``; it is not
    re-evaluated.  Each trial evaluates the candidate point once (reported to
    ``on_trial`` when given) and accepts as soon as

        f(x - eta * direction) <= f_x - alpha * eta * ||direction||^2.

    On failure the outcome carries ``eta = 0`` and the unmoved point; the
    trial at the first step at or below the floor is still tested before
    failure is declared.
    """
    sq_norm = float(np.dot(direction, direction))
    eta = params.eta_max
    evals = 0
    halvings = 0
    while True:
        candidate = x - eta * direction
        f_trial = obj.eval_f(candidate)
        evals += 1
        if on_trial is not None:
            on_trial(f_trial)
        # Subtracted form: a required decrease far below f_x's ulp would be
        # absorbed in `f_x - alpha * eta * sq_norm`, silently accepting
        # zero-progress steps along non-descent directions.
        if f_trial - f_x <= -params.alpha * eta * sq_norm:
            return LineSearchOutcome(eta, candidate, f_trial, evals)
        if eta > params.eta_min and halvings < STANDARD_HALVING_CAP:
            eta *= params.beta
            halvings += 1
        else:
            return LineSearchOutcome(0.0, x, f_x, evals)
