"""Per-evaluation convergence records shared by all solvers.

A trace logs one row per charged objective evaluation or gradient
measurement, carrying the evaluation counter at that moment, the objective
value, the error to a reference point, the regime, and the event kind.  The
error column follows a step-function convention: it changes only at Accept
events, so between accepts it repeats the error of the last accepted point.

Alongside the per-evaluation rows, a trace keeps richer per-step records
(accepted step size, points before/after, direction norm, staleness bound)
that diagnostics and invariant checks consume; those never reach the CSV.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .composite import EvalCounter


class Regime(str, enum.Enum):
    MODEL_BASED = "MB"
    MODEL_FREE = "MF"


class Event(str, enum.Enum):
    ARMIJO_TEST = "ArmijoTest"
    ACCEPT = "Accept"
    LINE_SEARCH_FAIL = "LineSearchFail"
    COMPENSATION = "Compensation"


@dataclass(frozen=True)
class TraceRecord:
    eval_index: int
    f_value: float
    error: float
    regime: Regime
    event: Event


@dataclass(frozen=True)
class StepRecord:
    """One accepted descent step, with everything invariant checks need."""

    regime: Regime
    x_before: np.ndarray
    x_after: np.ndarray
    eta: float
    f_before: float
    f_after: float
    direction: np.ndarray
    error_bound_before: float  # staleness bound in force when the step was taken
    compensation: Optional[np.ndarray]  # correction active during the step, if any


@dataclass
class ConvergenceTrace:
    """Full record of one solve."""

    records: list[TraceRecord] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)
    final_point: Optional[np.ndarray] = None
    total_evals: int = 0
    converged: bool = False
    termination: str = ""

    def accepts(self, regime: Optional[Regime] = None) -> list[TraceRecord]:
        return [r for r in self.records
                if r.event is Event.ACCEPT and (regime is None or r.regime is regime)]

    def count(self, event: Event, regime: Optional[Regime] = None) -> int:
        return sum(1 for r in self.records
                   if r.event is event and (regime is None or r.regime is regime))


class Tracer:
    """Mutable logging front-end bound to one solve's evaluation counter.

    ``reference`` is the point errors are measured against (Euclidean norm on
    the flattened variable); without one the error column is NaN, which keeps
    the row layout identical for solves driven by gradient-norm termination.
    """

    def __init__(self, counter: EvalCounter,
                 reference: Optional[np.ndarray] = None) -> None:
        self.counter = counter
        self.reference = None if reference is None else np.asarray(reference, float)
        self.trace = ConvergenceTrace()
        self._current_error = math.nan

    def error_at(self, x: np.ndarray) -> float:
        if self.reference is None:
            return math.nan
        return float(np.linalg.norm(x - self.reference))

    def _log(self, f_value: float, regime: Regime, event: Event) -> None:
        self.trace.records.append(TraceRecord(
            self.counter.count, float(f_value), self._current_error, regime, event))

    def armijo_test(self, f_trial: float, regime: Regime) -> None:
        self._log(f_trial, regime, Event.ARMIJO_TEST)

    def accept(self, x: np.ndarray, f_value: float, regime: Regime) -> None:
        self._current_error = self.error_at(x)
        self._log(f_value, regime, Event.ACCEPT)

    def line_search_fail(self, f_value: float, regime: Regime) -> None:
        self._log(f_value, regime, Event.LINE_SEARCH_FAIL)

    def compensation(self, f_value: float, regime: Regime) -> None:
        self._log(f_value, regime, Event.COMPENSATION)

    def finish(self, x: np.ndarray, converged: bool, termination: str) -> ConvergenceTrace:
        self.trace.final_point = np.array(x, dtype=float)
        self.trace.total_evals = self.counter.count
        self.trace.converged = converged
        self.trace.termination = termination
        return self.trace
