"""Random composite convex quadratics with analytic ground truth.

The model part is c1 * x'Px/2 with SPD ``P``; the residual is
c2 * (x - c3)'Q(x - c3)/2 with SPD ``Q`` drawn with a prescribed largest
eigenvalue.  Everything about these instances is available in closed form
(true optimum, model optimum at the origin, strong-convexity and smoothness
constants), which makes them the workhorse for invariant checks: any claim
about monitored descent can be validated here against exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .composite import (CompositeObjective, EvalCounter, analytic_oracle,
                        central_difference_oracle, forward_difference_oracle)

# Perturbation for the default one-sided difference oracle.  For O(1)-scaled
# quadratics this balances truncation against round-off.
FD_STEP = 1e-6

GRAD_FORWARD = "forward-difference"
GRAD_CENTRAL = "central-difference"
GRAD_ANALYTIC = "analytic"


@dataclass(frozen=True)
class QuadraticInstance:
    """Fully materialized composite quadratic problem."""

    n: int
    p: np.ndarray
    q: np.ndarray
    c1: float
    c2: float
    c3: np.ndarray
    x_star: np.ndarray

    @property
    def x_hat_star(self) -> np.ndarray:
        """Minimizer of the model part alone (the origin)."""
        return np.zeros(self.n)

    @property
    def hessian(self) -> np.ndarray:
        return self.c1 * self.p + self.c2 * self.q

    @property
    def mu(self) -> float:
        """Strong-convexity constant of the full objective."""
        return float(np.linalg.eigvalsh(self.hessian).min())

    @property
    def l_f(self) -> float:
        """Smoothness constant of the full objective."""
        return float(np.linalg.eigvalsh(self.hessian).max())

    @property
    def residual_smoothness_exact(self) -> float:
        """Lipschitz constant of the residual gradient, c2 * lmax(Q)."""
        return self.c2 * float(np.linalg.eigvalsh(self.q).max())

    @property
    def residual_smoothness_nominal(self) -> float:
        """The coefficient c2 alone, the conventional benchmark setting."""
        return self.c2

    def value(self, x: np.ndarray) -> float:
        d = x - self.c3
        return 0.5 * self.c1 * float(x @ self.p @ x) \
            + 0.5 * self.c2 * float(d @ self.q @ d)

    def value_model(self, x: np.ndarray) -> float:
        return 0.5 * self.c1 * float(x @ self.p @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.c1 * (self.p @ x) + self.c2 * (self.q @ (x - self.c3))

    def grad_model(self, x: np.ndarray) -> np.ndarray:
        return self.c1 * (self.p @ x)

    def grad_residual(self, x: np.ndarray) -> np.ndarray:
        return self.c2 * (self.q @ (x - self.c3))

    def f_star(self) -> float:
        return self.value(self.x_star)


def make_quadratic(rng: np.random.Generator, n: int = 4, c1: float = 1.0,
                   c2: float = 0.1, c3: float = 0.1,
                   spectral_radius_q: float = 10.0) -> QuadraticInstance:
    """Draw a random instance; defaults match the benchmark protocol.

    ``P`` is a Gram matrix of a Gaussian draw, ``Q`` has its largest
    eigenvalue pinned at ``spectral_radius_q``, and the scalar offset ``c3``
    is broadcast to a constant vector.  The true optimum solves
    (c1 P + c2 Q) x = c2 Q c3 and is computed here once by a pivoted solve.
    """
    from .linalg import random_spd, random_spd_with_spectral_radius

    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    if c1 <= 0.0 or c2 < 0.0:
        raise ValueError(f"need c1 > 0 and c2 >= 0, got c1={c1}, c2={c2}")
    p = random_spd(rng, n)
    q = random_spd_with_spectral_radius(rng, n, spectral_radius_q)
    c3_vec = np.full(n, float(c3))
    x_star = np.linalg.solve(c1 * p + c2 * q, c2 * (q @ c3_vec))
    return QuadraticInstance(n, p, q, float(c1), float(c2), c3_vec, x_star)


def quad_objective(inst: QuadraticInstance,
                   gradient_scheme: str = GRAD_FORWARD) -> CompositeObjective:
    """Composite objective over a quadratic instance with a fresh counter.

    The exact-gradient oracle is finite-difference by default so that every
    gradient costs real evaluations, mirroring how black-box benchmarks are
    charged (n evaluations one-sided, 2n two-sided).  The analytic scheme is
    for invariant checks only: it reports zero evaluations and bypasses the
    counter.
    """
    counter = EvalCounter()
    obj = CompositeObjective(
        dim=inst.n,
        raw_value=inst.value,
        grad_fhat=inst.grad_model,
        exact_grad=None,  # type: ignore[arg-type]  # bound just below
        counter=counter,
        value_fhat=inst.value_model,
    )
    if gradient_scheme == GRAD_FORWARD:
        obj.exact_grad = forward_difference_oracle(obj.eval_f, inst.n, FD_STEP)
    elif gradient_scheme == GRAD_CENTRAL:
        obj.exact_grad = central_difference_oracle(obj.eval_f, inst.n, FD_STEP)
    elif gradient_scheme == GRAD_ANALYTIC:
        obj.exact_grad = analytic_oracle(inst.grad)
    else:
        raise ValueError(f"unknown gradient scheme {gradient_scheme!r}")
    return obj
