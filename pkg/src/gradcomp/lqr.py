"""Linear state-feedback control of a mildly nonlinear plant, as a black box.

The plant is x_{t+1} = A x_t + B u_t + h(x_t) under u_t = -K x_t, with h a
small state-only perturbation from the "scaled-sine-rational" family
h_i(x) = ell * x_i / (1 - 0.9 sin x_i), which vanishes at the origin and has
a denominator bounded below by 0.1.  The objective is the finite-horizon
quadratic cost averaged over a fixed set of initial states; one averaged
evaluation counts as one query.

Two gradients are available for the cost as a function of the flattened gain:

* a zeroth-order estimate probing coordinate perturbations of K (one-sided,
  as a faithful single-probe variant, or two-sided, the working default), and
* the analytic gradient 2 E_K Sigma_K of the infinite-horizon cost of the
  linear part (h dropped), built from two discrete Lyapunov solves at zero
  evaluation cost -- this is the model side of the composite objective.

A finite-horizon analytic gradient of the linear cost is also provided as an
independent cross-check oracle for the zeroth-order estimator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .composite import CompositeObjective, EvalCounter
from .linalg import (NotConverged, NotStabilizable, gaussian_matrix, solve_dare,
                     solve_discrete_lyapunov, spectral_radius)

DIVERGENCE_LIMIT = 1e12  # state norm beyond which a rollout is abandoned

SCALED_SINE_RATIONAL = "scaled-sine-rational"

GRAD_ONE_POINT = "paper-one-point"
GRAD_CENTRAL = "central-difference"


class Diverged(RuntimeError):
    """A rollout's state norm exceeded the divergence limit."""


class GenerationFailed(RuntimeError):
    """No acceptable random instance found within the attempt budget."""


@dataclass
class LqrInstance:
    """A materialized control problem with its linear-model optimal gain.

    ``k_hat_star`` minimizes the infinite-horizon cost of the linear part and
    is the canonical starting point for solvers.  ``k_star_ref`` caches a
    numerically computed reference optimum of the full nonlinear cost once
    one has been obtained.
    """

    n: int
    p: int
    a: np.ndarray
    b: np.ndarray
    qc: np.ndarray
    rc: np.ndarray
    ell: float
    horizon: int
    sampling_radius: float
    initial_states: np.ndarray  # (count, n), one row per initial state
    k_hat_star: np.ndarray
    nonlinearity: str = SCALED_SINE_RATIONAL
    seed: Optional[int] = None
    k_star_ref: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.nonlinearity != SCALED_SINE_RATIONAL:
            raise ValueError(f"unsupported nonlinearity family {self.nonlinearity!r}")

    @property
    def dim(self) -> int:
        """Dimension of the flattened decision variable."""
        return self.p * self.n

    @property
    def sigma0(self) -> np.ndarray:
        """Average outer product of the initial states."""
        return self.initial_states.T @ self.initial_states / len(self.initial_states)


@dataclass(frozen=True)
class Rollout:
    """One simulated trajectory and its accumulated cost."""

    states: np.ndarray  # (horizon + 2, n)
    inputs: np.ndarray  # (horizon + 1, p)
    cost: float


@dataclass(frozen=True)
class LqrGradientWorkspace:
    """Intermediate matrices behind the analytic model gradient."""

    a_k: np.ndarray
    p_k: np.ndarray
    sigma_k: np.ndarray
    e_k: np.ndarray


def h_eval(inst: LqrInstance, x: np.ndarray) -> np.ndarray:
    """Elementwise nonlinear perturbation; zero at the origin.

    The denominator 1 - 0.9 sin(x) never drops below 0.1, so the map is
    finite everywhere and bounded by 10 * ell * |x| componentwise.
    """
    return inst.ell * x / (1.0 - 0.9 * np.sin(x))


def rollout(inst: LqrInstance, k: np.ndarray, x0: np.ndarray) -> Rollout:
    """Simulate under u = -K x for the instance horizon; costs every stage.

    Raises ``Diverged`` as soon as a state norm passes the divergence limit.
    """
    t_end = inst.horizon
    states = np.empty((t_end + 2, inst.n))
    inputs = np.empty((t_end + 1, inst.p))
    states[0] = x0
    cost = 0.0
    x = np.asarray(x0, dtype=float)
    for t in range(t_end + 1):
        u = -(k @ x)
        inputs[t] = u
        cost += float(x @ inst.qc @ x) + float(u @ inst.rc @ u)
        x = inst.a @ x + inst.b @ u + h_eval(inst, x)
        states[t + 1] = x
        if np.linalg.norm(x) > DIVERGENCE_LIMIT:
            raise Diverged(f"state norm exceeded {DIVERGENCE_LIMIT:g} at step {t + 1}")
    return Rollout(states, inputs, cost)


def policy_costs(inst: LqrInstance, ks: np.ndarray) -> np.ndarray:
    """Average cost of each gain in a stack, in one vectorized propagation.

    ``ks`` has shape (m, p, n); the return has shape (m,).  All m policies
    and all initial states advance together, with a fixed reduction order, so
    repeated calls are bit-identical.  Any divergence aborts the whole batch.
    """
    m = ks.shape[0]
    x = np.broadcast_to(inst.initial_states.T, (m, inst.n, len(inst.initial_states))).copy()
    totals = np.zeros((m, x.shape[2]))
    limit_sq = DIVERGENCE_LIMIT ** 2
    for t in range(inst.horizon + 1):
        u = -np.matmul(ks, x)
        totals += np.einsum("mis,mis->ms", x, np.matmul(inst.qc, x))
        totals += np.einsum("mis,mis->ms", u, np.matmul(inst.rc, u))
        x = np.matmul(inst.a, x) + np.matmul(inst.b, u) + h_eval(inst, x)
        if np.einsum("mis,mis->ms", x, x).max() > limit_sq:
            raise Diverged(f"state norm exceeded {DIVERGENCE_LIMIT:g} at step {t + 1}")
    return totals.mean(axis=1)


def empirical_cost(inst: LqrInstance, k: np.ndarray, counter: EvalCounter) -> float:
    """Mean rollout cost over the instance's initial states.

    Charges exactly one evaluation: the averaged probe is the unit the
    benchmarks count.
    """
    counter.increment()
    return float(policy_costs(inst, np.asarray(k, dtype=float)[None])[0])


def zeroth_order_grad(inst: LqrInstance, k: np.ndarray, counter: EvalCounter,
                      scheme: str = GRAD_CENTRAL) -> tuple[np.ndarray, int]:
    """Coordinate-probe gradient estimate of the empirical cost at ``k``.

    ``paper-one-point`` probes each coordinate once at k + r_s E_j and
    returns sum_j (C_j / r_s) E_j, the faithful single-probe construction; it
    carries a C(k)/r_s offset in every coordinate and is kept for fidelity.
    ``central-difference`` (default) probes both signs and divides by 2 r_s,
    which removes the offset and the leading truncation error.  Evaluations
    charged: one per probed policy (dim or 2 * dim).
    """
    k = np.asarray(k, dtype=float)
    r_s = inst.sampling_radius
    d = inst.dim
    directions = r_s * np.eye(d).reshape(d, inst.p, inst.n)
    if scheme == GRAD_ONE_POINT:
        costs = policy_costs(inst, k[None] + directions)
        for _ in range(d):
            counter.increment()
        return costs.reshape(inst.p, inst.n) / r_s, d
    if scheme == GRAD_CENTRAL:
        stacked = np.concatenate([k[None] + directions, k[None] - directions])
        costs = policy_costs(inst, stacked)
        for _ in range(2 * d):
            counter.increment()
        grad = (costs[:d] - costs[d:]) / (2.0 * r_s)
        return grad.reshape(inst.p, inst.n), 2 * d
    raise ValueError(f"unknown gradient scheme {scheme!r}")


def model_gradient(inst: LqrInstance, k: np.ndarray,
                   tol: float = 1e-12) -> tuple[np.ndarray, LqrGradientWorkspace]:
    """Analytic gradient of the infinite-horizon linear-part cost at ``k``.

    Solves the value Lyapunov equation for P_K and the covariance equation
    for Sigma_K, then returns 2 E_K Sigma_K.  Costs no evaluations.  Raises
    ``SpectralRadiusError`` (via the Lyapunov solver) when ``k`` does not
    stabilize the linear part.
    """
    k = np.asarray(k, dtype=float)
    a_k = inst.a - inst.b @ k
    p_k = solve_discrete_lyapunov(a_k, inst.qc + k.T @ inst.rc @ k, tol=tol)
    sigma_k = solve_discrete_lyapunov(a_k.T, inst.sigma0, tol=tol)
    e_k = (inst.rc + inst.b.T @ p_k @ inst.b) @ k - inst.b.T @ p_k @ inst.a
    return 2.0 * e_k @ sigma_k, LqrGradientWorkspace(a_k, p_k, sigma_k, e_k)


def finite_horizon_model_gradient(inst: LqrInstance, k: np.ndarray) -> np.ndarray:
    """Exact gradient of the horizon-truncated linear-part cost at ``k``.

    Built from finite sums of closed-loop powers rather than Lyapunov
    solves, so it is an independent oracle for the zeroth-order estimator on
    instances with the nonlinearity switched off (matched horizons on both
    sides).  Zero evaluation cost.
    """
    k = np.asarray(k, dtype=float)
    a_k = inst.a - inst.b @ k
    w = inst.qc + k.T @ inst.rc @ k
    t_end = inst.horizon
    # cum[m] = sum_{u=0}^{m-1} (A_K^T)^u W A_K^u, so cum[0] = 0.
    cum = [np.zeros((inst.n, inst.n))]
    for _ in range(t_end + 1):
        cum.append(w + a_k.T @ cum[-1] @ a_k)
    grad = np.zeros((inst.p, inst.n))
    m_s = inst.sigma0
    for s in range(t_end + 1):
        grad += 2.0 * (inst.rc @ k - inst.b.T @ cum[t_end - s] @ a_k) @ m_s
        m_s = a_k @ m_s @ a_k.T
    return grad


def make_lqr(rng: np.random.Generator, n: int = 4, p: int = 3, ell: float = 0.01,
             horizon: int = 50, sampling_radius: float = 1e-3,
             max_attempts: int = 50, seed: Optional[int] = None) -> LqrInstance:
    """Draw a random instance with Gaussian A, B and the default cost Q=2I, R=I.

    The linear-part optimal gain comes from the Riccati solver; a draw is
    rejected when that solve fails or when any probe rollout of the nonlinear
    plant under the gain diverges.  Initial states are the standard basis.
    """
    qc = 2.0 * np.eye(n)
    rc = np.eye(p)
    initial_states = np.eye(n)
    for _ in range(max_attempts):
        a = gaussian_matrix(rng, n, n)
        b = gaussian_matrix(rng, n, p)
        try:
            _, k_hat = solve_dare(a, b, qc, rc)
        except (NotConverged, NotStabilizable, np.linalg.LinAlgError):
            continue
        inst = LqrInstance(n, p, a, b, qc, rc, float(ell), int(horizon),
                           float(sampling_radius), initial_states, k_hat, seed=seed)
        try:
            for x0 in initial_states:
                rollout(inst, k_hat, x0)
        except Diverged:
            continue
        return inst
    raise GenerationFailed(f"no stabilizable, non-diverging draw in {max_attempts} attempts")


def lqr_objective(inst: LqrInstance,
                  gradient_scheme: str = GRAD_CENTRAL) -> CompositeObjective:
    """Composite objective over the flattened gain, with a fresh counter.

    The black-box side is the empirical cost (divergent probes report an
    infinite value so line searches reject them); the model side is the
    analytic infinite-horizon gradient of the linear part.
    """
    if gradient_scheme not in (GRAD_ONE_POINT, GRAD_CENTRAL):
        raise ValueError(f"unknown gradient scheme {gradient_scheme!r}")
    counter = EvalCounter()

    def raw_value(x: np.ndarray) -> float:
        # eval_f charges the evaluation; divergent probes are worth +inf so
        # line searches reject them instead of crashing.
        try:
            return float(policy_costs(inst, x.reshape(inst.p, inst.n)[None])[0])
        except Diverged:
            return float("inf")

    def grad_fhat(x: np.ndarray) -> np.ndarray:
        grad, _ = model_gradient(inst, x.reshape(inst.p, inst.n))
        return grad.ravel()

    def exact_grad(x: np.ndarray, f_x: Optional[float]) -> tuple[np.ndarray, int]:
        del f_x
        grad, evals = zeroth_order_grad(inst, x.reshape(inst.p, inst.n), counter,
                                        gradient_scheme)
        return grad.ravel(), evals

    return CompositeObjective(
        dim=inst.dim,
        raw_value=raw_value,
        grad_fhat=grad_fhat,
        exact_grad=exact_grad,
        counter=counter,
    )


def reference_optimum(inst: LqrInstance, tol: float = 1e-4,
                      max_outer_iters: int = 100_000) -> np.ndarray:
    """Reference optimal gain for the full nonlinear cost.

    Runs the model-free solver from the linear-part optimum with two-sided
    zeroth-order gradients until the measured gradient norm drops below
    ``tol``, and caches the result on the instance.
    """
    from .linesearch import LineSearchParams
    from .solver import GRADIENT_NORM, GcConfig, MaxItersExceeded, model_free_solve

    if inst.k_star_ref is not None:
        return inst.k_star_ref
    config = GcConfig(
        gamma=0.5,
        residual_smoothness=0.0,
        ls_model_based=LineSearchParams(0.3, 0.5, 0.05, 1.0),  # unused by the solve
        ls_model_free=LineSearchParams(0.3, 0.5, 0.0, 1.0),
        termination_tol=tol,
        termination_metric=GRADIENT_NORM,
        max_outer_iters=max_outer_iters,
    )
    obj = lqr_objective(inst, GRAD_CENTRAL)
    trace = model_free_solve(obj, inst.k_hat_star.ravel(), config)
    if not trace.converged:
        raise MaxItersExceeded(
            f"reference solve stopped ({trace.termination}) before gradient norm {tol}")
    inst.k_star_ref = trace.final_point.reshape(inst.p, inst.n)
    return inst.k_star_ref
