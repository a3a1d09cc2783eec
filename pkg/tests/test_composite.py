import numpy as np
import pytest
from hypothesis import given, strategies as st

from gradcomp.composite import (CompensationState, CompositeObjective, EvalCounter,
                                accumulate_error_bound, analytic_oracle, compensate,
                                compensated_gradient, forward_difference_oracle,
                                monitor_ok)
from gradcomp.linalg import make_rng, random_spd


def scalar_objective(analytic=True):
    """f(x) = (x - 2)^2 with model part fhat(x) = x^2."""
    counter = EvalCounter()
    obj = CompositeObjective(
        dim=1,
        raw_value=lambda x: float((x[0] - 2.0) ** 2),
        grad_fhat=lambda x: 2.0 * x,
        exact_grad=None,
        counter=counter,
    )
    if analytic:
        obj.exact_grad = analytic_oracle(lambda x: 2.0 * (x - 2.0))
    else:
        obj.exact_grad = forward_difference_oracle(obj.eval_f, 1)
    return obj


def test_eval_counter_counts_each_evaluation():
    obj = scalar_objective()
    assert obj.counter.count == 0
    obj.eval_f(np.array([1.0]))
    obj.eval_f(np.array([3.0]))
    assert obj.counter.count == 2


def test_compensate_zero_residual():
    counter = EvalCounter()
    obj = CompositeObjective(
        dim=2,
        raw_value=lambda x: float(x @ x),
        grad_fhat=lambda x: 2.0 * x,
        exact_grad=analytic_oracle(lambda x: 2.0 * x),
        counter=counter,
    )
    delta, evals = compensate(obj, np.array([0.3, -0.7]))
    np.testing.assert_array_equal(delta, np.zeros(2))
    assert evals == 0


def test_compensate_scalar_makes_direction_exact():
    obj = scalar_objective()
    delta, _ = compensate(obj, np.array([0.0]))
    np.testing.assert_allclose(delta, [-4.0])
    state = CompensationState(delta, 0.0, 0.0, 0.5)
    # corrected direction equals the exact gradient everywhere (linear residual)
    for x in (np.array([3.0]), np.array([-1.5])):
        np.testing.assert_allclose(compensated_gradient(obj, state, x),
                                   2.0 * (x - 2.0))


def test_compensated_gradient_with_zero_correction_is_model_gradient():
    obj = scalar_objective()
    state = CompensationState(np.zeros(1), 0.0, 0.0, 0.5)
    np.testing.assert_array_equal(
        compensated_gradient(obj, state, np.array([1.7])), np.array([3.4]))


def test_compensated_gradient_costs_nothing():
    obj = scalar_objective()
    state = CompensationState(np.array([-4.0]), 0.0, 0.0, 0.5)
    for x in np.linspace(-2, 2, 13):
        compensated_gradient(obj, state, np.array([x]))
    assert obj.counter.count == 0


def test_compensated_gradient_scalar_value():
    obj = scalar_objective()
    state = CompensationState(np.array([-4.0]), 0.0, 0.0, 0.5)
    np.testing.assert_allclose(
        compensated_gradient(obj, state, np.array([3.0])), [2.0])


def test_quadratic_recursion_of_corrected_direction():
    # one corrected step multiplies the direction by (I - eta P)
    rng = make_rng(4)
    p = random_spd(rng, 5)
    counter = EvalCounter()
    obj = CompositeObjective(
        dim=5,
        raw_value=lambda x: 0.5 * float(x @ p @ x),
        grad_fhat=lambda x: p @ x,
        exact_grad=analytic_oracle(lambda x: p @ x),
        counter=counter,
    )
    delta = rng.standard_normal(5)
    state = CompensationState(delta, 0.0, 0.0, 0.5)
    x = rng.standard_normal(5)
    eta = 0.07
    g = compensated_gradient(obj, state, x)
    g_next = compensated_gradient(obj, state, x - eta * g)
    np.testing.assert_allclose(g_next, (np.eye(5) - eta * p) @ g, atol=1e-12)


def test_error_bound_arithmetic():
    state = CompensationState(np.zeros(2), 0.3, 0.1, 0.5)
    grown = accumulate_error_bound(state, np.zeros(2), np.array([2.0, 0.0]))
    assert grown.error_bound == pytest.approx(0.5)
    assert grown.compensation is state.compensation


def test_error_bound_frozen_with_zero_smoothness():
    state = CompensationState(np.zeros(2), 0.25, 0.0, 0.5)
    grown = accumulate_error_bound(state, np.zeros(2), np.ones(2))
    assert grown.error_bound == 0.25


@given(st.integers(min_value=1, max_value=30),
       st.floats(min_value=0.01, max_value=10.0),
       st.floats(min_value=0.01, max_value=2.0))
def test_error_bound_accumulates_linearly(k, smoothness, step):
    state = CompensationState(np.zeros(1), 0.0, smoothness, 0.5)
    x = np.zeros(1)
    for _ in range(k):
        x_next = x + step
        state = accumulate_error_bound(state, x, x_next)
        x = x_next
    assert state.error_bound == pytest.approx(k * smoothness * step, rel=1e-9)


def test_monitor_fresh_compensation_passes():
    state = CompensationState(np.zeros(2), 0.0, 0.1, 0.5)
    assert monitor_ok(state, np.array([1e-9, 0.0]))


def test_monitor_rejects_when_bound_exceeds_threshold():
    state = CompensationState(np.zeros(2), 1.0, 0.1, 0.5)
    # threshold is (1 - gamma)/gamma * ||g|| = 0.9
    assert not monitor_ok(state, np.array([0.9, 0.0]))
    assert monitor_ok(state, np.array([1.1, 0.0]))


def test_monitor_zero_direction_forces_exit():
    state = CompensationState(np.zeros(2), 0.0, 0.1, 0.5)
    assert not monitor_ok(state, np.zeros(2))


def test_state_validation():
    with pytest.raises(ValueError):
        CompensationState(np.zeros(1), 0.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        CompensationState(np.zeros(1), -0.1, 0.1, 0.5)


def test_forward_difference_reports_costs():
    obj = scalar_objective(analytic=False)
    x = np.array([1.0])
    f_x = obj.eval_f(x)
    before = obj.counter.count
    g, evals = obj.grad_f_exact(x, f_x)
    assert evals == 1
    assert obj.counter.count == before + 1
    np.testing.assert_allclose(g, [-2.0], atol=1e-5)
    # without the base value it pays one extra evaluation
    _, evals = obj.grad_f_exact(x, None)
    assert evals == 2
