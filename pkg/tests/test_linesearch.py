import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gradcomp.composite import CompositeObjective, EvalCounter, analytic_oracle
from gradcomp.linesearch import (STANDARD_HALVING_CAP, LineSearchParams,
                                 bt_line_search)


def shifted_parabola():
    """f(x) = (x - 2)^2, the canonical trap for model directions."""
    counter = EvalCounter()
    return CompositeObjective(
        dim=1,
        raw_value=lambda x: float((x[0] - 2.0) ** 2),
        grad_fhat=lambda x: 2.0 * x,
        exact_grad=analytic_oracle(lambda x: 2.0 * (x - 2.0)),
        counter=counter,
    )


def test_first_trial_accepted_exactly():
    # at x = -2 along direction -4 with alpha = 1/2, the very first trial
    # eta = 1/2 lands at 0 with f = 4 against an Armijo threshold of 12;
    # every quantity is exact in binary floating point
    obj = shifted_parabola()
    x = np.array([-2.0])
    direction = np.array([-4.0])  # model direction 2x at x = -2
    params = LineSearchParams(0.5, 0.5, 0.001, 0.5)
    out = bt_line_search(obj, x, 16.0, direction, params)
    assert out.eta == 0.5
    assert out.f_at_accepted == 4.0
    assert out.evals_used == 1
    assert 16.0 - params.alpha * out.eta * float(direction @ direction) == 12.0
    np.testing.assert_array_equal(out.accepted_point, [0.0])


def test_ascent_direction_fails_at_floor_within_budget():
    # at x = 1 the model direction 2x points away from the minimum; no step
    # can satisfy Armijo, so the floored search gives up after max_evals
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 1e-6, 1.0)
    out = bt_line_search(obj, np.array([1.0]), 1.0, np.array([2.0]), params)
    assert out.failed
    assert out.evals_used == params.max_evals()
    np.testing.assert_array_equal(out.accepted_point, [1.0])
    assert out.f_at_accepted == 1.0


def test_ascent_direction_hits_halving_cap_without_floor():
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 0.0, 1.0)
    out = bt_line_search(obj, np.array([1.0]), 1.0, np.array([2.0]), params)
    assert out.failed
    assert out.evals_used == STANDARD_HALVING_CAP + 1


def test_zero_direction_accepts_immediately():
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 0.0, 1.0)
    out = bt_line_search(obj, np.array([1.0]), 1.0, np.zeros(1), params)
    assert out.eta == params.eta_max
    assert out.evals_used == 1
    np.testing.assert_array_equal(out.accepted_point, [1.0])


def test_accepted_step_is_first_on_geometric_schedule():
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 0.0, 1.0)
    x = np.array([-2.0])
    direction = np.array([-8.0])  # exact gradient at x = -2
    out = bt_line_search(obj, x, 16.0, direction, params)
    # the accepted step sits on the schedule beta^(k-1) * eta_max
    k = out.evals_used
    assert out.eta == pytest.approx(params.beta ** (k - 1) * params.eta_max)
    # every earlier trial failed Armijo, the accepted one satisfies it
    sq = float(direction @ direction)
    for j in range(1, k):
        eta = params.beta ** (j - 1) * params.eta_max
        f_trial = float((x[0] - eta * direction[0] - 2.0) ** 2)
        assert f_trial > 16.0 - params.alpha * eta * sq
    assert out.f_at_accepted <= 16.0 - params.alpha * out.eta * sq


def test_success_contract_on_outcome():
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 0.005, 1.0)
    x = np.array([5.0])
    f_x = obj.eval_f(x)
    direction = np.array([6.0])
    out = bt_line_search(obj, x, f_x, direction, params)
    assert not out.failed
    assert out.f_at_accepted <= f_x - params.alpha * out.eta * float(direction @ direction)


def test_trial_count_logged_through_callback():
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 1e-2, 1.0)
    seen = []
    out = bt_line_search(obj, np.array([1.0]), 1.0, np.array([2.0]), params,
                         on_trial=seen.append)
    assert len(seen) == out.evals_used
    assert obj.counter.count == out.evals_used


def test_max_evals_formula():
    assert LineSearchParams(0.3, 0.5, 0.005, 1.0).max_evals() == 9
    assert LineSearchParams(0.3, 0.5, 0.05, 1.0).max_evals() == 6
    assert LineSearchParams(0.3, 0.5, 0.5, 1.0).max_evals() == 2
    assert LineSearchParams(0.3, 0.5, 0.0, 1.0).max_evals() == STANDARD_HALVING_CAP + 1


@given(st.floats(min_value=1e-8, max_value=0.4),
       st.floats(min_value=0.1, max_value=0.9),
       st.floats(min_value=0.5, max_value=4.0))
def test_max_evals_bounds_schedule(eta_min, beta, eta_max):
    params = LineSearchParams(0.3, beta, eta_min, eta_max)
    m = params.max_evals()
    # the m-th trial step has reached the floor, the (m-1)-th has not
    assert beta ** (m - 1) * eta_max <= eta_min * (1 + 1e-12)
    if m > 1:
        assert beta ** (m - 2) * eta_max > eta_min * (1 - 1e-12)


def test_params_validated():
    with pytest.raises(ValueError):
        LineSearchParams(0.6, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        LineSearchParams(0.3, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        LineSearchParams(0.3, 0.5, 1.0, 0.5)


def test_failure_only_at_or_below_floor():
    obj = shifted_parabola()
    params = LineSearchParams(0.3, 0.5, 0.3, 1.0)
    out = bt_line_search(obj, np.array([1.0]), 1.0, np.array([2.0]), params)
    assert out.failed
    # last trial was the first step at or below the floor
    last_eta = params.beta ** (out.evals_used - 1) * params.eta_max
    assert last_eta <= params.eta_min
    assert params.beta ** (out.evals_used - 2) * params.eta_max > params.eta_min
