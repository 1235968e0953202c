import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillax import (
    TailModel,
    cumulative_integral,
    cumulative_simpson_doubled,
    integrate_finite,
    integrate_tail,
    parse,
)

PI = math.pi


# ---------------------------------------------------------------------------
# finite intervals


def test_sin_squared_half_period():
    res = integrate_finite(parse("sin(s)^2"), 0.0, PI, tol=1e-12)
    assert abs(res.value - PI / 2) <= 1e-12
    assert abs(res.value - PI / 2) <= res.abs_error_estimate + 1e-15


def test_single_panel_is_exact_on_high_degree_polynomials():
    # a single 15-point panel integrates degree <= 22 exactly
    for k in range(14):
        res = integrate_finite(lambda s, k=k: np.asarray(s) ** k, 0.0, 1.0, tol=1.0)
        assert res.value == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_orientation_and_degenerate_interval():
    fwd = integrate_finite(parse("s^2"), 0.0, 2.0)
    rev = integrate_finite(parse("s^2"), 2.0, 0.0)
    assert rev.value == pytest.approx(-fwd.value, rel=1e-14)
    assert integrate_finite(parse("s"), 1.0, 1.0).value == 0.0


def test_error_estimate_is_honest_on_oscillatory_integrand():
    res = integrate_finite(parse("sin(s)"), 0.0, 10.0, tol=1e-11)
    exact = 1.0 - math.cos(10.0)
    assert abs(res.value - exact) <= max(res.abs_error_estimate, 1e-13)


def test_seeds_break_panels_at_kinks():
    res = integrate_finite(parse("abs(sin(s))"), 0.0, 2 * PI, tol=1e-12, seeds=[PI])
    assert res.value == pytest.approx(4.0, abs=1e-11)


def test_bad_inputs():
    with pytest.raises(ValueError):
        integrate_finite(parse("s"), 0.0, math.inf)
    with pytest.raises(ValueError):
        integrate_finite(parse("s"), 0.0, 1.0, tol=-1.0)


@given(
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=0.1, max_value=0.9),
)
def test_linearity_and_additivity(a, b, split):
    f = lambda s: np.cos(np.asarray(s))
    g = lambda s: np.asarray(s) ** 3
    combined = integrate_finite(lambda s: a * f(s) + b * g(s), 0.0, 1.0, tol=1e-12)
    parts = (a * integrate_finite(f, 0.0, 1.0, tol=1e-12).value
             + b * integrate_finite(g, 0.0, 1.0, tol=1e-12).value)
    assert combined.value == pytest.approx(parts, abs=1e-10)

    whole = integrate_finite(f, 0.0, 1.0, tol=1e-12).value
    left = integrate_finite(f, 0.0, split, tol=1e-13).value
    right = integrate_finite(f, split, 1.0, tol=1e-13).value
    assert left + right == pytest.approx(whole, abs=1e-11)


# ---------------------------------------------------------------------------
# tails


def test_tail_model_validation():
    with pytest.raises(ValueError):
        TailModel("power", rate=1.0)        # not integrable
    with pytest.raises(ValueError):
        TailModel("exp", rate=0.0)
    with pytest.raises(ValueError):
        TailModel("user", rate=1.0)         # needs bound_fn
    with pytest.raises(ValueError):
        TailModel("typo", rate=3.0)


def test_improper_integral_of_inverse_cube():
    # integral over [2 pi, inf) of s^-3 equals 1/(8 pi^2)
    exact = 1.0 / (8.0 * PI**2)
    res = integrate_tail(parse("1/s^3"), 2 * PI, TailModel("power", 3.0, 1.0), tol=1e-10)
    assert abs(res.value - exact) <= res.abs_error_estimate
    # the unaccounted mass is the certified tail, always an undercount
    assert res.value <= exact <= res.value + res.tail_bound + 1e-15
    assert res.tail_bound > 0.0


def test_tail_envelope_violation_is_detected():
    model = TailModel("power", 3.0, 1.0)
    with pytest.raises(ValueError, match="tail model violated"):
        integrate_tail(parse("1/s"), 2 * PI, model, tol=1e-8)


def test_exp_tail_model():
    res = integrate_tail(lambda s: np.exp(-np.asarray(s)), 1.0,
                         TailModel("exp", 1.0, 1.0), tol=1e-12)
    assert res.value + res.tail_bound >= math.exp(-1.0) - 1e-12
    assert abs(res.value - math.exp(-1.0)) <= res.abs_error_estimate


def test_user_model_uses_the_supplied_bound():
    model = TailModel("user", rate=1.0, cutoff=50.0,
                      bound_fn=lambda c: 1.0 / c**2)
    res = integrate_tail(parse("1/s^3"), 2 * PI, model, tol=1e-10)
    assert res.tail_bound == pytest.approx(1.0 / 2500.0, rel=1e-12)


# ---------------------------------------------------------------------------
# cumulative forms


def test_cumulative_integral_of_cos_is_sin():
    grid = np.linspace(0.0, 8.0, 801)
    out = cumulative_integral(parse("cos(s)"), grid)
    assert out[0] == 0.0
    assert np.max(np.abs(out - np.sin(grid))) <= 1e-10


def test_cumulative_integral_inverse_cube_closed_form():
    # from 2 pi to 4 pi the mass is 3/(32 pi^2)
    grid = np.linspace(2 * PI, 4 * PI, 501)
    out = cumulative_integral(parse("1/s^3"), grid)
    assert out[-1] == pytest.approx(3.0 / (32.0 * PI**2), abs=1e-13)


def test_cumulative_integral_rejects_bad_grids():
    with pytest.raises(ValueError):
        cumulative_integral(parse("s"), np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValueError):
        cumulative_integral(parse("s"), np.array([1.0]))


def test_doubled_simpson_exact_on_quadratics_at_every_node():
    u = np.linspace(0.0, 3.0, 13)
    out = cumulative_simpson_doubled(u, u**2)
    assert np.max(np.abs(out - u**3 / 3.0)) <= 1e-14


def test_doubled_simpson_fourth_order_on_sin():
    def worst(n):
        u = np.linspace(0.0, 2 * PI, n)
        out = cumulative_simpson_doubled(u, np.sin(u))
        return np.max(np.abs(out - (1.0 - np.cos(u))))

    assert worst(801) <= 5e-10
    # halving the step divides the error by ~16
    ratio = worst(801) / worst(1601)
    assert 12.0 <= ratio <= 20.0


def test_doubled_simpson_agrees_with_composite_on_even_nodes():
    u = np.linspace(0.0, 1.0, 9)
    f = np.exp(u)
    out = cumulative_simpson_doubled(u, f)
    dt = u[2] - u[0]
    acc, expect = 0.0, [0.0]
    for j in range(0, 8, 2):
        acc += dt / 6.0 * (f[j] + 4.0 * f[j + 1] + f[j + 2])
        expect.append(acc)
    assert np.allclose(out[::2], expect, rtol=0, atol=1e-15)


def test_doubled_simpson_rejects_odd_or_nonuniform_grids():
    with pytest.raises(ValueError):
        cumulative_simpson_doubled(np.linspace(0, 1, 4), np.zeros(4))
    with pytest.raises(ValueError):
        cumulative_simpson_doubled(np.array([0.0, 0.1, 0.3]), np.zeros(3))
