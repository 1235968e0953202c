import math

import numpy as np
import pytest

from oscillax import (
    RadialProblem,
    beta_inverse,
    beta_map,
    integral_conditions,
    lift_coefficients,
    make_barriers,
    make_blend,
    parse,
    push_a_from_q,
    subsuper_residual,
)
from oscillax.example_builder import PairResult
from oscillax.quadrature import TailModel

PI = math.pi


# ---------------------------------------------------------------------------
# the radial change of variables


def test_beta_is_the_identity_in_dimension_three():
    s = np.linspace(2 * PI, 50.0, 301)
    assert np.max(np.abs(beta_map(3, 1.0, s) - s)) == 0.0
    assert np.max(np.abs(beta_inverse(3, 1.0, s) - s)) == 0.0


def test_beta_closed_form_in_dimension_four():
    # beta(s) = sqrt(s/2); s = 8 maps to r = 2
    assert beta_map(4, 1.0, 8.0) == pytest.approx(2.0, rel=1e-15)
    assert beta_inverse(4, 1.0, 2.0) == pytest.approx(8.0, rel=1e-15)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_beta_round_trip(n):
    s = np.linspace((n - 2) * 1.0 + 0.5, 400.0, 557)
    back = beta_inverse(n, 1.0, beta_map(n, 1.0, s))
    assert np.max(np.abs(back - s) / s) <= 1e-12
    r = np.linspace(1.0, 12.0, 311)
    there = beta_map(n, 1.0, beta_inverse(n, 1.0, r))
    assert np.max(np.abs(there - r) / r) <= 1e-12


def test_beta_rejects_low_dimensions():
    with pytest.raises(ValueError):
        beta_map(2, 1.0, 3.0)


# ---------------------------------------------------------------------------
# lift and push


def test_lift_of_inverse_quartic_damping_is_inverse_cube():
    problem = RadialProblem(n=3, R=1.0, s0=2 * PI, g=parse("1/s^4"),
                            g_tail=TailModel("power", 4.0, 1.0))
    p, _, _ = lift_coefficients(problem)
    s = np.linspace(2 * PI, 100.0, 1001)
    assert np.max(np.abs(p(s) - 1.0 / s**3)) <= 1e-15


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_push_then_lift_returns_the_source(n):
    q = lambda s: np.sin(np.asarray(s)) ** 2 / np.asarray(s)
    a = push_a_from_q(q, n)
    s0 = max(2 * PI, (n - 2) * 1.0 + 1.0)
    problem = RadialProblem(n=n, R=1.0, s0=s0, g=parse("1/s^4"),
                            g_tail=TailModel("power", 4.0, 1.0), a1=a, a2=a)
    _, q_back, _ = lift_coefficients(problem)
    s = np.linspace(s0, s0 + 60.0, 2001)
    ref = q(s)
    assert np.max(np.abs(q_back(s) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


# ---------------------------------------------------------------------------
# the operator identity behind the bridge
#
# For v(r) and h(s) = s v(beta(s)) the two residuals are proportional:
#
#   Dv + g r v' + a(r)  =  [(n-2)^4 r^(2n-6) / s] (h'' + p (h' - h/s) + q/s)
#
# with (p, q) the lifted coefficients.  The left side uses analytic radial
# derivatives, the right side finite differences in s, so agreement pins
# down every factor in the lift.


def _identity_case(n, v, dv, d2v):
    R = 1.0
    s0 = (n - 2) * R ** (n - 2) + 2.0
    g_expr = parse("1/s^4")
    a = lambda r: np.cos(np.asarray(r)) / np.asarray(r) ** 2
    problem = RadialProblem(n=n, R=R, s0=s0, g=g_expr,
                            g_tail=TailModel("power", 4.0, 1.0), a1=a, a2=a)
    p, q, _ = lift_coefficients(problem)

    step = 1e-3
    s = s0 + step * np.arange(12001)
    r = beta_map(n, R, s)
    h = s * v(r)

    d2h = (h[:-2] - 2.0 * h[1:-1] + h[2:]) / step**2
    d1h = (h[2:] - h[:-2]) / (2.0 * step)
    si, ri = s[1:-1], r[1:-1]
    bracket = d2h + p(si) * (d1h - h[1:-1] / si) + q(si) / si

    lap = d2v(ri) + (n - 1) * dv(ri) / ri
    lhs = lap + (1.0 / ri**4) * ri * dv(ri) + a(ri)
    factor = (n - 2) ** 4 * ri ** (2 * n - 6) / si
    return lhs, factor * bracket


@pytest.mark.parametrize("n", [3, 4, 5])
def test_transformation_identity_inverse_square(n):
    lhs, rhs = _identity_case(
        n,
        v=lambda r: r**-2.0,
        dv=lambda r: -2.0 * r**-3.0,
        d2v=lambda r: 6.0 * r**-4.0,
    )
    assert np.max(np.abs(lhs - rhs)) <= 1e-6


@pytest.mark.parametrize("n", [3, 4, 5])
def test_transformation_identity_exponential(n):
    lhs, rhs = _identity_case(
        n,
        v=lambda r: np.exp(-r / 5.0),
        dv=lambda r: -np.exp(-r / 5.0) / 5.0,
        d2v=lambda r: np.exp(-r / 5.0) / 25.0,
    )
    assert np.max(np.abs(lhs - rhs)) <= 1e-6


def test_transformation_identity_rational():
    lhs, rhs = _identity_case(
        5,
        v=lambda r: 1.0 / (1.0 + r),
        dv=lambda r: -1.0 / (1.0 + r) ** 2,
        d2v=lambda r: 2.0 / (1.0 + r) ** 3,
    )
    assert np.max(np.abs(lhs - rhs)) <= 1e-6


# ---------------------------------------------------------------------------
# barriers


def test_barriers_are_ordered_with_a_uniform_gap(fine_barrier):
    assert fine_barrier.gap_min > 1.0
    assert fine_barrier.gap_max < 2.5
    assert np.all(fine_barrier.h2 > fine_barrier.h1)
    assert np.all(fine_barrier.z1 <= 0.0)
    assert np.all(fine_barrier.z2 <= 0.0)


def test_swapped_pair_is_rejected(pair):
    swapped = PairResult(q1=pair.q2, q2=pair.q1, chain_margins={},
                         min_margin=0.0, smallness_margin=0.0)
    grid = np.linspace(2 * PI, 12 * PI, 2001)
    with pytest.raises(ValueError):
        make_barriers(swapped, grid)


def test_parallel_barriers_match_serial(pair):
    grid = np.linspace(2 * PI, 12 * PI, 2001)
    serial = make_barriers(pair, grid)
    threaded = make_barriers(pair, grid, parallel=True)
    assert np.array_equal(serial.h1, threaded.h1)
    assert np.array_equal(serial.h2, threaded.h2)


# ---------------------------------------------------------------------------
# residual signs


def test_barrier_residual_signs_on_fine_grid(problem, fine_barrier):
    rep = subsuper_residual(problem, fine_barrier)
    assert rep.lower_ok
    assert rep.upper_ok
    assert rep.min_rho1 >= -1e-6
    assert rep.max_rho2 <= 1e-6
    assert rep.ribbon_excursion == 0.0


def test_blend_stays_inside_the_ribbon(problem, fine_barrier):
    f = make_blend(problem, fine_barrier)
    s = np.linspace(fine_barrier.grid[0], fine_barrier.grid[-1], 2001)
    r = s
    for u in (fine_barrier.v1(s), fine_barrier.v2(s),
              0.5 * (fine_barrier.v1(s) + fine_barrier.v2(s))):
        vals = f(r, u)
        lo = problem.a1(r) if callable(problem.a1) else problem.a1(r)
        hi = problem.a2(r)
        assert np.all(vals >= lo - 1e-12)
        assert np.all(vals <= hi + 1e-12)
    # nondecreasing in u across the ribbon
    low = f(r, fine_barrier.v1(s))
    high = f(r, fine_barrier.v2(s))
    assert np.all(high >= low)


def test_ribbon_escape_is_a_hard_error(problem, fine_barrier):
    bad = lambda r, u: np.asarray(problem.a2(r)) + 1.0
    with pytest.raises(ValueError, match="ribbon"):
        subsuper_residual(problem, fine_barrier, f=bad)


# ---------------------------------------------------------------------------
# integral conditions in the radial variable


def test_integral_conditions_on_the_stock_problem(problem, pair):
    T = 120.0
    out = integral_conditions(problem, T,
                              sup_q=(pair.q1.sup_bound, pair.q2.sup_bound))
    assert out["damping_converges"]
    assert out["substitution_identity_gap"] <= 1e-8
    for label in ("a1", "a2"):
        block = out[label]
        assert block["diverges"]
        assert block["growth_slope_vs_logT"] > 0.2
        assert block["converges"]
        assert block["cauchy_gap"] <= block["gap_bound"]
        assert block["sup_q_source"] == "certified"


def test_integral_conditions_observed_sup_is_labelled(problem):
    out = integral_conditions(problem, 120.0)
    assert out["a1"]["sup_q_source"] == "observed"


def test_truncation_radius_must_clear_the_hole(problem):
    with pytest.raises(ValueError):
        integral_conditions(problem, 2.0)
