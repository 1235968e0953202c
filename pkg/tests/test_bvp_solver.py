import math

import numpy as np
import pytest

from oscillax import (
    BvpSolution,
    check_sandwich,
    decay_fit,
    make_barriers,
    solve_radial,
)

PI = math.pi


# ---------------------------------------------------------------------------
# the stock nonlinear solve


@pytest.fixture(scope="module")
def solution(problem, solver_barrier):
    return solve_radial(problem, solver_barrier)


def test_solution_is_sandwiched(solution, solver_barrier):
    out = check_sandwich(solution, solver_barrier)
    assert out["ok"]
    assert out["lower_margin"] > 1e-3
    assert out["upper_margin"] >= 0.0


def test_iteration_contracts(solution):
    deltas = np.asarray(solution.iteration_sup_deltas)
    assert solution.iterations <= 50
    assert deltas[-1] <= 1e-10
    assert np.all(np.diff(deltas[1:]) < 0.0) or len(deltas) <= 2
    # geometric contraction, comfortably below one
    ratios = deltas[2:] / deltas[1:-1]
    assert np.max(ratios) < 0.2


def test_blend_needs_no_shift(solution):
    assert solution.K_used == 0.0


def test_residual_tracks_the_tolerance(solution):
    assert solution.residual_sup <= 10.0 * 1e-10


def test_decay_exponent_matches_the_harmonic_rate(solution):
    # n = 3: u ~ r^(2-n) = 1/r
    assert solution.decay_exponent == pytest.approx(-1.0, abs=0.15)


def test_boundary_choice_brackets_the_same_profile(problem, solver_barrier):
    top = solve_radial(problem, solver_barrier, boundary="upper")
    bot = solve_radial(problem, solver_barrier, boundary="lower")
    # different Dirichlet data, same interior behaviour up to the gap scale
    assert np.all(bot.u_values <= top.u_values + 1e-12)
    mid = len(top.grid) // 2
    assert abs(top.u_values[mid] - bot.u_values[mid]) < solver_barrier.gap_max


# ---------------------------------------------------------------------------
# degenerate forcing reproduces the linear barrier


def test_constant_lower_forcing_reproduces_h1(problem, solver_barrier):
    a1 = problem.a1
    f_lin = lambda r, u: np.asarray(a1(r), dtype=float)
    sol = solve_radial(problem, solver_barrier, f=f_lin, boundary="lower")
    assert sol.iterations <= 2
    assert np.max(np.abs(sol.u_values - solver_barrier.h1)) <= 1e-4


def test_constant_upper_forcing_reproduces_h2(problem, solver_barrier):
    a2 = problem.a2
    f_lin = lambda r, u: np.asarray(a2(r), dtype=float)
    sol = solve_radial(problem, solver_barrier, f=f_lin, boundary="upper")
    assert sol.iterations <= 2
    assert np.max(np.abs(sol.u_values - solver_barrier.h2)) <= 1e-4


# ---------------------------------------------------------------------------
# the shift machinery


def _reversed_blend(problem, barrier, slope=4.0):
    g, h1, h2 = barrier.grid, barrier.h1, barrier.h2
    a1, a2 = problem.a1, problem.a2

    def f(r, u):
        s = np.asarray(r, dtype=float)  # n = 3: r and s coincide
        v1 = np.interp(s, g, h1) / s
        v2 = np.interp(s, g, h2) / s
        lo = np.asarray(a1(s), dtype=float)
        hi = np.asarray(a2(s), dtype=float)
        mid = 0.5 * (v1 + v2)
        # decreasing in u but still inside [a1, a2]
        return 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.tanh(
            slope * (np.asarray(u) - mid) / (v2 - v1))

    return f


def test_decreasing_forcing_with_zero_shift_fails_loudly(problem, solver_barrier):
    f = _reversed_blend(problem, solver_barrier)
    with pytest.raises(RuntimeError, match="larger K"):
        solve_radial(problem, solver_barrier, K=0.0, f=f)


def test_decreasing_forcing_converges_with_the_automatic_shift(problem, solver_barrier):
    # a mild decreasing slope: the shifted iteration contracts like
    # K / (K + mu_1) per sweep, so a steep slope would need thousands
    f = _reversed_blend(problem, solver_barrier, slope=0.1)
    sol = solve_radial(problem, solver_barrier, f=f)
    assert sol.K_used > 0.0
    assert check_sandwich(sol, solver_barrier)["ok"]
    assert sol.iteration_sup_deltas[-1] <= 1e-10


# ---------------------------------------------------------------------------
# consistency guards


def test_grid_consistency_asserts(problem, solver_barrier):
    with pytest.raises(ValueError, match="does not match"):
        solve_radial(problem, solver_barrier, S=99.0)
    with pytest.raises(ValueError, match="does not match"):
        solve_radial(problem, solver_barrier, N=1234)


def test_negative_shift_is_rejected(problem, solver_barrier):
    with pytest.raises(ValueError):
        solve_radial(problem, solver_barrier, K=-1.0)


# ---------------------------------------------------------------------------
# discretisation order


def test_grid_halving_shows_second_order(problem, pair):
    sols = []
    for N in (8193, 16385, 32769):
        grid = np.linspace(2 * PI, 42 * PI, N)
        barrier = make_barriers(pair, grid)
        sols.append(solve_radial(problem, barrier).u_values)
    d1 = np.max(np.abs(sols[0] - sols[1][::2]))
    d2 = np.max(np.abs(sols[1] - sols[2][::2]))
    assert 3.5 <= d1 / d2 <= 4.5


# ---------------------------------------------------------------------------
# decay fitting


def test_decay_fit_recovers_a_synthetic_power_law(problem, solver_barrier):
    grid = solver_barrier.grid
    mock = BvpSolution(
        grid=grid,
        u_values=5.0 * np.ones_like(grid),   # H = const, so u = 5/s exactly
        iterations=1, iteration_sup_deltas=(0.0,),
        sandwich_margins=(0.0, 0.0), decay_exponent=None,
        K_used=0.0, residual_sup=0.0, boundary="upper",
    )
    fit = decay_fit(mock, problem)
    assert fit.exponent == pytest.approx(-1.0, abs=1e-10)
    assert fit.max_log_residual <= 1e-10
    assert fit.n_points >= 8


def test_decay_fit_rejects_nonpositive_windows(problem, solver_barrier):
    grid = solver_barrier.grid
    mock = BvpSolution(
        grid=grid, u_values=np.zeros_like(grid),
        iterations=1, iteration_sup_deltas=(0.0,),
        sandwich_margins=(0.0, 0.0), decay_exponent=None,
        K_used=0.0, residual_sup=0.0, boundary="upper",
    )
    with pytest.raises(ValueError):
        decay_fit(mock, problem)
    with pytest.raises(ValueError):
        decay_fit(mock, problem, window=0.9, exclude=0.2)
