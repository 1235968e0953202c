"""Bridge between the exterior radial problem and the comparison equation.

For radial functions on the exterior domain |x| > R in dimension n >= 3,
the substitution

    r = beta(s) = (s / (n-2))^(1/(n-2)),      s = (n-2) r^(n-2),
    v(x) = h(s) / s  at  |x| = beta(s),

turns  v'' + ((n-1)/r) v' + f(r, v) + g(r) r v'  into

    ((n-2) / (beta beta')) * [ h'' + p (h' - h/s) + (1/(n-2)) beta beta' f ],

with  beta(s) beta'(s) = beta^(4-n) / (n-2)^2  and the lifted damping
p(s) = beta beta' g(beta).  A source coefficient a(r) lifts to
q(s) = (s/(n-2)) beta beta' a(beta(s)), so q/s is exactly the kernel-ODE
load and the whole machinery of :mod:`oscillax.kernel` applies; pushing a
q back down gives a(r) = (n-2)^2 r^(-2) q((n-2) r^(n-2)).

For n = 3 the map is the identity: p = s g(s), q = s^2 a(s).

The barrier pair (h1, h2) built from an ordered coefficient pair provides
v1 = h1/s and v2 = h2/s; a nonlinearity f confined to the ribbon
a1 <= f <= a2 for v1 <= u <= v2 then has v1, v2 as sub- and supersolution,
which :func:`subsuper_residual` checks through the sign of the discrete
residuals.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .coeff_dsl import CoefficientExpr, as_callable
from .example_builder import PairResult
from .kernel import KernelPair, compute_kernel
from .quadrature import TailModel, integrate_finite

__all__ = [
    "RadialProblem",
    "BarrierPair",
    "ResidualReport",
    "beta_map",
    "beta_inverse",
    "lift_coefficients",
    "push_a_from_q",
    "make_barriers",
    "make_blend",
    "subsuper_residual",
    "integral_conditions",
]

Coefficient = Union[CoefficientExpr, Callable]


def beta_map(n: int, R: float, s) -> np.ndarray:
    """r = beta(s) = (s/(n-2))^(1/(n-2)), the radius for arc parameter s."""
    _check_dim(n)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("the arc parameter must be positive")
    r = np.power(s_arr / (n - 2), 1.0 / (n - 2))
    if np.any(r < R * (1.0 - 1e-12)):
        bad = float(np.min(r))
        raise ValueError(f"radius {bad!r} falls inside the excluded ball of radius {R!r}")
    return r if np.ndim(s) else float(r)


def beta_inverse(n: int, R: float, r) -> np.ndarray:
    """s = (n-2) r^(n-2), inverse of :func:`beta_map`."""
    _check_dim(n)
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < R * (1.0 - 1e-12)):
        bad = float(np.min(r_arr))
        raise ValueError(f"radius {bad!r} falls inside the excluded ball of radius {R!r}")
    s = (n - 2) * np.power(r_arr, n - 2)
    return s if np.ndim(r) else float(s)


def _check_dim(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ValueError(f"dimension must be an integer >= 3, got {n!r}")


def _beta_betaprime(n: int, s: np.ndarray) -> np.ndarray:
    """beta(s) beta'(s) = beta^(4-n) / (n-2)^2; equals s for n = 3."""
    beta = np.power(np.asarray(s, dtype=float) / (n - 2), 1.0 / (n - 2))
    return np.power(beta, 4 - n) / (n - 2) ** 2


@dataclass(frozen=True)
class RadialProblem:
    """Exterior-domain radial problem data.

    ``g`` is the radial damping coefficient, ``a1 <= a2`` the source
    coefficients bounding the nonlinearity, all functions of the radius
    (expressions use the variable name s for their argument).  ``f_blend``
    is either the string "tanh" (the stock ribbon-respecting nonlinearity
    built from the barriers, see :func:`make_blend`) or a callable f(r, u).
    """

    n: int = 3
    R: float = 1.0
    s0: float = 2.0 * math.pi
    g: Coefficient = None  # type: ignore[assignment]
    g_tail: Optional[TailModel] = None
    a1: Coefficient = None  # type: ignore[assignment]
    a2: Coefficient = None  # type: ignore[assignment]
    f_blend: Union[str, Callable] = "tanh"
    varsigma: float = 1.0

    def validate(self) -> None:
        _check_dim(self.n)
        if not self.R > 0:
            raise ValueError(f"the excluded ball needs a positive radius, got {self.R!r}")
        s_min = (self.n - 2) * self.R ** (self.n - 2)
        if not self.s0 > s_min:
            raise ValueError(
                f"the arc parameter must start beyond the excluded ball: need "
                f"s0 > (n-2) R^(n-2) = {s_min!r}, got {self.s0!r}"
            )
        if self.g is None:
            raise ValueError("a damping coefficient g is required")
        if isinstance(self.f_blend, str) and self.f_blend != "tanh":
            raise ValueError(f"unknown nonlinearity descriptor {self.f_blend!r}")
        if not self.varsigma > 0:
            raise ValueError("varsigma must be positive")


def lift_coefficients(problem: RadialProblem):
    """(p, q1, q2) on the arc side from (g, a1, a2) on the radial side.

    Returns vectorised callables of s.  q1/q2 entries are None when the
    corresponding a_i is missing.
    """
    problem.validate()
    n, R = problem.n, problem.R
    ge = as_callable(problem.g)

    def p(s):
        s_arr = np.asarray(s, dtype=float)
        bb = _beta_betaprime(n, s_arr)
        return bb * np.asarray(ge(beta_map(n, R, s_arr)), dtype=float)

    def lift_one(a):
        ae = as_callable(a)

        def q(s):
            s_arr = np.asarray(s, dtype=float)
            bb = _beta_betaprime(n, s_arr)
            return (s_arr / (n - 2)) * bb * np.asarray(ae(beta_map(n, R, s_arr)), dtype=float)

        return q

    q1 = lift_one(problem.a1) if problem.a1 is not None else None
    q2 = lift_one(problem.a2) if problem.a2 is not None else None
    return p, q1, q2


def push_a_from_q(q: Coefficient, n: int) -> Callable:
    """a(r) = (n-2)^2 r^(-2) q((n-2) r^(n-2)), inverse of the lift."""
    _check_dim(n)
    qe = as_callable(q)

    def a(r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr <= 0):
            raise ValueError("the radius must be positive")
        s = (n - 2) * np.power(r_arr, n - 2)
        return (n - 2) ** 2 / r_arr**2 * np.asarray(qe(s), dtype=float)

    return a


# ---------------------------------------------------------------------------
# Barriers


@dataclass(frozen=True)
class BarrierPair:
    """Kernels of an ordered coefficient pair, h1 <= h2 on a shared grid."""

    grid: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    kernel1: KernelPair
    kernel2: KernelPair

    @property
    def gap_min(self) -> float:
        return float(np.min(self.h2 - self.h1))

    @property
    def gap_max(self) -> float:
        return float(np.max(self.h2 - self.h1))

    def v1(self, s) -> np.ndarray:
        return np.interp(s, self.grid, self.h1) / np.asarray(s, dtype=float)

    def v2(self, s) -> np.ndarray:
        return np.interp(s, self.grid, self.h2) / np.asarray(s, dtype=float)


def make_barriers(
    pair: PairResult,
    grid: np.ndarray,
    *,
    z_sup_bounds: Optional[tuple[float, float]] = None,
    extend_to: float = 2e4,
    extend_step: float = math.pi / 80.0,
    parallel: bool = False,
) -> BarrierPair:
    """Compute both kernels of an ordered pair on a shared grid.

    The ordering q1 <= q2 forces z1 >= z2 and hence h1 <= h2; both are
    verified on the grid and a violation raises, since barriers that cross
    cannot sandwich anything.
    """
    p = pair.q1.params.p
    p_tail = pair.q1.params.p_tail
    bounds = z_sup_bounds if z_sup_bounds is not None else (None, None)

    def one(which: int) -> KernelPair:
        spec = pair.q1 if which == 0 else pair.q2
        return compute_kernel(
            p, spec.q_callable, grid, p_tail=p_tail,
            z_sup_bound=bounds[which],
            extend_to=extend_to, extend_step=extend_step,
        )

    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            k1, k2 = pool.map(one, (0, 1))
    else:
        k1, k2 = one(0), one(1)

    if np.any(k1.z_values < k2.z_values - 1e-12):
        raise ValueError("kernel ordering violated: z1 < z2 somewhere on the grid")
    if np.any(k1.h_values > k2.h_values + 1e-12):
        raise ValueError("barrier ordering violated: h1 > h2 somewhere on the grid")
    return BarrierPair(
        grid=k1.grid, h1=k1.h_values, h2=k2.h_values,
        z1=k1.z_values, z2=k2.z_values, kernel1=k1, kernel2=k2,
    )


def make_blend(problem: RadialProblem, barrier: BarrierPair) -> Callable:
    """The stock nonlinearity: a tanh ramp from a1 to a2 across the ribbon.

        f(r, u) = (a1 + a2)/2 + ((a2 - a1)/2) tanh((u - u_mid) / w),

    with u_mid the midpoint of (v1, v2) at radius r and w a quarter of the
    gap.  f is nondecreasing in u and stays strictly inside [a1, a2], so the
    barriers bound it by construction and the monotone iteration needs no
    shift.
    """
    problem.validate()
    if problem.a1 is None or problem.a2 is None:
        raise ValueError("the blend nonlinearity needs both ribbon edges a1 and a2")
    a1e, a2e = as_callable(problem.a1), as_callable(problem.a2)
    n, R = problem.n, problem.R
    grid, h1, h2 = barrier.grid, barrier.h1, barrier.h2

    def f(r, u):
        r_arr = np.asarray(r, dtype=float)
        u_arr = np.asarray(u, dtype=float)
        s = beta_inverse(n, R, r_arr)
        v1 = np.interp(s, grid, h1) / s
        v2 = np.interp(s, grid, h2) / s
        gap = v2 - v1
        if np.any(gap <= 0):
            raise ValueError("degenerate ribbon: the barriers touch at some radius")
        lo = np.asarray(a1e(r_arr), dtype=float)
        hi = np.asarray(a2e(r_arr), dtype=float)
        mid = 0.5 * (v1 + v2)
        return 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.tanh(4.0 * (u_arr - mid) / gap)

    return f


def resolve_nonlinearity(problem: RadialProblem, barrier: BarrierPair) -> Callable:
    if callable(problem.f_blend):
        return problem.f_blend
    return make_blend(problem, barrier)


# ---------------------------------------------------------------------------
# Residual signs


@dataclass(frozen=True)
class ResidualReport:
    grid: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    min_rho1: float
    max_rho2: float
    lower_ok: bool
    upper_ok: bool
    ribbon_excursion: float


def subsuper_residual(
    problem: RadialProblem,
    barrier: BarrierPair,
    *,
    f: Optional[Callable] = None,
    sign_tol: float = 1e-6,
    ribbon_tol: float = 1e-12,
) -> ResidualReport:
    """Discrete residuals of the barriers under the full nonlinearity.

    On the arc side the operator is  L[h] + (1/(n-2)) beta beta' f(beta, h/s)
    with L[h] = h'' + p (h' - h/s).  A subsolution must keep it >= 0 (for
    h1), a supersolution <= 0 (for h2); central differences on the barrier
    grid measure both, and ``sign_tol`` sets the tolerated discretisation
    leak.  f is required to respect the ribbon a1 <= f <= a2 wherever it is
    evaluated; an excursion beyond ``ribbon_tol`` (relative to the ribbon
    width) is a hard error because the sandwich argument breaks there.
    """
    problem.validate()
    fn = f if f is not None else resolve_nonlinearity(problem, barrier)
    n, R = problem.n, problem.R
    g = barrier.grid
    step = g[1] - g[0]
    if np.any(np.abs(np.diff(g) - step) > 1e-9 * max(step, 1.0)):
        raise ValueError("residual checks need a uniform barrier grid")

    p_lift, _, _ = lift_coefficients(problem)
    si = g[1:-1]
    p_i = np.asarray(p_lift(si), dtype=float)
    bb = _beta_betaprime(n, si)
    r_i = beta_map(n, R, si)
    a1e, a2e = as_callable(problem.a1), as_callable(problem.a2)
    lo = np.asarray(a1e(r_i), dtype=float)
    hi = np.asarray(a2e(r_i), dtype=float)
    width = np.max(hi - lo)

    excursion = 0.0
    rhos = []
    for h in (barrier.h1, barrier.h2):
        d2 = (h[:-2] - 2.0 * h[1:-1] + h[2:]) / step**2
        d1 = (h[2:] - h[:-2]) / (2.0 * step)
        u = h[1:-1] / si
        fv = np.asarray(fn(r_i, u), dtype=float)
        over = float(np.max(np.maximum(fv - hi, lo - fv)))
        excursion = max(excursion, over)
        if over > ribbon_tol * max(width, 1.0):
            raise ValueError(
                f"nonlinearity leaves the ribbon [a1, a2] by {over!r} "
                f"while evaluating barrier residuals; the comparison argument "
                f"does not apply to such an f"
            )
        rhos.append(d2 + p_i * (d1 - h[1:-1] / si) + bb / (n - 2) * fv)
    rho1, rho2 = rhos

    return ResidualReport(
        grid=g,
        rho1=rho1,
        rho2=rho2,
        min_rho1=float(np.min(rho1)),
        max_rho2=float(np.max(rho2)),
        lower_ok=bool(np.min(rho1) >= -sign_tol),
        upper_ok=bool(np.max(rho2) <= sign_tol),
        ribbon_excursion=excursion,
    )


# ---------------------------------------------------------------------------
# Integral conditions in the radial variable


def integral_conditions(
    problem: RadialProblem,
    T: float,
    *,
    sup_q: Optional[tuple[float, float]] = None,
) -> dict:
    """The three radial integral features, measured up to radius T.

    (i) integral r^(n-1) g dr converges: finite part plus a certificate
        from g_tail, cross-checked against (1/(n-2)) integral s p ds
        through the substitution r = beta(s).
    (ii) integral r |a_i| dr grows without bound: partial integrals at
        T, 2T, 4T with their growth rate against ln T.
    (iii) integral r^(1 - varsigma (n-2)) |a_i| dr converges: Cauchy gap
        between T and 2T against the closed-form tail bound, which needs
        sup|q_i| (pass certified values via ``sup_q``; otherwise an
        observed sup is used and labelled as such).
    """
    problem.validate()
    n, R, vs = problem.n, problem.R, problem.varsigma
    if not T > 4.0 * R:
        raise ValueError("truncation radius must exceed the excluded ball comfortably")
    ge = as_callable(problem.g)

    damping = integrate_finite(
        lambda r: np.power(np.asarray(r, dtype=float), n - 1) * np.asarray(ge(r), dtype=float),
        R, T, tol=1e-10,
    )
    certificate = None
    if problem.g_tail is not None and problem.g_tail.kind == "power" \
            and problem.g_tail.rate > n:
        model = TailModel(kind="power", rate=problem.g_tail.rate - (n - 1),
                          coef=problem.g_tail.coef)
        certificate = model.tail_bound(T)
    p_lift, q1, q2 = lift_coefficients(problem)
    s_lo = problem.s0
    S_T = beta_inverse(n, R, T)
    cross = integrate_finite(
        lambda s: np.asarray(s, dtype=float) * np.asarray(p_lift(s), dtype=float) / (n - 2),
        s_lo, S_T, tol=1e-10,
    )
    r_lo = beta_map(n, R, s_lo)
    damping_part = integrate_finite(
        lambda r: np.power(np.asarray(r, dtype=float), n - 1) * np.asarray(ge(r), dtype=float),
        r_lo, T, tol=1e-10,
    )

    out = {
        "damping_radial_integral": damping.value,
        "damping_certificate": certificate,
        "damping_converges": certificate is not None,
        "substitution_identity_gap": abs(cross.value - damping_part.value),
        "varsigma": vs,
        "T": float(T),
    }

    for label, q in (("a1", q1), ("a2", q2)):
        if q is None:
            continue
        seeds = _lobe_radii(problem, 4.0 * T)

        def r_weighted(r, power):
            r_arr = np.asarray(r, dtype=float)
            s = beta_inverse(n, R, r_arr)
            lifted = np.abs(np.asarray(q(s), dtype=float))
            # a(r) = (n-2)^2 r^-2 q(s(r))
            return np.power(r_arr, power) * (n - 2) ** 2 / r_arr**2 * lifted

        growth = []
        lo = beta_map(n, R, problem.s0)
        for t_k in (T, 2.0 * T, 4.0 * T):
            part = integrate_finite(lambda r: r_weighted(r, 1.0), lo, t_k,
                                    tol=1e-9, seeds=seeds, limit=20000)
            growth.append(part.value)
        slope = ((growth[2] - growth[0]) / math.log(4.0))

        heavy_T = integrate_finite(lambda r: r_weighted(r, 1.0 - vs * (n - 2)),
                                   lo, T, tol=1e-10, seeds=seeds, limit=20000)
        heavy_2T = integrate_finite(lambda r: r_weighted(r, 1.0 - vs * (n - 2)),
                                    lo, 2.0 * T, tol=1e-10, seeds=seeds, limit=20000)
        if sup_q is not None:
            sup_val = sup_q[0] if label == "a1" else sup_q[1]
            sup_label = "certified"
        else:
            probe = np.linspace(problem.s0, beta_inverse(n, R, 4.0 * T), 65536)
            sup_val = float(np.max(np.abs(q(probe)))) * (1.0 + 1e-6)
            sup_label = "observed"
        gap_bound = (n - 2) ** (1.0 + vs) * sup_val * S_T ** (-vs) / vs
        out[label] = {
            "growth_partials": growth,
            "growth_slope_vs_logT": slope,
            "diverges": bool(growth[0] < growth[1] < growth[2] and slope > 0),
            "heavy_T": heavy_T.value,
            "heavy_2T": heavy_2T.value,
            "cauchy_gap": abs(heavy_2T.value - heavy_T.value),
            "gap_bound": gap_bound,
            "sup_q": sup_val,
            "sup_q_source": sup_label,
            "converges": bool(abs(heavy_2T.value - heavy_T.value) <= gap_bound + 1e-12),
        }
    return out


def _lobe_radii(problem: RadialProblem, r_hi: float) -> np.ndarray:
    """Radial images of the half-period nodes, for quadrature seeding."""
    n, R = problem.n, problem.R
    s_hi = beta_inverse(n, R, r_hi)
    m_hi = int(math.ceil(s_hi / math.pi)) + 1
    nodes = math.pi * np.arange(max(2, int(problem.s0 / math.pi)), m_hi)
    return beta_map(n, R, nodes)
