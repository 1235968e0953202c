"""Verification of the oscillation test's hypotheses and conclusions.

Hypotheses, per period m with breakpoints a_{2m} < a_{2m+1} < a_{2m+2}:

  (sign)   q > 0 on the first half-interval, q < 0 on the second;
  (hyp1)   integral of q over the positive lobe dominates the negative one
           with the damping markup:  Ipos_m >= (1 + 3 I_m) Ineg_m, where
           I_m = integral_{a_{2m}}^{infinity} p;
  (hyp2)   the surpluses eps_m >= Ipos_m - Ineg_m are summable;
  (hyp3)   each positive-lobe integral alone stays below a fixed delta.

Standing smallness: lambda = integral of p over [s0, infinity) below one.

Conclusions, for the kernels of :mod:`oscillax.kernel`: z stays negative and
bounded by (eps + delta) e^lambda, h stays positive, and h/s decreases. The
monotonicity flag is computed both from differences of h/s and from the
sign of z (the two are equivalent through s (h/s)' = z/s) and the routes
must agree.

All lobe integrals are adaptive with certified error estimates.  Since only
finitely many periods can be measured, the summability and delta checks
combine the measured range with certified tail coefficients supplied by a
built family (see :class:`oscillax.example_builder.OscillationSpec`); for a
bare coefficient function the report states honestly that the tail is not
certified instead of extrapolating.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .coeff_dsl import CoefficientExpr, as_callable
from .kernel import KernelPair
from .quadrature import TailModel, integrate_finite, integrate_tail

__all__ = [
    "HypothesesResult",
    "ConclusionsResult",
    "RemarkResult",
    "LemmaReport",
    "check_hypotheses",
    "check_conclusions",
    "check_remark",
    "verify_lemma",
]

Coefficient = Union[CoefficientExpr, Callable]

STRICT = 1e-12  # strict-inequality threshold; closer to zero is inconclusive


@dataclass(frozen=True)
class HypothesesResult:
    m_checked: int
    lam: float
    lam_error: float
    lam_ok: bool
    nodes: np.ndarray
    I: np.ndarray
    I_error: np.ndarray
    pos_integrals: np.ndarray
    neg_integrals: np.ndarray
    quad_errors: np.ndarray
    sign_ok: np.ndarray
    sign_margin: float
    sign_inconclusive: int
    hyp1_margins: np.ndarray
    eps: np.ndarray
    eps_mode: str
    eps_range_sum: float
    eps_tail: Optional[float]
    eps_total: Optional[float]
    delta_range: float
    delta_tail: Optional[float]
    delta_total: Optional[float]
    deduced_damping_ok: bool

    @property
    def sign_pattern_ok(self) -> bool:
        return bool(np.all(self.sign_ok))

    @property
    def hyp1_ok(self) -> bool:
        return bool(np.all(self.hyp1_margins >= 0.0))

    def proof_bound(self) -> Optional[float]:
        """(eps + delta) e^lambda when both tails are certified."""
        if self.eps_total is None or self.delta_total is None:
            return None
        return (self.eps_total + self.delta_total) * math.exp(self.lam)


@dataclass(frozen=True)
class ConclusionsResult:
    z_negative: bool
    z_negative_margin: float
    z_inconclusive: int
    z_sup_observed: float
    z_bound: Optional[float]
    z_bounded: Optional[bool]
    z_bound_margin: Optional[float]
    h_positive: bool
    h_min: float
    h_sup: float
    ratio_decreasing: bool
    ratio_decreasing_by_z: bool
    routes_agree: bool
    z_period_maxima: tuple


@dataclass(frozen=True)
class RemarkResult:
    spacing: float                  # A = min(a_{2m+2} - a_{2m})
    p_moment: Optional[float]       # integral (s - s0) p
    p_moment_error: Optional[float]
    sum_tail_integrals: float       # sum_{m >= 2} I_m over the range
    sum_tail_bound: Optional[float] # with certified remainder
    counting_ok: Optional[bool]     # A * sum <= moment
    eps_budget: Optional[float]     # eps / q_minus
    budget_ok: Optional[bool]


@dataclass(frozen=True)
class LemmaReport:
    hypotheses: HypothesesResult
    conclusions: Optional[ConclusionsResult]
    remark: Optional[RemarkResult]

    @property
    def ok(self) -> bool:
        entries = self.entries()
        return all(e["pass"] for e in entries)

    def entries(self) -> list[dict]:
        """Flat check list: name, pass, margin, details."""
        hyp = self.hypotheses
        out: list[dict] = []
        out.append({
            "name": "damping integral below one",
            "pass": bool(hyp.lam_ok),
            "margin": 1.0 - (hyp.lam + hyp.lam_error),
            "details": {"lambda": hyp.lam, "error": hyp.lam_error},
        })
        out.append({
            "name": "sign pattern of the lobes",
            "pass": hyp.sign_pattern_ok,
            "margin": hyp.sign_margin,
            "details": {
                "periods_checked": hyp.m_checked,
                "inconclusive_samples": hyp.sign_inconclusive,
            },
        })
        out.append({
            "name": "positive lobes dominate damped negative lobes",
            "pass": hyp.hyp1_ok,
            "margin": float(np.min(hyp.hyp1_margins)),
            "details": {"worst_period": int(np.argmin(hyp.hyp1_margins)) + 1},
        })
        out.append({
            "name": "lobe surpluses are summable",
            "pass": hyp.eps_total is not None,
            "margin": hyp.eps_total if hyp.eps_total is not None else hyp.eps_range_sum,
            "details": {
                "mode": hyp.eps_mode,
                "range_sum": hyp.eps_range_sum,
                "certified_tail": hyp.eps_tail,
                "truncated": hyp.eps_total is None,
            },
        })
        out.append({
            "name": "single positive lobe stays below delta",
            "pass": hyp.delta_total is not None,
            "margin": hyp.delta_total if hyp.delta_total is not None else hyp.delta_range,
            "details": {
                "range_max": hyp.delta_range,
                "future_lobe_bound": hyp.delta_tail,
                "truncated": hyp.delta_total is None,
            },
        })
        out.append({
            "name": "damping times negative lobe stays within the surplus",
            "pass": bool(hyp.deduced_damping_ok),
            "margin": None,
            "details": {},
        })
        if self.remark is not None:
            rem = self.remark
            if rem.counting_ok is not None:
                out.append({
                    "name": "period counting against the damping moment",
                    "pass": bool(rem.counting_ok),
                    "margin": (None if rem.p_moment is None
                               else rem.p_moment - rem.spacing * rem.sum_tail_integrals),
                    "details": {
                        "spacing": rem.spacing,
                        "p_moment": rem.p_moment,
                        "sum_tail_integrals": rem.sum_tail_integrals,
                    },
                })
            if rem.budget_ok is not None:
                out.append({
                    "name": "damping tails within the surplus budget",
                    "pass": bool(rem.budget_ok),
                    "margin": (None if rem.eps_budget is None
                               else rem.eps_budget - (rem.sum_tail_bound
                                                      if rem.sum_tail_bound is not None
                                                      else rem.sum_tail_integrals)),
                    "details": {"eps_budget": rem.eps_budget},
                })
        if self.conclusions is not None:
            con = self.conclusions
            out.append({
                "name": "kernel z stays negative",
                "pass": bool(con.z_negative),
                "margin": con.z_negative_margin,
                "details": {"inconclusive_nodes": con.z_inconclusive},
            })
            if con.z_bounded is not None:
                out.append({
                    "name": "kernel z within the proof bound",
                    "pass": bool(con.z_bounded),
                    "margin": con.z_bound_margin,
                    "details": {
                        "observed_sup": con.z_sup_observed,
                        "bound": con.z_bound,
                    },
                })
            out.append({
                "name": "kernel h stays positive",
                "pass": bool(con.h_positive),
                "margin": con.h_min,
                "details": {"h_sup": con.h_sup},
            })
            out.append({
                "name": "h/s decreases, both routes agreeing",
                "pass": bool(con.ratio_decreasing and con.routes_agree),
                "margin": None,
                "details": {
                    "by_differences": con.ratio_decreasing,
                    "by_z_sign": con.ratio_decreasing_by_z,
                },
            })
        return out


def _lobe_bounds(nodes: np.ndarray) -> int:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 3 or len(nodes) % 2 == 0:
        raise ValueError(
            "nodes must list a_2 .. a_{2M+2}, an odd number (>= 3) of breakpoints"
        )
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    return (len(nodes) - 1) // 2


def check_hypotheses(
    p: Coefficient,
    q: Coefficient,
    nodes: np.ndarray,
    *,
    p_tail: TailModel,
    family=None,
    eps_mode: str = "slack",
    q_tail: Optional[TailModel] = None,
    sign_samples: int = 64,
    quad_tol: float = 1e-12,
    parallel: bool = False,
) -> HypothesesResult:
    """Certify the oscillation hypotheses on the given breakpoint range.

    ``eps_mode`` picks the surplus sequence: "slack" takes the minimal
    admissible eps_m = max(Ipos_m - Ineg_m, 0); "integrable" takes
    eps_m = Ipos_m, which is summable when |q| is (certify with ``q_tail``).
    ``family`` supplies certified beyond-range coefficients
    (surplus_tail_bound / future_pos_lobe_bound); without it the beyond-range
    sums are reported as not certified rather than guessed.
    """
    if eps_mode not in ("slack", "integrable"):
        raise ValueError(f"unknown eps_mode {eps_mode!r}")
    nodes = np.asarray(nodes, dtype=float)
    M = _lobe_bounds(nodes)
    pe, qe = as_callable(p), as_callable(q)

    lam_res = integrate_tail(pe, float(nodes[0]), _fresh_cutoff(p_tail), tol=1e-10)
    lam = lam_res.value
    lam_ok = bool(lam + lam_res.abs_error_estimate < 1.0)

    def one_period(m: int):
        a, b, c = nodes[2 * m - 2], nodes[2 * m - 1], nodes[2 * m]
        pos = integrate_finite(qe, a, b, quad_tol)
        neg = integrate_finite(qe, b, c, quad_tol)
        tail = integrate_tail(pe, a, _fresh_cutoff(p_tail), tol=1e-12)
        tpos = a + (b - a) * (np.arange(1, sign_samples + 1) / (sign_samples + 1.0))
        tneg = b + (c - b) * (np.arange(1, sign_samples + 1) / (sign_samples + 1.0))
        qpos = np.asarray(qe(tpos), dtype=float)
        qneg = np.asarray(qe(tneg), dtype=float)
        clearance = min(float(np.min(qpos)), float(np.min(-qneg)))
        ok = clearance > STRICT
        inconclusive = int(np.sum(np.abs(qpos) <= STRICT) + np.sum(np.abs(qneg) <= STRICT))
        return pos, neg, tail, ok, clearance, inconclusive

    indices = range(1, M + 1)
    if parallel:
        with ThreadPoolExecutor() as pool:
            rows = list(pool.map(one_period, indices))
    else:
        rows = [one_period(m) for m in indices]

    Ipos = np.array([r[0].value for r in rows])
    Ineg = np.array([-r[1].value for r in rows])
    quad_err = np.array([r[0].abs_error_estimate + r[1].abs_error_estimate for r in rows])
    I = np.array([r[2].value for r in rows])
    I_err = np.array([r[2].abs_error_estimate for r in rows])
    sign_ok = np.array([r[3] for r in rows], dtype=bool)
    sign_margin = float(min(r[4] for r in rows) - STRICT)
    inconclusive = int(sum(r[5] for r in rows))

    hyp1 = Ipos - (1.0 + 3.0 * I) * Ineg

    if eps_mode == "slack":
        eps = np.maximum(Ipos - Ineg, 0.0)
        eps_tail = None
        if family is not None:
            eps_tail = family.surplus_tail_bound(M)
    else:
        eps = Ipos.copy()
        eps_tail = None
        if q_tail is not None:
            # positive lobes of |q| beyond the range are no more than the
            # whole remaining integral of |q|
            eps_tail = q_tail.tail_bound(float(nodes[-1]))
    eps_range = float(np.sum(eps))
    eps_total = None if eps_tail is None else eps_range + float(eps_tail)

    delta_range = float(np.max(Ipos + quad_err))
    delta_tail: Optional[float] = None
    if family is not None:
        delta_tail = float(family.future_pos_lobe_bound(M))
    elif eps_mode == "integrable" and q_tail is not None:
        delta_tail = float(q_tail.tail_bound(float(nodes[-1])))
    delta_total = None if delta_tail is None else max(delta_range, delta_tail)

    deduced = bool(np.all(3.0 * I * Ineg <= eps + quad_err + 1e-12))

    return HypothesesResult(
        m_checked=M,
        lam=lam, lam_error=lam_res.abs_error_estimate, lam_ok=lam_ok,
        nodes=nodes,
        I=I, I_error=I_err,
        pos_integrals=Ipos, neg_integrals=Ineg, quad_errors=quad_err,
        sign_ok=sign_ok, sign_margin=sign_margin, sign_inconclusive=inconclusive,
        hyp1_margins=hyp1,
        eps=eps, eps_mode=eps_mode,
        eps_range_sum=eps_range, eps_tail=eps_tail, eps_total=eps_total,
        delta_range=delta_range, delta_tail=delta_tail, delta_total=delta_total,
        deduced_damping_ok=deduced,
    )


def _fresh_cutoff(model: TailModel) -> TailModel:
    return TailModel(kind=model.kind, rate=model.rate, coef=model.coef,
                     bound_fn=model.bound_fn)


def check_conclusions(
    kernel: KernelPair,
    *,
    eps: Optional[float] = None,
    delta: Optional[float] = None,
    threshold: float = STRICT,
) -> ConclusionsResult:
    """Check the kernel conclusions on the computed samples.

    ``eps`` and ``delta`` feed the proof bound (eps + delta) e^lambda; when
    either is missing the bound check is skipped rather than improvised.
    Strict inequalities use ``threshold``; samples inside the zone count as
    inconclusive, never as passing.
    """
    g = kernel.grid
    z = kernel.z_values
    h = kernel.h_values

    interior = z[1:]
    z_negative = bool(np.all(interior < -threshold))
    margin = float(-threshold - np.max(interior))
    z_inconclusive = int(np.sum((interior > -threshold) & (interior <= threshold)))

    bound = None
    bounded = None
    bound_margin = None
    if eps is not None and delta is not None:
        bound = (eps + delta) * math.exp(kernel.lam)
        bound_margin = bound - kernel.z_sup_observed
        bounded = bool(bound_margin > 0.0)

    h_min = float(np.min(h))
    h_positive = bool(h_min > threshold)

    ratio = h / g
    ratio_dec = bool(np.all(np.diff(ratio) < 0.0))
    by_z = bool(np.all(z[1:] < 0.0))  # s (h/s)' = z/s, z(s0) = 0 exactly
    agree = ratio_dec == by_z

    # grid argmax of z per period, a diagnostic for where z re-approaches 0
    period = 2.0 * math.pi
    maxima = []
    s_left = g[0]
    while s_left < g[-1] - 1e-9 and len(maxima) < 16:
        i0 = int(np.searchsorted(g, s_left + 1e-12))
        i1 = int(np.searchsorted(g, s_left + period + 1e-12))
        if i1 <= i0:
            break
        seg = z[i0:i1]
        j = int(np.argmax(seg))
        maxima.append((float(g[i0 + j]), float(seg[j])))
        s_left += period

    return ConclusionsResult(
        z_negative=z_negative,
        z_negative_margin=margin,
        z_inconclusive=z_inconclusive,
        z_sup_observed=kernel.z_sup_observed,
        z_bound=bound,
        z_bounded=bounded,
        z_bound_margin=bound_margin,
        h_positive=h_positive,
        h_min=h_min,
        h_sup=float(np.max(h)),
        ratio_decreasing=ratio_dec,
        ratio_decreasing_by_z=by_z,
        routes_agree=agree,
        z_period_maxima=tuple(maxima),
    )


def check_remark(
    p: Coefficient,
    nodes: np.ndarray,
    q_minus: Optional[float] = None,
    *,
    p_tail: TailModel,
    eps: Optional[float] = None,
    I_values: Optional[np.ndarray] = None,
    sum_I_tail: Optional[float] = None,
) -> RemarkResult:
    """Consistency checks tying damping tails, period spacing, and surplus.

    Counting periods against arc length bounds the sum of the damping tails:
    A * sum_{m >= 2} I_m <= integral (s - s0) p, with A the minimal period
    length.  With a surplus budget eps and negative lobes of size at least
    q_minus, the same sum must stay below eps / q_minus.
    """
    nodes = np.asarray(nodes, dtype=float)
    M = _lobe_bounds(nodes)
    pe = as_callable(p)
    s0 = float(nodes[0])
    even = nodes[0::2]
    spacing = float(np.min(np.diff(even)))

    if I_values is None:
        model = _fresh_cutoff(p_tail)
        I_values = np.array([
            integrate_tail(pe, float(even[m]), model, tol=1e-12).value
            for m in range(1, M)
        ])
    else:
        I_values = np.asarray(I_values, dtype=float)[1:M]
    sum_I = float(np.sum(I_values))
    sum_bound = None if sum_I_tail is None else sum_I + float(sum_I_tail)

    moment = moment_err = None
    counting_ok = None
    if p_tail.kind == "power" and p_tail.rate > 2.0:
        model = TailModel(kind="power", rate=p_tail.rate - 1.0, coef=p_tail.coef)
        res = integrate_tail(lambda s: (np.asarray(s) - s0) * np.asarray(pe(s)),
                             s0, model, tol=1e-10)
        moment, moment_err = res.value, res.abs_error_estimate
    elif p_tail.kind == "exp":
        rate, coef = p_tail.rate, p_tail.coef
        model = TailModel(kind="user", rate=rate, coef=coef,
                          bound_fn=lambda S: coef * math.exp(-rate * S)
                          * (S - s0 + 1.0 / rate) / rate)
        res = integrate_tail(lambda s: (np.asarray(s) - s0) * np.asarray(pe(s)),
                             s0, model, tol=1e-10)
        moment, moment_err = res.value, res.abs_error_estimate
    if moment is not None:
        counting_ok = bool(spacing * sum_I <= moment + moment_err + 1e-12)

    eps_budget = None
    budget_ok = None
    if eps is not None and q_minus is not None and q_minus > 0:
        eps_budget = eps / q_minus
        effective = sum_bound if sum_bound is not None else sum_I
        budget_ok = bool(effective <= eps_budget + 1e-12)

    return RemarkResult(
        spacing=spacing,
        p_moment=moment,
        p_moment_error=moment_err,
        sum_tail_integrals=sum_I,
        sum_tail_bound=sum_bound,
        counting_ok=counting_ok,
        eps_budget=eps_budget,
        budget_ok=budget_ok,
    )


def verify_lemma(
    p: Coefficient,
    q: Coefficient,
    nodes: np.ndarray,
    *,
    p_tail: TailModel,
    family=None,
    kernel: Optional[KernelPair] = None,
    q_minus: Optional[float] = None,
    eps_mode: str = "slack",
    q_tail: Optional[TailModel] = None,
    parallel: bool = False,
) -> LemmaReport:
    """Full report: hypotheses, remark consistency, kernel conclusions."""
    hyp = check_hypotheses(
        p, q, nodes, p_tail=p_tail, family=family,
        eps_mode=eps_mode, q_tail=q_tail, parallel=parallel,
    )
    sum_tail = None
    if family is not None:
        sum_tail = family.tail_sum_I_bound(hyp.m_checked)
    remark = check_remark(
        p, nodes, q_minus, p_tail=p_tail,
        eps=hyp.eps_total if hyp.eps_total is not None else None,
        I_values=hyp.I, sum_I_tail=sum_tail,
    )
    conclusions = None
    if kernel is not None:
        conclusions = check_conclusions(
            kernel, eps=hyp.eps_total, delta=hyp.delta_total,
        )
    return LemmaReport(hypotheses=hyp, conclusions=conclusions, remark=remark)
