import math

import numpy as np
import pytest

from oscillax import (
    check_conclusions,
    check_hypotheses,
    check_remark,
    default_params,
    verify_lemma,
)
from oscillax.quadrature import TailModel

PI = math.pi


@pytest.fixture(scope="module")
def report(family, family_kernel):
    params = default_params()
    return verify_lemma(
        params.p, family.q_callable, family.nodes,
        p_tail=params.p_tail, family=family, kernel=family_kernel,
        q_minus=params.q_minus,
    )


# ---------------------------------------------------------------------------
# the default family passes everything


def test_all_entries_pass(report):
    entries = report.entries()
    assert len(entries) == 12
    failed = [e["name"] for e in entries if not e["pass"]]
    assert failed == []
    assert report.ok


def test_delta_is_the_largest_single_lobe(report):
    # (pi/2) c_1 = 1.5 + 3/(4 pi^2) for the stock parameters
    exact = 1.5 + 3.0 / (4.0 * PI**2)
    assert report.hypotheses.delta_total == pytest.approx(exact, abs=1e-9)
    assert report.hypotheses.delta_range <= report.hypotheses.delta_total


def test_surplus_total_and_proof_bound(report):
    hyp = report.hypotheses
    assert hyp.eps_total is not None
    assert 0.10 < hyp.eps_total < 0.15
    bound = hyp.proof_bound()
    assert bound == pytest.approx(1.7227233239298512, abs=1e-6)
    # the bound really dominates the observed kernel
    assert report.conclusions.z_sup_observed < bound
    assert report.conclusions.z_bound_margin > 0.1


def test_domination_margins_have_headroom(report):
    hyp = report.hypotheses
    assert np.all(hyp.hyp1_margins > 0.0)
    # surplus gamma/2 - 3 = 0 for gamma 6 would be tight; the floor rule
    # plus the geometric term keeps a visible gap on the worst period
    assert float(np.min(hyp.hyp1_margins)) > 1e-5


def test_sign_pattern_strict(report):
    hyp = report.hypotheses
    assert hyp.sign_pattern_ok
    assert hyp.sign_inconclusive == 0
    assert hyp.sign_margin > 1e-3


def test_conclusion_routes_agree(report):
    con = report.conclusions
    assert con.z_negative
    assert con.ratio_decreasing
    assert con.ratio_decreasing_by_z
    assert con.routes_agree
    assert con.h_positive
    assert con.h_min > 0.7


def test_z_period_maxima_are_diagnostic(report):
    maxima = report.conclusions.z_period_maxima
    assert 0 < len(maxima) <= 16
    # |z| settles around its limit; the recorded maxima are all below bound
    for _, value in maxima:
        assert value <= report.hypotheses.proof_bound()


# ---------------------------------------------------------------------------
# the inequality the damped-domination step leans on


def test_exponential_within_linear_envelope_on_unit_range():
    x = np.linspace(0.0, 1.0, 256)
    assert np.all(np.exp(x) <= 1.0 + 3.0 * x + 1e-15)


# ---------------------------------------------------------------------------
# mutations must fail


def test_swollen_negative_lobes_break_domination(family):
    params = default_params()

    def q_bad(s):
        v = family.q_callable(s)
        return np.where(v < 0.0, 1.5 * v, v)

    hyp = check_hypotheses(params.p, q_bad, family.nodes, p_tail=params.p_tail)
    assert not hyp.hyp1_ok


def test_flipped_sign_pattern_is_caught(family):
    params = default_params()
    q_flip = lambda s: -family.q_callable(s)
    hyp = check_hypotheses(params.p, q_flip, family.nodes, p_tail=params.p_tail)
    assert not hyp.sign_pattern_ok


def test_undamped_oscillation_fails_cleanly():
    params = default_params()
    nodes = PI * np.arange(2, 19)
    hyp = check_hypotheses(params.p, lambda s: np.sin(np.asarray(s)),
                           nodes, p_tail=params.p_tail)
    # equal lobes cannot dominate their damped counterparts
    assert not hyp.hyp1_ok
    # and without a family there is no certified surplus tail
    assert hyp.eps_total is None


# ---------------------------------------------------------------------------
# remark consistency


def test_remark_moment_closed_form(report):
    rem = report.remark
    # integral (s - 2 pi)/s^3 over [2 pi, inf) = 1/(4 pi)
    assert rem.p_moment == pytest.approx(1.0 / (4.0 * PI), abs=1e-8)
    assert rem.spacing == pytest.approx(2.0 * PI, abs=1e-12)
    assert rem.counting_ok
    assert rem.budget_ok
    assert rem.eps_budget == pytest.approx(report.hypotheses.eps_total, abs=1e-15)


def test_remark_standalone_with_exp_damping():
    nodes = PI * np.arange(2, 11)
    p = lambda s: np.exp(-np.asarray(s, dtype=float))
    rem = check_remark(p, nodes, q_minus=1.0,
                       p_tail=TailModel("exp", 1.0, 1.0), eps=0.125)
    assert rem.p_moment is not None
    assert rem.counting_ok is not None


def test_remark_skips_moment_for_slow_power_tails():
    nodes = PI * np.arange(2, 11)
    p = lambda s: 0.02 / np.asarray(s, dtype=float) ** 2
    rem = check_remark(p, nodes, q_minus=1.0,
                       p_tail=TailModel("power", 2.0, 0.02), eps=0.125)
    # rate 2 leaves (s - s0) p without a certified moment
    assert rem.p_moment is None
    assert rem.counting_ok is None


# ---------------------------------------------------------------------------
# conclusions in isolation


def test_conclusions_bound_needs_both_budgets(family_kernel):
    con = check_conclusions(family_kernel, eps=None, delta=None)
    assert con.z_bounded is None
    assert con.z_bound is None
    con2 = check_conclusions(family_kernel, eps=0.126, delta=1.577)
    assert con2.z_bounded is not None
