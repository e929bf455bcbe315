import math

import numpy as np
import pytest

from hls_lab.bubbles import constants, critical_bubble
from hls_lab.errors import PreconditionError
from hls_lab.oracles import fd_derivative
from hls_lab.operators import funk_hecke_multiplier, hls_residual
from hls_lab.sphere import Params, inner, lp_norm
from hls_lab.stability import (
    SurveyConfig,
    branch,
    bubble_pair_coercivity,
    constant_mode_slope,
    dual_chain_check,
    expansion_coefficient,
    in_energy_window,
    local_expansion_check,
    make_ps_sequence,
    pairing_slope,
    quotient,
    quotient_survey,
    sign_split,
    sobolev_quotient,
    sobolev_survey,
    struwe_extract,
    struwe_run,
)

from .conftest import grid_for


def test_expansion_slope_l2(p31, g31):
    r = local_expansion_check(p31, 2, 1.0, grid=g31)
    assert r.passed and r.rel_error <= 1e-3
    assert r.expected == pytest.approx(0.2 * 4 / 3 - funk_hecke_multiplier(p31, 2))
    assert abs(r.g_at_zero) <= 1e-14
    assert r.bound_holds


def test_expansion_slope_against_fd_oracle(g31):
    # Richardson table from the oracle module, same pairing function.
    c = constants(g31.params).c_crit
    Y = g31.harmonic(3)
    g = lambda e: inner(hls_residual(g31.constant(1.05 * c) + e * Y).field, Y)  # noqa: E731
    fd = fd_derivative(g, 0.0, (1e-2, 5e-3, 2.5e-3))
    slope, _, _ = pairing_slope(g31, 3, 1.05)
    assert slope == pytest.approx(fd.value, rel=1e-6)


def test_expansion_preconditions(p31):
    with pytest.raises(PreconditionError):
        local_expansion_check(p31, 1, 1.0)
    # beta^{-4s/(n+2s)} must exceed (n/2-s+1)/(n/2+s+1) = 5/9 for (3,1).
    with pytest.raises(PreconditionError):
        local_expansion_check(p31, 2, 5.0)


def test_constant_mode_slope(p31, g31):
    got, expected = constant_mode_slope(p31, g31)
    assert got == pytest.approx(expected, rel=1e-3)
    assert expected == pytest.approx(4 / 3 * 0.8)


def test_quotient_on_manifold_is_flagged(g31):
    q = quotient(critical_bubble(g31, 0.2))
    assert q.degenerate and math.isinf(q.value)


def test_quotient_degree2(g31):
    c = constants(g31.params)
    q = quotient(g31.constant(c.c_crit) + 1e-3 * g31.harmonic(2))
    assert q.in_window
    assert q.value >= c.C_loc


def test_quotient_constant_mode_matches_case2(g31):
    p = g31.params
    c = constants(p)
    q = quotient(g31.constant(c.c_crit) + 1e-3 * g31.harmonic(0))
    limit = funk_hecke_multiplier(p, 0) * 4 * p.s / (p.n + 2 * p.s) * p.area ** (-2 * p.s / p.n)
    assert q.value == pytest.approx(limit, rel=5e-3)
    # Twice the case-2 branch constant.
    assert limit == pytest.approx(2 * c.C_case2, rel=1e-12)
    assert branch(g31.constant(c.c_crit) + 1e-3 * g31.harmonic(0)) == "case2"
    assert branch(g31.constant(c.c_crit) + 1e-3 * g31.harmonic(2)) == "case1"


def test_energy_window(g31):
    c = constants(g31.params).c_crit
    assert in_energy_window(critical_bubble(g31, 0.5))
    assert not in_energy_window(g31.constant(0.1 * c))


def test_empty_survey(p31, g31):
    rep = quotient_survey(p31, SurveyConfig(degrees=()), g31)
    assert rep.records == []
    assert rep.summary()["count"] == 0


def test_small_survey_and_conformal_rows(p31, g31):
    cfg = SurveyConfig(degrees=(2, 3), eps=(1e-3,), betas=(1.0,), zetas=(0.0, 0.4, -0.4))
    rep = quotient_survey(p31, cfg, g31)
    assert len(rep.records) == 6
    assert rep.conformal_deviation() <= 0.01
    assert rep.min_quotient >= rep.C_loc * 0.95
    assert all(r.branch == "case1" for r in rep.records)


def test_survey_threads_give_same_records(p31, g31):
    cfg = SurveyConfig(degrees=(2,), eps=(1e-2,), betas=(1.0, 1.05), zetas=(0.0,))
    a = quotient_survey(p31, cfg, g31, workers=1)
    b = quotient_survey(p31, cfg, g31, workers=3)
    assert a.records == b.records


def test_ps_sequences(g31):
    seq = make_ps_sequence(g31, "perturbation", 3)
    assert len(seq) == 3 and [t.k for t in seq] == [1, 2, 3]
    with pytest.raises(PreconditionError):
        make_ps_sequence(g31, "perturbation", 2)
    conc = make_ps_sequence(g31, "concentration", 9)
    assert conc.terms[-1].clamped and conc.terms[-1].zeta == 0.995
    p = g31.params.p
    norms = [lp_norm(t.field, p) for t in conc if t.k <= 6]
    assert max(norms) - min(norms) <= 1e-8 * norms[0]


def test_struwe_on_exact_bubble(g31):
    pr, rec = struwe_extract(critical_bubble(g31, 0.3))
    assert rec.residual_norm <= 1e-7 and rec.d_lp <= 1e-7 and abs(rec.pairing) <= 1e-7


def test_struwe_perturbation_run(g31):
    rep = struwe_run(make_ps_sequence(g31, "perturbation", 12))
    assert rep.residual_decreasing and rep.distance_decreasing and rep.pairing_decreasing
    assert all(r.pairing > 0 for r in rep.records)
    assert rep.ratio_ok and rep.passed
    assert rep.final_ratio >= rep.C_ps * 0.95


@pytest.mark.parametrize("field", ["harmonic", "zero", "bubble", "mixed"])
def test_sign_split(g31, field):
    c = constants(g31.params).c_crit
    psi = {
        "harmonic": g31.harmonic(3),
        "zero": g31.constant(0.0),
        "bubble": critical_bubble(g31, 0.3),
        "mixed": g31.constant(0.3 * c) + 0.5 * g31.harmonic(2) - 0.4 * g31.harmonic(5),
    }[field]
    gaps = sign_split(psi)
    assert abs(gaps.gap_pos) <= 1e-9 and abs(gaps.gap_neg) <= 1e-9
    if field == "bubble":
        assert gaps.gap_neg == 0.0 and abs(gaps.gap_pos_raw) <= 1e-8
    if field == "harmonic":
        assert gaps.gap_pos_raw != 0.0


def test_dual_chain(g31):
    d = constants(g31.params).d_crit
    r = dual_chain_check(g31.constant(d))
    assert r.lhs <= 1e-8 and r.rhs_forced <= 1e-8 and r.forced_holds
    r = dual_chain_check(g31.constant(d) + 1e-2 * g31.harmonic(2))
    assert r.pointwise_error <= 1e-12
    assert r.identity_error <= 1e-5
    assert r.forced_holds
    assert not r.truncation_flag


def test_dual_chain_truncation_flag(g31):
    u = critical_bubble(g31, 0.9, "sobolev")
    r = dual_chain_check(u)
    assert r.truncation_flag
    assert r.pointwise_error <= 1e-12


def test_sobolev_quotient(g31):
    q = sobolev_quotient(critical_bubble(g31, 0.2, "sobolev"))
    assert q.degenerate
    d = constants(g31.params).d_crit
    q = sobolev_quotient(g31.constant(d) + 1e-3 * g31.harmonic(2))
    assert q.in_window and 0 < q.value < math.inf


def test_sobolev_survey_refinement():
    p = Params(3, 1.0)
    a = min(r["quotient"] for r in sobolev_survey(p, grid=grid_for(3, 1.0)))
    b = min(r["quotient"] for r in sobolev_survey(p, grid=grid_for(3, 1.0, 48, 120)))
    assert a > 0
    assert b == pytest.approx(a, rel=0.05)


@pytest.mark.parametrize("ns", [(3, 1.0), (4, 1.0)])
def test_bubble_pair_coercivity(ns):
    worst = bubble_pair_coercivity(Params(*ns), np.linspace(-0.8, 0.8, 9), grid_for(*ns))
    assert worst >= 1.0


def test_expansion_coefficient_positive_in_regime(p31):
    for l in range(2, 20):
        assert expansion_coefficient(p31, l, 1.0) > 0
