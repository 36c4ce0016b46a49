from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2dcell.kinetics import (
    FluxInput,
    FluxMode,
    KineticsDomainError,
    RegionFlux,
    check_exponent_conditions,
    dlog_H,
    flux,
    flux_decomposed,
    flux_deta,
    log_H,
    ocp,
    ocp_dT,
    overpotential,
)

CE, CS, T, PHIE = 1e-3, 0.018, 300.0, 0.02

# frozen values of the plain Butler-Volmer formula on the reference anode at (CE, CS, T)
ORACLE_U = 0.12941736067837692
ORACLE = {
    0.25: (13020143.18558243, 265434.8689365356),
    0.1: (714442.7820507572, 4837336.294559233),
    0.15: (1880111.2815611972, 1838189.0656654239),
}


def _bv(kp, region, ce, cs, T, eta):
    P = ce**kp.alpha_a * cs**kp.alpha_s * (kp.cs_max - cs) ** kp.beta_a
    return (
        kp.delta1[region] * P * math.exp(kp.gamma1 * eta / T),
        kp.delta2[region] * P * math.exp(-kp.gamma2 * eta / T),
    )


def test_ocp_oracle(ref_cfg):
    assert ocp("anode", CE, CS, T, ref_cfg.kinetics) == pytest.approx(ORACLE_U, rel=1e-14)


@pytest.mark.parametrize("phis", sorted(ORACLE))
def test_exponential_flux_oracle(ref_cfg, phis):
    kp = ref_cfg.kinetics
    inp = FluxInput("anode", CE, CS, phis, PHIE, T)
    jp, jm = flux_decomposed(inp, kp, alpha_phie=ref_cfg.transport.alpha_phie)
    assert jp == pytest.approx(ORACLE[phis][0], rel=1e-11)
    assert jm == pytest.approx(ORACLE[phis][1], rel=1e-11)
    j = flux(inp, kp, alpha_phie=ref_cfg.transport.alpha_phie)
    assert j == pytest.approx(ORACLE[phis][0] - ORACLE[phis][1], rel=1e-10)
    assert overpotential(inp, kp) == pytest.approx(phis - PHIE - ORACLE_U, rel=1e-13)


def test_reference_term_cancels_in_exponential_mode(ref_cfg):
    inp = FluxInput("cathode", 2e-3, 0.01, 3.7, 0.0, T)
    a = flux(inp, ref_cfg.kinetics, alpha_phie=0.0)
    b = flux(inp, ref_cfg.kinetics, alpha_phie=ref_cfg.transport.alpha_phie)
    assert b == pytest.approx(a, rel=1e-12)


def test_truncated_flux_oracle(ref_cfg):
    kp = ref_cfg.kinetics
    a = ref_cfg.transport.alpha_phie
    mode = FluxMode("truncated", kp.s_inf)
    phis = 0.6
    inp = FluxInput("anode", CE, CS, phis, PHIE, T)
    jp, jm = flux_decomposed(inp, kp, mode, a)
    Phi = phis - PHIE + a * T * math.log(CE)
    s = kp.gamma1 * Phi / T
    assert s > kp.s_inf["anode"]
    ep, _ = _bv(kp, "anode", CE, CS, T, phis - PHIE - ORACLE_U)
    # exp(a+) = ep / exp(s); the cut-off replaces exp(s)
    s0 = kp.s_inf["anode"]
    expected = ep / math.exp(s) * math.exp(s0) * (2.0 - math.exp(-(s - s0)))
    assert jp == pytest.approx(expected, rel=1e-10)
    # below the cut-off nothing changes
    small = FluxInput("anode", CE, CS, 0.25, PHIE, T)
    assert flux(small, kp, mode, a) == pytest.approx(flux(small, kp, None, a), rel=1e-13)


def test_separator_flux_is_zero(ref_cfg):
    inp = FluxInput("separator", np.full(3, CE), np.full(3, CS), 1.0, 0.0, T)
    assert np.all(flux(inp, ref_cfg.kinetics) == 0.0)
    assert np.all(flux_deta(inp, ref_cfg.kinetics) == 0.0)


@pytest.mark.parametrize(
    "ce,cs,name", [(0.0, CS, "ce"), (CE, 0.0, "csB"), (CE, 0.03, "cs_max - csB"), (CE, 0.05, "cs_max - csB")]
)
def test_domain_errors_name_the_argument(ref_cfg, ce, cs, name):
    with pytest.raises(KineticsDomainError, match=name):
        flux(FluxInput("anode", ce, cs, 0.2, 0.0, T), ref_cfg.kinetics)


def test_log_H_properties():
    s_inf = 6.0
    s = np.linspace(-10, 30, 2001)
    v = log_H(s, s_inf)
    assert np.array_equal(v[s <= s_inf], s[s <= s_inf])
    assert np.all(np.diff(v) > 0)
    assert log_H(1e6, s_inf) == pytest.approx(s_inf + math.log(2.0))
    assert np.max(np.exp(v)) < 2 * math.exp(s_inf)
    # C1 at the cut-off
    h = 1e-7
    left = (log_H(s_inf, s_inf) - log_H(s_inf - h, s_inf)) / h
    right = (log_H(s_inf + h, s_inf) - log_H(s_inf, s_inf)) / h
    assert left == pytest.approx(1.0, rel=1e-6) and right == pytest.approx(1.0, rel=1e-6)
    assert dlog_H(s_inf + 3.0, s_inf) == pytest.approx(math.exp(-3.0) / (2 - math.exp(-3.0)))


def test_stub_mode_is_linear(ref_cfg):
    kp = replace(ref_cfg.kinetics, mode="stub-linear", g0=2.5)
    mode = FluxMode.from_params(kp)
    U = ocp("anode", CE, CS, T, kp)
    j = flux(FluxInput("anode", CE, CS, 0.3, 0.1, T), kp, mode)
    assert j == pytest.approx(2.5 * (0.3 - 0.1 - U), rel=1e-13)
    assert flux_deta(FluxInput("anode", CE, CS, 0.3, 0.1, T), kp, mode) == pytest.approx(2.5)


def test_flux_mode_validation():
    with pytest.raises(ValueError):
        FluxMode("truncated")
    with pytest.raises(ValueError):
        FluxMode("stub-linear", g0=0.0)
    with pytest.raises(ValueError):
        FluxMode("cubic")


def test_ocp_dT_matches_difference(ref_cfg):
    kp = ref_cfg.kinetics
    h = 1e-3
    fd = (ocp("cathode", CE, 0.02, T + h, kp) - ocp("cathode", CE, 0.02, T - h, kp)) / (2 * h)
    assert ocp_dT("cathode", CE, 0.02, T, kp) == pytest.approx(fd, rel=1e-8)


def _random_point(draw_region, ce, theta, Tv, eta, kp):
    cs = theta * kp.cs_max
    U = ocp(draw_region, ce, cs, Tv, kp)
    return FluxInput(draw_region, ce, cs, U + eta, 0.0, Tv)


@settings(max_examples=200, deadline=None)
@given(
    region=st.sampled_from(["anode", "cathode"]),
    ce=st.floats(1e-5, 1e-2),
    theta=st.floats(1e-3, 1 - 1e-3),
    Tv=st.floats(250.0, 350.0),
    eta=st.floats(-0.25, 0.25),
    truncated=st.booleans(),
)
def test_flux_monotone_and_derivative(ref_cfg, region, ce, theta, Tv, eta, truncated):
    kp = ref_cfg.kinetics
    a = ref_cfg.transport.alpha_phie
    mode = FluxMode("truncated" if truncated else "exponential", kp.s_inf)
    inp = _random_point(region, ce, theta, Tv, eta, kp)
    d = flux_deta(inp, kp, mode, a)
    assert d > 0
    h = 1e-6
    up = flux(replace(inp, phis=inp.phis + h), kp, mode, a)
    dn = flux(replace(inp, phis=inp.phis - h), kp, mode, a)
    fd = (up - dn) / (2 * h)
    assert fd == pytest.approx(d, rel=1e-5)


def test_region_flux_value_and_deriv_agree(ref_cfg):
    kp = ref_cfg.kinetics
    rf = RegionFlux("cathode", np.full(4, 1e-3), np.linspace(0.005, 0.025, 4), T, kp, FluxMode("exponential"))
    Phi = np.linspace(-0.1, 0.1, 4)
    v, d = rf.value_and_deriv(Phi)
    assert np.allclose(v, rf.value(Phi), rtol=0, atol=0)
    assert np.allclose(d, rf.deriv(Phi), rtol=0, atol=0)
    assert np.all(rf.exchange(Phi) >= np.abs(v))


# ---------------------------------------------------------------- linter


def _kp_with_lambda(kp, lam):
    o = kp.ocp
    tab = {"anode": (0.0, lam), "cathode": (0.0, lam)}
    return replace(kp, ocp=replace(o, lambda_min=tab, lambda_max=tab))


def test_linter_reference_satisfied(ref_cfg):
    rep = check_exponent_conditions(ref_cfg.kinetics, ref_cfg.transport.alpha_phie, ref_cfg.thermal.T_range)
    assert rep.ok
    assert {e.status for e in rep.entries} == {"satisfied"}
    assert len(rep.entries) == 16


def test_linter_violation_named(ref_cfg):
    kp = _kp_with_lambda(ref_cfg.kinetics, 8.0e-5)
    rep = check_exponent_conditions(kp, ref_cfg.transport.alpha_phie, ref_cfg.thermal.T_range)
    assert not rep.ok
    assert {e.condition for e in rep.violations} == {"cs_plus", "cs_gap_minus"}
    assert "VIOLATED" in str(rep) and "cs_plus" in str(rep)


def test_linter_threshold_value(ref_cfg):
    # (1 - 1/2) / 5805.5
    kp = _kp_with_lambda(ref_cfg.kinetics, 8.61e-5)
    rep = check_exponent_conditions(kp, 0.0, (250.0, 350.0))
    e = [x for x in rep.entries if x.condition == "cs_plus"][0]
    assert e.threshold == pytest.approx(0.5 / 5805.5, rel=1e-15)
    assert e.status == "boundary"
    assert e.margin == pytest.approx(8.61e-5 - 0.5 / 5805.5, rel=1e-9)


def test_linter_ce_condition_from_alpha_phie(ref_cfg):
    kp = ref_cfg.kinetics
    rep = check_exponent_conditions(kp, 1e-5, (250.0, 350.0))
    assert {e.condition for e in rep.violations} == {"ce_minus"}


def test_linter_rejects_bad_range(ref_cfg):
    with pytest.raises(ValueError):
        check_exponent_conditions(ref_cfg.kinetics, 0.0, (0.0, 300.0))


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(1e-6, 3e-4), a=st.floats(0.05, 0.95))
def test_linter_margin_sign_matches_inequality(ref_cfg, lam, a):
    kp = replace(_kp_with_lambda(ref_cfg.kinetics, lam), alpha_s=a, beta_a=a)
    rep = check_exponent_conditions(kp, 1.0, (250.0, 350.0))
    thr = (1 - a) / kp.gamma1
    for e in rep.entries:
        if e.condition in ("cs_plus", "cs_gap_minus"):
            assert e.margin == pytest.approx(lam - thr, rel=1e-9, abs=1e-18)
            assert (e.status == "violated") == (lam - thr < -1e-3 * thr)
