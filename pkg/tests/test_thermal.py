from __future__ import annotations

import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2dcell.state import state_slice
from p2dcell.thermal import (
    HeatBreakdown,
    LinearCoefficients,
    heat_sources,
    linear_coefficients,
    relaxation_step,
    step_temperature,
)
from p2dcell.verification import thermal_study


def test_source_free_exact(ref_cfg):
    s = thermal_study(ref_cfg.thermal)
    assert s.errors[0] <= 1e-10


def test_implicit_euler_is_first_order(ref_cfg):
    # kept as an option; at dt = 1e-3/alpha_T its error is about 5e-4 * |T0 - T_amb| / 2.7
    e1 = thermal_study(ref_cfg.thermal, dt_factor=1e-2, scheme="implicit-euler").errors[0]
    e2 = thermal_study(ref_cfg.thermal, dt_factor=5e-3, scheme="implicit-euler").errors[0]
    assert math.log2(e1 / e2) == pytest.approx(1.0, abs=0.05)
    e3 = thermal_study(ref_cfg.thermal, scheme="implicit-euler").errors[0]
    assert 1e-4 < e3 < 2e-4


@settings(max_examples=100, deadline=None)
@given(T=st.floats(1.0, 1000.0), k=st.floats(-1e-2, 1e-1), b=st.floats(-10, 10), dt=st.floats(1e-3, 1e3))
def test_relaxation_step_solves_linear_ode(T, k, b, dt):
    got = relaxation_step(T, k, b, dt)
    with mpmath.workdps(50):
        K, B, TT, h = (mpmath.mpf(v) for v in (k, b, T, dt))
        exact = TT + B * h if K == 0 else TT * mpmath.exp(-K * h) - B * mpmath.expm1(-K * h) / K
    assert got == pytest.approx(float(exact), rel=1e-12, abs=1e-12 * (abs(T) + abs(b) * dt))


def test_constant_source_steady_state(ref_cfg):
    tp = ref_cfg.thermal
    heat = HeatBreakdown(0.3, 0.0, 0.0, 0.0)
    T, _ = step_temperature(300.0, heat, tp, 1e6)
    assert T == pytest.approx(tp.T_amb + 0.3 / tp.heat_capacity / tp.alpha_T, rel=1e-12)


def test_linear_coefficients_clamped(ref_cfg):
    tp = ref_cfg.thermal
    big = HeatBreakdown(100.0, 5.0, 1.0, 50.0)
    lc = linear_coefficients(big, 300.0, tp)
    assert lc.B_T == tp.B_T_max
    assert lc.A_T == tp.A_T_bounds[1]
    neg = linear_coefficients(HeatBreakdown(-1.0, 0.0, 0.0, -50.0), 300.0, tp)
    assert neg.B_T == 0.0 and neg.A_T == tp.A_T_bounds[0]
    mid = linear_coefficients(HeatBreakdown(0.3, 0.0, 0.0, 0.09), 300.0, tp)
    assert mid.B_T == pytest.approx(0.01) and mid.A_T == pytest.approx(1e-5)


def test_linear_mode_uses_coefficients(ref_cfg):
    tp = replace(ref_cfg.thermal, mode="linear-truncated")
    heat = HeatBreakdown(0.3, 0.0, 0.0, 0.09)
    a, _ = step_temperature(300.0, heat, tp, 10.0)
    b, _ = step_temperature(300.0, LinearCoefficients(1e-5, 0.01), tp, 10.0)
    k = tp.alpha_T - 1e-5
    assert a == b == pytest.approx(relaxation_step(300.0, k, tp.alpha_T * tp.T_amb + 0.01, 10.0))


def test_step_rejects_bad_input(ref_cfg):
    with pytest.raises(ValueError):
        step_temperature(-1.0, None, ref_cfg.thermal, 1.0)
    T, ok = step_temperature(1.0, HeatBreakdown(-1e6, 0, 0, 0), ref_cfg.thermal, 10.0)
    assert not ok


def test_contact_heat_and_equilibrium(ref_model, ref_state0):
    data = state_slice(ref_model, ref_state0.ce, ref_state0.cs_neg, ref_state0.cs_pos, ref_state0.T)
    from p2dcell.potentials import solve_potentials

    sol0 = solve_potentials(ref_model, data, 0.0)
    h0 = heat_sources(ref_model, data, sol0, 0.0)
    assert abs(h0.q_r) < 1e-12 and abs(h0.q_j) < 1e-12 and h0.q_c == 0.0
    I = 3.2
    sol = solve_potentials(ref_model, data, I)
    h = heat_sources(ref_model, data, sol, I)
    g = ref_model.config.geometry
    assert h.q_c == pytest.approx(g.Rf / g.A * I**2)
    assert h.q_r > 0 and h.q_j > 0
    assert h.total == pytest.approx(h.q_r + h.q_j + h.q_c + h.q_e)


def test_ohmic_heat_matches_voltage_loss(ref_model, ref_state0):
    """With uniform ce the electrolyte and solid ohmic terms are the field energies."""
    data = state_slice(ref_model, ref_state0.ce, ref_state0.cs_neg, ref_state0.cs_pos, ref_state0.T)
    from p2dcell.potentials import solve_potentials

    I = 1.0
    sol = solve_potentials(ref_model, data, I)
    h = heat_sources(ref_model, data, sol, I)
    # scaling: ohmic heat is quadratic in small currents
    sol2 = solve_potentials(ref_model, data, 2 * I)
    h2 = heat_sources(ref_model, data, sol2, 2 * I)
    assert h2.q_j / h.q_j == pytest.approx(4.0, rel=2e-2)
    assert np.isfinite(h.q_e)
