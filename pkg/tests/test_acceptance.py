"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line; the lines are printed together in the
terminal summary (see ``conftest.py``) and, with ``-s``, as each test runs.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from p2dcell.cli import main as cli_main
from p2dcell.coupler import RunOptions, picard_step, run
from p2dcell.diagnostics import conservation_ledger, voltage
from p2dcell.kinetics import FluxInput, FluxMode, RegionFlux, check_exponent_conditions, flux_deta, ocp
from p2dcell.model import CellModel
from p2dcell.particle import boundary_trace, particle_mass, step_particle
from p2dcell.potentials import EllipticProblem
from p2dcell.profile import constant_profile
from p2dcell.state import initial_state, state_slice
from p2dcell.verification import (
    elliptic_study,
    electrolyte_spatial_study,
    electrolyte_temporal_study,
    particle_spatial_study,
    particle_temporal_study,
    thermal_study,
)

from .conftest import ACCEPTANCE_LINES, matched_cycle_config, random_admissible, small_config


def _verdict(n: int, name: str, checks: dict) -> None:
    """Record one line for criterion ``n`` and fail on any false sub-check."""
    ok = all(v[0] for v in checks.values())
    detail = "; ".join(f"{k}={v[1]}{'' if v[0] else ' (FAIL)'}" for k, v in checks.items())
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {name} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    bad = [k for k, v in checks.items() if not v[0]]
    assert not bad, f"criterion {n} failed: {bad}"


def _fmt(x) -> str:
    return f"{x:.3g}"


# ---------------------------------------------------------------- 1


def test_c01_electrolyte_conservation(cycle_run, ref_model):
    ts = cycle_run
    drift = np.max(np.abs(ts.column("ce_drift")))
    led = conservation_ledger(ref_model, ts.snapshots)
    _verdict(1, "electrolyte conservation", {
        "steps": (len(ts.reports) >= 1000 and ts.completed, len(ts.reports)),
        "max_drift": (drift <= 1e-8, _fmt(drift)),
        "snapshot_drift": (led["electrolyte_drift_max"] <= 1e-8, _fmt(led["electrolyte_drift_max"])),
    })


# ---------------------------------------------------------------- 2


def test_c02_compatibility(cycle_run):
    ts = cycle_run
    ca = np.max(np.abs(ts.column("compat_anode")))
    cc = np.max(np.abs(ts.column("compat_cathode")))
    jt = np.max(np.abs(ts.column("j_total")))
    picard_worst = max(max(abs(c) for c in r.compat[:2]) for r in ts.reports)
    _verdict(2, "compatibility integrals", {
        "anode": (ca <= 1e-8, _fmt(ca)),
        "cathode": (cc <= 1e-8, _fmt(cc)),
        "total": (jt <= 1e-10, _fmt(jt)),
        "inner_solves": (picard_worst <= 1e-8, _fmt(picard_worst)),
    })


# ---------------------------------------------------------------- 3


def test_c03_gauge(cycle_run, ref_model):
    m = ref_model.mesh
    w = m.widths
    kp = ref_model.config.kinetics
    a = ref_model.config.transport.alpha_phie
    g = ref_model.config.geometry
    worst_gauge = 0.0
    flux_bits = True
    worst_V = 0.0
    rng = np.random.default_rng(3)
    for s in cycle_run.snapshots:
        sol = s.solution
        u = sol.phie_li
        worst_gauge = max(worst_gauge, abs(np.dot(w, u)) / (np.linalg.norm(u) * np.sum(w) + 1e-300))
        C = rng.uniform(-20.0, 20.0)
        sh = sol.shifted(C)
        for region, sl, cs, lo, hi in (
            ("anode", m.anode, s.cs_neg, 0, ref_model.Na),
            ("cathode", m.cathode, s.cs_pos, ref_model.Na, None),
        ):
            csB = boundary_trace(cs, m.particle_neg if region == "anode" else m.particle_pos)
            rf = RegionFlux(region, s.ce[sl], csB, s.T, kp, ref_model.flux_mode, a, np.log(s.ce[sl]))
            flux_bits &= rf.value(sh.Phi[lo:hi]).tobytes() == rf.value(sol.Phi[lo:hi]).tobytes()
        worst_V = max(worst_V, abs(voltage(sh, sol.I, g) - voltage(sol, sol.I, g)))
    _verdict(3, "gauge and shift invariance", {
        "solves": (len(cycle_run.snapshots) > 1000, len(cycle_run.snapshots)),
        "weighted_mean": (worst_gauge <= 1e-12, _fmt(worst_gauge)),
        "flux_bit_exact": (flux_bits, flux_bits),
        "V_shift": (worst_V <= 1e-14, _fmt(worst_V)),
    })


# ---------------------------------------------------------------- 4


def test_c04_monotonicity_jacobian_newton(ref_cfg, ref_model, ref_state0, cycle_run):
    kp = ref_cfg.kinetics
    a = ref_cfg.transport.alpha_phie
    rng = np.random.default_rng(4)
    n_samples = 0
    d_min = np.inf
    for k in range(20):
        region = ("anode", "cathode")[k % 2]
        mode = FluxMode("truncated" if k % 4 >= 2 else "exponential", kp.s_inf)
        ce, cs, T = random_admissible(rng, kp, 500)
        eta = rng.uniform(-0.3, 0.3, ce.size)
        U = ocp(region, ce, cs, T, kp)
        d = flux_deta(FluxInput(region, ce, cs, U + eta, 0.0, T), kp, mode, a)
        d_min = min(d_min, float(np.min(d)))
        n_samples += ce.size

    s = ref_state0
    data = state_slice(ref_model, s.ce, s.cs_neg, s.cs_pos, s.T)
    prob = EllipticProblem(ref_model, data, 3.2)
    u = s.phie_li + 1e-3 * rng.normal(size=s.phie_li.size)
    v = s.phis + 1e-3 * rng.normal(size=s.phis.size)
    J = prob.jacobian(u, v).toarray()
    z = np.concatenate((u, v))
    N = u.size
    fd = np.empty_like(J)
    for i in range(z.size):
        h = 1e-7 * max(1.0, abs(z[i]))
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        fd[:, i] = (prob.residual(zp[:N], zp[N:])[0] - prob.residual(zm[:N], zm[N:])[0]) / (2 * h)
    jac_err = float(np.max(np.abs(J - fd)) / np.max(np.abs(J)))

    newton_max = max(max(r.newton_iters) for r in cycle_run.reports)
    _verdict(4, "monotonicity, Jacobian, Newton", {
        "samples": (n_samples >= 10_000, n_samples),
        "min_dj_deta": (d_min > 0, _fmt(d_min)),
        "jacobian_rel": (jac_err <= 1e-5, _fmt(jac_err)),
        "newton_max": (newton_max <= 15, newton_max),
    })


# ---------------------------------------------------------------- 5


def test_c05_convergence_orders():
    spatial = [elliptic_study(), particle_spatial_study(), electrolyte_spatial_study()]
    temporal = [particle_temporal_study(), electrolyte_temporal_study()]
    checks = {}
    for s in spatial:
        checks[f"{s.name} (space)"] = (all(abs(o - 2.0) <= 0.2 for o in s.orders), _fmt(s.observed))
    for s in temporal:
        checks[f"{s.name} (time)"] = (all(abs(o - 1.0) <= 0.2 for o in s.orders), _fmt(s.observed))
    _verdict(5, "convergence orders", checks)


# ---------------------------------------------------------------- 6


def test_c06_particle_mass_balance(ref_cfg, ref_model):
    rng = np.random.default_rng(6)
    worst = 0.0
    steps = 0
    for region, grid in (("anode", ref_model.mesh.particle_neg), ("cathode", ref_model.mesh.particle_pos)):
        Ds = ref_cfg.transport.Ds(region)
        for _ in range(100):
            c = ref_cfg.kinetics.cs_max * rng.uniform(0.3, 0.7, grid.n)
            for _ in range(20):
                dt = 10 ** rng.uniform(-3, 1)
                g = rng.uniform(-1, 1) * 0.01 * np.mean(c) * grid.Rs / (3 * dt)
                m0 = particle_mass(c, grid)
                c = step_particle(c, g, Ds, dt, grid)
                worst = max(worst, abs(particle_mass(c, grid) - m0 + grid.Rs**2 * g * dt) / m0)
                steps += 1
    _verdict(6, "particle mass balance", {"steps": (steps == 4000, steps), "max_rel": (worst <= 1e-12, _fmt(worst))})


# ---------------------------------------------------------------- 7


def test_c07_matched_exchange(cycle_run, reference_raw):
    ref = float(np.max(np.abs(cycle_run.column("solid_drift"))))
    # unequal radii with Rs+^2 alpha_s+ = Rs-^2 alpha_s- on a coarse mesh
    cfg = small_config(reference_raw, n=6, nr=10)
    g, tr = cfg.geometry, cfg.transport
    cfg = replace(cfg, geometry=replace(g, Rs_pos=3e-6),
                  transport=replace(tr, alpha_s_pos=tr.alpha_s_neg * (g.Rs_neg / 3e-6) ** 2))
    cfg = matched_cycle_config(cfg, I=3.2, t_half=100.0)
    model = CellModel(cfg)
    s0 = initial_state(model)
    ts = run(model, s0, cfg.current, RunOptions.from_config(cfg.solver, cfg.monitors))
    led = conservation_ledger(model, [s0, ts.final_state])
    other = abs(led["solid_total_drift"])
    _verdict(7, "matched-exchange identity", {
        "reference_cycle": (ref <= 1e-8, _fmt(ref)),
        "unequal_radii": (ts.completed and other <= 1e-8 and led["exchange_mismatch"] == pytest.approx(0, abs=1e-30),
                          _fmt(other)),
    })


# ---------------------------------------------------------------- 8


def test_c08_thermal_relaxation(ref_cfg):
    tp = ref_cfg.thermal
    study = thermal_study(tp, T0=320.0)
    # the same relaxation through the full coupler, sources switched off
    cfg = replace(ref_cfg, thermal=replace(tp, mode="zero"), initial=replace(ref_cfg.initial, T0=320.0))
    model = CellModel(replace(cfg, mesh=replace(cfg.mesh, n_anode=5, n_separator=5, n_cathode=5,
                                                n_r_neg=6, n_r_pos=6)))
    dt = 1e-3 / tp.alpha_T
    ts = run(model, initial_state(model), constant_profile(0.0, 1000 * dt),
             RunOptions.from_config(cfg.solver, cfg.monitors, dt0=dt))
    t, T = ts.column("t"), ts.column("T")
    exact = tp.T_amb + (320.0 - tp.T_amb) * np.exp(-tp.alpha_T * t)
    coupled = float(np.max(np.abs(T - exact)) / abs(320.0 - tp.T_amb))
    _verdict(8, "thermal analytic relaxation", {
        "scalar": (study.errors[0] <= 1e-4, _fmt(study.errors[0])),
        "coupled": (ts.completed and coupled <= 1e-4, _fmt(coupled)),
    })


# ---------------------------------------------------------------- 9


def test_c09_blowup_taxonomy(ref_cfg):
    g = ref_cfg.geometry
    I = 8.0
    t_a = ref_cfg.initial.cs0_neg * g.A * g.L1 * g.Rs_neg / (3 * ref_cfg.transport.alpha_s_neg * I)
    prof = constant_profile(I, 2 * t_a)
    out = {}
    for mode in ("exponential", "truncated"):
        cfg = ref_cfg.with_mode(mode)
        model = CellModel(cfg)
        out[mode] = run(model, initial_state(model), prof, RunOptions.from_config(cfg.solver, cfg.monitors)).halt
    cfg = ref_cfg.with_mode("truncated+linearFT")
    model = CellModel(cfg)
    full = run(model, initial_state(model), cfg.current, RunOptions.from_config(cfg.solver, cfg.monitors))

    h = out["exponential"]
    a_ok = h is not None and h.tag in ("csB_min_zero", "csB_max_saturation") and abs(h.t - t_a) <= 0.2 * t_a
    forbidden = {"csB_min_zero", "csB_max_saturation", "ce_min_zero", "ce_unbounded", "potential_divergence"}
    ht = out["truncated"]
    _verdict(9, "blow-up taxonomy", {
        "a_exponential": (a_ok, f"{h.tag if h else None}@{h.t if h else float('nan'):.1f}s vs {t_a:.1f}s"),
        "b_truncated": (ht is None or ht.tag not in forbidden, ht.tag if ht else "completed"),
        "c_truncated_linearFT": (full.completed and full.final_state.t == cfg.current.t_end_I,
                                 full.halt.tag if full.halt else "completed"),
    })


# ---------------------------------------------------------------- 10


def test_c10_picard_contraction(cycle_run, ref_cfg, ref_model):
    ratio_max = 0.0
    iters = 0
    for r in cycle_run.reports:
        h = r.picard_history
        for x, y in zip(h, h[1:]):
            if x > 0:
                ratio_max = max(ratio_max, y / x)
        iters = max(iters, r.picard_iters)
    opts = RunOptions.from_config(ref_cfg.solver, ref_cfg.monitors)
    monotone = True
    for s in cycle_run.snapshots[::100]:
        counts = [picard_step(ref_model, s, ref_cfg.current, opts, dt=opts.dt0 / 2**k)[1].picard_iters
                  for k in range(4)]
        monotone &= all(b <= a for a, b in zip(counts, counts[1:]))
    _verdict(10, "Picard contraction", {
        "max_ratio": (ratio_max < 1.0, _fmt(ratio_max)),
        "max_iters": (iters <= 25, iters),
        "halving_monotone": (monotone, monotone),
    })


# ---------------------------------------------------------------- 11


def test_c11_parameter_linter(ref_cfg):
    def report(lam):
        o = ref_cfg.kinetics.ocp
        tab = {"anode": (0.0, lam), "cathode": (0.0, lam)}
        kp = replace(ref_cfg.kinetics, alpha_s=0.5, beta_a=0.5, alpha_a=0.5, gamma1=5805.5, gamma2=5805.5,
                     ocp=replace(o, lambda_min=tab, lambda_max=tab))
        return check_exponent_conditions(kp, ref_cfg.transport.alpha_phie, ref_cfg.thermal.T_range)

    edge = report(8.61e-5)
    e = [x for x in edge.entries if x.condition == "cs_plus"][0]
    low = report(8.0e-5)
    _verdict(11, "parameter linter", {
        "zero_margin": (abs(e.margin) <= 1e-8, f"{e.margin:.3g} ({e.status})"),
        "violation": ({x.condition for x in low.violations} >= {"cs_plus", "cs_gap_minus"},
                      ",".join(sorted({x.condition for x in low.violations}))),
    })


# ---------------------------------------------------------------- 12


def test_c12_determinism(tmp_path, capsys):
    codes = [cli_main(["simulate", "--out", str(tmp_path / n), "--threads", n]) for n in ("1", "8")]
    capsys.readouterr()
    a = (tmp_path / "1" / "series.csv").read_bytes()
    b = (tmp_path / "8" / "series.csv").read_bytes()
    _verdict(12, "determinism", {"exit_codes": (codes == [0, 0], codes), "identical_bytes": (a == b, a == b)})
