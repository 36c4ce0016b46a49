"""Time stepping as a fixed-point map on ``(ce, csB, T)``.

One Picard sweep solves the potentials on the current iterate, turns the
resulting flux into electrolyte, particle and temperature updates from the
old state, and measures the scaled sup-norm change.  Steps that do not
converge, or that leave the admissible set, are retried with half the step.
Accepted states are checked against the blow-up monitors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .diagnostics import TimeSeriesRecord, electrolyte_total, make_record, solid_totals
from .electrolyte import electrolyte_matrix, step_electrolyte
from .kinetics import KineticsDomainError
from .model import CellModel
from .params import MonitorOptions, SolverOptions
from .particle import boundary_trace, step_all_particles
from .potentials import EllipticOptions, PotentialSolution, SolverFailure, solve_potentials
from .profile import CurrentProfile
from .state import CellState, admissibility_violation, state_slice
from .thermal import HeatBreakdown, heat_sources, step_temperature

__all__ = [
    "HALT_TAGS",
    "HaltReason",
    "StepReport",
    "TimeSeries",
    "RunOptions",
    "Simulator",
    "check_monitors",
    "picard_step",
    "run",
]

HALT_TAGS = (
    "csB_min_zero",
    "csB_max_saturation",
    "ce_min_zero",
    "ce_unbounded",
    "T_min_zero",
    "T_unbounded",
    "potential_divergence",
    "solver_failure",
)


@dataclass(frozen=True)
class HaltReason:
    tag: str
    t: float
    value: float
    location: Dict[str, object] = field(default_factory=dict)
    message: str = ""

    def __post_init__(self):
        if self.tag not in HALT_TAGS:
            raise ValueError(f"unknown halt tag {self.tag!r}")

    def to_dict(self) -> dict:
        return {"tag": self.tag, "t": self.t, "value": self.value, "location": dict(self.location),
                "message": self.message}


@dataclass(frozen=True)
class StepReport:
    t: float
    dt: float
    I: float
    picard_iters: int
    picard_residual: float
    picard_history: Tuple[float, ...]
    newton_iters: Tuple[int, ...]
    halvings: int
    compat: Tuple[float, float, float]  # anode, cathode, total; scaled
    heat: HeatBreakdown
    halted: Optional[HaltReason] = None
    failure: str = ""


@dataclass
class TimeSeries:
    records: List[TimeSeriesRecord]
    reports: List[StepReport]
    halt: Optional[HaltReason]
    final_state: CellState
    snapshots: List[CellState]
    t_end: float

    @property
    def completed(self) -> bool:
        return self.halt is None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


@dataclass(frozen=True)
class RunOptions:
    dt0: float = 1.0
    dt_min: float = 1e-6
    dt_max: Optional[float] = None
    picard_tol: float = 1e-9
    max_picard: int = 25
    newton_tol: float = 1e-10
    max_newton: int = 50
    grow_after: int = 5
    grow_factor: float = 1.2
    threads: int = 1
    record_every: int = 1
    snapshots: str | int = "none"  # none | all | every N steps
    monitors: MonitorOptions = field(default_factory=MonitorOptions)

    @classmethod
    def from_config(cls, so: SolverOptions, monitors: MonitorOptions, **overrides) -> "RunOptions":
        base = {k: getattr(so, k) for k in SolverOptions.__dataclass_fields__}
        base.update({k: v for k, v in overrides.items() if v is not None})
        base["monitors"] = monitors
        return cls(**base)

    @property
    def elliptic(self) -> EllipticOptions:
        return EllipticOptions(newton_tol=self.newton_tol, max_iters=self.max_newton)


class _Failure(Exception):
    def __init__(self, kind: str, detail: str):
        super().__init__(detail)
        self.kind = kind
        self.detail = detail


def check_monitors(model: CellModel, state: CellState, solution: PotentialSolution | None,
                   monitors: MonitorOptions, ce_ref: float) -> Optional[HaltReason]:
    """First violated blow-up guard, or ``None``."""
    m = model.mesh
    cs_max = model.config.kinetics.cs_max
    t = float(state.t)
    csB = np.concatenate((boundary_trace(state.cs_neg, m.particle_neg), boundary_trace(state.cs_pos, m.particle_pos)))
    el = model.el_idx
    margin = monitors.csB_margin_rel * cs_max
    i = int(np.argmin(csB))
    if csB[i] <= margin:
        return HaltReason("csB_min_zero", t, float(csB[i]), {"cell": int(el[i]), "x": float(m.centers[el[i]])},
                          f"surface concentration {csB[i]:.6g} <= {margin:.3g}")
    i = int(np.argmax(csB))
    if csB[i] >= cs_max - margin:
        return HaltReason("csB_max_saturation", t, float(csB[i]), {"cell": int(el[i]), "x": float(m.centers[el[i]])},
                          f"surface concentration {csB[i]:.6g} >= cs_max - {margin:.3g}")
    i = int(np.argmin(state.ce))
    if state.ce[i] <= monitors.ce_floor_rel * ce_ref:
        return HaltReason("ce_min_zero", t, float(state.ce[i]), {"cell": i, "x": float(m.centers[i])},
                          "electrolyte concentration below floor")
    i = int(np.argmax(state.ce))
    if state.ce[i] >= monitors.ce_cap_rel * ce_ref:
        return HaltReason("ce_unbounded", t, float(state.ce[i]), {"cell": i, "x": float(m.centers[i])},
                          "electrolyte concentration above cap")
    if state.T <= monitors.T_min:
        return HaltReason("T_min_zero", t, float(state.T), {}, f"T <= {monitors.T_min}")
    if state.T >= monitors.T_max:
        return HaltReason("T_unbounded", t, float(state.T), {}, f"T >= {monitors.T_max}")
    if solution is not None:
        Phi = np.abs(solution.Phi)
        i = int(np.argmax(Phi))
        if Phi[i] >= monitors.phi_cap:
            return HaltReason("potential_divergence", t, float(Phi[i]), {"cell": int(el[i])},
                              f"|phis - phie_li| >= {monitors.phi_cap}")
    return None


class Simulator:
    """Stepping engine bound to one model and one set of run options."""

    def __init__(self, model: CellModel, opts: RunOptions | None = None):
        self.model = model
        self.opts = opts or RunOptions()
        self._mats: Dict[float, tuple] = {}
        cfg = model.config
        self.ce_ref = float(np.mean(np.atleast_1d(cfg.initial.ce0)))
        self.T_ref = float(cfg.thermal.T_amb)

    # ------------------------------------------------------------ helpers
    def _electrolyte_ab(self, dt):
        key = ("e", dt)
        if key not in self._mats:
            if len(self._mats) > 64:
                self._mats.clear()
            self._mats[key] = electrolyte_matrix(self.model.mesh, self.model.De_c, dt)
        return self._mats[key]

    def _solve(self, data, I, guess):
        try:
            return solve_potentials(self.model, data, I, self.opts.elliptic, guess=guess)
        except SolverFailure as exc:
            raise _Failure("newton", str(exc)) from None
        except KineticsDomainError as exc:
            raise _Failure("domain", str(exc)) from None

    def solve_at(self, state: CellState, I: float) -> PotentialSolution:
        data = state_slice(self.model, state.ce, state.cs_neg, state.cs_pos, state.T)
        guess = None if state.phie_li is None else (state.phie_li, state.phis)
        return solve_potentials(self.model, data, I, self.opts.elliptic, guess=guess)

    # ------------------------------------------------------------ one attempt
    def attempt(self, state: CellState, t1: float, I: float, dt: float):
        """One fixed-``dt`` Picard solve; raises ``_Failure`` on non-convergence or inadmissibility."""
        model, o = self.model, self.opts
        cfg = model.config
        m = model.mesh
        tr, tp = cfg.transport, cfg.thermal
        cs_max = cfg.kinetics.cs_max
        ab = self._electrolyte_ab(dt)
        ce_old, cn_old, cp_old, T_old = state.ce, state.cs_neg, state.cs_pos, state.T
        ce_k, cn_k, cp_k, T_k = ce_old, cn_old, cp_old, T_old
        csB_k = np.concatenate((boundary_trace(cn_k, m.particle_neg), boundary_trace(cp_k, m.particle_pos)))
        guess = None if state.phie_li is None else (state.phie_li, state.phis)
        reuse = state.solution if (state.solution is not None and state.solution.I == I) else None
        hist: List[float] = []
        newton: List[int] = []
        heat = HeatBreakdown.zero()
        for it in range(1, o.max_picard + 1):
            data = state_slice(model, ce_k, cn_k, cp_k, T_k)
            if it == 1 and reuse is not None:
                sol = reuse
                newton.append(0)
            else:
                sol = self._solve(data, I, guess)
                newton.append(sol.newton_iters)
            guess = (sol.phie_li, sol.phis)
            j = sol.j
            ce_n = step_electrolyte(ce_old, j, None, tr.alpha_e, dt, m, ab=ab)
            cn_n = step_all_particles(cn_old, j[m.anode], tr.alpha_s_neg, tr.Ds_neg, dt, m.particle_neg, o.threads)
            cp_n = step_all_particles(cp_old, j[m.cathode], tr.alpha_s_pos, tr.Ds_pos, dt, m.particle_pos, o.threads)
            if tp.mode != "zero":
                heat = heat_sources(model, data, sol, I)
                T_n, ok = step_temperature(T_old, heat, tp, dt)
            else:
                T_n, ok = step_temperature(T_old, None, tp, dt)
            bad = admissibility_violation(model, ce_n, cn_n, cp_n, T_n)
            if bad is not None:
                raise _Failure("inadmissible", bad[3])
            csB_n = np.concatenate((boundary_trace(cn_n, m.particle_neg), boundary_trace(cp_n, m.particle_pos)))
            res = max(
                float(np.max(np.abs(ce_n - ce_k))) / self.ce_ref,
                float(np.max(np.abs(csB_n - csB_k))) / cs_max,
                abs(T_n - T_k) / self.T_ref,
            )
            hist.append(res)
            ce_k, cn_k, cp_k, T_k, csB_k = ce_n, cn_n, cp_n, T_n, csB_n
            if res <= o.picard_tol:
                break
        else:
            raise _Failure("picard", f"Picard did not converge in {o.max_picard} sweeps (last {hist[-1]:.3e})")
        new = CellState(t1, ce_k, cn_k, cp_k, T_k)
        final = self._solve(state_slice(model, ce_k, cn_k, cp_k, T_k), I, guess)
        newton.append(final.newton_iters)
        new = replace(new, phie_li=final.phie_li, phis=final.phis, solution=final)
        return new, sol, hist, newton, heat

    # ------------------------------------------------------------ one step with halving
    def picard_step(self, state: CellState, profile: CurrentProfile, dt: float,
                    t_land: float | None = None):
        """Advance by ``dt`` (or to ``t_land``), halving on failure down to ``dt_min``."""
        o = self.opts
        t0 = state.t
        h = (t_land - t0) if t_land is not None else dt
        halvings = 0
        last = ""
        while True:
            t1 = t0 + h if (halvings > 0 or t_land is None) else t_land
            I = profile.current_for_step(t0, t1)
            try:
                new, sol, hist, newton, heat = self.attempt(state, t1, I, h)
                break
            except _Failure as f:
                last = f"{f.kind}: {f.detail}"
                h *= 0.5
                halvings += 1
                if h < o.dt_min:
                    halt = HaltReason("solver_failure", float(t0), float(h * 2), {"dt": h * 2}, last)
                    rep = StepReport(t0, h * 2, I, 0, math.nan, (), (), halvings, (math.nan,) * 3,
                                     HeatBreakdown.zero(), halt, last)
                    return state, rep
        sc = sol.scale
        rep = StepReport(
            t=float(t1),
            dt=float(h),
            I=float(I),
            picard_iters=len(hist),
            picard_residual=hist[-1],
            picard_history=tuple(hist),
            newton_iters=tuple(newton),
            halvings=halvings,
            compat=(sol.compat_anode / sc, sol.compat_cathode / sc, sol.j_total / sc),
            heat=heat,
            failure=last,
        )
        return new, rep

    # ------------------------------------------------------------ full run
    def run(self, state0: CellState, profile: CurrentProfile) -> TimeSeries:
        o = self.opts
        model = self.model
        m = model.mesh
        state = state0
        t_end = profile.t_end_I
        I0 = profile(0.0)
        if state.solution is None or state.solution.I != I0:
            sol0 = self.solve_at(state, I0)
            state = replace(state, phie_li=sol0.phie_li, phis=sol0.phis, solution=sol0)
        baseline = {
            "ce": electrolyte_total(state.ce, m),
            "solid": solid_totals(state.cs_neg, state.cs_pos, m)["total"],
        }
        heat0 = self._heat(state, state.solution, I0)
        records = [make_record(model, state, state.solution, I0, heat0, baseline)]
        reports: List[StepReport] = []
        snaps = [state] if o.snapshots != "none" else []
        halt = check_monitors(model, state, state.solution, o.monitors, self.ce_ref)
        dt = o.dt0
        dt_max = o.dt_max if o.dt_max is not None else o.dt0
        easy = 0
        n = 0
        while halt is None and state.t < t_end:
            t = state.t
            bp = profile.next_breakpoint(t)
            step = min(dt, dt_max)
            land = bp if t + step >= bp - 1e-9 * max(step, 1.0) else None
            new, rep = self.picard_step(state, profile, step, t_land=land)
            reports.append(rep)
            if rep.halted is not None:
                halt = rep.halted
                break
            n += 1
            if rep.halvings == 0:
                easy += 1
                if easy >= o.grow_after:
                    dt = min(dt * o.grow_factor, dt_max)
                    easy = 0
            else:
                dt = rep.dt
                easy = 0
            state = new
            halt = check_monitors(model, state, state.solution, o.monitors, self.ce_ref)
            if n % o.record_every == 0 or halt is not None or state.t >= t_end:
                records.append(make_record(model, state, state.solution, rep.I, rep.heat, baseline, rep.dt,
                                           rep.picard_iters, sum(rep.newton_iters)))
            if o.snapshots == "all" or (isinstance(o.snapshots, int) and o.snapshots > 0 and n % o.snapshots == 0):
                snaps.append(state)
            if halt is None and land is not None and state.t < t_end:
                # restart: fresh potentials for the next piece
                I_next = profile(state.t)
                if I_next != rep.I:
                    try:
                        s2 = self.solve_at(state, I_next)
                        state = replace(state, phie_li=s2.phie_li, phis=s2.phis, solution=s2)
                    except (SolverFailure, KineticsDomainError) as exc:
                        halt = HaltReason("solver_failure", float(state.t), math.nan, {}, str(exc))
        return TimeSeries(records, reports, halt, state, snaps, t_end)

    def _heat(self, state, sol, I):
        if self.model.config.thermal.mode == "zero":
            return HeatBreakdown.zero()
        data = state_slice(self.model, state.ce, state.cs_neg, state.cs_pos, state.T)
        return heat_sources(self.model, data, sol, I)


def picard_step(model: CellModel, state: CellState, profile: CurrentProfile, opts: RunOptions | None = None,
                dt: float | None = None):
    """One accepted step (with halving) from ``state``; returns ``(state, StepReport)``."""
    sim = Simulator(model, opts)
    return sim.picard_step(state, profile, dt if dt is not None else sim.opts.dt0)


def run(model: CellModel, state0: CellState, profile: CurrentProfile, opts: RunOptions | None = None) -> TimeSeries:
    """Advance from ``state0`` to ``profile.t_end_I`` or to the first halt."""
    return Simulator(model, opts).run(state0, profile)
