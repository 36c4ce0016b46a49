"""Derived outputs: voltage, state of charge and conservation ledgers."""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Dict, Sequence

import numpy as np

from .mesh import Mesh
from .params import CellGeometry
from .particle import boundary_trace, particle_mass

__all__ = [
    "TimeSeriesRecord",
    "SERIES_COLUMNS",
    "voltage",
    "soc",
    "electrolyte_total",
    "solid_totals",
    "exchange_mismatch",
    "conservation_ledger",
    "make_record",
]


def voltage(solution, I: float, geometry: CellGeometry) -> float:
    """``V = phis(L) - phis(0) - (Rf/A) I``."""
    return solution.phis_L - solution.phis_0 - geometry.Rf / geometry.A * I


def soc(cs_neg, geometry: CellGeometry, mesh: Mesh, cs_max: float) -> float:
    """Normalized anode lithium content ``3/(L1 Rs^3) int int r^2 cs/cs_max``."""
    per_node = particle_mass(np.asarray(cs_neg) / cs_max, mesh.particle_neg)
    return float(3.0 / (geometry.L1 * geometry.Rs_neg**3) * np.dot(mesh.widths[mesh.anode], per_node))


def electrolyte_total(ce, mesh: Mesh) -> float:
    return float(np.dot(mesh.widths, ce))


def solid_totals(cs_neg, cs_pos, mesh: Mesh) -> Dict[str, float]:
    """``int int cs r^2 dr dx`` per electrode (shell-volume weighted)."""
    a = float(np.dot(mesh.widths[mesh.anode], particle_mass(cs_neg, mesh.particle_neg)))
    c = float(np.dot(mesh.widths[mesh.cathode], particle_mass(cs_pos, mesh.particle_pos)))
    return {"anode": a, "cathode": c, "total": a + c}


def exchange_mismatch(geometry: CellGeometry, alpha_s_neg: float, alpha_s_pos: float) -> float:
    """``Rs+^2 alpha_s+ - Rs-^2 alpha_s-``; zero means anode losses are received by the cathode."""
    return geometry.Rs_pos**2 * alpha_s_pos - geometry.Rs_neg**2 * alpha_s_neg


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    dt: float
    I: float
    V: float
    SOC: float
    T: float
    ce_min: float
    ce_max: float
    csB_min: float
    csB_max: float
    ce_drift: float
    solid_drift: float
    solid_anode: float
    solid_cathode: float
    compat_anode: float
    compat_cathode: float
    j_total: float
    q_r: float
    q_j: float
    q_c: float
    q_e: float
    picard_iters: int
    newton_iters: int

    def row(self):
        return [getattr(self, f.name) for f in fields(self)]


SERIES_COLUMNS = tuple(f.name for f in fields(TimeSeriesRecord))


def make_record(model, state, solution, I: float, heat, baseline: Dict[str, float], dt: float = 0.0,
                picard_iters: int = 0, newton_iters: int = 0) -> TimeSeriesRecord:
    cfg = model.config
    m = model.mesh
    csBn = boundary_trace(state.cs_neg, m.particle_neg)
    csBp = boundary_trace(state.cs_pos, m.particle_pos)
    csB = np.concatenate((csBn, csBp))
    tot = solid_totals(state.cs_neg, state.cs_pos, m)
    ce_tot = electrolyte_total(state.ce, m)
    sc = solution.scale
    return TimeSeriesRecord(
        t=float(state.t),
        dt=float(dt),
        I=float(I),
        V=float(voltage(solution, I, cfg.geometry)),
        SOC=soc(state.cs_neg, cfg.geometry, m, cfg.kinetics.cs_max),
        T=float(state.T),
        ce_min=float(np.min(state.ce)),
        ce_max=float(np.max(state.ce)),
        csB_min=float(np.min(csB)),
        csB_max=float(np.max(csB)),
        ce_drift=(ce_tot - baseline["ce"]) / baseline["ce"],
        solid_drift=(tot["total"] - baseline["solid"]) / baseline["solid"],
        solid_anode=tot["anode"],
        solid_cathode=tot["cathode"],
        compat_anode=solution.compat_anode / sc,
        compat_cathode=solution.compat_cathode / sc,
        j_total=solution.j_total / sc,
        q_r=heat.q_r,
        q_j=heat.q_j,
        q_c=heat.q_c,
        q_e=heat.q_e,
        picard_iters=int(picard_iters),
        newton_iters=int(newton_iters),
    )


def conservation_ledger(model, states: Sequence, times_currents: Sequence[tuple] | None = None) -> Dict[str, float]:
    """Electrolyte drift, solid totals and the exchange balance over a stored trajectory.

    ``times_currents`` is an optional list of ``(dt, I)`` for the steps between the
    states; it is used to predict the net solid variation ``mismatch * int I/A dt``.
    """
    m = model.mesh
    cfg = model.config
    first, last = states[0], states[-1]
    ce0 = electrolyte_total(first.ce, m)
    ce1 = electrolyte_total(last.ce, m)
    s0 = solid_totals(first.cs_neg, first.cs_pos, m)
    s1 = solid_totals(last.cs_neg, last.cs_pos, m)
    drifts = [abs(electrolyte_total(s.ce, m) - ce0) / ce0 for s in states]
    mismatch = exchange_mismatch(cfg.geometry, cfg.transport.alpha_s_neg, cfg.transport.alpha_s_pos)
    out = {
        "electrolyte_total_initial": ce0,
        "electrolyte_total_final": ce1,
        "electrolyte_drift": (ce1 - ce0) / ce0,
        "electrolyte_drift_max": max(drifts),
        "solid_anode_initial": s0["anode"],
        "solid_anode_final": s1["anode"],
        "solid_cathode_initial": s0["cathode"],
        "solid_cathode_final": s1["cathode"],
        "solid_total_drift": (s1["total"] - s0["total"]) / s0["total"],
        "net_variation": s1["total"] - s0["total"],
        "exchange_mismatch": mismatch,
    }
    if times_currents is not None:
        charge = sum(dt * I for dt, I in times_currents) / cfg.geometry.A
        out["net_variation_predicted"] = mismatch * charge
    return out
