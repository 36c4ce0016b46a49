"""Lumped heat balance ``dT/dt = -alpha_T (T - T_amb) + F_T``.

``F_T`` is the heat release (W) divided by ``heat_capacity`` (J/K).  The update
integrates the linear relaxation exactly over the step, with the source held
at its iterate value; for ``F_T = 0`` it reproduces the analytic
exponential decay at any step size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .kinetics import ocp_dT
from .mesh import harmonic_faces
from .params import ThermalParams

__all__ = [
    "HeatBreakdown",
    "LinearCoefficients",
    "heat_sources",
    "linear_coefficients",
    "step_temperature",
    "relaxation_step",
]


@dataclass(frozen=True)
class HeatBreakdown:
    q_r: float
    q_j: float
    q_c: float
    q_e: float

    @property
    def total(self) -> float:
        return self.q_r + self.q_j + self.q_c + self.q_e

    @classmethod
    def zero(cls) -> "HeatBreakdown":
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class LinearCoefficients:
    """``F_T = B_T + T A_T`` after clamping to the declared bounds."""

    A_T: float
    B_T: float


def heat_sources(model, data, solution, I: float) -> HeatBreakdown:
    """Reaction, ohmic, contact and entropic heat (W) by mesh quadrature.

    ``data`` is the :class:`~p2dcell.model.StateSlice` the potentials were solved on.
    """
    cfg = model.config
    m = model.mesh
    g, tr, kp = cfg.geometry, cfg.transport, cfg.kinetics
    A = g.A
    T = float(data.T)
    idx = model.el_idx
    w_el = model.w_el
    j_el = solution.j[idx]
    eta = solution.eta
    q_r = A * float(np.dot(w_el, j_el * eta))

    # solid ohmic heat: face energies plus the half cells at x = 0 and x = L
    v = solution.phis
    Na = m.n_anode
    wa, wc = m.widths[:Na], m.widths[m.n - m.n_cathode:]
    Ka = harmonic_faces(wa, model.sigma_neg)
    Kc = harmonic_faces(wc, model.sigma_pos)
    js = I / A
    solid = float(np.dot(Ka, np.diff(v[:Na]) ** 2) + np.dot(Kc, np.diff(v[Na:]) ** 2))
    solid += js**2 * (0.5 * wa[0] / tr.sigma["anode"] + 0.5 * wc[-1] / tr.sigma["cathode"])
    # electrolyte: kappa phie' phie_li'
    kap = tr.kappa(data.ce, T)
    Ke = harmonic_faces(m.widths, kap)
    du = np.diff(solution.phie_li)
    dphie = np.diff(solution.phie)
    elec = float(np.dot(Ke, du * dphie))
    q_j = A * (solid + elec)

    q_c = g.Rf / A * I**2

    ce = np.asarray(data.ce)
    dU = np.concatenate(
        (
            ocp_dT("anode", ce[m.anode], data.csB_neg, T, kp),
            ocp_dT("cathode", ce[m.cathode], data.csB_pos, T, kp),
        )
    )
    q_e = T * A * float(np.dot(w_el, j_el * dU))
    return HeatBreakdown(q_r, q_j, q_c, q_e)


def linear_coefficients(heat: HeatBreakdown, T: float, tp: ThermalParams) -> LinearCoefficients:
    """Split ``F_T`` into ``B_T = (q_r + q_j + q_c)/C`` and ``A_T = q_e/(T C)``, clamped."""
    C = tp.heat_capacity
    B = (heat.q_r + heat.q_j + heat.q_c) / C
    A_ = heat.q_e / (T * C)
    lo, hi = tp.A_T_bounds
    return LinearCoefficients(A_T=min(max(A_, lo), hi), B_T=min(max(B, 0.0), tp.B_T_max))


def relaxation_step(T: float, k: float, b: float, dt: float) -> float:
    """Exact step of ``dT/dt = -k T + b`` with constant ``k`` and ``b``."""
    x = k * dt
    decay = math.exp(-x)
    phi1 = dt if x == 0.0 else -math.expm1(-x) / k
    return T * decay + b * phi1


def step_temperature(T: float, heat, tp: ThermalParams, dt: float, scheme: str = "exact") -> Tuple[float, bool]:
    """Advance ``T`` by ``dt``; returns ``(T_new, ok)`` with ``ok = T_new > 0``.

    ``heat`` is a :class:`HeatBreakdown` (full mode), a :class:`LinearCoefficients`
    (linear-truncated mode, already clamped) or ``None`` (zero source).
    ``scheme = "implicit-euler"`` uses the backward Euler update instead of the
    exact relaxation.
    """
    if not (dt > 0 and T > 0):
        raise ValueError("dt and T must be positive")
    a = tp.alpha_T
    if heat is None or tp.mode == "zero":
        k, b = a, a * tp.T_amb
    elif isinstance(heat, LinearCoefficients):
        k, b = a - heat.A_T, a * tp.T_amb + heat.B_T
    elif tp.mode == "linear-truncated":
        lc = linear_coefficients(heat, T, tp)
        k, b = a - lc.A_T, a * tp.T_amb + lc.B_T
    else:
        k, b = a, a * tp.T_amb + heat.total / tp.heat_capacity
    if scheme == "implicit-euler":
        Tn = (T + dt * b) / (1.0 + dt * k)
    else:
        Tn = relaxation_step(T, k, b, dt)
    return Tn, bool(Tn > 0 and math.isfinite(Tn))
