"""Butler-Volmer reaction flux, open-circuit potential and exponent linter.

The flux is evaluated in the exponent-absorbed form

    j+ = exp(a+) H(g1 Phi / T),   j- = exp(a-) H(-g2 Phi / T),

where ``Phi = phis - phie_li`` and ``a+-`` collect the concentration powers,
``delta1/2`` and the ``eta0`` shift.  With ``H = exp`` this is algebraically the
plain exponential form.  Everything is computed in log space so that large
potential differences do not overflow before they are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Tuple

import numpy as np

from .params import KineticParams

__all__ = [
    "KineticsDomainError",
    "FluxInput",
    "FluxMode",
    "RegionFlux",
    "H_cutoff",
    "log_H",
    "dlog_H",
    "ocp",
    "ocp_dT",
    "overpotential",
    "flux",
    "flux_decomposed",
    "flux_deta",
    "ConditionEntry",
    "ConditionReport",
    "check_exponent_conditions",
]


class KineticsDomainError(ValueError):
    """A logarithm or power argument left the admissible box."""


@dataclass(frozen=True)
class FluxMode:
    kind: str = "exponential"  # exponential | truncated | stub-linear
    s_inf: float | Mapping[str, float] | None = None
    g0: float | None = None

    def __post_init__(self):
        if self.kind not in ("exponential", "truncated", "stub-linear"):
            raise ValueError(f"unknown flux mode {self.kind!r}")
        if self.kind == "truncated" and self.s_inf is None:
            raise ValueError("truncated mode needs s_inf")
        if self.kind == "stub-linear" and not (self.g0 is not None and self.g0 > 0):
            raise ValueError("stub-linear mode needs g0 > 0")

    @classmethod
    def from_params(cls, kp: KineticParams) -> "FluxMode":
        return cls(kp.mode, kp.s_inf, kp.g0)

    def s_inf_for(self, region: str) -> float:
        if self.kind != "truncated":
            return math.inf
        if isinstance(self.s_inf, Mapping):
            return float(self.s_inf[region])
        return float(self.s_inf)


@dataclass(frozen=True)
class FluxInput:
    region: str
    ce: np.ndarray | float
    csB: np.ndarray | float
    phis: np.ndarray | float
    phie: np.ndarray | float
    T: float
    x: np.ndarray | float | None = None


# ---------------------------------------------------------------- cut-off


def log_H(s, s_inf):
    """``ln H(s)``: ``s`` below ``s_inf``, ``s_inf + ln(2 - exp(-(s - s_inf)))`` above."""
    s = np.asarray(s, dtype=float)
    if not np.isfinite(s_inf):
        return s
    over = np.maximum(s - s_inf, 0.0)
    return np.where(s <= s_inf, s, s_inf + np.log(2.0 - np.exp(-over)))


def dlog_H(s, s_inf):
    """``H'(s) / H(s)``."""
    s = np.asarray(s, dtype=float)
    if not np.isfinite(s_inf):
        return np.ones_like(s)
    e = np.exp(-np.maximum(s - s_inf, 0.0))
    return np.where(s <= s_inf, 1.0, e / (2.0 - e))


def H_cutoff(s, s_inf):
    """Bounded C^1 cut-off of ``exp``; supremum ``2 exp(s_inf)``."""
    return np.exp(log_H(s, s_inf))


# ---------------------------------------------------------------- OCP


def _logs(ce, csB, cs_max):
    ce = np.asarray(ce, dtype=float)
    csB = np.asarray(csB, dtype=float)
    gap = cs_max - csB
    for name, arg in (("ce", ce), ("csB", csB), ("cs_max - csB", gap)):
        if not np.all(arg > 0):
            bad = np.min(arg)
            raise KineticsDomainError(f"log argument {name} is non-positive (min {bad:.6g})")
    return np.log(ce), np.log(csB), np.log(gap)


def ocp(region: str, ce, csB, T, kp: KineticParams):
    """``U = -lmin ln csB + lmax ln(cs_max - csB) + mu ln ce + p``."""
    lce, lcs, lgap = _logs(ce, csB, kp.cs_max)
    o = kp.ocp
    p = o.p[region](np.asarray(ce) / o.ce_ref, np.asarray(csB) / kp.cs_max, T)
    return -o.lam_min(region, T) * lcs + o.lam_max(region, T) * lgap + o.mu_at(region, T) * lce + p


def ocp_dT(region: str, ce, csB, T, kp: KineticParams):
    """Partial derivative of :func:`ocp` in ``T`` at fixed concentrations."""
    lce, lcs, lgap = _logs(ce, csB, kp.cs_max)
    o = kp.ocp
    d = np.polynomial.polynomial.polyder
    pv = np.polynomial.polynomial.polyval
    dp = o.p[region].dT(np.asarray(ce) / o.ce_ref, np.asarray(csB) / kp.cs_max, T)
    return (
        -pv(T, d(o.lambda_min[region])) * lcs
        + pv(T, d(o.lambda_max[region])) * lgap
        + pv(T, d(o.mu[region])) * lce
        + dp
    )


def overpotential(inp: FluxInput, kp: KineticParams):
    """``eta = phis - phie - U``."""
    return np.asarray(inp.phis) - np.asarray(inp.phie) - ocp(inp.region, inp.ce, inp.csB, inp.T, kp)


# ---------------------------------------------------------------- flux


class RegionFlux:
    """Flux of one electrode as a function of ``Phi = phis - phie_li`` at frozen (ce, csB, T).

    ``f_vals`` is the reference-electrode function evaluated at ``ce``.
    """

    def __init__(self, region: str, ce, csB, T: float, kp: KineticParams, mode: FluxMode,
                 alpha_phie: float = 0.0, f_vals=None):
        self.region = region
        self.mode = mode
        ce = np.asarray(ce, dtype=float)
        csB = np.asarray(csB, dtype=float)
        if f_vals is None:
            f_vals = np.log(ce)
        U = ocp(region, ce, csB, T, kp)
        self.eta0 = -alpha_phie * T * np.asarray(f_vals) - U
        lce, lcs, lgap = _logs(ce, csB, kp.cs_max)
        lnP = kp.alpha_a * lce + kp.alpha_s * lcs + kp.beta_a * lgap
        self.k1 = kp.gamma1 / T
        self.k2 = kp.gamma2 / T
        self.a_plus = math.log(kp.delta1[region]) + lnP + self.k1 * self.eta0
        self.a_minus = math.log(kp.delta2[region]) + lnP - self.k2 * self.eta0
        self.s_inf = mode.s_inf_for(region)
        self.g0 = mode.g0

    def parts(self, Phi) -> Tuple[np.ndarray, np.ndarray]:
        Phi = np.asarray(Phi, dtype=float)
        if self.mode.kind == "stub-linear":
            j = self.g0 * (Phi + self.eta0)
            return np.maximum(j, 0.0), np.maximum(-j, 0.0)
        with np.errstate(over="ignore"):
            jp = np.exp(self.a_plus + log_H(self.k1 * Phi, self.s_inf))
            jm = np.exp(self.a_minus + log_H(-self.k2 * Phi, self.s_inf))
        return jp, jm

    def value(self, Phi):
        if self.mode.kind == "stub-linear":
            return self.g0 * (np.asarray(Phi, dtype=float) + self.eta0)
        jp, jm = self.parts(Phi)
        return jp - jm

    def deriv(self, Phi):
        Phi = np.asarray(Phi, dtype=float)
        if self.mode.kind == "stub-linear":
            return np.full(np.broadcast(Phi, self.eta0).shape, float(self.g0))
        jp, jm = self.parts(Phi)
        return jp * dlog_H(self.k1 * Phi, self.s_inf) * self.k1 + jm * dlog_H(-self.k2 * Phi, self.s_inf) * self.k2

    def value_and_deriv(self, Phi):
        Phi = np.asarray(Phi, dtype=float)
        if self.mode.kind == "stub-linear":
            return self.value(Phi), self.deriv(Phi)
        jp, jm = self.parts(Phi)
        d = jp * dlog_H(self.k1 * Phi, self.s_inf) * self.k1 + jm * dlog_H(-self.k2 * Phi, self.s_inf) * self.k2
        return jp - jm, d

    def exchange(self, Phi):
        """``j+ + j-`` (or ``|j|`` in stub mode), the natural scale of the flux."""
        if self.mode.kind == "stub-linear":
            return np.abs(self.value(Phi))
        jp, jm = self.parts(Phi)
        return jp + jm


def _region_flux(inp: FluxInput, kp, mode, alpha_phie, f_phie):
    with np.errstate(divide="ignore", invalid="ignore"):
        f_vals = f_phie(np.asarray(inp.ce, dtype=float))
    rf = RegionFlux(inp.region, inp.ce, inp.csB, inp.T, kp, mode, alpha_phie, f_vals)
    Phi = np.asarray(inp.phis) - np.asarray(inp.phie) + alpha_phie * inp.T * f_vals
    return rf, Phi


def _zeros(inp):
    shape = np.broadcast(np.asarray(inp.ce), np.asarray(inp.csB), np.asarray(inp.phis), np.asarray(inp.phie)).shape
    return np.zeros(shape)


def flux(inp: FluxInput, kp: KineticParams, mode: FluxMode | None = None,
         alpha_phie: float = 0.0, f_phie: Callable = np.log):
    """Reaction flux ``j``; zero in the separator."""
    if inp.region == "separator":
        return _zeros(inp)
    mode = mode or FluxMode.from_params(kp)
    rf, Phi = _region_flux(inp, kp, mode, alpha_phie, f_phie)
    return rf.value(Phi)


def flux_decomposed(inp: FluxInput, kp: KineticParams, mode: FluxMode | None = None,
                    alpha_phie: float = 0.0, f_phie: Callable = np.log):
    """``(j+, j-)`` with ``j = j+ - j-``; both non-negative."""
    if inp.region == "separator":
        z = _zeros(inp)
        return z, z.copy()
    mode = mode or FluxMode.from_params(kp)
    rf, Phi = _region_flux(inp, kp, mode, alpha_phie, f_phie)
    return rf.parts(Phi)


def flux_deta(inp: FluxInput, kp: KineticParams, mode: FluxMode | None = None,
              alpha_phie: float = 0.0, f_phie: Callable = np.log):
    """Analytic ``dj/deta`` at fixed (ce, csB, T)."""
    if inp.region == "separator":
        return _zeros(inp)
    mode = mode or FluxMode.from_params(kp)
    rf, Phi = _region_flux(inp, kp, mode, alpha_phie, f_phie)
    return rf.deriv(Phi)


# ---------------------------------------------------------------- linter


@dataclass(frozen=True)
class ConditionEntry:
    region: str
    condition: str
    T: float
    value: float
    threshold: float
    margin: float
    status: str  # satisfied | boundary | violated


@dataclass(frozen=True)
class ConditionReport:
    entries: Tuple[ConditionEntry, ...]
    rtol: float

    @property
    def ok(self) -> bool:
        return all(e.status != "violated" for e in self.entries)

    @property
    def violations(self) -> Tuple[ConditionEntry, ...]:
        return tuple(e for e in self.entries if e.status == "violated")

    def min_margin(self, condition: str | None = None, region: str | None = None) -> float:
        sel = [e.margin for e in self.entries
               if (condition is None or e.condition == condition) and (region is None or e.region == region)]
        return min(sel)

    def __str__(self) -> str:
        return "\n".join(
            f"{e.status.upper():9s} {e.region:7s} {e.condition:16s} T={e.T:g} "
            f"value={e.value:.6e} threshold={e.threshold:.6e} margin={e.margin:+.3e}"
            for e in self.entries
        )


CONDITIONS = {
    # name: (description)
    "ce_plus": "alpha_phie + mu/T >= (alpha_a - 1)/gamma1",
    "ce_minus": "alpha_phie + mu/T >= (1 - alpha_a)/gamma2",
    "cs_plus": "lambda_min/T >= (1 - alpha_s)/gamma1",
    "cs_gap_minus": "lambda_max/T >= (1 - beta_a)/gamma2",
}


def check_exponent_conditions(kp: KineticParams, alpha_phie: float, T_range: Tuple[float, float],
                              rtol: float = 1e-3) -> ConditionReport:
    """Evaluate the four no-dead-core exponent inequalities per electrode.

    Margins are ``value - threshold`` in the normalized form of :data:`CONDITIONS`.
    A margin within ``rtol * |threshold|`` of zero is reported as ``boundary``.
    Affine-in-T tables are checked at the two ends of ``T_range``; higher-degree
    tables are also sampled inside the range.
    """
    T_low, T_high = T_range
    if not T_low > 0:
        raise ValueError("T_range must be positive")
    o = kp.ocp
    entries = []
    for region in ("anode", "cathode"):
        deg = max(len(o.lambda_min[region]), len(o.lambda_max[region]), len(o.mu[region])) - 1
        Ts = [T_low, T_high] if deg <= 1 else list(np.linspace(T_low, T_high, 65))
        for T in Ts:
            chi = alpha_phie + float(o.mu_at(region, T)) / T
            rows = (
                ("ce_plus", chi, (kp.alpha_a - 1.0) / kp.gamma1),
                ("ce_minus", chi, (1.0 - kp.alpha_a) / kp.gamma2),
                ("cs_plus", float(o.lam_min(region, T)) / T, (1.0 - kp.alpha_s) / kp.gamma1),
                ("cs_gap_minus", float(o.lam_max(region, T)) / T, (1.0 - kp.beta_a) / kp.gamma2),
            )
            for name, value, thr in rows:
                margin = value - thr
                tol = rtol * abs(thr)
                status = "satisfied" if margin > tol else ("boundary" if margin >= -tol else "violated")
                entries.append(ConditionEntry(region, name, float(T), value, thr, margin, status))
    return ConditionReport(tuple(entries), rtol)
