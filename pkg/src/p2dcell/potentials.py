"""Coupled elliptic solve for the electrolyte and solid potentials.

Unknowns are ``u = phie_li`` on every macro cell and ``v = phis`` on the
electrode cells.  The conservative finite-volume residuals are

    R_e = (F_e right - F_e left) - w j,     F_e = -kappa u'
    R_s = (F_s right - F_s left) + w j,     F_s = -sigma v'

with ``F_s = I/A`` at ``x = 0`` and ``x = L`` and zero flux at the inner
electrode ends.  The first electrolyte row, which is redundant, is replaced by
the zero-average gauge row.  The Jacobian is symmetric positive semidefinite
before that replacement, so damped Newton with a residual-decrease line search
is enough.

Solid potentials are carried as a per-electrode constant plus a deviation.
The constant drops out of every flux difference, which keeps the residual
round-off at the level of the deviation rather than of the absolute potential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .kinetics import FluxMode, RegionFlux
from .mesh import harmonic_faces
from .model import CellModel, StateSlice

__all__ = [
    "EllipticOptions",
    "PotentialSolution",
    "SolverFailure",
    "EllipticProblem",
    "assemble_residual",
    "jacobian",
    "solve_potentials",
]


class SolverFailure(RuntimeError):
    """Newton did not converge; carries the last scaled residual."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class EllipticOptions:
    newton_tol: float = 1e-10
    max_iters: int = 50
    damping: float = 0.5
    min_step: float = 2.0**-20
    polish: bool = True

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")


@dataclass(frozen=True)
class PotentialSolution:
    phie_li: np.ndarray
    phis: np.ndarray  # electrode cells, anode then cathode
    phie: np.ndarray
    j: np.ndarray  # all cells, zero in the separator
    j_plus: np.ndarray
    j_minus: np.ndarray
    eta: np.ndarray
    newton_iters: int
    residual_norm: float  # scaled sup-norm
    scale: float
    I: float
    phis_0: float
    phis_L: float
    compat_anode: float  # int_anode j - I/A
    compat_cathode: float  # int_cathode j + I/A
    j_total: float  # int_0^L j
    el_idx: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    history: Tuple[float, ...] = field(default=())
    flux_arg: np.ndarray | None = None  # Phi exactly as used for j; gauge independent

    @property
    def Phi(self) -> np.ndarray:
        """``phis - phie_li`` on the electrode cells, as fed to the flux."""
        if self.flux_arg is not None:
            return self.flux_arg
        return self.phis - self.phie_li[self.el_idx]

    def shifted(self, C: float) -> "PotentialSolution":
        """Both potential fields moved by ``C``; fluxes unchanged."""
        return replace(self, phie_li=self.phie_li + C, phis=self.phis + C, phie=self.phie + C,
                       phis_0=self.phis_0 + C, phis_L=self.phis_L + C)


class EllipticProblem:
    """Residual and Jacobian of one elliptic solve at frozen (ce, csB, T, I)."""

    def __init__(self, model: CellModel, data: StateSlice, I: float, mode: FluxMode | None = None,
                 sources: Tuple[np.ndarray, np.ndarray] | None = None):
        self.model = model
        self.data = data
        self.I = float(I)
        self.mode = mode or model.flux_mode
        m = model.mesh
        cfg = model.config
        tr, kp = cfg.transport, cfg.kinetics
        self.N, self.Na, self.Nc = m.n, m.n_anode, m.n_cathode
        self.M = self.Na + self.Nc
        self.w = m.widths
        self.w_el = model.w_el
        self.idx = model.el_idx
        self.flux_in = self.I / cfg.geometry.A

        ce = np.asarray(data.ce, dtype=float)
        T = float(data.T)
        self.kappa_c = tr.kappa(ce, T)
        self.Ke = harmonic_faces(self.w, self.kappa_c)
        wa = self.w[: self.Na]
        wc = self.w[self.N - self.Nc:]
        self.Ka = harmonic_faces(wa, model.sigma_neg)
        self.Kc = harmonic_faces(wc, model.sigma_pos)
        self.gauge_c = float(np.mean(self.kappa_c)) / cfg.geometry.L**2

        f_vals = model.f_phie(ce)
        self.f_vals = f_vals
        a_sl, c_sl = m.anode, m.cathode
        self.rf_a = RegionFlux("anode", ce[a_sl], data.csB_neg, T, kp, self.mode, tr.alpha_phie, f_vals[a_sl])
        self.rf_c = RegionFlux("cathode", ce[c_sl], data.csB_pos, T, kp, self.mode, tr.alpha_phie, f_vals[c_sl])
        self.eta0 = np.concatenate((self.rf_a.eta0, self.rf_c.eta0))

        if sources is None:
            self.src_e = np.zeros(self.N)
            self.src_s = np.zeros(self.M)
        else:
            self.src_e = self.w * np.asarray(sources[0], dtype=float)
            self.src_s = self.w_el * np.asarray(sources[1], dtype=float)
        self._pattern()

    # ------------------------------------------------------------ flux
    def _flux(self, Phi):
        ja, da = self.rf_a.value_and_deriv(Phi[: self.Na])
        jc, dc = self.rf_c.value_and_deriv(Phi[self.Na:])
        return np.concatenate((ja, jc)), np.concatenate((da, dc))

    def flux_parts(self, Phi):
        pa, ma = self.rf_a.parts(Phi[: self.Na])
        pc, mc = self.rf_c.parts(Phi[self.Na:])
        return np.concatenate((pa, pc)), np.concatenate((ma, mc))

    def scale(self, Phi) -> float:
        ex = np.concatenate((self.rf_a.exchange(Phi[: self.Na]), self.rf_c.exchange(Phi[self.Na:])))
        js = float(np.dot(self.w_el, ex))
        if self.mode.kind == "stub-linear":
            js = max(js, float(self.mode.g0) * float(np.sum(self.w_el)))
        s = max(abs(self.flux_in), js)
        return s if s > 0 and math.isfinite(s) else 1.0

    # ------------------------------------------------------------ residual
    def residual(self, u, d, off=None, gauge: bool = True):
        """Residual at ``u`` and ``v = off + d`` (``off`` constant per electrode)."""
        N, Na = self.N, self.Na
        v = d if off is None else off + d
        Phi = v - u[self.idx]
        j, _ = self._flux(Phi)
        wj = self.w_el * j

        Fe = np.zeros(N + 1)
        Fe[1:-1] = -self.Ke * np.diff(u)
        Re = Fe[1:] - Fe[:-1] - self.src_e
        Re[self.idx] -= wj

        da, dc = d[:Na], d[Na:]
        Fa = np.empty(Na + 1)
        Fa[0] = self.flux_in
        Fa[-1] = 0.0
        Fa[1:-1] = -self.Ka * np.diff(da)
        Fc = np.empty(self.Nc + 1)
        Fc[0] = 0.0
        Fc[-1] = self.flux_in
        Fc[1:-1] = -self.Kc * np.diff(dc)
        Rs = np.concatenate((Fa[1:] - Fa[:-1], Fc[1:] - Fc[:-1])) + wj - self.src_s

        if gauge:
            Re[0] = self.gauge_c * float(np.dot(self.w, u))
        return np.concatenate((Re, Rs)), j, Phi

    # ------------------------------------------------------------ jacobian
    def _pattern(self):
        N, Na, Nc = self.N, self.Na, self.Nc
        rows, cols = [], []
        # electrolyte Laplacian: per face (i,i) (i+1,i+1) (i,i+1) (i+1,i)
        i = np.arange(N - 1)
        rows += [i, i + 1, i, i + 1]
        cols += [i, i + 1, i + 1, i]
        # solid Laplacians
        for off_, n in ((N, Na), (N + Na, Nc)):
            k = np.arange(n - 1) + off_
            rows += [k, k + 1, k, k + 1]
            cols += [k, k + 1, k + 1, k]
        # coupling
        e = self.idx
        s = np.arange(self.M) + N
        rows += [e, e, s, s]
        cols += [e, s, e, s]
        self._rows = np.concatenate(rows)
        self._cols = np.concatenate(cols)
        self._keep = self._rows != 0
        self._g_rows = np.zeros(N, dtype=int)
        self._g_cols = np.arange(N)

    def jacobian(self, u, d, off=None, gauge: bool = True):
        v = d if off is None else off + d
        Phi = v - u[self.idx]
        _, G = self._flux(Phi)
        wG = self.w_el * G
        Ke, Ka, Kc = self.Ke, self.Ka, self.Kc
        data = np.concatenate((Ke, Ke, -Ke, -Ke, Ka, Ka, -Ka, -Ka, Kc, Kc, -Kc, -Kc, wG, -wG, -wG, wG))
        rows, cols = self._rows, self._cols
        n = self.N + self.M
        if gauge:
            k = self._keep
            data = np.concatenate((data[k], self.gauge_c * self.w))
            rows = np.concatenate((rows[k], self._g_rows))
            cols = np.concatenate((cols[k], self._g_cols))
        return sp.csc_matrix((data, (rows, cols)), shape=(n, n))

    # ------------------------------------------------------------ boundary values
    def boundary_values(self, v):
        A = self.model.config.geometry.A
        w = self.w
        s = self.model.config.transport.sigma
        phis_0 = v[0] + 0.5 * w[0] * self.I / (A * s["anode"])
        phis_L = v[-1] - 0.5 * w[-1] * self.I / (A * s["cathode"])
        return float(phis_0), float(phis_L)

    def initial_guess(self):
        """Zero electrolyte potential; solid potential at the local open-circuit level."""
        u = np.zeros(self.N)
        v = np.empty(self.M)
        if self.mode.kind == "stub-linear" and np.allclose(self.eta0, 0.0):
            v[:] = 0.0
        else:
            v[: self.Na] = np.mean(-self.rf_a.eta0)
            v[self.Na:] = np.mean(-self.rf_c.eta0)
        return u, v


def _offsets(v, Na):
    off = np.empty_like(v)
    off[:Na] = np.mean(v[:Na])
    off[Na:] = np.mean(v[Na:])
    return off


def assemble_residual(model: CellModel, data: StateSlice, I: float, trial: Tuple[np.ndarray, np.ndarray],
                      mode: FluxMode | None = None, sources=None, gauge: bool = True) -> np.ndarray:
    """Finite-volume residual at ``trial = (phie_li, phis)``; see module docstring."""
    prob = EllipticProblem(model, data, I, mode, sources)
    u, v = (np.asarray(t, dtype=float) for t in trial)
    return prob.residual(u, v, gauge=gauge)[0]


def jacobian(model: CellModel, data: StateSlice, I: float, trial: Tuple[np.ndarray, np.ndarray],
             mode: FluxMode | None = None, gauge: bool = True) -> sp.csc_matrix:
    """Sparse Jacobian of :func:`assemble_residual` with respect to ``(phie_li, phis)``."""
    prob = EllipticProblem(model, data, I, mode)
    u, v = (np.asarray(t, dtype=float) for t in trial)
    return prob.jacobian(u, v, gauge=gauge)


def solve_potentials(model: CellModel, data: StateSlice, I: float, opts: EllipticOptions | None = None,
                     mode: FluxMode | None = None, guess: Tuple[np.ndarray, np.ndarray] | None = None,
                     sources=None) -> PotentialSolution:
    """Damped Newton solve; raises :class:`SolverFailure` if it stalls."""
    opts = opts or EllipticOptions()
    prob = EllipticProblem(model, data, I, mode, sources)
    N, Na = prob.N, prob.Na
    if guess is None:
        u, v = prob.initial_guess()
    else:
        u = np.array(guess[0], dtype=float)
        v = np.array(guess[1], dtype=float)
    off = _offsets(v, Na)
    d = v - off

    R, j, Phi = prob.residual(u, d, off)
    nrm = float(np.linalg.norm(R))
    scale = prob.scale(Phi)
    sup = float(np.max(np.abs(R))) / scale
    history = [sup]
    iters = 0
    converged = sup <= opts.newton_tol
    while not converged:
        if iters >= opts.max_iters:
            raise SolverFailure(f"Newton did not converge in {opts.max_iters} iterations", sup)
        J = prob.jacobian(u, d, off)
        try:
            dz = splu(J).solve(-R)
        except RuntimeError as exc:
            raise SolverFailure(f"singular Jacobian: {exc}", sup) from exc
        if not np.all(np.isfinite(dz)):
            raise SolverFailure("non-finite Newton direction", sup)
        lam = 1.0
        while True:
            u_n = u + lam * dz[:N]
            d_n = d + lam * dz[N:]
            with np.errstate(over="ignore", invalid="ignore"):
                R_n, j_n, Phi_n = prob.residual(u_n, d_n, off)
                nrm_n = float(np.linalg.norm(R_n))
            if math.isfinite(nrm_n) and nrm_n <= (1.0 - 1e-4 * lam) * nrm:
                break
            lam *= opts.damping
            if lam < opts.min_step:
                raise SolverFailure("line search failed at minimal damping", sup)
        u, d, R, j, Phi, nrm = u_n, d_n, R_n, j_n, Phi_n, nrm_n
        iters += 1
        scale = prob.scale(Phi)
        sup = float(np.max(np.abs(R))) / scale
        history.append(sup)
        converged = sup <= opts.newton_tol

    if opts.polish and nrm > 0:
        # one extra full step pushes the residual to round-off; kept only if it helps
        J = prob.jacobian(u, d, off)
        dz = splu(J).solve(-R)
        if np.all(np.isfinite(dz)):
            u_n, d_n = u + dz[:N], d + dz[N:]
            R_n, j_n, Phi_n = prob.residual(u_n, d_n, off)
            nrm_n = float(np.linalg.norm(R_n))
            if nrm_n <= nrm:
                u, d, R, j, Phi, nrm = u_n, d_n, R_n, j_n, Phi_n, nrm_n
                scale = prob.scale(Phi)
                sup = float(np.max(np.abs(R))) / scale

    jp, jm = prob.flux_parts(Phi)
    w_el = prob.w_el
    ja = float(np.dot(w_el[:Na], j[:Na]))
    jc = float(np.dot(w_el[Na:], j[Na:]))
    j_full = np.zeros(N)
    j_full[prob.idx] = j

    # exact zero-average projection
    mean = float(np.dot(prob.w, u)) / float(np.sum(prob.w))
    u = u - mean
    v = (off + d) - mean
    phis_0, phis_L = prob.boundary_values(v)
    phie = u + model.config.transport.alpha_phie * data.T * prob.f_vals
    sol = PotentialSolution(
        phie_li=u,
        phis=v,
        phie=phie,
        j=j_full,
        j_plus=jp,
        j_minus=jm,
        eta=Phi + prob.eta0,
        newton_iters=iters,
        residual_norm=sup,
        scale=scale,
        I=float(I),
        phis_0=phis_0,
        phis_L=phis_L,
        compat_anode=ja - prob.flux_in,
        compat_cathode=jc + prob.flux_in,
        j_total=ja + jc,
        el_idx=prob.idx,
        history=tuple(history),
        flux_arg=Phi,
    )
    return sol
