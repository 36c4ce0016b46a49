"""Manufactured-solution and eigenmode convergence studies.

Each study returns a :class:`ConvergenceStudy` with the error sequence under
refinement and the observed orders ``log2(e_h / e_{h/2})``.

* ``elliptic``: the coupled potential system with a linear stub flux
  ``j = g0 (phis - phie_li)`` and a manufactured solution on ``L = 3``,
  ``L1 = delta = 1``.  Sources are written out by hand below.
* ``solid-diffusion``: the first non-constant spherical mode
  ``sin(k r)/(k r)`` with ``tan(k Rs) = k Rs``.
* ``electrolyte-diffusion``: the cosine mode ``cos(m pi x / L)``.
* ``thermal``: sup error of the source-free relaxation against the exponential.

For the diffusion suites the discrete decay rate is read off one implicit
Euler step started on the discrete eigenvector, ``lam_h = (1/ratio - 1)/dt``;
its error against the continuous rate gives the spatial order.  The temporal
order compares the amplitude after a fixed time with ``exp(-lam_h t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Sequence

import numpy as np
from scipy.linalg import eig_banded

from .electrolyte import electrolyte_matrix, step_electrolyte
from .kinetics import FluxMode
from .mesh import Mesh, build_mesh, particle_grid
from .model import CellModel, StateSlice
from .params import CellConfig, CellGeometry, KappaModel, MeshSpec, PolyTable, reference_config
from .particle import particle_matrix, step_particle
from .potentials import EllipticOptions, solve_potentials
from .thermal import step_temperature

__all__ = [
    "SPHERE_ROOT",
    "ConvergenceStudy",
    "MMSCase",
    "mms_case",
    "mms_sources",
    "elliptic_study",
    "particle_eigenvalue",
    "particle_spatial_study",
    "particle_temporal_study",
    "electrolyte_eigenvalue",
    "electrolyte_spatial_study",
    "electrolyte_temporal_study",
    "thermal_study",
    "SUITES",
    "run_suite",
]

SPHERE_ROOT = 4.493409457909064  # first positive root of tan(z) = z


@dataclass(frozen=True)
class ConvergenceStudy:
    name: str
    kind: str  # spatial | temporal | error
    h: tuple
    errors: tuple

    @property
    def orders(self) -> tuple:
        e = self.errors
        return tuple(math.log(e[i] / e[i + 1]) / math.log(self.h[i] / self.h[i + 1]) for i in range(len(e) - 1))

    @property
    def observed(self) -> float:
        """Order from the two finest levels."""
        return self.orders[-1] if self.orders else math.nan

    def __str__(self) -> str:
        lines = [f"{self.name} ({self.kind})"]
        for i, (h, e) in enumerate(zip(self.h, self.errors)):
            o = f"  order {self.orders[i - 1]:.3f}" if i else ""
            lines.append(f"  h = {h:.4e}  error = {e:.6e}{o}")
        return "\n".join(lines)


# ---------------------------------------------------------------- elliptic MMS


@dataclass(frozen=True)
class MMSCase:
    """Parameters of the manufactured potential problem."""

    L: float = 3.0
    L1: float = 1.0
    delta: float = 1.0
    A: float = 1.0
    I: float = 0.7
    sigma: float = 2.0
    kappa: float = 1.5
    g0: float = 0.8
    a: float = 0.3
    b: float = 0.2
    c0: float = 0.5
    c1: float = 1.1

    @property
    def L2(self) -> float:
        return self.L - self.L1 - self.delta

    @property
    def x_cathode(self) -> float:
        return self.L1 + self.delta

    def u(self, x):
        return self.a * np.cos(np.pi * x / self.L)

    def u_xx(self, x):
        return -self.a * (np.pi / self.L) ** 2 * np.cos(np.pi * x / self.L)

    def v_anode(self, x):
        q = self.I / (self.A * self.sigma)
        return self.c0 + q * (-x + x**2 / (2 * self.L1)) + self.b * np.cos(np.pi * x / self.L1)

    def v_anode_xx(self, x):
        q = self.I / (self.A * self.sigma)
        return q / self.L1 - self.b * (np.pi / self.L1) ** 2 * np.cos(np.pi * x / self.L1)

    def v_cathode(self, x):
        q = self.I / (self.A * self.sigma)
        s = x - self.x_cathode
        return self.c1 - q * s**2 / (2 * self.L2)

    def v_cathode_xx(self, x):
        q = self.I / (self.A * self.sigma)
        return -q / self.L2 + 0.0 * x


def mms_case(**kw) -> MMSCase:
    return MMSCase(**kw)


def mms_sources(case: MMSCase, mesh: Mesh):
    """Cell-center sources ``(f_e, f_s)`` for the stub-flux system.

    ``-kappa u'' - j - f_e = 0`` on all cells and ``-sigma v'' + j - f_s = 0`` on
    electrode cells, with ``j = g0 (v - u)`` on electrodes and zero in the separator.
    """
    x = mesh.centers
    u = case.u(x)
    f_e = -case.kappa * case.u_xx(x)
    xa, xc = x[mesh.anode], x[mesh.cathode]
    v = np.concatenate((case.v_anode(xa), case.v_cathode(xc)))
    vxx = np.concatenate((case.v_anode_xx(xa), case.v_cathode_xx(xc)))
    j = case.g0 * (v - u[mesh.electrode_cells])
    f_e[mesh.electrode_cells] -= j
    f_s = -case.sigma * vxx + j
    return f_e, f_s


def _mms_config(case: MMSCase, n_per_region: int, base: CellConfig | None = None) -> CellConfig:
    base = base or reference_config()
    g = CellGeometry(L=case.L, L1=case.L1, delta=case.delta, Rs_neg=1.0, Rs_pos=1.0, A=case.A, Rf=0.0)
    tr = base.transport
    kap = KappaModel(PolyTable.parse(case.kappa), 1.0, case.kappa, case.kappa)
    tr = replace(tr, sigma={"anode": case.sigma, "cathode": case.sigma}, sigma_min=case.sigma, kappa=kap,
                 alpha_phie=0.0)
    kp = base.kinetics
    zero = {"anode": (0.0,), "cathode": (0.0,)}
    ocp = replace(kp.ocp, lambda_min=zero, lambda_max=zero, mu=zero,
                  p={"anode": PolyTable.parse(0.0), "cathode": PolyTable.parse(0.0)}, p_inf=0.0, ce_ref=1.0)
    kp = replace(kp, ocp=ocp, mode="stub-linear", g0=case.g0, cs_max=1.0)
    ms = MeshSpec(n_anode=n_per_region, n_separator=n_per_region, n_cathode=n_per_region, n_r_neg=4, n_r_pos=4)
    return replace(base, geometry=g, transport=tr, kinetics=kp, mesh=ms)


def mms_solve(case: MMSCase, n_per_region: int):
    """Solve the manufactured problem; returns ``(model, solution, u_exact, v_exact)``."""
    cfg = _mms_config(case, n_per_region)
    model = CellModel(cfg, flux_mode=FluxMode("stub-linear", g0=case.g0))
    m = model.mesh
    data = StateSlice(np.ones(m.n), np.full(m.n_anode, 0.5), np.full(m.n_cathode, 0.5), 300.0)
    sol = solve_potentials(model, data, case.I, EllipticOptions(newton_tol=1e-13), sources=mms_sources(case, m))
    x = m.centers
    u_ex = case.u(x)
    u_ex = u_ex - np.dot(m.widths, u_ex) / np.sum(m.widths)
    v_ex = np.concatenate((case.v_anode(x[m.anode]), case.v_cathode(x[m.cathode])))
    return model, sol, u_ex, v_ex


def elliptic_study(levels: Sequence[int] = (8, 16, 32, 64), case: MMSCase | None = None) -> ConvergenceStudy:
    """Max-norm error of ``(phie_li, phis)`` against the manufactured solution."""
    case = case or MMSCase()
    errs, hs = [], []
    for n in levels:
        _, sol, u_ex, v_ex = mms_solve(case, n)
        errs.append(max(np.max(np.abs(sol.phie_li - u_ex)), np.max(np.abs(sol.phis - v_ex))))
        hs.append(case.L1 / n)
    return ConvergenceStudy("elliptic manufactured solution", "spatial", tuple(hs), tuple(errs))


# ---------------------------------------------------------------- diffusion eigenmodes


def _lowest_mode(ab: np.ndarray, weights: np.ndarray, dt: float):
    """Second-smallest eigenpair of the symmetric pencil ``(K, diag(weights))``.

    ``ab`` is the implicit-Euler matrix ``diag(weights)/dt + K`` in (1,1) banded layout.
    """
    K_diag = ab[1] - weights / dt
    off = ab[0, 1:]
    s = 1.0 / np.sqrt(weights)
    band = np.zeros((2, len(weights)))
    band[0] = K_diag * s * s
    band[1, :-1] = off * s[:-1] * s[1:]
    vals, vecs = eig_banded(band, lower=True, select="i", select_range=(1, 1))
    return float(vals[0]), vecs[:, 0] * s


def particle_eigenvalue(n: int, Rs: float = 1.0, Ds: float = 1.0, dt: float = 1e-3, ratio: float = 1.0):
    """``(lam_h, lam_exact, vector)`` for the slowest decaying non-constant mode."""
    grid = particle_grid(Rs, n, ratio)
    ab = particle_matrix(grid, Ds, dt)
    _, vec = _lowest_mode(ab, grid.volumes, dt)
    new = step_particle(vec, 0.0, Ds, dt, grid, ab)
    ratio_ = float(np.dot(grid.volumes * new, vec) / np.dot(grid.volumes * vec, vec))
    lam_h = (1.0 / ratio_ - 1.0) / dt
    return lam_h, Ds * (SPHERE_ROOT / Rs) ** 2, vec


def particle_spatial_study(levels: Sequence[int] = (10, 20, 40, 80), Rs: float = 1.0, Ds: float = 1.0):
    errs, hs = [], []
    for n in levels:
        lam_h, lam, _ = particle_eigenvalue(n, Rs, Ds)
        errs.append(abs(lam_h - lam) / lam)
        hs.append(Rs / n)
    return ConvergenceStudy("solid diffusion eigenvalue", "spatial", tuple(hs), tuple(errs))


def particle_temporal_study(steps: Sequence[int] = (10, 20, 40, 80), n: int = 40, Rs: float = 1.0,
                            Ds: float = 1.0, t_final: float = 0.05):
    grid = particle_grid(Rs, n)
    lam_h, _, vec = particle_eigenvalue(n, Rs, Ds)
    errs, hs = [], []
    for k in steps:
        dt = t_final / k
        ab = particle_matrix(grid, Ds, dt)
        c = vec.copy()
        for _ in range(k):
            c = step_particle(c, 0.0, Ds, dt, grid, ab)
        amp = float(np.dot(grid.volumes * c, vec) / np.dot(grid.volumes * vec, vec))
        errs.append(abs(amp - math.exp(-lam_h * t_final)))
        hs.append(dt)
    return ConvergenceStudy("solid diffusion decay", "temporal", tuple(hs), tuple(errs))


def _uniform_mesh(n: int, L: float = 3.0) -> Mesh:
    g = CellGeometry(L=L, L1=L / 3, delta=L / 3, Rs_neg=1.0, Rs_pos=1.0, A=1.0)
    return build_mesh(g, MeshSpec(n_anode=n, n_separator=n, n_cathode=n, n_r_neg=3, n_r_pos=3))


def electrolyte_eigenvalue(n: int, m: int = 1, De: float = 1.0, L: float = 3.0, dt: float = 1e-3):
    mesh = _uniform_mesh(n, L)
    De_c = np.full(mesh.n, De)
    ab = electrolyte_matrix(mesh, De_c, dt)
    K_diag = ab[1] - mesh.widths / dt
    s = 1.0 / np.sqrt(mesh.widths)
    band = np.zeros((2, mesh.n))
    band[0] = K_diag * s * s
    band[1, :-1] = ab[0, 1:] * s[:-1] * s[1:]
    _, vecs = eig_banded(band, lower=True, select="i", select_range=(m, m))
    vec = vecs[:, 0] * s
    new = step_electrolyte(vec, np.zeros(mesh.n), De_c, 0.0, dt, mesh, ab)
    r = float(np.dot(mesh.widths * new, vec) / np.dot(mesh.widths * vec, vec))
    return (1.0 / r - 1.0) / dt, De * (m * math.pi / L) ** 2, vec, mesh


def electrolyte_spatial_study(levels: Sequence[int] = (8, 16, 32, 64), m: int = 1, De: float = 1.0):
    errs, hs = [], []
    for n in levels:
        lam_h, lam, _, mesh = electrolyte_eigenvalue(n, m, De)
        errs.append(abs(lam_h - lam) / lam)
        hs.append(float(mesh.widths[0]))
    return ConvergenceStudy("electrolyte diffusion eigenvalue", "spatial", tuple(hs), tuple(errs))


def electrolyte_temporal_study(steps: Sequence[int] = (10, 20, 40, 80), n: int = 20, m: int = 1,
                               De: float = 1.0, t_final: float = 0.5):
    lam_h, _, vec, mesh = electrolyte_eigenvalue(n, m, De)
    De_c = np.full(mesh.n, De)
    zero = np.zeros(mesh.n)
    errs, hs = [], []
    for k in steps:
        dt = t_final / k
        ab = electrolyte_matrix(mesh, De_c, dt)
        c = vec.copy()
        for _ in range(k):
            c = step_electrolyte(c, zero, De_c, 0.0, dt, mesh, ab)
        amp = float(np.dot(mesh.widths * c, vec) / np.dot(mesh.widths * vec, vec))
        errs.append(abs(amp - math.exp(-lam_h * t_final)))
        hs.append(dt)
    return ConvergenceStudy("electrolyte diffusion decay", "temporal", tuple(hs), tuple(errs))


# ---------------------------------------------------------------- thermal


def thermal_study(tp=None, T0: float = 320.0, n_tau: float = 5.0, dt_factor: float = 1e-3,
                  scheme: str = "exact") -> ConvergenceStudy:
    """Relative sup error of the source-free relaxation at ``dt = dt_factor / alpha_T``."""
    tp = tp or reference_config().thermal
    a = tp.alpha_T
    dt = dt_factor / a
    n = int(round(n_tau / dt_factor))
    T = T0
    err = 0.0
    for k in range(1, n + 1):
        T, _ = step_temperature(T, None, tp, dt, scheme=scheme)
        exact = tp.T_amb + (T0 - tp.T_amb) * math.exp(-a * k * dt)
        err = max(err, abs(T - exact))
    return ConvergenceStudy("thermal relaxation", "error", (dt,), (err / abs(T0 - tp.T_amb),))


# ---------------------------------------------------------------- registry

SUITES: Dict[str, List[Callable[[], ConvergenceStudy]]] = {
    "elliptic": [elliptic_study],
    "solid-diffusion": [particle_spatial_study, particle_temporal_study],
    "electrolyte-diffusion": [electrolyte_spatial_study, electrolyte_temporal_study],
    "thermal": [thermal_study],
}


def run_suite(name: str) -> List[ConvergenceStudy]:
    if name == "all":
        return [f() for fs in SUITES.values() for f in fs]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return [f() for f in SUITES[name]]
