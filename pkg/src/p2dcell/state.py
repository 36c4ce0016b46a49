"""Cell state container, admissibility predicate and initial state."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import CellModel, StateSlice
from .particle import boundary_trace

__all__ = ["CellState", "InadmissibleState", "admissibility_violation", "initial_state", "state_slice"]


class InadmissibleState(ValueError):
    """Initial or intermediate data outside ce > 0, 0 < cs < cs_max, T > 0."""


@dataclass(frozen=True)
class CellState:
    t: float
    ce: np.ndarray
    cs_neg: np.ndarray  # (anode cells, radial cells)
    cs_pos: np.ndarray  # (cathode cells, radial cells)
    T: float
    phie_li: np.ndarray | None = None
    phis: np.ndarray | None = None  # electrode cells, anode then cathode
    solution: object | None = None  # PotentialSolution matching this state, when known

    def with_(self, **kw) -> "CellState":
        return replace(self, **kw)


def _as_field(v, n: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return np.full(n, float(a))
    if a.shape != (n,):
        raise InadmissibleState(f"{name}: expected {n} values, got shape {a.shape}")
    return a.copy()


def state_slice(model: CellModel, ce, cs_neg, cs_pos, T) -> StateSlice:
    m = model.mesh
    return StateSlice(
        ce=np.asarray(ce, dtype=float),
        csB_neg=boundary_trace(cs_neg, m.particle_neg),
        csB_pos=boundary_trace(cs_pos, m.particle_pos),
        T=float(T),
    )


def admissibility_violation(model: CellModel, ce, cs_neg, cs_pos, T, surface_only: bool = False):
    """Return ``None`` or ``(field, index, value, message)`` for the first violated bound."""
    cs_max = model.config.kinetics.cs_max
    ce = np.asarray(ce)
    if not np.all(np.isfinite(ce)) or np.min(ce) <= 0:
        i = int(np.argmin(np.where(np.isfinite(ce), ce, -np.inf)))
        return ("ce", i, float(ce[i]), f"ce <= 0 at cell {i} (x = {model.mesh.centers[i]:.6g}, value {ce[i]:.6g})")
    if not (np.isfinite(T) and T > 0):
        return ("T", 0, float(T), f"T = {T} is not positive")
    m = model.mesh
    for name, cs, grid in (("cs_neg", cs_neg, m.particle_neg), ("cs_pos", cs_pos, m.particle_pos)):
        cs = np.asarray(cs)
        vals = boundary_trace(cs, grid) if surface_only else cs
        full = np.concatenate((np.ravel(vals), boundary_trace(cs, grid)))
        if not np.all(np.isfinite(full)):
            return (name, -1, float("nan"), f"{name} is not finite")
        lo, hi = float(np.min(full)), float(np.max(full))
        if lo <= 0:
            return (name, int(np.argmin(full)), lo, f"{name} <= 0 (min {lo:.6g})")
        if hi >= cs_max:
            return (name, int(np.argmax(full)), hi, f"{name} >= cs_max (max {hi:.6g}, cs_max {cs_max})")
    return None


def initial_state(model: CellModel, ce0=None, cs0_neg=None, cs0_pos=None, T0=None, I0: float = 0.0,
                  solve: bool = True, opts=None) -> CellState:
    """Sample initial data onto the mesh, check admissibility and solve the potentials at t = 0.

    Fields default to the configuration's ``initial`` section; scalars mean uniform
    values, per-cell arrays are taken as given (cs arrays are uniform in r).
    """
    cfg = model.config
    m = model.mesh
    ini = cfg.initial
    ce0 = ini.ce0 if ce0 is None else ce0
    cs0_neg = ini.cs0_neg if cs0_neg is None else cs0_neg
    cs0_pos = ini.cs0_pos if cs0_pos is None else cs0_pos
    T0 = ini.T0 if T0 is None else T0

    ce = _as_field(ce0, m.n, "ce0")
    cs_neg = _particles(cs0_neg, m.n_anode, m.particle_neg.n, "cs0_neg")
    cs_pos = _particles(cs0_pos, m.n_cathode, m.particle_pos.n, "cs0_pos")
    bad = admissibility_violation(model, ce, cs_neg, cs_pos, T0)
    if bad is not None:
        raise InadmissibleState(f"inadmissible initial data: {bad[3]}")
    state = CellState(0.0, ce, cs_neg, cs_pos, float(T0))
    if not solve:
        return state
    from .potentials import EllipticOptions, solve_potentials

    if opts is None:
        so = cfg.solver
        opts = EllipticOptions(newton_tol=so.newton_tol, max_iters=so.max_newton)
    sol = solve_potentials(model, state_slice(model, ce, cs_neg, cs_pos, T0), I0, opts)
    return replace(state, phie_li=sol.phie_li, phis=sol.phis, solution=sol)


def _particles(v, n_nodes: int, n_r: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return np.full((n_nodes, n_r), float(a))
    if a.shape == (n_nodes,):
        return np.repeat(a[:, None], n_r, axis=1)
    if a.shape == (n_nodes, n_r):
        return a.copy()
    raise InadmissibleState(f"{name}: expected scalar, ({n_nodes},) or ({n_nodes}, {n_r}), got {a.shape}")
