"""Electrolyte concentration on the macro mesh (zero-flux ends, implicit Euler)."""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .mesh import Mesh, harmonic_faces

__all__ = ["De_cells", "electrolyte_matrix", "step_electrolyte", "electrolyte_total"]


def De_cells(mesh: Mesh, De) -> np.ndarray:
    """Diffusivity at cell centers from a per-region coefficient table or a scalar."""
    if np.isscalar(De):
        return np.full(mesh.n, float(De))
    out = np.empty(mesh.n)
    for r in ("anode", "separator", "cathode"):
        s = mesh.region_slice(r)
        out[s] = np.polynomial.polynomial.polyval(mesh.centers[s], De[r])
    return out


def electrolyte_matrix(mesh: Mesh, De_c: np.ndarray, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    G = harmonic_faces(mesh.widths, De_c)
    ab = np.zeros((3, mesh.n))
    ab[1] = mesh.widths / dt
    ab[1, :-1] += G
    ab[1, 1:] += G
    ab[0, 1:] = -G
    ab[2, :-1] = -G
    return ab


def step_electrolyte(ce, j_field, De, alpha_e: float, dt: float, mesh: Mesh, ab: np.ndarray | None = None):
    """One step of ``dc/dt - (De c_x)_x = alpha_e j``.

    ``De`` is a scalar, a per-region table or an array of cell values.
    Total mass changes by exactly ``alpha_e * sum(w * j) * dt``.
    """
    ce = np.asarray(ce, dtype=float)
    if ab is None:
        De_c = De if isinstance(De, np.ndarray) else De_cells(mesh, De)
        ab = electrolyte_matrix(mesh, De_c, dt)
    b = mesh.widths * (ce / dt + alpha_e * np.asarray(j_field, dtype=float))
    return solve_banded((1, 1), ab, b, check_finite=False)


def electrolyte_total(ce, mesh: Mesh) -> float:
    return float(np.dot(mesh.widths, ce))
