"""Cell-centered finite-volume meshes for the macro and particle scales."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import CellGeometry, MeshSpec

__all__ = ["ParticleGrid", "Mesh", "MeshError", "build_mesh", "particle_grid", "harmonic_faces"]


class MeshError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _graded_faces(a: float, b: float, n: int, ratio: float) -> np.ndarray:
    if ratio == 1.0:
        f = a + (b - a) * np.arange(n + 1) / n
    else:
        w = ratio ** np.arange(n)
        f = a + (b - a) * np.concatenate(([0.0], np.cumsum(w))) / w.sum()
    f[0], f[-1] = a, b
    return f


@dataclass(frozen=True)
class ParticleGrid:
    """Radial control volumes on ``[0, Rs]``; ``volumes`` are ``(r+^3 - r-^3)/3``."""

    Rs: float
    faces: np.ndarray
    centers: np.ndarray
    volumes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.centers)


def particle_grid(Rs: float, n: int, ratio: float = 1.0) -> ParticleGrid:
    if n < 3:
        raise MeshError(f"particle needs >= 3 cells, got {n}")
    f = _graded_faces(0.0, Rs, n, ratio)
    c = 0.5 * (f[1:] + f[:-1])
    v = (f[1:] ** 3 - f[:-1] ** 3) / 3.0
    return ParticleGrid(Rs, _frozen(f), _frozen(c), _frozen(v))


@dataclass(frozen=True)
class Mesh:
    faces: np.ndarray
    centers: np.ndarray
    widths: np.ndarray
    region: np.ndarray  # 0 anode, 1 separator, 2 cathode
    n_anode: int
    n_separator: int
    n_cathode: int
    particle_neg: ParticleGrid
    particle_pos: ParticleGrid

    @property
    def n(self) -> int:
        return len(self.centers)

    @property
    def anode(self) -> slice:
        return slice(0, self.n_anode)

    @property
    def separator(self) -> slice:
        return slice(self.n_anode, self.n_anode + self.n_separator)

    @property
    def cathode(self) -> slice:
        return slice(self.n_anode + self.n_separator, self.n)

    @property
    def electrode_cells(self) -> np.ndarray:
        """Indices of the cells of J_delta (anode then cathode)."""
        return np.r_[np.arange(self.n_anode), np.arange(self.n - self.n_cathode, self.n)]

    def region_slice(self, region: str) -> slice:
        return {"anode": self.anode, "separator": self.separator, "cathode": self.cathode}[region]

    def particle(self, region: str) -> ParticleGrid:
        return self.particle_neg if region == "anode" else self.particle_pos

    def integrate(self, f) -> float:
        return float(np.dot(self.widths, f))


def build_mesh(geometry: CellGeometry, resolution: MeshSpec) -> Mesh:
    """Macro mesh with faces exactly at 0, L1, L1+delta and L, plus both particle grids."""
    counts = {
        "anode": resolution.n_anode,
        "separator": resolution.n_separator,
        "cathode": resolution.n_cathode,
    }
    for name, n in counts.items():
        if n < 3:
            raise MeshError(f"{name} needs >= 3 cells, got {n}")
    g = geometry
    x1, x2 = g.L1, g.L1 + g.delta
    if not (0 < x1 < x2 < g.L):
        raise MeshError(f"degenerate geometry: 0 < {x1} < {x2} < {g.L} violated")
    r = resolution.grading
    fa = _graded_faces(0.0, x1, counts["anode"], r)
    fs = _graded_faces(x1, x2, counts["separator"], 1.0)
    fc = _graded_faces(x2, g.L, counts["cathode"], 1.0 / r)
    faces = np.concatenate((fa, fs[1:], fc[1:]))
    centers = 0.5 * (faces[1:] + faces[:-1])
    widths = np.diff(faces)
    region = np.concatenate(
        (np.zeros(counts["anode"], int), np.ones(counts["separator"], int), np.full(counts["cathode"], 2))
    )
    region.setflags(write=False)
    return Mesh(
        faces=_frozen(faces),
        centers=_frozen(centers),
        widths=_frozen(widths),
        region=region,
        n_anode=counts["anode"],
        n_separator=counts["separator"],
        n_cathode=counts["cathode"],
        particle_neg=particle_grid(g.Rs_neg, resolution.n_r_neg, resolution.radial_grading),
        particle_pos=particle_grid(g.Rs_pos, resolution.n_r_pos, resolution.radial_grading),
    )


def harmonic_faces(widths: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """Interior face conductances ``1 / (h_i/(2 k_i) + h_{i+1}/(2 k_{i+1}))``."""
    return 1.0 / (0.5 * widths[:-1] / coef[:-1] + 0.5 * widths[1:] / coef[1:])
