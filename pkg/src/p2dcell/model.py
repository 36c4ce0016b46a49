"""Configuration plus mesh plus cached coefficient arrays, shared by the solvers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .electrolyte import De_cells
from .kinetics import FluxMode
from .mesh import Mesh, build_mesh
from .params import CellConfig

__all__ = ["CellModel", "StateSlice"]


@dataclass(frozen=True)
class StateSlice:
    """Frozen data of one elliptic solve: ``ce`` on all cells, surface values, temperature."""

    ce: np.ndarray
    csB_neg: np.ndarray
    csB_pos: np.ndarray
    T: float

    @property
    def csB(self) -> np.ndarray:
        return np.concatenate((self.csB_neg, self.csB_pos))


class CellModel:
    """Validated-config view used by every solver; immutable after construction."""

    def __init__(self, config: CellConfig, mesh: Mesh | None = None, flux_mode: FluxMode | None = None):
        self.config = config
        self.mesh = mesh if mesh is not None else build_mesh(config.geometry, config.mesh)
        self.flux_mode = flux_mode if flux_mode is not None else FluxMode.from_params(config.kinetics)
        m = self.mesh
        tr = config.transport
        self.De_c = De_cells(m, tr.De)
        self.sigma_neg = np.full(m.n_anode, tr.sigma["anode"])
        self.sigma_pos = np.full(m.n_cathode, tr.sigma["cathode"])
        self.el_idx = m.electrode_cells
        self.w_el = m.widths[self.el_idx]
        self.Na = m.n_anode
        self.Nc = m.n_cathode

    @property
    def geometry(self):
        return self.config.geometry

    @property
    def kinetics(self):
        return self.config.kinetics

    @property
    def transport(self):
        return self.config.transport

    def f_phie(self, ce):
        return self.config.transport.f(ce)

    def with_flux_mode(self, mode: FluxMode) -> "CellModel":
        return CellModel(self.config, self.mesh, mode)
