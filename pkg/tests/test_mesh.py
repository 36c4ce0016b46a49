from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2dcell.mesh import MeshError, build_mesh, harmonic_faces, particle_grid
from p2dcell.params import CellGeometry, MeshSpec

GEOM = CellGeometry(L=155e-6, L1=50e-6, delta=25e-6, Rs_neg=2e-6, Rs_pos=3e-6, A=0.1)


def test_interfaces_are_faces():
    m = build_mesh(GEOM, MeshSpec(n_anode=7, n_separator=5, n_cathode=9))
    assert m.n == 21
    assert m.faces[0] == 0.0 and m.faces[-1] == GEOM.L
    assert m.faces[7] == GEOM.L1
    assert m.faces[12] == GEOM.L1 + GEOM.delta
    assert list(m.region[:7]) == [0] * 7 and list(m.region[-9:]) == [2] * 9
    assert np.array_equal(m.electrode_cells, np.r_[0:7, 12:21])


def test_arrays_read_only():
    m = build_mesh(GEOM, MeshSpec())
    with pytest.raises(ValueError):
        m.widths[0] = 1.0


@pytest.mark.parametrize("spec", [MeshSpec(n_anode=2), MeshSpec(n_r_pos=1)])
def test_rejects_coarse(spec):
    with pytest.raises(MeshError):
        build_mesh(GEOM, spec)


def test_rejects_degenerate_geometry():
    bad = CellGeometry(L=1.0, L1=0.6, delta=0.5, Rs_neg=1.0, Rs_pos=1.0, A=1.0)
    with pytest.raises(MeshError):
        build_mesh(bad, MeshSpec())


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 40), ratio=st.floats(0.7, 1.4))
def test_particle_volumes_sum_to_sphere(n, ratio):
    g = particle_grid(2.0, n, ratio)
    assert g.volumes.sum() == pytest.approx(8.0 / 3.0, rel=1e-13)
    assert np.all(np.diff(g.faces) > 0)
    assert g.faces[0] == 0.0 and g.faces[-1] == 2.0


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 20), st.integers(3, 20), st.integers(3, 20), st.floats(0.8, 1.25))
def test_widths_cover_cell(na, ns, nc, grading):
    m = build_mesh(GEOM, MeshSpec(n_anode=na, n_separator=ns, n_cathode=nc, grading=grading))
    assert m.widths.sum() == pytest.approx(GEOM.L, rel=1e-13)
    assert m.integrate(np.ones(m.n)) == pytest.approx(GEOM.L, rel=1e-13)
    assert np.all(m.widths > 0)


def test_harmonic_faces_two_materials():
    # series conductance of two half cells: 1 / (0.5/1 + 0.5/3)
    K = harmonic_faces(np.array([1.0, 1.0]), np.array([1.0, 3.0]))
    assert K[0] == pytest.approx(1.0 / (0.5 + 0.5 / 3.0))
