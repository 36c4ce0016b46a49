from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from p2dcell.coupler import RunOptions, run
from p2dcell.model import CellModel
from p2dcell.params import config_from_dict, reference_config
from p2dcell.state import initial_state

REFERENCE_JSON = Path(__file__).resolve().parents[1] / "src" / "p2dcell" / "data" / "reference.json"


@pytest.fixture(scope="session")
def reference_raw():
    with open(REFERENCE_JSON) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def ref_cfg():
    return reference_config()


@pytest.fixture(scope="session")
def ref_model(ref_cfg):
    return CellModel(ref_cfg)


@pytest.fixture(scope="session")
def ref_state0(ref_model):
    return initial_state(ref_model)


@pytest.fixture(scope="session")
def cycle_run(ref_cfg, ref_model, ref_state0):
    """The 1000-step reference charge/discharge cycle, shared by several tests."""
    opts = RunOptions.from_config(ref_cfg.solver, ref_cfg.monitors, snapshots="all")
    return run(ref_model, ref_state0, ref_cfg.current, opts)


def small_config(raw, n=6, nr=8, **sections):
    """Reference config on a coarse mesh, with optional section overrides."""
    d = json.loads(json.dumps(raw))
    d["mesh"] = {"n_anode": n, "n_separator": n, "n_cathode": n, "n_r_neg": nr, "n_r_pos": nr}
    for k, v in sections.items():
        d.setdefault(k, {}).update(v)
    return config_from_dict(d)


def matched_cycle_config(cfg, I=3.2, t_half=50.0):
    from p2dcell.profile import CurrentProfile

    prof = CurrentProfile.from_pieces([(0.0, t_half, I, I), (t_half, 2 * t_half, -I, -I)])
    return replace(cfg, current=prof)


def random_admissible(rng, kp, n):
    """Random (ce, csB, T) strictly inside the admissible box."""
    ce = 10 ** rng.uniform(-5, -2, n)
    cs = kp.cs_max * rng.uniform(0.02, 0.98, n)
    T = rng.uniform(260.0, 340.0)
    return ce, cs, T


np.set_printoptions(precision=17)

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
