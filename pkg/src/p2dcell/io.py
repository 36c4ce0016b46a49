"""Run outputs: ``series.csv``, ``report.json`` and ``snapshots/NNNN.csv``.

Floats are written with ``repr``-exact ``.17g`` formatting so that identical
runs produce identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from types import SimpleNamespace
from typing import Dict, Iterable, List

import numpy as np

from .diagnostics import SERIES_COLUMNS, TimeSeriesRecord, conservation_ledger, voltage
from .particle import boundary_trace

__all__ = [
    "SNAPSHOT_COLUMNS",
    "format_value",
    "write_series",
    "read_series",
    "write_snapshot",
    "write_snapshots",
    "read_snapshot",
    "snapshot_voltage",
    "build_report",
    "write_report",
]


def format_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_series(path: str | Path, records: Iterable[TimeSeriesRecord]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(format_value(v) for v in r.row()) + "\n")
    return path


def read_series(path: str | Path) -> Dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


SNAPSHOT_COLUMNS = ("x", "region", "ce", "phie_li", "phie", "phis", "j", "csB")


def write_snapshot(path: str | Path, model, state) -> Path:
    """One row per macro cell; electrode rows also carry the radial profile ``cs_0 .. cs_{n-1}``.

    The comment header stores ``t``, ``I``, ``T`` and the end-point solid
    potentials, which is enough to recompute ``V`` and ``SOC``.
    """
    path = Path(path)
    m = model.mesh
    sol = state.solution
    nr = max(m.particle_neg.n, m.particle_pos.n)
    phis = np.full(m.n, np.nan)
    phis[model.el_idx] = sol.phis
    csB = np.full(m.n, np.nan)
    csB[m.anode] = boundary_trace(state.cs_neg, m.particle_neg)
    csB[m.cathode] = boundary_trace(state.cs_pos, m.particle_pos)
    cs = np.full((m.n, nr), np.nan)
    cs[m.anode, : m.particle_neg.n] = state.cs_neg
    cs[m.cathode, : m.particle_pos.n] = state.cs_pos
    names = ("anode", "separator", "cathode")
    with open(path, "w", newline="") as fh:
        meta = {"t": state.t, "I": sol.I, "T": state.T, "phis_0": sol.phis_0, "phis_L": sol.phis_L}
        fh.write("# " + " ".join(f"{k}={format_value(v)}" for k, v in meta.items()) + "\n")
        fh.write(",".join(SNAPSHOT_COLUMNS + tuple(f"cs_{k}" for k in range(nr))) + "\n")
        for i in range(m.n):
            vals = [m.centers[i], names[int(m.region[i])], state.ce[i], sol.phie_li[i], sol.phie[i], phis[i], sol.j[i],
                    csB[i], *cs[i]]
            fh.write(",".join(v if isinstance(v, str) else format_value(v) for v in vals) + "\n")
    return path


def read_snapshot(path: str | Path) -> Dict[str, object]:
    with open(path, newline="") as fh:
        meta_line = fh.readline()
        rows = list(csv.reader(fh))
    meta = {k: float(v) for k, v in (kv.split("=") for kv in meta_line[1:].split())}
    header, body = rows[0], rows[1:]
    out: Dict[str, object] = {"meta": meta, "region": np.array([r[1] for r in body])}
    for i, name in enumerate(header):
        if name == "region":
            continue
        out[name] = np.array([float(r[i]) for r in body])
    cs_cols = [n for n in header if n.startswith("cs_")]
    out["cs"] = np.column_stack([out[n] for n in cs_cols])
    return out


def snapshot_voltage(snap: Dict[str, object], geometry) -> float:
    meta = snap["meta"]
    return voltage(SimpleNamespace(phis_0=meta["phis_0"], phis_L=meta["phis_L"]), meta["I"], geometry)


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.generic):
        return _clean(v.item())
    return v


def build_report(model, series, state0, mode: str, config_echo: dict, linter=None,
                 validation=None) -> dict:
    reps = series.reports
    ledger = conservation_ledger(model, [state0, series.final_state], [(r.dt, r.I) for r in reps if r.halted is None])
    if series.records:
        ledger["electrolyte_drift_max"] = max(abs(r.ce_drift) for r in series.records)
        ledger["solid_drift_max"] = max(abs(r.solid_drift) for r in series.records)
        ledger["compat_max"] = max(max(abs(r.compat_anode), abs(r.compat_cathode)) for r in series.records)
        ledger["j_total_max"] = max(abs(r.j_total) for r in series.records)
    ok = [r for r in reps if r.halted is None]
    stats = {
        "steps": len(ok),
        "t_end": series.final_state.t,
        "t_end_I": series.t_end,
        "max_picard_iters": max((r.picard_iters for r in ok), default=0),
        "max_newton_iters": max((max(r.newton_iters) for r in ok if r.newton_iters), default=0),
        "halvings": sum(r.halvings for r in reps),
        "dt_min_used": min((r.dt for r in ok), default=math.nan),
        "dt_max_used": max((r.dt for r in ok), default=math.nan),
    }
    report = {
        "mode": mode,
        "status": "completed" if series.halt is None else series.halt.tag,
        "halt": None if series.halt is None else series.halt.to_dict(),
        "statistics": stats,
        "ledger": ledger,
        "config": config_echo,
    }
    if linter is not None:
        report["exponent_conditions"] = {
            "ok": linter.ok,
            "entries": [
                {"region": e.region, "condition": e.condition, "T": e.T, "margin": e.margin, "status": e.status}
                for e in linter.entries
            ],
        }
    if validation is not None:
        report["validation"] = {"ok": validation.ok, "failures": [f"{f.name}: {f.detail}" for f in validation.failures]}
    return _clean(report)


def write_report(path: str | Path, report: dict) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return path


def write_snapshots(directory: str | Path, model, states: List) -> List[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    return [write_snapshot(d / f"{k:04d}.csv", model, s) for k, s in enumerate(states)]
