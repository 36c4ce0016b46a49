"""Run the reference charge/discharge cycle and summarise voltage, SOC and conservation.

Usage: ``python demos/reference_cycle.py [out_dir]``
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from p2dcell.coupler import RunOptions, run
from p2dcell.diagnostics import conservation_ledger
from p2dcell.io import write_series
from p2dcell.model import CellModel
from p2dcell.params import reference_config
from p2dcell.state import initial_state


def main(out: Path | None = None) -> None:
    cfg = reference_config()
    model = CellModel(cfg)
    s0 = initial_state(model)
    ts = run(model, s0, cfg.current, RunOptions.from_config(cfg.solver, cfg.monitors))
    t, V, soc = ts.column("t"), ts.column("V"), ts.column("SOC")
    print(f"steps {len(ts.reports)}, status {'completed' if ts.completed else ts.halt.tag}")
    for tq in (0.0, 250.0, 500.0, 750.0, 1000.0):
        i = int(np.searchsorted(t, tq))
        print(f"t = {t[i]:7.1f} s  I = {ts.column('I')[i]:+.2f} A  V = {V[i]:.6f} V  SOC = {soc[i]:.6f}")
    led = conservation_ledger(model, [s0, ts.final_state])
    print(f"electrolyte drift {led['electrolyte_drift']:.2e}, solid drift {led['solid_total_drift']:.2e}")
    print(f"max Picard iterations {int(ts.column('picard_iters').max())}, T rise {ts.column('T').max() - s0.T:.3e} K")
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        print("series written to", write_series(Path(out) / "series.csv", ts.records))


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else None)
