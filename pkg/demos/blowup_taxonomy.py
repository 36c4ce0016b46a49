"""Oversized constant discharge in the three flux/thermal modes.

The exponential form halts on surface depletion close to the lithium budget
``t_a = cs0 A L1 Rs / (3 alpha_s I)``; the truncated form never raises a
concentration or potential tag; truncated flux with the linearised heat source
runs the reference profile to its end.
"""
from __future__ import annotations

from p2dcell.coupler import RunOptions, run
from p2dcell.model import CellModel
from p2dcell.params import reference_config
from p2dcell.profile import constant_profile
from p2dcell.state import initial_state


def _run(cfg, profile):
    model = CellModel(cfg)
    return run(model, initial_state(model), profile, RunOptions.from_config(cfg.solver, cfg.monitors))


def main(I: float = 8.0) -> None:
    cfg = reference_config()
    g = cfg.geometry
    t_a = cfg.initial.cs0_neg * g.A * g.L1 * g.Rs_neg / (3 * cfg.transport.alpha_s_neg * I)
    print(f"anode lithium budget at {I} A: {t_a:.1f} s")
    for mode in ("exponential", "truncated"):
        ts = _run(cfg.with_mode(mode), constant_profile(I, 2 * t_a))
        h = ts.halt
        print(f"{mode:12s} -> {h.tag if h else 'completed'} at t = {ts.final_state.t:.1f} s"
              + (f" ({h.message})" if h else ""))
    c = cfg.with_mode("truncated+linearFT")
    ts = _run(c, c.current)
    print(f"truncated+linearFT on the reference profile -> {'completed' if ts.completed else ts.halt.tag}"
          f" at t = {ts.final_state.t:.1f} s")


if __name__ == "__main__":
    main()
