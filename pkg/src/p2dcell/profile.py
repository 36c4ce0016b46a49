"""Piecewise-continuous applied current ``I(t)`` with explicit breakpoints.

Sign convention: ``I > 0`` discharges the cell (lithium leaves the anode).
"""
from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence, Tuple

import numpy as np

__all__ = ["CurrentPiece", "CurrentProfile", "profile_from_dict", "read_profile_csv", "constant_profile"]


@dataclass(frozen=True)
class CurrentPiece:
    """Current on ``[t_start, t_end]``, piecewise linear through ``(times, values)``."""

    times: Tuple[float, ...]
    values: Tuple[float, ...]

    @property
    def t_start(self) -> float:
        return self.times[0]

    @property
    def t_end(self) -> float:
        return self.times[-1]

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class CurrentProfile:
    pieces: Tuple[CurrentPiece, ...]

    @classmethod
    def from_pieces(cls, spec: Sequence[Tuple[float, float, float, float]]) -> "CurrentProfile":
        """Build from ``(t_start, t_end, I_start, I_end)`` tuples."""
        return cls(tuple(CurrentPiece((float(a), float(b)), (float(i0), float(i1))) for a, b, i0, i1 in spec))

    @property
    def t_end_I(self) -> float:
        return self.pieces[-1].t_end

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(p.t_start for p in self.pieces) + (self.t_end_I,)

    def check_partition(self) -> Tuple[bool, str]:
        if not self.pieces:
            return False, "no pieces"
        if self.pieces[0].t_start != 0.0:
            return False, f"first piece starts at {self.pieces[0].t_start}, expected 0"
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.t_end != b.t_start:
                return False, f"gap or overlap between {a.t_end} and {b.t_start}"
        for p in self.pieces:
            if any(t1 < t0 for t0, t1 in zip(p.times, p.times[1:])) or p.t_end <= p.t_start:
                return False, f"piece [{p.t_start}, {p.t_end}] not increasing"
        return True, f"{len(self.pieces)} pieces on [0, {self.t_end_I}]"

    def piece_index(self, t: float) -> int:
        """Index of the piece owning the open-right interval containing ``t``."""
        starts = [p.t_start for p in self.pieces]
        return max(0, min(len(self.pieces) - 1, bisect_right(starts, t) - 1))

    def current_for_step(self, t0: float, t1: float) -> float:
        """Current used for the step ``(t0, t1]``: the owning piece evaluated at ``t1``."""
        return self.pieces[self.piece_index(t0)](t1)

    def __call__(self, t: float) -> float:
        """Right-continuous evaluation."""
        return self.pieces[self.piece_index(t)](t)

    def next_breakpoint(self, t: float) -> float:
        for b in self.breakpoints:
            if b > t:
                return b
        return self.t_end_I

    def to_dict(self) -> dict:
        return {"pieces": [{"t": list(p.times), "I": list(p.values)} for p in self.pieces]}


def constant_profile(I: float, t_end: float) -> CurrentProfile:
    return CurrentProfile.from_pieces([(0.0, t_end, I, I)])


def read_profile_csv(path: str | Path, breakpoints: Sequence[float] | None = None) -> CurrentProfile:
    """Read a two-column ``t,I`` CSV.

    Rows are interpolation nodes.  Breakpoints come from ``breakpoints`` or from a
    ``# breakpoints: t0, t1, ...`` comment line; the first and last times are
    always breakpoints.  A jump is written as two rows sharing a breakpoint time.
    """
    rows = []
    found: list[float] = []
    with open(path, newline="") as fh:
        for line in fh:
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                body = s[1:].strip()
                if body.lower().startswith("breakpoints"):
                    found = [float(v) for v in body.split(":", 1)[1].replace(",", " ").split()]
                continue
            rec = next(csv.reader([s]))
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                continue  # header
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two rows")
    bps = sorted(set(list(breakpoints or found) + [rows[0][0], rows[-1][0]]))
    return _pieces_from_rows(rows, bps)


def _pieces_from_rows(rows, bps) -> CurrentProfile:
    pieces = []
    for a, b in zip(bps, bps[1:]):
        inside = [(t, i) for t, i in rows if a <= t <= b]
        # jumps: duplicated breakpoint rows, keep the value that belongs to this piece
        left = [r for r in inside if r[0] == a]
        right = [r for r in inside if r[0] == b]
        mid = [r for r in inside if a < r[0] < b]
        ts = [t for t, _ in mid]
        if len(set(ts)) != len(ts):
            raise ValueError(f"duplicate time inside piece [{a}, {b}] (jumps only allowed at breakpoints)")
        pts = ([left[-1]] if left else []) + mid + ([right[0]] if right else [])
        if not left:
            pts.insert(0, (a, float(np.interp(a, [r[0] for r in rows], [r[1] for r in rows]))))
        if not right:
            pts.append((b, float(np.interp(b, [r[0] for r in rows], [r[1] for r in rows]))))
        pieces.append(CurrentPiece(tuple(p[0] for p in pts), tuple(p[1] for p in pts)))
    return CurrentProfile(tuple(pieces))


def profile_from_dict(raw: Mapping[str, Any], base_dir: str | Path | None = None) -> CurrentProfile:
    """Parse the ``current`` section.

    Accepted forms: ``{"csv": path, "breakpoints": [...]}``; ``{"pieces": [...]}``
    where a piece is ``{"t_start", "t_end", "I"}`` (constant), ``{"t_start",
    "t_end", "I_start", "I_end"}`` (ramp) or ``{"t": [...], "I": [...]}``.
    """
    if "csv" in raw:
        p = Path(raw["csv"])
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return read_profile_csv(p, raw.get("breakpoints"))
    pieces = []
    for pc in raw["pieces"]:
        if "t" in pc:
            pieces.append(CurrentPiece(tuple(float(v) for v in pc["t"]), tuple(float(v) for v in pc["I"])))
        elif "I" in pc:
            pieces.append(CurrentPiece((float(pc["t_start"]), float(pc["t_end"])), (float(pc["I"]),) * 2))
        else:
            pieces.append(
                CurrentPiece((float(pc["t_start"]), float(pc["t_end"])), (float(pc["I_start"]), float(pc["I_end"])))
            )
    return CurrentProfile(tuple(pieces))
