"""Cell parameters, unit normalization and configuration validation.

Configurations are JSON-compatible trees with the sections ``geometry``,
``transport``, ``kinetics``, ``thermal``, ``mesh``, ``initial`` and ``units``,
plus optional ``current``, ``solver`` and ``monitors``.  Parsing is lenient so
that :func:`validate_config` can report every failed check at once; the
simulator refuses to run a configuration whose report is not clean.

Internally concentrations are held in mol/cm^3 so that ``cs_max < 1``.  All
other quantities are SI.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np

from .profile import CurrentProfile, profile_from_dict

__all__ = [
    "REGIONS",
    "ELECTRODES",
    "CONCENTRATION_UNITS",
    "CellGeometry",
    "KappaModel",
    "PolyTable",
    "TransportParams",
    "OCPParams",
    "KineticParams",
    "ThermalParams",
    "MeshSpec",
    "InitialSpec",
    "SolverOptions",
    "MonitorOptions",
    "CellConfig",
    "Check",
    "ValidationReport",
    "ConfigError",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "reference_config",
    "normalize_units",
    "validate_config",
]

REGIONS = ("anode", "separator", "cathode")
ELECTRODES = ("anode", "cathode")

# factor converting the declared unit to mol/cm^3
CONCENTRATION_UNITS = {
    "mol/cm3": 1.0,
    "mol/L": 1e-3,
    "mol/m3": 1e-6,
    "internal": 1.0,
}


class ConfigError(ValueError):
    """Raised when a configuration tree cannot be parsed at all."""


def _poly(coeffs: Any) -> Tuple[float, ...]:
    if np.isscalar(coeffs):
        return (float(coeffs),)
    return tuple(float(c) for c in coeffs)


def _per_region(value: Any, regions: Sequence[str], name: str) -> Dict[str, Any]:
    if isinstance(value, Mapping):
        missing = [r for r in regions if r not in value]
        if missing:
            raise ConfigError(f"{name}: missing entries for {missing}")
        return {r: value[r] for r in regions}
    return {r: value for r in regions}


@dataclass(frozen=True)
class CellGeometry:
    L: float
    L1: float
    delta: float
    Rs_neg: float
    Rs_pos: float
    A: float
    Rf: float = 0.0

    @property
    def L2(self) -> float:
        return self.L - self.L1 - self.delta

    def Rs(self, region: str) -> float:
        return self.Rs_neg if region == "anode" else self.Rs_pos


@dataclass(frozen=True)
class PolyTable:
    """Sum of monomials ``c * (ce/ce_ref)**i * (cs/cs_max)**j * T**k``.

    Terms are ``(i, j, k, c)`` with non-negative integer powers.
    """

    terms: Tuple[Tuple[int, int, int, float], ...] = ()

    @classmethod
    def parse(cls, raw: Any) -> "PolyTable":
        if raw is None:
            return cls(())
        if np.isscalar(raw):
            return cls(((0, 0, 0, float(raw)),))
        terms = []
        for t in raw:
            i, j, k, c = t
            terms.append((int(i), int(j), int(k), float(c)))
        return cls(tuple(terms))

    def __call__(self, ce_hat, theta, T):
        ce_hat = np.asarray(ce_hat, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(np.broadcast(ce_hat, theta, np.asarray(T)).shape)
        for i, j, k, c in self.terms:
            out = out + c * ce_hat**i * theta**j * np.asarray(T, dtype=float) ** k
        return out

    def dT(self, ce_hat, theta, T):
        ce_hat = np.asarray(ce_hat, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(np.broadcast(ce_hat, theta, np.asarray(T)).shape)
        for i, j, k, c in self.terms:
            if k > 0:
                out = out + c * k * ce_hat**i * theta**j * np.asarray(T, dtype=float) ** (k - 1)
        return out

    def add_T_poly(self, coeffs: Sequence[float]) -> "PolyTable":
        """Return a table with ``sum_k coeffs[k] T**k`` added."""
        terms = list(self.terms)
        for k, c in enumerate(coeffs):
            if c == 0.0:
                continue
            for n, (i, j, kk, cc) in enumerate(terms):
                if (i, j, kk) == (0, 0, k):
                    terms[n] = (i, j, kk, cc + c)
                    break
            else:
                terms.append((0, 0, k, float(c)))
        return PolyTable(tuple(terms))

    def to_list(self):
        return [list(t) for t in self.terms]


@dataclass(frozen=True)
class KappaModel:
    """Electrolyte conductivity ``kappa(ce, T)`` clipped to ``[kappa_min, kappa_max]``.

    ``table`` is evaluated with ``theta = 0``; only ``i`` and ``k`` powers matter.
    """

    table: PolyTable
    ce_ref: float
    kappa_min: float
    kappa_max: float

    def __call__(self, ce, T):
        raw = self.table(np.asarray(ce, dtype=float) / self.ce_ref, 0.0, T)
        return np.clip(raw, self.kappa_min, self.kappa_max)


@dataclass(frozen=True)
class TransportParams:
    De: Mapping[str, Tuple[float, ...]]
    De_min: float
    Ds_neg: float
    Ds_pos: float
    sigma: Mapping[str, float]
    sigma_min: float
    kappa: KappaModel
    alpha_e: float
    alpha_s_neg: float
    alpha_s_pos: float
    alpha_phie: float = 0.0
    f_phie: str = "ln"
    f_phie_poly: Tuple[float, ...] = ()

    def Ds(self, region: str) -> float:
        return self.Ds_neg if region == "anode" else self.Ds_pos

    def alpha_s(self, region: str) -> float:
        return self.alpha_s_neg if region == "anode" else self.alpha_s_pos

    def De_at(self, region: str, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.De[region])

    def f(self, ce):
        """Reference-electrode function of ``ce``: ``ln`` or a polynomial in ``ce/ce_ref``."""
        ce = np.asarray(ce, dtype=float)
        if self.f_phie == "ln":
            return np.log(ce)
        return np.polynomial.polynomial.polyval(ce / self.kappa.ce_ref, self.f_phie_poly)


@dataclass(frozen=True)
class OCPParams:
    """Open-circuit potential tables.

    ``lambda_min``, ``lambda_max`` and ``mu`` are per-electrode polynomial
    coefficients in ``T``; ``p`` is a per-electrode :class:`PolyTable` with the
    declared bound ``p_inf``.
    """

    lambda_min: Mapping[str, Tuple[float, ...]]
    lambda_max: Mapping[str, Tuple[float, ...]]
    mu: Mapping[str, Tuple[float, ...]]
    p: Mapping[str, PolyTable]
    p_inf: float
    ce_ref: float = 1.0

    def lam_min(self, region, T):
        return np.polynomial.polynomial.polyval(T, self.lambda_min[region])

    def lam_max(self, region, T):
        return np.polynomial.polynomial.polyval(T, self.lambda_max[region])

    def mu_at(self, region, T):
        return np.polynomial.polynomial.polyval(T, self.mu[region])


@dataclass(frozen=True)
class KineticParams:
    delta1: Mapping[str, float]
    delta2: Mapping[str, float]
    gamma1: float
    gamma2: float
    alpha_a: float
    alpha_s: float
    beta_a: float
    cs_max: float
    ocp: OCPParams
    mode: str = "exponential"
    s_inf: Mapping[str, float] | None = None
    g0: float | None = None


@dataclass(frozen=True)
class ThermalParams:
    alpha_T: float
    T_amb: float
    heat_capacity: float = 1.0
    mode: str = "full"
    A_T_bounds: Tuple[float, float] = (0.0, 0.0)
    B_T_max: float = 0.0
    T_range: Tuple[float, float] = (250.0, 350.0)


@dataclass(frozen=True)
class MeshSpec:
    n_anode: int = 15
    n_separator: int = 15
    n_cathode: int = 15
    n_r_neg: int = 25
    n_r_pos: int = 25
    grading: float = 1.0
    radial_grading: float = 1.0


@dataclass(frozen=True)
class InitialSpec:
    """Initial data: scalars or per-node lists (ce over all cells, cs per electrode cell)."""

    ce0: Any
    cs0_neg: Any
    cs0_pos: Any
    T0: float


@dataclass(frozen=True)
class SolverOptions:
    dt0: float = 1.0
    dt_min: float = 1e-6
    dt_max: float | None = None
    picard_tol: float = 1e-9
    max_picard: int = 25
    newton_tol: float = 1e-10
    max_newton: int = 50
    grow_after: int = 5
    grow_factor: float = 1.2
    threads: int = 1
    record_every: int = 1


@dataclass(frozen=True)
class MonitorOptions:
    ce_floor_rel: float = 1e-8
    ce_cap_rel: float = 1e3
    csB_margin_rel: float = 1e-6
    T_min: float = 1.0
    T_max: float = 5000.0
    phi_cap: float = 100.0


@dataclass(frozen=True)
class CellConfig:
    geometry: CellGeometry
    transport: TransportParams
    kinetics: KineticParams
    thermal: ThermalParams
    mesh: MeshSpec
    initial: InitialSpec
    units: str = "internal"
    current: CurrentProfile | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    monitors: MonitorOptions = field(default_factory=MonitorOptions)

    def with_mode(self, mode: str) -> "CellConfig":
        """Return a copy using flux/thermal mode ``exponential``, ``truncated`` or ``truncated+linearFT``."""
        if mode == "exponential":
            return replace(self, kinetics=replace(self.kinetics, mode="exponential"))
        if mode == "truncated":
            return replace(self, kinetics=replace(self.kinetics, mode="truncated"))
        if mode == "truncated+linearFT":
            return replace(
                self,
                kinetics=replace(self.kinetics, mode="truncated"),
                thermal=replace(self.thermal, mode="linear-truncated"),
            )
        raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------- parsing


def _get(d: Mapping, key: str, default: Any = ...):
    if key in d:
        return d[key]
    if default is ...:
        raise ConfigError(f"missing key {key!r}")
    return default


def config_from_dict(raw: Mapping[str, Any], base_dir: str | Path | None = None) -> CellConfig:
    """Parse a configuration tree and normalize it to internal units."""
    try:
        g = raw["geometry"]
        tr = raw["transport"]
        kn = raw["kinetics"]
        th = raw["thermal"]
        ini = raw["initial"]
    except KeyError as exc:
        raise ConfigError(f"missing section {exc.args[0]!r}") from None
    units = raw.get("units", {})
    unit = units.get("concentration", "internal") if isinstance(units, Mapping) else str(units)
    if unit not in CONCENTRATION_UNITS:
        raise ConfigError(f"unknown concentration unit {unit!r}")

    geometry = CellGeometry(
        L=float(_get(g, "L")),
        L1=float(_get(g, "L1")),
        delta=float(_get(g, "delta")),
        Rs_neg=float(_get(g, "Rs_neg")),
        Rs_pos=float(_get(g, "Rs_pos")),
        A=float(_get(g, "A")),
        Rf=float(g.get("Rf", 0.0)),
    )

    kap = _get(tr, "kappa")
    if np.isscalar(kap):
        kappa = KappaModel(PolyTable.parse(float(kap)), 1.0, float(kap), float(kap))
    else:
        table = kap.get("table", kap.get("value"))
        kappa = KappaModel(
            table=PolyTable.parse(table),
            ce_ref=float(kap.get("ce_ref", 1.0)),
            kappa_min=float(_get(kap, "min")),
            kappa_max=float(_get(kap, "max")),
        )
    De = {r: _poly(v) for r, v in _per_region(_get(tr, "De"), REGIONS, "De").items()}
    sigma = {r: float(v) for r, v in _per_region(_get(tr, "sigma"), ELECTRODES, "sigma").items()}
    f_phie = tr.get("f_phie", "ln")
    f_poly: Tuple[float, ...] = ()
    if not isinstance(f_phie, str):
        f_poly = _poly(f_phie)
        f_phie = "poly"
    transport = TransportParams(
        De=De,
        De_min=float(tr.get("De_min", min(min(c[0] for c in De.values()), 1e300))),
        Ds_neg=float(_get(tr, "Ds_neg")),
        Ds_pos=float(_get(tr, "Ds_pos")),
        sigma=sigma,
        sigma_min=float(tr.get("sigma_min", min(sigma.values()))),
        kappa=kappa,
        alpha_e=float(_get(tr, "alpha_e")),
        alpha_s_neg=float(_get(tr, "alpha_s_neg")),
        alpha_s_pos=float(_get(tr, "alpha_s_pos")),
        alpha_phie=float(tr.get("alpha_phie", 0.0)),
        f_phie=f_phie,
        f_phie_poly=f_poly,
    )

    oc = kn.get("ocp", {})
    zero = (0.0,)
    ocp = OCPParams(
        lambda_min={r: _poly(v) for r, v in _per_region(oc.get("lambda_min", zero), ELECTRODES, "lambda_min").items()},
        lambda_max={r: _poly(v) for r, v in _per_region(oc.get("lambda_max", zero), ELECTRODES, "lambda_max").items()},
        mu={r: _poly(v) for r, v in _per_region(oc.get("mu", zero), ELECTRODES, "mu").items()},
        p={r: PolyTable.parse(v) for r, v in _per_region(oc.get("p", 0.0), ELECTRODES, "p").items()},
        p_inf=float(oc.get("p_inf", 0.0)),
        ce_ref=kappa.ce_ref,
    )
    s_inf = kn.get("s_inf")
    if s_inf is not None:
        s_inf = {r: float(v) for r, v in _per_region(s_inf, ELECTRODES, "s_inf").items()}
    kinetics = KineticParams(
        delta1={r: float(v) for r, v in _per_region(_get(kn, "delta1"), ELECTRODES, "delta1").items()},
        delta2={r: float(v) for r, v in _per_region(_get(kn, "delta2"), ELECTRODES, "delta2").items()},
        gamma1=float(_get(kn, "gamma1")),
        gamma2=float(_get(kn, "gamma2")),
        alpha_a=float(_get(kn, "alpha_a")),
        alpha_s=float(_get(kn, "alpha_s")),
        beta_a=float(_get(kn, "beta_a")),
        cs_max=float(_get(kn, "cs_max")),
        ocp=ocp,
        mode=str(kn.get("mode", "exponential")),
        s_inf=s_inf,
        g0=None if kn.get("g0") is None else float(kn["g0"]),
    )

    thermal = ThermalParams(
        alpha_T=float(_get(th, "alpha_T")),
        T_amb=float(_get(th, "T_amb")),
        heat_capacity=float(th.get("heat_capacity", 1.0)),
        mode=str(th.get("mode", "full")),
        A_T_bounds=tuple(float(v) for v in th.get("A_T_bounds", (0.0, 0.0))),
        B_T_max=float(th.get("B_T_max", 0.0)),
        T_range=tuple(float(v) for v in th.get("T_range", (250.0, 350.0))),
    )

    ms = raw.get("mesh", {})
    mesh = MeshSpec(**{k: ms[k] for k in MeshSpec.__dataclass_fields__ if k in ms})

    initial = InitialSpec(
        ce0=_get(ini, "ce0"),
        cs0_neg=_get(ini, "cs0_neg"),
        cs0_pos=_get(ini, "cs0_pos"),
        T0=float(_get(ini, "T0")),
    )

    current = None
    if raw.get("current") is not None:
        current = profile_from_dict(raw["current"], base_dir=base_dir)
    so = raw.get("solver", {})
    solver = SolverOptions(**{k: so[k] for k in SolverOptions.__dataclass_fields__ if k in so})
    mo = raw.get("monitors", {})
    monitors = MonitorOptions(**{k: mo[k] for k in MonitorOptions.__dataclass_fields__ if k in mo})

    cfg = CellConfig(
        geometry=geometry,
        transport=transport,
        kinetics=kinetics,
        thermal=thermal,
        mesh=mesh,
        initial=initial,
        units=unit,
        current=current,
        solver=solver,
        monitors=monitors,
    )
    return normalize_units(cfg)


def load_config(path: str | Path) -> CellConfig:
    path = Path(path)
    with open(path) as fh:
        raw = json.load(fh)
    return config_from_dict(raw, base_dir=path.parent)


def reference_config() -> CellConfig:
    """The packaged reference cell (``data/reference.json``)."""
    return load_config(Path(__file__).parent / "data" / "reference.json")


def _listify(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    return v


def config_to_dict(cfg: CellConfig) -> Dict[str, Any]:
    """Serialize a configuration (in its current units) back to a JSON-compatible tree."""
    g, tr, kn, th = cfg.geometry, cfg.transport, cfg.kinetics, cfg.thermal
    out: Dict[str, Any] = {
        "units": {"concentration": cfg.units},
        "geometry": {k: getattr(g, k) for k in ("L", "L1", "delta", "Rs_neg", "Rs_pos", "A", "Rf")},
        "transport": {
            "De": {r: list(v) for r, v in tr.De.items()},
            "De_min": tr.De_min,
            "Ds_neg": tr.Ds_neg,
            "Ds_pos": tr.Ds_pos,
            "sigma": dict(tr.sigma),
            "sigma_min": tr.sigma_min,
            "kappa": {
                "table": tr.kappa.table.to_list(),
                "ce_ref": tr.kappa.ce_ref,
                "min": tr.kappa.kappa_min,
                "max": tr.kappa.kappa_max,
            },
            "alpha_e": tr.alpha_e,
            "alpha_s_neg": tr.alpha_s_neg,
            "alpha_s_pos": tr.alpha_s_pos,
            "alpha_phie": tr.alpha_phie,
            "f_phie": "ln" if tr.f_phie == "ln" else list(tr.f_phie_poly),
        },
        "kinetics": {
            "delta1": dict(kn.delta1),
            "delta2": dict(kn.delta2),
            "gamma1": kn.gamma1,
            "gamma2": kn.gamma2,
            "alpha_a": kn.alpha_a,
            "alpha_s": kn.alpha_s,
            "beta_a": kn.beta_a,
            "cs_max": kn.cs_max,
            "mode": kn.mode,
            "s_inf": None if kn.s_inf is None else dict(kn.s_inf),
            "g0": kn.g0,
            "ocp": {
                "lambda_min": {r: list(v) for r, v in kn.ocp.lambda_min.items()},
                "lambda_max": {r: list(v) for r, v in kn.ocp.lambda_max.items()},
                "mu": {r: list(v) for r, v in kn.ocp.mu.items()},
                "p": {r: v.to_list() for r, v in kn.ocp.p.items()},
                "p_inf": kn.ocp.p_inf,
            },
        },
        "thermal": {
            "alpha_T": th.alpha_T,
            "T_amb": th.T_amb,
            "heat_capacity": th.heat_capacity,
            "mode": th.mode,
            "A_T_bounds": list(th.A_T_bounds),
            "B_T_max": th.B_T_max,
            "T_range": list(th.T_range),
        },
        "mesh": dict(cfg.mesh.__dict__),
        "initial": {k: _listify(v) for k, v in cfg.initial.__dict__.items()},
        "solver": dict(cfg.solver.__dict__),
        "monitors": dict(cfg.monitors.__dict__),
    }
    if cfg.current is not None:
        out["current"] = cfg.current.to_dict()
    return out


# ---------------------------------------------------------------- units


def _scale_field(v, k):
    if np.isscalar(v):
        return float(v) * k
    return [float(x) * k for x in v]


def normalize_units(cfg: CellConfig) -> CellConfig:
    """Convert concentrations to mol/cm^3; idempotent.

    Concentration-carrying coefficients are rescaled and the ``p`` tables are
    shifted so that overpotentials, fluxes and potentials are unchanged.
    """
    if cfg.units == "internal":
        return cfg
    k = CONCENTRATION_UNITS[cfg.units]
    kn, tr, ocp = cfg.kinetics, cfg.transport, cfg.kinetics.ocp
    if k != 1.0:
        lnk = math.log(k)
        expo = kn.alpha_a + kn.alpha_s + kn.beta_a
        Tlo, Thi = cfg.thermal.T_range
        Ts = np.linspace(Tlo, Thi, 33)
        p_new = {}
        extra = 0.0
        for r in ELECTRODES:
            n = max(len(ocp.lambda_min[r]), len(ocp.lambda_max[r]), len(ocp.mu[r]), 2)
            c = np.zeros(n)
            c[: len(ocp.lambda_min[r])] += ocp.lambda_min[r]
            c[: len(ocp.lambda_max[r])] -= ocp.lambda_max[r]
            c[: len(ocp.mu[r])] -= ocp.mu[r]
            if tr.f_phie == "ln":
                c[1] -= tr.alpha_phie
            c *= lnk
            p_new[r] = ocp.p[r].add_T_poly(c)
            extra = max(extra, float(np.max(np.abs(np.polynomial.polynomial.polyval(Ts, c)))))
        ocp = replace(ocp, p=p_new, p_inf=ocp.p_inf + extra, ce_ref=ocp.ce_ref * k)
        kn = replace(
            kn,
            cs_max=kn.cs_max * k,
            delta1={r: v * k**-expo for r, v in kn.delta1.items()},
            delta2={r: v * k**-expo for r, v in kn.delta2.items()},
            ocp=ocp,
        )
        tr = replace(
            tr,
            alpha_e=tr.alpha_e * k,
            alpha_s_neg=tr.alpha_s_neg * k,
            alpha_s_pos=tr.alpha_s_pos * k,
            kappa=replace(tr.kappa, ce_ref=tr.kappa.ce_ref * k),
        )
    ini = cfg.initial
    ini = InitialSpec(
        ce0=_scale_field(ini.ce0, k),
        cs0_neg=_scale_field(ini.cs0_neg, k),
        cs0_pos=_scale_field(ini.cs0_pos, k),
        T0=ini.T0,
    )
    return replace(cfg, kinetics=kn, transport=tr, initial=ini, units="internal")


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: Tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> Tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def __str__(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else "") for c in self.checks]
        return "\n".join(lines)


class _Checker:
    def __init__(self):
        self.checks: list[Check] = []

    def check(self, name: str, fn) -> None:
        try:
            res = fn()
            if isinstance(res, tuple):
                ok, detail = res
            else:
                ok, detail = bool(res), ""
        except Exception as exc:  # report, never abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        self.checks.append(Check(name, bool(ok), detail))


def _in_open_unit(name, v):
    return (0.0 < v < 1.0), ("" if 0.0 < v < 1.0 else f"{name} = {v} not in (0,1)")


def _field_values(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


def validate_config(cfg: CellConfig) -> ValidationReport:
    """Check positivity, bounds, unit normalization and mesh alignment; never raises."""
    c = _Checker()
    g = cfg.geometry
    c.check("geometry.L1 > 0", lambda: (g.L1 > 0, f"L1 = {g.L1}"))
    c.check("geometry.delta > 0", lambda: (g.delta > 0, f"delta = {g.delta}"))
    c.check("geometry.L1 + delta < L", lambda: (g.L1 + g.delta < g.L, f"L1 + delta = {g.L1 + g.delta}, L = {g.L}"))
    c.check("geometry.Rs_neg > 0", lambda: (g.Rs_neg > 0, f"Rs_neg = {g.Rs_neg}"))
    c.check("geometry.Rs_pos > 0", lambda: (g.Rs_pos > 0, f"Rs_pos = {g.Rs_pos}"))
    c.check("geometry.A > 0", lambda: (g.A > 0, f"A = {g.A}"))
    c.check("geometry.Rf >= 0", lambda: (g.Rf >= 0, f"Rf = {g.Rf}"))

    tr = cfg.transport

    def _De():
        bounds = {
            "anode": (0.0, g.L1),
            "separator": (g.L1, g.L1 + g.delta),
            "cathode": (g.L1 + g.delta, g.L),
        }
        worst = math.inf
        for r, (a, b) in bounds.items():
            xs = np.linspace(a, b, 65)
            worst = min(worst, float(np.min(tr.De_at(r, xs))))
        return (tr.De_min > 0 and worst >= tr.De_min), f"min De = {worst:.6g}, De_min = {tr.De_min}"

    c.check("transport.De >= De_min > 0", _De)
    c.check("transport.Ds_neg > 0", lambda: (tr.Ds_neg > 0, f"Ds_neg = {tr.Ds_neg}"))
    c.check("transport.Ds_pos > 0", lambda: (tr.Ds_pos > 0, f"Ds_pos = {tr.Ds_pos}"))
    c.check(
        "transport.sigma >= sigma_min > 0",
        lambda: (tr.sigma_min > 0 and min(tr.sigma.values()) >= tr.sigma_min, f"sigma = {dict(tr.sigma)}"),
    )
    c.check(
        "transport.kappa bounds 0 < kappa_min <= kappa_max",
        lambda: (0 < tr.kappa.kappa_min <= tr.kappa.kappa_max, f"[{tr.kappa.kappa_min}, {tr.kappa.kappa_max}]"),
    )
    c.check("transport.kappa ce_ref > 0", lambda: (tr.kappa.ce_ref > 0, f"ce_ref = {tr.kappa.ce_ref}"))
    c.check("transport.alpha_e > 0", lambda: (tr.alpha_e > 0, f"alpha_e = {tr.alpha_e}"))
    c.check("transport.alpha_s_neg > 0", lambda: (tr.alpha_s_neg > 0, f"alpha_s_neg = {tr.alpha_s_neg}"))
    c.check("transport.alpha_s_pos > 0", lambda: (tr.alpha_s_pos > 0, f"alpha_s_pos = {tr.alpha_s_pos}"))
    c.check("transport.alpha_phie >= 0", lambda: (tr.alpha_phie >= 0, f"alpha_phie = {tr.alpha_phie}"))
    c.check(
        "transport.f_phie in {ln, polynomial}",
        lambda: (tr.f_phie == "ln" or (tr.f_phie == "poly" and len(tr.f_phie_poly) > 0), f"f_phie = {tr.f_phie}"),
    )

    kn = cfg.kinetics
    c.check("kinetics.alpha_a in (0,1)", lambda: _in_open_unit("alpha_a", kn.alpha_a))
    c.check("kinetics.alpha_s in (0,1)", lambda: _in_open_unit("alpha_s", kn.alpha_s))
    c.check("kinetics.beta_a in (0,1)", lambda: _in_open_unit("beta_a", kn.beta_a))
    c.check("kinetics.gamma1 > 0", lambda: (kn.gamma1 > 0, f"gamma1 = {kn.gamma1}"))
    c.check("kinetics.gamma2 > 0", lambda: (kn.gamma2 > 0, f"gamma2 = {kn.gamma2}"))
    c.check(
        "kinetics.delta1 > 0 per electrode",
        lambda: (all(kn.delta1[r] > 0 for r in ELECTRODES), f"delta1 = {dict(kn.delta1)}"),
    )
    c.check(
        "kinetics.delta2 > 0 per electrode",
        lambda: (all(kn.delta2[r] > 0 for r in ELECTRODES), f"delta2 = {dict(kn.delta2)}"),
    )
    c.check(
        "kinetics.cs_max < 1 after unit normalization",
        lambda: (cfg.units == "internal" and 0 < kn.cs_max < 1, f"cs_max = {kn.cs_max} mol/cm3"),
    )
    c.check(
        "kinetics.mode valid",
        lambda: (kn.mode in ("exponential", "truncated", "stub-linear"), f"mode = {kn.mode}"),
    )
    if kn.mode == "truncated":
        c.check(
            "kinetics.s_inf finite per electrode",
            lambda: (kn.s_inf is not None and all(math.isfinite(kn.s_inf[r]) for r in ELECTRODES), f"s_inf = {kn.s_inf}"),
        )
    if kn.mode == "stub-linear":
        c.check("kinetics.g0 > 0", lambda: (kn.g0 is not None and kn.g0 > 0, f"g0 = {kn.g0}"))

    ocp = kn.ocp
    Tlo, Thi = cfg.thermal.T_range
    Ts = np.linspace(Tlo, Thi, 65)
    for name, tab in (("lambda_min", ocp.lambda_min), ("lambda_max", ocp.lambda_max), ("mu", ocp.mu)):
        def _nonneg(tab=tab, name=name):
            worst = min(float(np.min(np.polynomial.polynomial.polyval(Ts, tab[r]))) for r in ELECTRODES)
            return worst >= 0, f"min {name} on T_range = {worst:.6g}"

        c.check(f"ocp.{name} >= 0 on T_range", _nonneg)

    def _p_bound():
        ce_hat = np.linspace(0.0, 10.0, 21)[:, None, None]
        th = np.linspace(0.0, 1.0, 21)[None, :, None]
        T = np.linspace(Tlo, Thi, 9)[None, None, :]
        worst = max(float(np.max(np.abs(ocp.p[r](ce_hat, th, T)))) for r in ELECTRODES)
        return worst <= ocp.p_inf * (1 + 1e-12), f"max |p| = {worst:.6g}, p_inf = {ocp.p_inf}"

    c.check("ocp.|p| <= p_inf on admissible box", _p_bound)

    th_ = cfg.thermal
    c.check("thermal.alpha_T >= 0", lambda: (th_.alpha_T >= 0, f"alpha_T = {th_.alpha_T}"))
    c.check("thermal.T_amb > 0", lambda: (th_.T_amb > 0, f"T_amb = {th_.T_amb}"))
    c.check("thermal.heat_capacity > 0", lambda: (th_.heat_capacity > 0, f"heat_capacity = {th_.heat_capacity}"))
    c.check(
        "thermal.mode valid",
        lambda: (th_.mode in ("full", "linear-truncated", "zero"), f"mode = {th_.mode}"),
    )
    c.check("thermal.T_range ordered and positive", lambda: (0 < Tlo < Thi, f"T_range = {th_.T_range}"))
    if th_.mode == "linear-truncated":
        c.check(
            "thermal.A_T bounds ordered",
            lambda: (th_.A_T_bounds[0] <= th_.A_T_bounds[1], f"A_T_bounds = {th_.A_T_bounds}"),
        )
        c.check("thermal.B_T_max >= 0", lambda: (th_.B_T_max >= 0, f"B_T_max = {th_.B_T_max}"))

    m = cfg.mesh
    for name in ("n_anode", "n_separator", "n_cathode", "n_r_neg", "n_r_pos"):
        c.check(f"mesh.{name} >= 3", lambda name=name: (getattr(m, name) >= 3, f"{name} = {getattr(m, name)}"))
    c.check("mesh.grading > 0", lambda: (m.grading > 0 and m.radial_grading > 0, f"grading = {m.grading}"))

    ini = cfg.initial
    c.check("initial.ce0 > 0", lambda: (bool(np.all(_field_values(ini.ce0) > 0)), f"min ce0 = {np.min(_field_values(ini.ce0))}"))
    for name in ("cs0_neg", "cs0_pos"):
        def _cs(name=name):
            v = _field_values(getattr(ini, name))
            return bool(np.all((v > 0) & (v < kn.cs_max))), f"{name} range [{v.min():.6g}, {v.max():.6g}], cs_max = {kn.cs_max}"

        c.check(f"initial.0 < {name} < cs_max", _cs)
    c.check("initial.T0 > 0", lambda: (ini.T0 > 0, f"T0 = {ini.T0}"))

    if cfg.current is not None:
        c.check("current.pieces partition [0, t_end]", lambda: cfg.current.check_partition())

    so = cfg.solver
    c.check(
        "solver options positive",
        lambda: (so.dt0 > 0 and 0 < so.dt_min <= so.dt0 and so.picard_tol > 0 and so.newton_tol > 0
                 and so.max_picard >= 1 and so.max_newton >= 1 and so.threads >= 1, ""),
    )
    return ValidationReport(tuple(c.checks))
