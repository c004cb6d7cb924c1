"""Command-line front end.

Usage::

    delaykv <spectrum|sigma|region|instability|simulate|freqresp> \
        [--config run.yaml] [--a A] [--tau TAU] [--xi XI] [--lambda-k L] \
        [--theta TH] [--T T] [--m M] [--out DIR] [--svg]

The configuration document is YAML (JSON is accepted too). Flags override
values from the file. Exit status: 0 success, 1 invalid input or I/O
failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from delaykv.core import (
    DelayKVError,
    ModeSet,
    NumericalError,
    SystemParams,
    ValidationError,
    dirichlet_modes_1d,
    make_modes,
    make_params,
)
from delaykv.freqresp import axis_sweep, tail_threshold
from delaykv.quasipoly import Root, Window
from delaykv.simulate import (
    RK4_STIFF_LIMIT,
    DelayHistory,
    check_dissipativity,
    energy_trace,
    fit_decay_rate,
    simulate_mode,
)
from delaykv.spectrum import (
    DEFAULT_BRANCHES,
    DEFAULT_TOL,
    instability_pair,
    mode_spectrum,
    region_map,
    sigma_spectrum,
    stability_verdict,
)

COMMANDS = ("spectrum", "sigma", "region", "instability", "simulate", "freqresp")

ROOTS_HEADER = ("mode_index", "lambda_k", "re", "im", "residual", "source")
ENERGY_HEADER = ("t", "E", "kinetic", "potential", "history")
REGION_HEADER = ("a", "tau", "abscissa", "verdict")
TRAJECTORY_HEADER = ("mode_index", "t", "u", "v")
SWEEP_HEADER = ("mode_index", "omega", "magnitude")


class ConfigError(ValidationError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModesSpec:
    kind: str  # "list" | "dirichlet-1d"
    values: Optional[Tuple[float, ...]] = None
    L: Optional[float] = None
    K: Optional[int] = None

    def build(self) -> ModeSet:
        if self.kind == "list":
            return make_modes(self.values)
        return dirichlet_modes_1d(self.L, self.K)

    def as_dict(self):
        if self.kind == "list":
            return list(self.values)
        return {"dirichlet-1d": {"L": self.L, "K": self.K}}


@dataclass(frozen=True)
class SimulationSpec:
    T: Optional[float] = None  # default 20 tau
    m: Optional[int] = None  # default: 64 or the RK4 stability minimum
    history: Dict[str, Any] = field(default_factory=lambda: {"type": "constant", "value": 1.0})
    u0: Optional[float] = None  # default: history value at 0
    v0: float = 0.0


@dataclass(frozen=True)
class SweepSpec:
    omega_max: Optional[float] = None  # default: twice the largest tail threshold
    n: int = 1024


@dataclass(frozen=True)
class RegionSpec:
    a: Tuple[float, float, int] = (0.2, 2.0, 20)
    tau: Tuple[float, float, int] = (0.2, 2.0, 20)


@dataclass(frozen=True)
class InstabilitySpec:
    lambda_k: float = 1.0
    theta: float = math.pi / 3


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    formats: Tuple[str, ...] = ("csv", "json")
    svg: bool = False


@dataclass(frozen=True)
class RunConfig:
    a: Optional[float] = None
    tau: Optional[float] = None
    xi: Optional[float] = None
    modes: Optional[ModesSpec] = None
    window: Optional[Window] = None
    tol: float = DEFAULT_TOL
    n_branches: int = DEFAULT_BRANCHES
    simulation: SimulationSpec = SimulationSpec()
    sweep: SweepSpec = SweepSpec()
    region: RegionSpec = RegionSpec()
    instability: InstabilitySpec = InstabilitySpec()
    output: OutputSpec = OutputSpec()

    @property
    def params(self) -> SystemParams:
        if self.a is None or self.tau is None:
            raise ConfigError("parameters a and tau are required for this command")
        return make_params(self.a, self.tau, self.xi)

    @property
    def mode_set(self) -> ModeSet:
        if self.modes is None:
            raise ConfigError("a 'modes' entry is required for this command")
        return self.modes.build()

    def as_dict(self) -> Dict[str, Any]:
        d = {
            "a": self.a,
            "tau": self.tau,
            "xi": self.xi,
            "modes": None if self.modes is None else self.modes.as_dict(),
            "window": None if self.window is None else asdict(self.window),
            "tol": self.tol,
            "n_branches": self.n_branches,
            "simulation": asdict(self.simulation),
            "sweep": asdict(self.sweep),
            "region": {"a": list(self.region.a), "tau": list(self.region.tau)},
            "instability": asdict(self.instability),
            "output": {**asdict(self.output), "formats": list(self.output.formats)},
        }
        return d


def _reject_unknown(where, mapping, allowed):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(mapping).__name__}")
    extra = sorted(set(mapping) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(map(str, extra))}")


def _num(where, value, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"{where} must be a finite{' positive' if positive else ''} number, got {value!r}")
    return value


def _int(where, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{where} must be an integer >= {minimum}, got {value!r}")
    return value


def _modes_spec(raw) -> ModesSpec:
    if isinstance(raw, list):
        return ModesSpec("list", tuple(_num("modes[]", v, positive=True) for v in raw))
    if isinstance(raw, dict):
        _reject_unknown("modes", raw, ("dirichlet-1d",))
        if "dirichlet-1d" not in raw:
            raise ConfigError("modes must be a list or {dirichlet-1d: {L, K}}")
        d = raw["dirichlet-1d"]
        _reject_unknown("modes.dirichlet-1d", d, ("L", "K"))
        if "L" not in d or "K" not in d:
            raise ConfigError("modes.dirichlet-1d needs both L and K")
        return ModesSpec("dirichlet-1d", None, _num("modes.dirichlet-1d.L", d["L"], True),
                         _int("modes.dirichlet-1d.K", d["K"], 1))
    raise ConfigError("modes must be a list or {dirichlet-1d: {L, K}}")


def _history_spec(raw):
    _reject_unknown("simulation.history", raw,
                    ("type", "value", "omega", "amplitude", "phase", "values"))
    kind = raw.get("type", "constant")
    allowed = {
        "zero": ("type",),
        "constant": ("type", "value"),
        "cosine": ("type", "omega", "amplitude", "phase"),
        "samples": ("type", "values"),
    }
    if kind not in allowed:
        raise ConfigError(f"simulation.history.type must be one of {sorted(allowed)}, got {kind!r}")
    _reject_unknown(f"simulation.history ({kind})", raw, allowed[kind])
    out = {"type": kind}
    for key in allowed[kind][1:]:
        if key in raw:
            if key == "values":
                if not isinstance(raw[key], list):
                    raise ConfigError("simulation.history.values must be a list")
                out[key] = [_num("simulation.history.values[]", v) for v in raw[key]]
            else:
                out[key] = _num(f"simulation.history.{key}", raw[key])
    if kind == "cosine" and "omega" not in out:
        raise ConfigError("simulation.history of type cosine needs omega")
    if kind == "samples" and "values" not in out:
        raise ConfigError("simulation.history of type samples needs values")
    return out


def _axis_spec(where, raw):
    if not (isinstance(raw, list) and len(raw) == 3):
        raise ConfigError(f"{where} must be [min, max, count]")
    lo, hi = _num(f"{where}[0]", raw[0], True), _num(f"{where}[1]", raw[1], True)
    n = _int(f"{where}[2]", raw[2], 1)
    if hi < lo:
        raise ConfigError(f"{where} needs min <= max")
    return (lo, hi, n)


TOP_KEYS = ("a", "tau", "xi", "modes", "window", "tol", "n_branches", "simulation",
            "sweep", "region", "instability", "output")


def parse_config(text: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Parse a YAML/JSON document and apply flag overrides.

    ``overrides`` keys: ``a, tau, xi, lambda_k, theta, T, m, out, svg``;
    ``None`` values are ignored.

    Raises
    ------
    ConfigError
        Syntax errors (with line and column), unknown keys, or values that
        violate a documented bound.
    """
    try:
        raw = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"config parse error{where}: {problem}") from None
    if raw is None:
        raw = {}
    _reject_unknown("config", raw, TOP_KEYS)
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}

    def pick(key):
        return ov[key] if key in ov else raw.get(key)

    a = pick("a")
    tau = pick("tau")
    xi = pick("xi")
    a = None if a is None else _num("a", a)
    tau = None if tau is None else _num("tau", tau)
    xi = None if xi is None else _num("xi", xi)
    if a is not None and tau is not None:
        p = make_params(a, tau, xi)
        xi = p.xi
    elif a is not None or tau is not None:
        # partial parameters are validated for sign now, the rest on use
        for name, v in (("a", a), ("tau", tau)):
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be a finite positive number, got {v!r}")

    modes = _modes_spec(raw["modes"]) if raw.get("modes") is not None else None
    if modes is not None:
        modes.build()

    window = None
    if raw.get("window") is not None:
        wr = raw["window"]
        _reject_unknown("window", wr, ("re_min", "re_max", "im_min", "im_max", "grid_n"))
        try:
            window = Window(**{k: (_num(f"window.{k}", v) if k != "grid_n" else v)
                               for k, v in wr.items()})
        except TypeError:
            raise ConfigError("window needs re_min, re_max, im_min, im_max") from None

    tol = _num("tol", raw.get("tol", DEFAULT_TOL), True)
    n_branches = _int("n_branches", raw.get("n_branches", DEFAULT_BRANCHES), 1)

    sr = raw.get("simulation") or {}
    _reject_unknown("simulation", sr, ("T", "m", "history", "u0", "v0"))
    T = pick_nested(ov, "T", sr)
    m = pick_nested(ov, "m", sr)
    simulation = SimulationSpec(
        T=None if T is None else _num("simulation.T", T, True),
        m=None if m is None else _int("simulation.m", m, 8),
        history=_history_spec(sr.get("history", {"type": "constant", "value": 1.0})),
        u0=None if sr.get("u0") is None else _num("simulation.u0", sr["u0"]),
        v0=_num("simulation.v0", sr.get("v0", 0.0)),
    )

    wr = raw.get("sweep") or {}
    _reject_unknown("sweep", wr, ("omega_max", "n"))
    sweep = SweepSpec(
        omega_max=None if wr.get("omega_max") is None else _num("sweep.omega_max", wr["omega_max"], True),
        n=_int("sweep.n", wr.get("n", 1024), 64),
    )

    rr = raw.get("region") or {}
    _reject_unknown("region", rr, ("a", "tau"))
    region = RegionSpec(
        a=_axis_spec("region.a", rr["a"]) if "a" in rr else RegionSpec.a,
        tau=_axis_spec("region.tau", rr["tau"]) if "tau" in rr else RegionSpec.tau,
    )

    ir = raw.get("instability") or {}
    _reject_unknown("instability", ir, ("lambda_k", "theta"))
    lk = pick_nested(ov, "lambda_k", ir)
    th = pick_nested(ov, "theta", ir)
    instability = InstabilitySpec(
        lambda_k=1.0 if lk is None else _num("instability.lambda_k", lk, True),
        theta=math.pi / 3 if th is None else _num("instability.theta", th),
    )
    if not 0.0 < instability.theta < math.pi / 2:
        raise ConfigError(f"instability.theta must lie in (0, pi/2), got {instability.theta!r}")

    orr = raw.get("output") or {}
    _reject_unknown("output", orr, ("dir", "formats", "svg"))
    formats = tuple(orr.get("formats", ("csv", "json")))
    bad = [f for f in formats if f not in ("csv", "json")]
    if bad:
        raise ConfigError(f"output.formats may contain csv and json only, got {bad}")
    svg = ov.get("svg", orr.get("svg", False))
    output = OutputSpec(dir=str(ov.get("out", orr.get("dir", "out"))), formats=formats,
                        svg=bool(svg))

    return RunConfig(a, tau, xi, modes, window, tol, n_branches, simulation, sweep, region,
                     instability, output)


def pick_nested(ov, key, section):
    return ov[key] if key in ov else section.get(key)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits in scientific notation; blanks for ``None``."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


@dataclass
class Results:
    tables: Dict[str, Tuple[Tuple[str, ...], List[tuple]]] = field(default_factory=dict)
    documents: Dict[str, Any] = field(default_factory=dict)
    plots: List[Tuple[str, Any]] = field(default_factory=list)  # (filename, callable(path))


def write_outputs(results: Results, output: OutputSpec) -> List[str]:
    """Write CSV tables, JSON documents and (optionally) SVG plots."""
    written = []
    try:
        os.makedirs(output.dir, exist_ok=True)
        if "csv" in output.formats:
            for name, (header, rows) in results.tables.items():
                path = os.path.join(output.dir, name)
                with open(path, "w", newline="") as fh:
                    fh.write(csv_text(header, rows))
                written.append(path)
        if "json" in output.formats:
            for name, doc in results.documents.items():
                path = os.path.join(output.dir, name)
                with open(path, "w") as fh:
                    fh.write(json_text(doc))
                written.append(path)
        if output.svg:
            for name, draw in results.plots:
                path = os.path.join(output.dir, name)
                draw(path)
                written.append(path)
    except OSError as exc:
        raise DelayKVError(f"cannot write output {exc.filename or output.dir}: {exc.strerror}") from exc
    return written


def root_dict(r: Root, **extra):
    return {**extra, "re": r.re, "im": r.im, "residual": r.residual, "source": r.source,
            "iterations": r.iterations}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_spectrum(cfg: RunConfig) -> Results:
    from delaykv import plots

    p, modes = cfg.params, cfg.mode_set
    rows, per_mode = [], []
    for k, lk in enumerate(modes, start=1):
        ms = mode_spectrum(lk, p, cfg.window, cfg.tol, mode_index=k)
        for r in ms.roots:
            rows.append((k, lk, r.re, r.im, r.residual, r.source))
        per_mode.append({
            "mode_index": k, "lambda_k": lk, "abscissa": ms.abscissa,
            "window": asdict(ms.window), "roots": [root_dict(r) for r in ms.roots],
        })
    v = stability_verdict(p, modes, cfg.window, cfg.n_branches)
    doc = {
        "config": cfg.as_dict(),
        "params": {"a": p.a, "tau": p.tau, "xi": p.xi, "a_star": p.a_star},
        "modes": per_mode,
        "spectral_abscissa": v.abscissa,
        "attained_at": None if v.root is None else root_dict(v.root),
        "verdict": {"certified": v.certified, "reason": v.reason, "verdict": v.verdict},
    }
    res = Results({"roots.csv": (ROOTS_HEADER, rows)}, {"spectrum.json": doc})
    res.plots.append(("roots.svg", lambda path: plots.root_scatter(
        [r[2] for r in rows], [r[3] for r in rows], [f"mode {r[0]}" for r in rows], path)))
    return res


def run_sigma(cfg: RunConfig) -> Results:
    from delaykv import plots

    p = cfg.params
    roots = sigma_spectrum(p, cfg.n_branches)
    rows = [(None, math.inf, r.re, r.im, r.residual, r.source) for r in roots]
    doc = {"config": cfg.as_dict(), "roots": [root_dict(r) for r in roots],
           "max_re": max(r.re for r in roots)}
    res = Results({"roots.csv": (ROOTS_HEADER, rows)}, {"sigma.json": doc})
    res.plots.append(("sigma.svg", lambda path: plots.root_scatter(
        [r.re for r in roots], [r.im for r in roots], ["sigma"] * len(roots), path,
        title="essential spectrum")))
    return res


def run_region(cfg: RunConfig) -> Results:
    from delaykv import plots

    modes = cfg.mode_set
    a_axis = np.linspace(*cfg.region.a[:2], cfg.region.a[2])
    t_axis = np.linspace(*cfg.region.tau[:2], cfg.region.tau[2])
    rm = region_map(a_axis, t_axis, modes, cfg.window, cfg.n_branches)
    rows = list(rm.cells())
    doc = {
        "config": cfg.as_dict(),
        "a_values": rm.a_values, "tau_values": rm.tau_values,
        "cells": [{"a": a, "tau": t, "abscissa": x, "verdict": v} for a, t, x, v in rows],
        "errors": [{"a": float(rm.a_values[i]), "tau": float(rm.tau_values[j]), "message": msg}
                   for (i, j), msg in sorted(rm.errors.items())],
    }
    res = Results({"region.csv": (REGION_HEADER, rows)}, {"region.json": doc})
    res.plots.append(("region.svg", lambda path: plots.region_plot(
        [r[0] for r in rows], [r[1] for r in rows], [r[3] for r in rows], path)))
    return res


def run_instability(cfg: RunConfig) -> Results:
    pair = instability_pair(cfg.instability.lambda_k, cfg.instability.theta)
    return Results(documents={"pair.json": pair.as_dict()})


def _history(spec, tau, m) -> DelayHistory:
    kind = spec["type"]
    if kind == "zero":
        return DelayHistory.constant(0.0, tau, m)
    if kind == "constant":
        return DelayHistory.constant(spec.get("value", 1.0), tau, m)
    if kind == "cosine":
        return DelayHistory.cosine(spec["omega"], tau, m, spec.get("amplitude", 1.0),
                                   spec.get("phase", 0.0))
    return DelayHistory.from_samples(spec["values"], tau).resample(m)


def run_simulate(cfg: RunConfig) -> Results:
    from delaykv import plots

    p, modes = cfg.params, cfg.mode_set
    sim = cfg.simulation
    T = 20.0 * p.tau if sim.T is None else sim.T
    needed = math.ceil(p.tau * p.a * max(modes) / RK4_STIFF_LIMIT)
    m = max(64, needed) if sim.m is None else sim.m
    total = None
    traj_rows, per_mode = [], []
    for k, lk in enumerate(modes, start=1):
        hist = _history(sim.history, p.tau, m)
        u0 = hist.values[-1] if sim.u0 is None else sim.u0
        tr = simulate_mode(lk, p, hist, u0, sim.v0, T, m)
        et = energy_trace(tr, p)
        total = et if total is None else total + et
        traj_rows.extend((k, t, u, v) for t, u, v in zip(tr.times, tr.u, tr.v))
        rep = check_dissipativity(tr, et, p)
        per_mode.append({"mode_index": k, "lambda_k": lk, "E0": et.E[0], "ET": et.E[-1],
                         "dissipativity": asdict(rep)})
    E = total.E
    t_start = 5.0 * p.tau if 5.0 * p.tau < total.times[-1] else 0.0
    try:
        fit = fit_decay_rate(total, t_start)
        fit_doc = {"omega": fit.omega, "residual": fit.residual, "poor_fit": fit.poor_fit,
                   "t_start": t_start}
    except ValidationError as exc:
        fit_doc = {"omega": None, "message": str(exc), "t_start": t_start}
    rows = list(zip(total.times, E, total.kinetic, total.potential, total.history))
    doc = {"config": cfg.as_dict(), "T": float(total.times[-1]), "m": m, "h": p.tau / m,
           "modes": per_mode, "decay_fit": fit_doc}
    res = Results({"energy.csv": (ENERGY_HEADER, rows),
                   "trajectory.csv": (TRAJECTORY_HEADER, traj_rows)},
                  {"simulate.json": doc})
    res.plots.append(("energy.svg", lambda path: plots.energy_plot(total.times, E, path)))
    return res


def run_freqresp(cfg: RunConfig) -> Results:
    from delaykv import plots

    p, modes = cfg.params, cfg.mode_set
    omega_max = cfg.sweep.omega_max
    if omega_max is None:
        omega_max = max(10.0, 2.0 * max(tail_threshold(lk, p) for lk in modes))
    rows, per_mode, sweeps = [], [], []
    for k, lk in enumerate(modes, start=1):
        s = axis_sweep(lk, p, omega_max, cfg.sweep.n)
        sweeps.append((k, s))
        rows.extend((k, w, mag) for w, mag in zip(s.omegas, s.magnitudes))
        per_mode.append({"mode_index": k, "lambda_k": lk, "sup_value": s.sup_value,
                         "sup_omega": s.sup_omega, "singular": s.singular,
                         "tail_threshold": tail_threshold(lk, p)})
    doc = {"config": cfg.as_dict(), "omega_max": omega_max, "modes": per_mode}
    res = Results({"sweep.csv": (SWEEP_HEADER, rows)}, {"freqresp.json": doc})
    res.plots.append(("sweep.svg", lambda path: plots.sweep_plot(sweeps, path)))
    return res


RUNNERS = {
    "spectrum": run_spectrum,
    "sigma": run_sigma,
    "region": run_region,
    "instability": run_instability,
    "simulate": run_simulate,
    "freqresp": run_freqresp,
}


def dispatch(command: str, cfg: RunConfig, stderr=None) -> int:
    """Run ``command`` and write its outputs; returns the exit status."""
    stderr = sys.stderr if stderr is None else stderr
    if command not in RUNNERS:
        print(f"error: unknown command {command!r}", file=stderr)
        return 1
    try:
        results = RUNNERS[command](cfg)
        write_outputs(results, cfg.output)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=stderr)
        return 2
    except DelayKVError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delaykv", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="YAML or JSON run configuration")
    ap.add_argument("--a", type=float)
    ap.add_argument("--tau", type=float)
    ap.add_argument("--xi", type=float)
    ap.add_argument("--lambda-k", dest="lambda_k", type=float)
    ap.add_argument("--theta", type=float)
    ap.add_argument("--T", dest="T", type=float)
    ap.add_argument("--m", dest="m", type=int)
    ap.add_argument("--out", help="output directory (default: out)")
    ap.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = None
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc.strerror}", file=sys.stderr)
            return 1
    overrides = {k: getattr(args, k) for k in ("a", "tau", "xi", "lambda_k", "theta", "T", "m",
                                                "out", "svg")}
    try:
        cfg = parse_config(text, overrides)
    except DelayKVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return dispatch(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
