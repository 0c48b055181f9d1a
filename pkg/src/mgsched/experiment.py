"""Experiment configuration, orchestration and report emission.

A config is a JSON object::

    {
      "params": "P1" | {"preset": "P1", "constrained": false} | {"generator": {...}, "external": {...}, "n_gens": 10},
      "n_gens": 10,                      # optional override
      "trace": {"path": "year.csv"} | {"synth": {...SynthSpec fields...}, "seed": 7} | {"bundled": "synthetic_year"},
      "policies": [{"name": "chase", "lookahead": 3}, {"name": "rhc", "lookahead": 3}],
      "forecast_error": {"wind_std_frac": 0.2, "heat_std_frac": 0.0, "seed": 1},   # optional
      "sweeps": {"lookahead": [0, 3], "n_gens": [5, 10], "eta": [0, 1.8],
                 "error_std": [0, 0.5], "ramp_frac": [0.2, 1.0], "dwell": [1, 3]},
      "error_runs": 3,
      "output": {"report": "report.json", "series_dir": "series"}
    }

Relative paths are resolved against the config file's directory. The report
holds no timestamps and is written with sorted keys, so identical configs
give identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .bounds import cr_bound
from .errors import ConfigError
from .model import (
    ExternalSupplySpec,
    GeneratorSpec,
    Trace,
    baseline_cost,
    check_assumptions,
    reference_params,
    total_cost,
)
from .offline import ofa_multi
from .online import Policy, run_policy
from .traces import NoisyForecast, SynthSpec, load_trace, synth_trace

__all__ = [
    "ExperimentConfig",
    "load_params",
    "load_config",
    "resolve_trace",
    "run_experiment",
    "cost_reduction",
    "bundled_path",
    "seed_from_env",
]

SEED_ENV = "CHASE_SEED"


def seed_from_env(seed=None) -> int:
    """``seed`` if given, else ``$CHASE_SEED``; a missing seed is a config error."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        raise ConfigError(f"no seed given and {SEED_ENV} is unset")
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def bundled_path(name: str) -> Path:
    """Path of a file shipped in the package data directory."""
    p = Path(str(resources.files("mgsched") / "data" / name))
    if not p.exists():
        raise ConfigError(f"no bundled file {name!r}")
    return p


def read_json(path) -> dict:
    try:
        with Path(path).open() as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc


def _inf(x):
    # JSON has no infinity; null or "inf" mean unlimited
    if x is None or x == "inf":
        return math.inf
    return float(x)


def load_params(src, base_dir: Path | None = None):
    """``(gen, ext, n_gens)`` from a preset name, a dict or a JSON file path."""
    if isinstance(src, (str, Path)):
        if str(src) in ("S0", "P1"):
            return reference_params(str(src))
        path = Path(src)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_params(read_json(path))
    if not isinstance(src, dict):
        raise ConfigError(f"params must be a name, path or object, got {type(src).__name__}")
    if "preset" in src:
        gen, ext, n = reference_params(src["preset"], bool(src.get("constrained", False)))
        return gen, ext, int(src.get("n_gens", n))
    try:
        g = dict(src["generator"])
        for k in ("ramp_up_Rup", "ramp_down_Rdw"):
            if k in g:
                g[k] = _inf(g[k])
        gen = GeneratorSpec(**g)
        ext = ExternalSupplySpec(**src["external"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad params object: {exc}") from exc
    check_assumptions(gen, ext)
    return gen, ext, int(src.get("n_gens", 1))


def params_dict(gen, ext, n_gens) -> dict:
    g = {
        "capacity_L": gen.capacity_L,
        "startup_beta": gen.startup_beta,
        "idle_cm": gen.idle_cm,
        "incremental_co": gen.incremental_co,
        "min_on_Ton": gen.min_on_Ton,
        "min_off_Toff": gen.min_off_Toff,
        "ramp_up_Rup": None if math.isinf(gen.ramp_up_Rup) else gen.ramp_up_Rup,
        "ramp_down_Rdw": None if math.isinf(gen.ramp_down_Rdw) else gen.ramp_down_Rdw,
    }
    e = {
        "gas_heat_price_cg": ext.gas_heat_price_cg,
        "heat_recovery_eta": ext.heat_recovery_eta,
        "price_min_Pmin": ext.price_min_Pmin,
        "price_max_Pmax": ext.price_max_Pmax,
    }
    return {"generator": g, "external": e, "n_gens": n_gens}


@dataclass
class ExperimentConfig:
    gen: GeneratorSpec
    ext: ExternalSupplySpec
    n_gens: int
    trace_source: dict
    policies: list
    forecast_error: dict | None = None
    sweeps: dict = field(default_factory=dict)
    error_runs: int = 3
    sweep_seed: int | None = None
    report_path: Path | None = None
    series_dir: Path | None = None
    base_dir: Path = field(default_factory=Path.cwd)


_SWEEPS = ("lookahead", "n_gens", "eta", "error_std", "ramp_frac", "dwell")


def load_config(src) -> ExperimentConfig:
    """Parse and check a config (dict or JSON path) before any computation."""
    base = Path.cwd()
    if not isinstance(src, dict):
        base = Path(src).resolve().parent
        src = read_json(src)
    known = {"params", "n_gens", "trace", "policies", "forecast_error", "sweeps", "error_runs", "output"}
    extra = set(src) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    gen, ext, n = load_params(src.get("params", "P1"), base)
    n = int(src.get("n_gens", n))
    if n < 1:
        raise ConfigError("n_gens must be >= 1")

    trace = src.get("trace")
    if not isinstance(trace, dict) or not ({"path", "synth", "bundled"} & set(trace)):
        raise ConfigError("trace must give one of path, synth or bundled")
    if "path" in trace:
        p = Path(trace["path"])
        p = p if p.is_absolute() else base / p
        if not p.exists():
            raise ConfigError(f"trace file not found: {p}")
        trace = {"path": str(p)}
    elif "synth" in trace:
        SynthSpec.from_dict(trace["synth"] or {})
        trace = {"synth": trace["synth"] or {}, "seed": seed_from_env(trace.get("seed"))}
    else:
        bundled_path(f"{trace['bundled']}.csv")

    raw = src.get("policies", [{"name": "chase", "lookahead": 3}, {"name": "rhc", "lookahead": 3}])
    policies = []
    for item in raw:
        if isinstance(item, str):
            item = {"name": item}
        policies.append(Policy(item["name"], int(item.get("lookahead", 0))))
    if not policies:
        raise ConfigError("at least one policy is needed")

    fe = src.get("forecast_error")
    if fe is not None:
        fe = {
            "wind_std_frac": float(fe.get("wind_std_frac", 0.0)),
            "heat_std_frac": float(fe.get("heat_std_frac", 0.0)),
            "seed": seed_from_env(fe.get("seed")),
        }
        for k in ("wind_std_frac", "heat_std_frac"):
            if not 0 <= fe[k] <= 1.2:
                raise ConfigError(f"{k} must lie in [0, 1.2]")

    sweeps = dict(src.get("sweeps", {}))
    bad = set(sweeps) - set(_SWEEPS)
    if bad:
        raise ConfigError(f"unknown sweeps: {sorted(bad)}")
    for k, vals in sweeps.items():
        if not isinstance(vals, list):
            raise ConfigError(f"sweep {k} must be a list")
    sweep_seed = None
    if "error_std" in sweeps:
        sweep_seed = fe["seed"] if fe is not None else seed_from_env(None)
        if any(not 0 <= v <= 1.2 for v in sweeps["error_std"]):
            raise ConfigError("error_std values must lie in [0, 1.2]")
    if any(int(w) != w or w < 0 for w in sweeps.get("lookahead", [])):
        raise ConfigError("lookahead values must be non-negative integers")

    out = src.get("output", {})
    rp = out.get("report")
    sd = out.get("series_dir")
    return ExperimentConfig(
        gen=gen,
        ext=ext,
        n_gens=n,
        trace_source=trace,
        policies=policies,
        forecast_error=fe,
        sweeps=sweeps,
        error_runs=int(src.get("error_runs", 3)),
        sweep_seed=sweep_seed,
        report_path=None if rp is None else (Path(rp) if Path(rp).is_absolute() else base / rp),
        series_dir=None if sd is None else (Path(sd) if Path(sd).is_absolute() else base / sd),
        base_dir=base,
    )


def resolve_trace(source: dict, ext=None) -> Trace:
    if "path" in source:
        return load_trace(source["path"], ext)
    if "bundled" in source:
        return load_trace(bundled_path(f"{source['bundled']}.csv"), ext)
    trace = synth_trace(SynthSpec.from_dict(source["synth"]), source["seed"])
    if ext is not None:
        trace.check_prices(ext)
    return trace


def cost_reduction(baseline: float, total: float) -> float:
    return (baseline - total) / baseline if baseline > 0 else 0.0


# --------------------------------------------------------------------------
# runs


def _offline(trace, gen, ext, n):
    """Offline reference: exact for fast units, the relaxation otherwise."""
    sched = ofa_multi(trace, gen.relaxed(), ext, n)
    return sched, total_cost(sched, trace, gen, ext)


def _bound_kind(policy: Policy, gen) -> str | None:
    if policy.name == "rhc":
        return None
    if policy.name == "chase_gen" or not gen.fast_responding:
        return "chase_gen"
    return "chase_multi" if policy.name in ("chase", "chase_s_plus") else "chase_lk"


def _effective(policy: Policy, gen) -> Policy:
    # slow units run the dwell/ramp-aware wrapper whatever CHASE variant was asked for
    if not gen.fast_responding and policy.name != "rhc":
        return Policy("chase_gen", policy.lookahead)
    return policy


def _row(policy, trace, gen, ext, n, base, offline_total, forecast=None):
    pol = _effective(policy, gen)
    if not gen.fast_responding and pol.name == "rhc":
        return None
    sched, cost = run_policy(pol, trace, gen, ext, n, forecast)
    row = {
        "policy": pol.name,
        "lookahead": pol.lookahead,
        "cost": cost.as_dict(),
        "cost_reduction": cost_reduction(base, cost.total),
        "empirical_ratio": _ratio(cost.total, offline_total),
    }
    kind = _bound_kind(pol, gen)
    if kind is not None:
        b = cr_bound(kind, gen, ext, pol.lookahead, trace.slot_len)
        row["bound"] = b.bound
        row["bound_kind"] = kind
        row["bound_applies"] = forecast is None
    return row, sched


def _ratio(total, offline_total):
    if offline_total == 0:
        return 1.0 if total == 0 else None
    return total / offline_total


def _noisy(cfg_fe, trace, seed_shift=0, wind=None, heat=None):
    return NoisyForecast(
        cfg_fe["wind_std_frac"] if wind is None else wind,
        cfg_fe["heat_std_frac"] if heat is None else heat,
        installed_wind_kw=float(trace.wind.max()) if trace.wind is not None else float(trace.a.max()),
        peak_heat_kw=float(trace.h.max()),
        seed=cfg_fe["seed"] + seed_shift,
    )


def run_experiment(config, write: bool = True) -> dict:
    """Run every policy, the offline reference and the sweeps; return the report.

    With ``write`` and configured output paths, the JSON report and the CSV
    series are written too.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    gen, ext, n = cfg.gen, cfg.ext, cfg.n_gens
    trace = resolve_trace(cfg.trace_source, ext)
    base = baseline_cost(trace, ext)
    off_sched, off_cost = _offline(trace, gen, ext, n)
    offline_label = "offline" if gen.fast_responding else "offline_relaxed"

    rows = {offline_label: {
        "policy": offline_label,
        "lookahead": None,
        "cost": off_cost.as_dict(),
        "cost_reduction": cost_reduction(base, off_cost.total),
        "empirical_ratio": 1.0,
    }}
    series = {offline_label: off_sched}
    forecast = _noisy(cfg.forecast_error, trace) if cfg.forecast_error else None
    for policy in cfg.policies:
        out = _row(policy, trace, gen, ext, n, base, off_cost.total, forecast)
        if out is None:
            continue
        row, sched = out
        label = f"{row['policy']}(w={row['lookahead']})"
        rows[label] = row
        series[label] = sched

    report = {
        "params": params_dict(gen, ext, n),
        "trace": {
            "slots": len(trace),
            "slot_len_h": trace.slot_len,
            "source": {k: (v if k != "path" else Path(v).name) for k, v in cfg.trace_source.items()},
        },
        "forecast_error": cfg.forecast_error,
        "baseline_cost": base,
        "policies": rows,
        "sweeps": _sweeps(cfg, trace, base),
    }
    if write:
        _write_outputs(cfg, report, trace, series)
    return report


def _main_lookahead(cfg) -> int:
    for p in cfg.policies:
        if p.name != "rhc":
            return p.lookahead
    return cfg.policies[0].lookahead


def _sweeps(cfg, trace, base) -> dict:
    gen, ext, n = cfg.gen, cfg.ext, cfg.n_gens
    out = {}
    sw = cfg.sweeps
    w0 = _main_lookahead(cfg)
    names = sorted({p.name for p in cfg.policies})

    if "lookahead" in sw:
        _, off = _offline(trace, gen, ext, n)
        rows = []
        for w in sw["lookahead"]:
            for name in names:
                r = _row(Policy(name, int(w)), trace, gen, ext, n, base, off.total)
                if r is not None:
                    rows.append({"lookahead": int(w), **_flat(r[0])})
        out["lookahead"] = rows

    if "n_gens" in sw:
        rows = []
        for k in sw["n_gens"]:
            _, off = _offline(trace, gen, ext, int(k))
            rows.append({"n_gens": int(k), "policy": "offline", "cost_reduction": cost_reduction(base, off.total)})
            for name in names:
                r = _row(Policy(name, w0), trace, gen, ext, int(k), base, off.total)
                if r is not None:
                    rows.append({"n_gens": int(k), **_flat(r[0])})
        out["n_gens"] = rows

    if "eta" in sw:
        rows = []
        for eta in sw["eta"]:
            e = replace(ext, heat_recovery_eta=float(eta))
            _, off = _offline(trace, gen, e, n)
            rows.append({"eta": float(eta), "policy": "offline", "total": off.total, "cost_reduction": cost_reduction(base, off.total)})
            for name in names:
                r = _row(Policy(name, w0), trace, gen, e, n, base, off.total)
                if r is not None:
                    rows.append({"eta": float(eta), **_flat(r[0])})
        out["eta"] = rows

    if "error_std" in sw:
        fe = {"wind_std_frac": 0.0, "heat_std_frac": 0.0, "seed": cfg.sweep_seed}
        _, off = _offline(trace, gen, ext, n)
        rows = []
        for std in sw["error_std"]:
            for target in ("wind", "heat"):
                for name in names:
                    vals = []
                    for run in range(cfg.error_runs):
                        fc = _noisy(fe, trace, run, wind=std if target == "wind" else 0.0, heat=std if target == "heat" else 0.0)
                        r = _row(Policy(name, w0), trace, gen, ext, n, base, off.total, fc)
                        if r is not None:
                            vals.append(r[0]["cost_reduction"])
                    if vals:
                        rows.append({
                            "error_std": float(std), "target": target, "policy": name, "lookahead": w0,
                            "cost_reduction": float(np.mean(vals)), "runs": len(vals),
                        })
        out["error_std"] = rows

    if "ramp_frac" in sw or "dwell" in sw:
        _, off = _offline(trace, gen, ext, n)
        if "ramp_frac" in sw:
            rows = []
            for frac in sw["ramp_frac"]:
                R = float(frac) * gen.capacity_L
                g = replace(gen, ramp_up_Rup=R, ramp_down_Rdw=R)
                r = _row(Policy("chase_gen", w0), trace, g, ext, n, base, off.total)
                rows.append({"ramp_frac": float(frac), **_flat(r[0])})
            out["ramp_frac"] = rows
        if "dwell" in sw:
            rows = []
            for d in sw["dwell"]:
                g = replace(gen, min_on_Ton=int(d), min_off_Toff=int(d))
                r = _row(Policy("chase_gen", w0), trace, g, ext, n, base, off.total)
                rows.append({"dwell": int(d), **_flat(r[0])})
            out["dwell"] = rows
    return out


def _flat(row: dict) -> dict:
    keep = ("policy", "lookahead", "cost_reduction", "empirical_ratio", "bound")
    out = {k: row[k] for k in keep if k in row}
    out["total"] = row["cost"]["total"]
    return out


def _write_outputs(cfg, report, trace, series):
    if cfg.report_path is not None:
        cfg.report_path.parent.mkdir(parents=True, exist_ok=True)
        cfg.report_path.write_text(dumps(report))
    if cfg.series_dir is None:
        return
    d = cfg.series_dir
    d.mkdir(parents=True, exist_ok=True)
    labels = list(series)
    with (d / "decisions.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["slot", "a_kw", "h_kw", "price"]
        for lab in labels:
            header += [f"{lab}:on", f"{lab}:u_kw"]
        w.writerow(header)
        for t in range(len(trace)):
            row = [t + 1, repr(float(trace.a[t])), repr(float(trace.h[t])), repr(float(trace.p[t]))]
            for lab in labels:
                s = series[lab]
                row += [int(s.y[t].sum()), repr(float(s.u[t].sum()))]
            w.writerow(row)
    for name, rows in report["sweeps"].items():
        if not rows:
            continue
        cols = sorted({k for r in rows for k in r})
        with (d / f"sweep_{name}.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow(["" if r.get(c) is None else r.get(c) for c in cols])


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, no NaN/inf literals."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    return x

