"""Command-line front end.

Exit codes: 0 all checks passed, 1 checks ran and at least one failed,
2 configuration or domain error before any check could run.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import resources
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .actions import SEPARABLE, FreeAction
from .amplitudes import assemble_state, normalize_if_integrable
from .core import DomainError, Units, make_grid
from .potentials import (
    FAMILY_TAGS,
    PotentialFamily,
    ParameterError,
    VariantMismatchError,
    action_variant,
    catalog,
    eval_potential,
    parameter_schema,
)
from .scenarios import (
    DEFAULT_DX,
    NORMALIZATION_RANGES,
    EvolutionCase,
    Scenario,
    default_dt,
    default_evolution,
    default_scenario,
    run_checks,
    run_evolution,
)
from .verify import bohm_potential

SCHEMA_VERSION = "bohmfree/1"
MAX_COMBINATIONS = 10_000
TRANSPORT_LIMIT = 1e-3
DRIFT_LIMIT = 1e-9

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


class ConfigError(DomainError):
    pass


# -- configuration --------------------------------------------------------------

def config_schema() -> dict:
    return json.loads(resources.files("bohmfree").joinpath("config.schema.json").read_text())


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc


def _units(cfg: dict) -> Units:
    u = cfg.get("units", {})
    return Units(u.get("hbar", 1.0), u.get("mass", 1.0))


def _family_params(cfg: dict, tag: str) -> dict:
    params = dict(cfg.get("params", {}))
    schema = parameter_schema(tag)
    for key in ("beta", "a1", "a2"):
        if key in cfg.get("seeds", {}):
            if key not in schema:
                raise ConfigError(f"seed {key!r} does not apply to {tag}")
            params[key] = cfg["seeds"][key]
    return params


def _action(cfg: dict, tag: str, units: Units, base: FreeAction) -> FreeAction:
    entry = cfg.get("action")
    if entry is None:
        return FreeAction(base.variant, base.k, base.x0, base.t0, units)
    if entry["variant"] != action_variant(tag):
        raise VariantMismatchError(
            f"{tag} requires a {action_variant(tag)} action; config asks for {entry['variant']}"
        )
    if entry["variant"] == SEPARABLE:
        extra = set(entry) - {"variant", "k"}
        if extra:
            raise ConfigError(f"separable action takes only k, got {sorted(extra)}")
        return FreeAction.separable(entry.get("k", base.k), units)
    extra = set(entry) - {"variant", "x0", "t0"}
    if extra:
        raise ConfigError(f"non-separable action takes only x0, t0, got {sorted(extra)}")
    return FreeAction.non_separable(entry.get("x0", base.x0), entry.get("t0", base.t0), units)


def scenario_from_config(cfg: dict, tag: str, window: dict | None = None) -> Scenario:
    units = _units(cfg)
    base = default_scenario(tag, units)
    if window and tag in window:
        base = replace(base, s_lo=window[tag][0], s_hi=window[tag][1])
    action = _action(cfg, tag, units, base.action)
    fam = PotentialFamily(tag, _family_params(cfg, tag), action)
    times = cfg.get("times", {})
    t = float(times.get("t", base.t))
    action.check_time(t)
    grid_cfg = cfg.get("grid", {})
    s_lo, s_hi = grid_cfg.get("s_min", base.s_lo), grid_cfg.get("s_max", base.s_hi)
    explicit = None
    if "x_min" in grid_cfg or "x_max" in grid_cfg or "n" in grid_cfg:
        missing = {"x_min", "x_max", "n"} - set(grid_cfg)
        if missing:
            raise ConfigError(f"explicit grid needs x_min, x_max and n (missing {sorted(missing)})")
        explicit = make_grid(grid_cfg["x_min"], grid_cfg["x_max"], grid_cfg["n"])
        ends = fam.coordinate(np.array([explicit.x_min, explicit.x_max]), t)
        s_lo, s_hi = float(ends.min()), float(ends.max())
    seeds = {k: v for k, v in cfg.get("seeds", {}).items() if k in ("a0", "da0", "s_init")}
    amp_family = None
    if "amplitude_from" in cfg:
        other = cfg["amplitude_from"]
        if action_variant(other["family"]) != action_variant(tag):
            raise VariantMismatchError(f"amplitude of {other['family']} cannot be assembled for {tag}")
        amp_family = PotentialFamily(other["family"], other.get("params", {}), action)
    tol = cfg.get("tolerances", {}).get("ode_tol", base.ode_tol)
    return Scenario(fam, float(s_lo), float(s_hi), t, ode_tol=tol, seed=seeds,
                    amplitude_family=amp_family, explicit_grid=explicit)


def _dx(cfg: dict) -> float:
    return float(cfg.get("grid", {}).get("dx", DEFAULT_DX))


def _tol_scale(cfg: dict, args) -> float:
    if getattr(args, "tol_scale", None) is not None:
        return float(args.tol_scale)
    return float(cfg.get("tolerances", {}).get("tol_scale", 1.0))


def _fmt(args, cfg: dict, default: str) -> str:
    if getattr(args, "format", None):
        return args.format
    return cfg.get("output", {}).get("format", default)


def _out_dir(args, cfg: dict) -> Path | None:
    path = getattr(args, "out", None) or cfg.get("output", {}).get("path")
    return Path(path) if path else None


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_plain) + "\n"


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _csv_text(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    lines = [",".join(names)]
    lines += [",".join("%.17g" % v for v in row) for row in data]
    return "\n".join(lines) + "\n"


# -- catalog ------------------------------------------------------------------------

def cmd_catalog(args, cfg) -> int:
    entries = catalog()
    fmt = _fmt(args, cfg, "text")
    if fmt == "json":
        sys.stdout.write(_dump([dict(e, schema_version=SCHEMA_VERSION) for e in entries]))
        return EXIT_OK
    if fmt == "csv":
        lines = ["tag,action_variant,reduced_coordinate,amplitude_availability,parameters"]
        for e in entries:
            params = ";".join(f"{k}={v['default']}" for k, v in e["parameters"].items())
            lines.append(f"{e['tag']},{e['action_variant']},{e['reduced_coordinate']},"
                         f"{e['amplitude_availability']},{params}")
        sys.stdout.write("\n".join(lines) + "\n")
        return EXIT_OK
    header = f"{'family':28s} {'action':14s} {'amplitude':19s} profile / parameters"
    print(header)
    print("-" * len(header))
    for e in entries:
        params = ", ".join(f"{k}={v['default']:g}" for k, v in e["parameters"].items()) or "-"
        print(f"{e['tag']:28s} {e['action_variant']:14s} {e['amplitude_availability']:19s} "
              f"{e['profile']}   [{params}]")
    return EXIT_OK


# -- build ------------------------------------------------------------------------------

def _family_tag(args, cfg) -> str | None:
    tag = getattr(args, "family", None) or cfg.get("family")
    if tag is not None and tag not in FAMILY_TAGS:
        raise ParameterError(f"unknown potential family {tag!r}")
    return tag


def build_state(sc: Scenario, dx: float):
    p, a = sc.family, sc.action
    grid = sc.grid(dx)
    amp = sc.profile()
    state = normalize_if_integrable(assemble_state(a, p, amp, grid, sc.t))
    x = grid.x
    s = p.coordinate(x, sc.t)
    notes = []
    if p.tag == "delta_trap":
        potential = np.zeros_like(x)
        notes.append("potential column holds the regular part only; the delta at z=0 is not sampled")
    else:
        potential = eval_potential(p, x, sc.t)
    vb, mask, _ = bohm_potential(state, return_mask=True)
    bohm = np.where(mask, np.nan, vb.values)
    if mask.any():
        notes.append("bohm_potential is nan where the amplitude has a node or falls below the floor")
    return state, amp, {
        "x": x,
        "z_or_y": s,
        "amplitude": state.amplitude.values,
        "phase": state.phase.values,
        "density": state.amplitude.values ** 2,
        "potential": potential,
        "bohm_potential": bohm,
    }, notes


def cmd_build(args, cfg) -> int:
    tag = _family_tag(args, cfg)
    if tag is None:
        raise ConfigError("build needs a family (--family or config 'family')")
    sc = scenario_from_config(cfg, tag, window=NORMALIZATION_RANGES)
    state, amp, columns, notes = build_state(sc, _dx(cfg))
    if amp.source == "ode-oracle" and not any(k in cfg.get("seeds", {}) for k in ("a0", "da0")):
        notes.append(f"ODE seeds defaulted to a0=1, da0=0 at s={amp.seed['s_init']:g}")
    out = _out_dir(args, cfg) or Path(".")
    fmt = _fmt(args, cfg, "csv")
    stem = out / f"{tag}_state"
    if fmt == "csv":
        _write_text(stem.with_suffix(".csv"), _csv_text(columns))
    else:
        data = {k: [None if np.isnan(v) else float(v) for v in col] for k, col in columns.items()}
        _write_text(stem.with_suffix(".json"), _dump({"schema_version": SCHEMA_VERSION, "columns": data}))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "created": datetime.now(timezone.utc).isoformat(),
        "generator": f"bohmfree {__version__}",
        "config": cfg,
        "family": tag,
        "params": dict(sc.family.params),
        "action": sc.action.params(),
        "units": {"hbar": sc.family.units.hbar, "mass": sc.family.units.mass},
        "time": sc.t,
        "grid": state.grid.describe(),
        "reduced_coordinate": sc.family.coordinate.name,
        "amplitude_source": amp.source,
        "amplitude_family": (sc.amplitude_family or sc.family).tag,
        "ode_seed": amp.seed,
        "norm_status": state.norm_status,
        "normalization_factor": state.scale,
        "notes": notes,
    }
    _write_text(out / f"{tag}_state.meta.json", _dump(meta))
    print(str(stem.with_suffix("." + fmt)))
    return EXIT_OK


# -- verify ------------------------------------------------------------------------------

def verify_one(cfg: dict, tag: str, tol_scale: float) -> dict:
    sc = scenario_from_config(cfg, tag)
    overrides = cfg.get("tolerances", {}).get("residual_constant_overrides", {})
    dx = _dx(cfg)
    dt = cfg.get("times", {}).get("dt")
    if sc.explicit_grid is not None:
        dx = sc.explicit_grid.dx
    checks = run_checks(sc, dx, dt, tol_scale, overrides)
    source = None if tag == "delta_trap" else sc.profile().source
    return {
        "schema_version": SCHEMA_VERSION,
        "family": tag,
        "params": dict(sc.family.params),
        "action": sc.action.params(),
        "amplitude_family": (sc.amplitude_family or sc.family).tag,
        "amplitude_source": source,
        "time": sc.t,
        "dx": dx,
        "dt": default_dt(dx) if dt is None else dt,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def _verify_csv(results: list[dict]) -> str:
    lines = ["family,check,max_abs,l2,tolerance,passed,skipped"]
    for r in results:
        for c in r["checks"]:
            if c.get("skipped"):
                lines.append(f"{r['family']},{c['name']},,,,{str(c['passed']).lower()},true")
            else:
                lines.append(f"{r['family']},{c['name']},{c['max_abs']:.17g},{c['l2']:.17g},"
                             f"{c['tolerance']:.17g},{str(c['passed']).lower()},false")
    return "\n".join(lines) + "\n"


def cmd_verify(args, cfg) -> int:
    tag = _family_tag(args, cfg)
    tol_scale = _tol_scale(cfg, args)
    if tag is None:
        if any(k in cfg for k in ("params", "action", "amplitude_from", "seeds")):
            raise ConfigError("family-specific settings require a family")
        tags = FAMILY_TAGS
    else:
        tags = (tag,)
    # validate every configuration before running any check
    for t in tags:
        scenario_from_config(cfg, t)
    results = [verify_one(cfg, t, tol_scale) for t in tags]
    report = {
        "schema_version": SCHEMA_VERSION,
        "tol_scale": tol_scale,
        "families": results,
        "passed": all(r["passed"] for r in results),
    }
    text = _verify_csv(results) if _fmt(args, cfg, "json") == "csv" else _dump(report)
    sys.stdout.write(text)
    out = _out_dir(args, cfg)
    if out is not None:
        suffix = "csv" if _fmt(args, cfg, "json") == "csv" else "json"
        _write_text(out / f"verify_report.{suffix}", text)
    return EXIT_OK if report["passed"] else EXIT_FAILED


# -- evolve ------------------------------------------------------------------------------

def evolution_from_config(cfg: dict, tag: str) -> EvolutionCase:
    units = _units(cfg)
    base = default_evolution(tag, units, **_family_params(cfg, tag))
    action = _action(cfg, tag, units, base.family.action)
    fam = base.family.with_action(action)
    times = cfg.get("times", {})
    grid_cfg = cfg.get("grid", {})
    if "n" in grid_cfg:
        raise ConfigError("evolve takes grid x_min, x_max and dx (not n)")
    case = EvolutionCase(
        fam,
        float(grid_cfg.get("x_min", base.x_min)),
        float(grid_cfg.get("x_max", base.x_max)),
        float(times.get("t_start", base.t_start)),
        float(times.get("t_end", base.t_end)),
        dx=float(grid_cfg.get("dx", base.dx)),
        dt=float(times.get("dt", base.dt)),
        snapshots=int(times.get("snapshots", base.snapshots)),
    )
    if "steps" in times:
        case = EvolutionCase(case.family, case.x_min, case.x_max, case.t_start, case.t_end, case.dx,
                             (case.t_end - case.t_start) / times["steps"], case.snapshots)
    return case


def cmd_evolve(args, cfg) -> int:
    tag = _family_tag(args, cfg)
    if tag is None:
        raise ConfigError("evolve needs a family (--family or config 'family')")
    case = evolution_from_config(cfg, tag)
    out = _out_dir(args, cfg) or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    run, summary = run_evolution(case)
    tol_scale = _tol_scale(cfg, args)
    checks = {
        "density_transport": summary["density_transport_error"] <= TRANSPORT_LIMIT * tol_scale,
        "probability_drift": summary["probability_drift"] <= DRIFT_LIMIT * tol_scale,
    }
    summary.update({"schema_version": SCHEMA_VERSION, "params": dict(case.family.params),
                    "action": case.family.action.params(), "checks": checks,
                    "limits": {"density_transport": TRANSPORT_LIMIT * tol_scale,
                               "probability_drift": DRIFT_LIMIT * tol_scale},
                    "passed": all(checks.values())})
    if getattr(args, "control", False):
        _, ctrl = run_evolution(case, control=True)
        summary["control_density_transport_error"] = ctrl["density_transport_error"]
    fmt = _fmt(args, cfg, "csv")
    files = []
    x = run.initial.grid.x
    for i, (t, psi) in enumerate(run.snapshots):
        cols = {"x": x, "re_psi": psi.values.real, "im_psi": psi.values.imag,
                "density": np.abs(psi.values) ** 2}
        name = out / f"{tag}_snapshot_{i:03d}.{fmt}"
        if fmt == "csv":
            _write_text(name, _csv_text(cols))
        else:
            _write_text(name, _dump({"schema_version": SCHEMA_VERSION, "time": t,
                                     "columns": {k: [float(v) for v in c] for k, c in cols.items()}}))
        files.append(name.name)
    summary["snapshot_files"] = files
    text = _dump(summary)
    _write_text(out / f"{tag}_evolve_summary.json", text)
    sys.stdout.write(text)
    return EXIT_OK if summary["passed"] else EXIT_FAILED


# -- sweep ------------------------------------------------------------------------------

_ACTION_KEYS = ("k", "x0", "t0")


def sweep_points(cfg: dict, tag: str) -> list[dict]:
    ranges = cfg.get("ranges", {})
    schema = parameter_schema(tag)
    order = [k for k in schema if k in ranges] + [k for k in _ACTION_KEYS if k in ranges]
    unknown = set(ranges) - set(order)
    if unknown:
        raise ConfigError(f"{tag}: cannot sweep {sorted(unknown)}")
    total = 1
    for k in order:
        total *= len(ranges[k])
    if total > MAX_COMBINATIONS:
        raise ConfigError(f"sweep has {total} combinations (limit {MAX_COMBINATIONS})")
    if any(not np.all(np.isfinite(ranges[k])) for k in order):
        raise ConfigError("sweep ranges must be finite")
    points = []
    for combo in itertools.product(*(ranges[k] for k in order)):
        point = {key: value for key, value in cfg.items() if key != "ranges"}
        params = dict(point.get("params", {}))
        action = dict(point.get("action", {"variant": action_variant(tag)}))
        for k, v in zip(order, combo):
            if k in _ACTION_KEYS:
                action[k] = v
            else:
                params[k] = v
        point["params"] = params
        if any(k in _ACTION_KEYS for k in order):
            point["action"] = action
        points.append(point)
    return points


def _sweep_worker(job):
    cfg, tag, tol_scale = job
    return verify_one(cfg, tag, tol_scale)


def cmd_sweep(args, cfg) -> int:
    tag = _family_tag(args, cfg)
    if tag is None:
        raise ConfigError("sweep needs a family (--family or config 'family')")
    tol_scale = _tol_scale(cfg, args)
    points = sweep_points(cfg, tag)
    for p in points:
        scenario_from_config(p, tag)
    jobs = [(p, tag, tol_scale) for p in points]
    workers = args.jobs or min(len(jobs), os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    text = _dump(results)
    sys.stdout.write(text)
    out = _out_dir(args, cfg)
    if out is not None:
        _write_text(out / f"{tag}_sweep.json", text)
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_FAILED


# -- entry point ------------------------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON run configuration")
    parser.add_argument("--format", default=default, choices=["csv", "json"],
                        help="output format")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("--tol-scale", dest="tol_scale", type=float, default=default,
                        help="multiply every residual tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohmfree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bohmfree {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the potential families")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("build", help="construct a state and write it as CSV/JSON")
    _global_flags(p, suppress=True)
    p.add_argument("--family", choices=FAMILY_TAGS)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run every residual check (all families by default)")
    _global_flags(p, suppress=True)
    p.add_argument("--family", choices=FAMILY_TAGS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evolve", help="Crank-Nicolson evolution of a square-integrable state")
    _global_flags(p, suppress=True)
    p.add_argument("--family", choices=FAMILY_TAGS)
    p.add_argument("--control", action="store_true", help="also run with the potential set to zero")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", help="verify over a cartesian product of parameters")
    _global_flags(p, suppress=True)
    p.add_argument("--family", choices=FAMILY_TAGS)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (default: one per point, capped)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (DomainError, ValueError) as exc:
        print(f"bohmfree: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"bohmfree: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
