"""Command-line front end: ``asym``, ``scan``, ``optimize``, ``verify``, ``pipeline``.

Exit codes: 0 ok, 1 verification failure, 2 bad parameters, 3 I/O error,
4 no filter keeps the output entangled.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import adaptation as ad
from .entanglement import concurrence, is_entangled
from .errors import AdaptError, NoFeasiblePoint
from .linalg import SIGMA_X
from .optimize import (
    GAConfig,
    OptimizationProblem,
    genetic_optimize,
    grid_search_diag,
    problem_config,
)
from .scan import RECOVERED_TOL, ScanConfig, scan_grid, write_pgm, write_svg
from .states import BellKind
from .verify import run_verification

EXIT_OK, EXIT_VERIFY, EXIT_PARAMS, EXIT_IO, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    return f"{x:.12g}"


def _emit(key: str, value) -> None:
    if isinstance(value, bool):
        value = str(value).lower()
    elif isinstance(value, (float, np.floating)):
        value = fmt(value)
    print(f"{key:<28} {value}")


def load_config(path, allowed) -> dict:
    """Read a JSON config; keys outside ``allowed`` are rejected."""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def merged(args, config: dict, defaults: dict) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    out = dict(defaults)
    out.update(config)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


# --------------------------------------------------------------------------- asym

def _parse_adapter(text: str | None):
    if text in (None, "none"):
        return None
    if text == "swap":
        return SIGMA_X
    path = Path(text)
    data = json.loads(path.read_text() if path.exists() else text)
    return ad.LocalFilter.from_dict(data)


def cmd_asym(args) -> int:
    adapter = _parse_adapter(args.adapter)
    spec = ad.loss_spec(args.p1, args.p2, adapter)
    outcome, report = ad.run_pipeline(spec)
    closed = ad.loss_pipeline_state(args.p1, args.p2)
    _emit("p1", args.p1)
    _emit("p2", args.p2)
    _emit("adapter", args.adapter or "none")
    print("state (real part, rows |00>,|01>,|10>,|11>):")
    for row in outcome.state.rho:
        print("  " + "  ".join(f"{z.real: .12g}" for z in row))
    _emit("success_rate", outcome.success_rate)
    _emit("min_pt_eigenvalue", report.min_pt_eigenvalue)
    _emit("concurrence", report.concurrence)
    _emit("entangled", report.entangled)
    _emit("unadapted_concurrence", concurrence(closed))
    _emit("closed_form_concurrence", max(0.0, ad.loss_concurrence(args.p1, args.p2)))
    _emit("threshold_p2", ad.loss_separability_threshold(args.p1))
    if args.adapter == "swap":
        _emit("closed_form_swap_conc", args.p1 * args.p2)
        _emit("limit_filter_conc", np.sqrt(args.p1 * args.p2))
    if args.json:
        payload = {"p1": args.p1, "p2": args.p2, "adapter": args.adapter or "none",
                   "success_rate": outcome.success_rate, "min_pt_eigenvalue": report.min_pt_eigenvalue,
                   "concurrence": report.concurrence, "entangled": report.entangled}
        _write(args.json, json.dumps(_round(payload), indent=2))
    return EXIT_OK


# --------------------------------------------------------------------------- scan

SCAN_KEYS = [f.name for f in fields(ScanConfig)] + ["out_dir", "workers"]


def _parse_grid(text: str):
    try:
        g, p = text.lower().split("x")
        return int(g), int(p)
    except ValueError:
        raise ConfigError(f"--grid expects GAMMAxP, e.g. 50x50, got {text!r}") from None


def cmd_scan(args) -> int:
    config = load_config(args.config, SCAN_KEYS)
    if args.grid:
        args.gamma_steps, args.p_steps = _parse_grid(args.grid)
    defaults = {f.name: f.default for f in fields(ScanConfig)}
    defaults.update(out_dir="scan_out", workers=None)
    opts = merged(args, config, defaults)
    out_dir = Path(opts.pop("out_dir"))
    workers = opts.pop("workers")
    cfg = ScanConfig(**opts)
    result = scan_grid(cfg, workers=workers)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "scan.csv").write_text(result.to_csv())
        write_pgm(result, out_dir / "scan.pgm")
        write_svg(result, out_dir / "scan.svg")
        (out_dir / "summary.json").write_text(json.dumps(
            {"config": {k: getattr(cfg, k) for k in defaults if hasattr(cfg, k)}, "counts": result.summary},
            indent=2))
    except OSError as exc:
        print(f"error: cannot write scan output: {exc}", file=sys.stderr)
        return EXIT_IO
    _emit("cells", len(result.records))
    for name, count in result.summary.items():
        _emit(name, count)
    _emit("csv", str(out_dir / "scan.csv"))
    return EXIT_OK


# --------------------------------------------------------------------------- optimize

OPT_KEYS = ["objective", "space", "seed", "s_min", "method", "r_steps", "identical", "ga"]


def cmd_optimize(args) -> int:
    config = load_config(args.config, OPT_KEYS)
    defaults = {"objective": "concurrence", "space": "diagonal", "seed": 0, "s_min": 0.0,
                "method": "grid", "r_steps": 200, "identical": True, "ga": {}}
    opts = merged(args, config, defaults)
    ga_opts = opts["ga"]
    allowed_ga = {f.name for f in fields(GAConfig)}
    if set(ga_opts) - allowed_ga:
        raise ConfigError(f"unknown ga keys: {sorted(set(ga_opts) - allowed_ga)}")
    kind = BellKind.parse(args.input)
    problem = OptimizationProblem.for_damping(
        args.p, args.gamma, kind, identical=opts["identical"], objective=opts["objective"],
        space=opts["space"], s_min=opts["s_min"], seed=opts["seed"], ga=GAConfig(**ga_opts))
    unfiltered = is_entangled(ad.run_pipeline(ad.damping_spec(args.p, args.gamma, kind, None))[0].state)
    try:
        if opts["method"] == "grid":
            result = grid_search_diag(problem, opts["r_steps"])
        elif opts["method"] == "ga":
            result = genetic_optimize(problem)
        else:
            raise ConfigError(f"unknown method {opts['method']!r}")
    except NoFeasiblePoint as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    found = result.to_dict()
    payload = {"gamma": args.gamma, "p": args.p, "input": kind.value, "method": opts["method"],
               "config": problem_config(problem),
               "best_r": found.pop("best_r"), "objective": found.pop("objective"),
               "success_rate": found.pop("success_rate"), **found,
               "unfiltered_entangled": unfiltered.entangled,
               "unfiltered_concurrence": unfiltered.concurrence}
    if problem.objective.value == "concurrence":
        payload["concurrence"] = payload["objective"]
    if 0 < args.p < 1:
        payload["filter_bound"] = ad.filter_bound(args.p, args.gamma) if args.gamma > 0 else None
    text = json.dumps(_round(payload), indent=2)
    if args.out:
        status = _write(args.out, text)
        if status:
            return status
    print(text)
    if result.objective <= RECOVERED_TOL:
        print("infeasible: no filter keeps the output entangled", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


# --------------------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    suites = run_verification(args.n_random, args.seed, args.tol_scale)
    for s in suites:
        print(s.line())
        for note in s.notes:
            print(f"    {note}")
    ok = all(s.passed for s in suites)
    print(f"{sum(s.passed for s in suites)}/{len(suites)} suites passed")
    return EXIT_OK if ok else EXIT_VERIFY


# --------------------------------------------------------------------------- pipeline

def cmd_pipeline(args) -> int:
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        print(f"error: cannot read {args.spec}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"pipeline spec is not valid JSON: {exc}") from exc
    slots = {k: ad.LocalFilter.from_dict(v) for k, v in data.pop("slots", {}).items()}
    spec = ad.PipelineSpec.from_dict(data)
    outcome, report = ad.run_pipeline(spec, slots)
    _emit("configuration", spec.configuration.value)
    _emit("input", spec.input_kind.value)
    _emit("success_rate", outcome.success_rate)
    _emit("min_pt_eigenvalue", report.min_pt_eigenvalue)
    _emit("concurrence", report.concurrence)
    _emit("entangled", report.entangled)
    if args.out:
        rho = [[[float(f"{z.real:.12g}"), float(f"{z.imag:.12g}")] for z in row] for row in outcome.state.rho]
        payload = {"success_rate": outcome.success_rate, "min_pt_eigenvalue": report.min_pt_eigenvalue,
                   "concurrence": report.concurrence, "entangled": report.entangled, "rho": rho}
        return _write(args.out, json.dumps(_round(payload), indent=2))
    return EXIT_OK


# --------------------------------------------------------------------------- plumbing

def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    return obj


def _write(path, text: str) -> int:
    try:
        Path(path).write_text(text + "\n")
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esd-adapt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asym", help="one-sided loss channels with an optional adapter")
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--adapter", default="none",
                   help="'none', 'swap', or a filter as JSON text/file {r, u_angles, v_angles}")
    p.add_argument("--json", help="also write the report to this file")
    p.set_defaults(func=cmd_asym)

    p = sub.add_parser("scan", help="(gamma, p) phase diagram with CSV/PGM/SVG output")
    p.add_argument("--config")
    p.add_argument("--grid", help="GAMMAxP steps, e.g. 50x50")
    p.add_argument("--seed", type=int)
    p.add_argument("--r-steps", dest="r_steps", type=int)
    p.add_argument("--gamma-min", dest="gamma_min", type=float)
    p.add_argument("--gamma-max", dest="gamma_max", type=float)
    p.add_argument("--p-min", dest="p_min", type=float)
    p.add_argument("--p-max", dest="p_max", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--workers", type=int, help="parallel processes (0 = all cores)")
    p.set_defaults(func=cmd_scan, gamma_steps=None, p_steps=None, tol=None)

    p = sub.add_parser("optimize", help="best filter for one (gamma, p) point")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--input", default="PhiMinus")
    p.add_argument("--config")
    p.add_argument("--method", choices=["grid", "ga"])
    p.add_argument("--space", choices=["diagonal", "full"])
    p.add_argument("--objective", choices=["concurrence", "min_pt"])
    p.add_argument("--seed", type=int)
    p.add_argument("--s-min", dest="s_min", type=float)
    p.add_argument("--r-steps", dest="r_steps", type=int)
    p.add_argument("--independent", dest="identical", action="store_false", default=None,
                   help="separate filters on the two qubits")
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize, ga=None)

    p = sub.add_parser("verify", help="run the invariant and closed-form suites")
    p.add_argument("--n-random", dest="n_random", type=int, default=1000)
    p.add_argument("--seed", type=int, default=2008)
    p.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pipeline", help="execute a pipeline spec JSON")
    p.add_argument("spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AdaptError, ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
