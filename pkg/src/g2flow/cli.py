"""Command line: identity suites, flow runs and parameter sweeps.

Exit codes: 0 success (including runs that halt on blow-up or loss of
positivity), 1 configuration error or non-positive initial form, 2 a suite
residual above tolerance.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import itertools
import json
import os
import sys
from dataclasses import asdict

from .config import SUITES, RunConfig, load_config, load_toml
from .errors import ConfigError, NotPositive
from .flows import FLOW_KINDS, KIND_ALIASES, integrate, ricci_like_monitor
from .plotting import emit_plots, write_trace_csv
from .suites import final_residuals, run_suites

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE = 0, 1, 2
SWEEP_KEYS = ("preset", "kind", "A", "dt", "t_max", "halting_threshold", "monitor_stride")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g2flow", description="Invariant G2-structure identities and flows on Lie groups")
    p.add_argument("--preset", help="preset name (flat7, heisenberg7, almost_abelian_a)")
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--flow", choices=sorted(KIND_ALIASES) + list(FLOW_KINDS), help="run a flow of this kind")
    p.add_argument("--A", type=float, help="constant of the modified coflow")
    p.add_argument("--dt", type=float, help="RK4 step")
    p.add_argument("--t-max", type=float, help="final time")
    p.add_argument("--monitor-every", type=int, help="record monitors every N steps")
    p.add_argument("--halting-threshold", type=float, help="blow-up threshold for Theta")
    p.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}, or 'all'")
    p.add_argument("--out", help="output directory")
    p.add_argument("--emit-plots", action="store_true", help="write plot script and PNG figures")
    p.add_argument("--sweep", help="TOML sweep file with [base] and [grid] tables")
    return p


def _flow_overrides(args) -> dict:
    pairs = {"A": args.A, "dt": args.dt, "t_max": args.t_max, "monitor_stride": args.monitor_every,
             "halting_threshold": args.halting_threshold}
    return {k: v for k, v in pairs.items() if v is not None}


def apply_overrides(base: dict, args) -> dict:
    """Merge command-line flags into a config dictionary."""
    d = json.loads(json.dumps(base))
    if args.preset:
        d["preset"] = {"name": args.preset}
    if args.suites:
        d["suites"] = list(SUITES) if args.suites == "all" else [s.strip() for s in args.suites.split(",") if s.strip()]
    if args.out:
        d["output_dir"] = args.out
    if args.emit_plots:
        d["emit_plots"] = True
    flow = _flow_overrides(args)
    if args.flow:
        d.setdefault("flow", {})["kind"] = args.flow
    if flow:
        if "flow" not in d:
            raise ConfigError("flow parameters need --flow or a [flow] table in the config")
        d["flow"].update(flow)
    return d


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def execute(cfg: RunConfig, quiet: bool = False) -> tuple[int, dict]:
    """Run one configuration; returns the exit code and a summary dictionary."""
    say = (lambda *a: None) if quiet else print
    alg, phi, label = cfg.preset.resolve()
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {cfg.output_dir}: {exc}") from exc
    code = EXIT_OK
    summary: dict = {"preset": label}
    suites = cfg.suites or (() if cfg.flow else SUITES)
    if suites:
        report = run_suites(alg, phi, suites, cfg.flow)
        report["preset"] = label
        _dump_json(report, os.path.join(cfg.output_dir, "report.json"))
        for name, res in report["suites"].items():
            worst = res.get("max_residual")
            say(f"{name:22s} {res['status'].upper():8s}" + (f" max residual {worst:.3e}" if worst is not None else ""))
        summary["suites_passed"] = report["passed"]
        if not report["passed"]:
            code = EXIT_TOLERANCE
    if cfg.flow:
        summary.update(run_flow(cfg, alg, phi, label, say))
    return code, summary


def run_flow(cfg: RunConfig, alg, phi, label: str, say=print) -> dict:
    """Integrate, then write trace.csv, summary.json, timing.json and optionally the plots."""
    trace = integrate(phi, alg, cfg.flow)
    csv_path = os.path.join(cfg.output_dir, "trace.csv")
    write_trace_csv(trace, csv_path)
    last = trace.records[-1]
    run = {
        "preset": label,
        "flow": asdict(cfg.flow),
        "halt_reason": trace.halt_reason,
        "halt_detail": trace.halt_detail,
        "steps": trace.steps,
        "t_final": last.t,
        "final": {k: v for k, v in asdict(last).items() if k != "ricci_like"},
        "final_residuals": final_residuals(trace.geometry(-1)),
        "ricci_like": {"initial": ricci_like_monitor(trace.geometry(0), cfg.flow).as_dict(),
                       "final": ricci_like_monitor(trace.geometry(-1), cfg.flow).as_dict()},
        "max_dpsi_residual": max(r.dpsi_residual for r in trace.records),
        "max_coclass_drift": max(r.coclass_drift for r in trace.records),
        "max_rhs_closedness": max(r.rhs_closedness for r in trace.records),
    }
    _dump_json(run, os.path.join(cfg.output_dir, "summary.json"))
    _dump_json({"wall_time_s": trace.wall_time}, os.path.join(cfg.output_dir, "timing.json"))
    if cfg.emit_plots:
        emit_plots(csv_path, cfg.output_dir)
    say(f"flow {cfg.flow.kind}: halt_reason={trace.halt_reason} t={last.t:.6g} V={last.V:.6g} "
        f"Theta={last.Theta:.6g} ({trace.wall_time:.2f} s)")
    return {"halt_reason": trace.halt_reason, "t_final": last.t, "V": last.V, "Theta": last.Theta}


def _sweep_worker(cfg_dict: dict) -> tuple[int, dict]:
    try:
        return execute(RunConfig.from_dict(cfg_dict), quiet=True)
    except (ConfigError, NotPositive) as exc:
        return EXIT_CONFIG, {"error": str(exc)}


def sweep_threads() -> int:
    raw = os.environ.get("G2FLOW_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"G2FLOW_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"G2FLOW_THREADS must be a positive integer, got {raw!r}")
    return n


def expand_sweep(doc: dict, args) -> list[dict]:
    """Cartesian product of the ``[grid]`` lists applied to ``[base]``, keys in a fixed order."""
    extra = set(doc) - {"base", "grid"}
    if extra:
        raise ConfigError(f"unknown sweep tables: {', '.join(sorted(extra))}")
    base = apply_overrides(doc.get("base", {}), args)
    grid = doc.get("grid", {})
    bad = set(grid) - set(SWEEP_KEYS)
    if bad:
        raise ConfigError(f"sweep grid accepts only {', '.join(SWEEP_KEYS)}")
    keys = [k for k in SWEEP_KEYS if k in grid]
    for k in keys:
        if not isinstance(grid[k], list) or not grid[k]:
            raise ConfigError(f"grid entry {k} must be a non-empty list")
    root = base.get("output_dir", "g2flow_out")
    runs = []
    for n, combo in enumerate(itertools.product(*(grid[k] for k in keys))):
        d = json.loads(json.dumps(base))
        for k, v in zip(keys, combo):
            if k == "preset":
                d["preset"] = {"name": v}
            else:
                d.setdefault("flow", {})[k] = v
        d["output_dir"] = os.path.join(root, f"run_{n:03d}")
        RunConfig.from_dict(d)  # validate before launching anything
        runs.append(d)
    return runs


def run_sweep(path, args) -> int:
    runs = expand_sweep(load_toml(path), args)
    workers = min(sweep_threads(), max(1, len(runs)))
    if workers == 1:
        results = [_sweep_worker(r) for r in runs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, runs))
    root = os.path.dirname(runs[0]["output_dir"]) if runs else (args.out or ".")
    os.makedirs(root, exist_ok=True)
    columns = ["run", "preset", "kind", "A", "dt", "t_max", "exit_code", "halt_reason", "t_final", "V", "Theta"]
    with open(os.path.join(root, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for d, (code, summ) in zip(runs, results):
            flow = d.get("flow", {})
            w.writerow([os.path.basename(d["output_dir"]), d["preset"].get("name", "inline"), flow.get("kind", ""),
                        flow.get("A", ""), flow.get("dt", ""), flow.get("t_max", ""), code,
                        summ.get("halt_reason", ""), *(f"{summ[k]:.17g}" if k in summ else "" for k in ("t_final", "V", "Theta"))])
    print(f"sweep: {len(runs)} runs, {workers} worker(s), index in {os.path.join(root, 'sweep.csv')}")
    return max((code for code, _ in results), default=EXIT_OK)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.sweep:
            return run_sweep(args.sweep, args)
        base = load_config(args.config).to_dict() if args.config else {}
        cfg = RunConfig.from_dict(apply_overrides(base, args))
        code, _ = execute(cfg)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotPositive as exc:
        print(f"not a positive 3-form: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
