"""Benchmark harness CLI.

Run mode configures one (problem, algorithm) pair and executes it for each
seed, streaming one CSV of per-iteration trace rows per seed plus a JSON
summary. Summarize mode aggregates several run CSVs into per-iteration
mean/std columns.

Examples:
    adcgs-bench --problem lsq --set simplex --synthetic m=50,n=10 \\
        --alg adcgs --alpha 1.0 --seeds 1 --max-iter 300 --out results/
    adcgs-bench summarize results/adcgs_seed1.csv results/adcgs_seed2.csv \\
        --out results/summary.csv

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baselines import BaselineConfig, run_baseline
from .core import ContractViolation, NumericalAbort, OracleCounters, TRACE_COLUMNS
from .data_io import Dataset, SyntheticSpec, generate_synthetic, load_libsvm, standardize
from .feasible_sets import set_from_config
from .objectives import LeastSquares, Logistic, LpLoss
from .solver import RunResult, ScheduleConfig, run

OUTPUT_DIR_ENV = "ADCGS_OUT_DIR"

ALGORITHMS = ("adcgs", "adcgs-ls1", "cg-open", "cg-ls", "cgs", "pg", "acfgm")
PROJECTION_ALGS = ("pg", "acfgm")


class ConfigError(Exception):
    pass


def _parse_kv(text: str, what: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep or not val:
            raise ConfigError(f"malformed {what} entry '{part}'")
        out[key.strip()] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adcgs-bench", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="JSON config file; explicit flags take precedence")
    p.add_argument("--problem", help="lsq | lp:p=<float> | logistic")
    p.add_argument("--set", dest="set_spec",
                   help="simplex | l2ball:r=<float> | ksparse:K=<int>,kappa=<float>")
    p.add_argument("--synthetic", help="m=<int>,n=<int> synthetic instance")
    p.add_argument("--data", help="path to a LIBSVM file (optionally .gz)")
    p.add_argument("--standardize", action="store_true",
                   help="standardize dataset columns")
    p.add_argument("--alg", choices=ALGORITHMS)
    p.add_argument("--schedule", choices=("cor1", "cor2", "cor3"), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--N", type=int, default=None, help="fixed horizon (cor2)")
    p.add_argument("--eta1", type=float, default=None)
    p.add_argument("--L0", type=float, default=None)
    p.add_argument("--L-override", type=float, default=None, dest="L_override")
    p.add_argument("--max-inner", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--stop-gap", type=float, default=None)
    p.add_argument("--seeds", help="comma-separated seed list, e.g. 1,2,3")
    p.add_argument("--x0", choices=("zeros", "center"), default=None)
    p.add_argument("--f-ref", type=float, default=None,
                   help="reference optimum for primal-gap reporting")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--emit-bound", action="store_true")
    return p


_DEFAULTS = {
    "schedule": "cor1", "alpha": 1.0, "theta": 1e-3, "max_inner": 50,
    "max_iter": 1000, "stop_gap": 1e-10, "seeds": "1", "x0": "zeros",
    "workers": 1, "standardize": False, "emit_bound": False,
}


def merge_config(args: argparse.Namespace) -> dict:
    """Config-file values fill in unset flags; built-in defaults fill the rest."""
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file: {e}")
    merged = dict(_DEFAULTS)
    merged.update(cfg)
    for key, val in vars(args).items():
        if key == "config":
            continue
        if val is not None and val is not False:
            merged[key] = val
    return merged


def build_problem(cfg: dict, seed: int):
    """Returns (objective, feasible_set, x0, f_ref) for one seed."""
    problem = cfg.get("problem")
    set_spec = cfg.get("set_spec") or cfg.get("set")
    if not problem or not set_spec:
        raise ConfigError("--problem and --set are required")
    f_ref = cfg.get("f_ref")
    if cfg.get("synthetic"):
        kv = _parse_kv(cfg["synthetic"], "synthetic")
        try:
            m, n = int(kv["m"]), int(kv["n"])
        except (KeyError, ValueError):
            raise ConfigError("synthetic spec needs m=<int>,n=<int>")
        kind = "simplex_lsq" if set_spec.startswith("simplex") else "ball_lsq_strongly_convex"
        radius = 1.0
        if set_spec.startswith("l2ball"):
            radius = float(_parse_kv(set_spec.split(":", 1)[1], "set")["r"])
        if set_spec.startswith("ksparse"):
            kind = "simplex_lsq"  # uniform matrix; planted point ignored
        try:
            ds, _ = generate_synthetic(SyntheticSpec(kind=kind, m=m, n=n, seed=seed,
                                                     radius=radius))
        except ContractViolation as e:
            raise ConfigError(str(e))
        if f_ref is None and problem == "lsq" and kind in ("simplex_lsq",
                                                           "ball_lsq_strongly_convex") \
                and not set_spec.startswith("ksparse"):
            f_ref = 0.0
    elif cfg.get("data"):
        ds = load_libsvm(cfg["data"])
        if cfg.get("standardize"):
            ds = standardize(ds)
    else:
        raise ConfigError("one of --synthetic or --data is required")

    name, _, params = problem.partition(":")
    try:
        if name == "lsq":
            obj = LeastSquares(ds.A, ds.b)
        elif name == "lp":
            obj = LpLoss(ds.A, ds.b, p=float(_parse_kv(params, "problem")["p"]))
        elif name == "logistic":
            obj = Logistic(ds.A, ds.b)
        else:
            raise ConfigError(f"unknown problem '{problem}'")
    except ContractViolation as e:
        raise ConfigError(str(e))

    try:
        feasible_set = set_from_config(set_spec, ds.n)
    except (ContractViolation, KeyError, ValueError) as e:
        raise ConfigError(f"bad set spec '{set_spec}': {e}")

    alg = cfg.get("alg")
    if alg in PROJECTION_ALGS and not feasible_set.supports_projection:
        raise ConfigError(f"projection unsupported for set '{feasible_set.kind}'")

    if cfg.get("x0", "zeros") == "center" and feasible_set.kind == "simplex":
        x0 = np.full(ds.n, 1.0 / ds.n)
    else:
        x0 = np.zeros(ds.n)
    return obj, feasible_set, x0, f_ref


def run_one_seed(cfg: dict, seed: int, out_dir: Path) -> dict:
    """Execute one (config, seed) run, stream the CSV, return the summary dict."""
    alg = cfg["alg"]
    obj, feasible_set, x0, f_ref = build_problem(cfg, seed)
    counters = OracleCounters()
    t0 = time.perf_counter()
    if alg in ("adcgs", "adcgs-ls1"):
        scfg = ScheduleConfig(
            variant=cfg["schedule"], alpha=float(cfg["alpha"]),
            theta=float(cfg["theta"]), N=int(cfg.get("N") or 0),
            eta1=cfg.get("eta1"), L0=cfg.get("L0"),
            eta1_mode="line_search" if alg == "adcgs-ls1" else "from_L0",
            max_inner=int(cfg["max_inner"]), max_outer=int(cfg["max_iter"]),
            outer_stop_gap=float(cfg["stop_gap"]),
            **({"beta": float(cfg["beta"])} if cfg.get("beta") is not None else {}))
        result = run(obj, feasible_set, scfg, x0, counters=counters,
                     f_ref=f_ref, seed=seed)
    else:
        bcfg = BaselineConfig(
            algorithm=alg.replace("-", "_"), L_override=cfg.get("L_override"),
            max_iter=int(cfg["max_iter"]), stop_gap=float(cfg["stop_gap"]),
            alpha=float(cfg["alpha"]), max_inner=int(cfg["max_inner"]), seed=seed)
        result = run_baseline(obj, feasible_set, bcfg, x0, counters=counters,
                              f_ref=f_ref)
    csv_path = out_dir / f"{alg}_seed{seed}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in result.trace:
            w.writerow(row.to_csv_row())
    last = result.trace[-1]
    summary = {
        "algorithm": alg,
        "seed": seed,
        "iterations": last.k,
        "foo_calls": counters.foo_calls,
        "lmo_calls": counters.lmo_calls,
        "projection_calls": counters.projection_calls,
        "final_f": last.f_value,
        "final_fw_gap": last.fw_gap,
        "final_primal_gap": last.primal_gap,
        "wall_seconds": time.perf_counter() - t0,
        "flags": {
            "any_hit_cap": bool(getattr(result, "any_hit_cap", False)),
            "no_global_L": bool(getattr(result, "no_global_L", False)),
            "diverged": bool(getattr(result, "diverged", False)),
            "stalled": bool(getattr(result, "stalled", False)),
        },
        "csv": str(csv_path),
    }
    (out_dir / f"{alg}_seed{seed}.json").write_text(json.dumps(summary, indent=1) + "\n")
    return summary


def run_experiment(cfg: dict) -> int:
    try:
        seeds = [int(s) for s in str(cfg["seeds"]).split(",")]
    except ValueError:
        print("error: bad --seeds list", file=sys.stderr)
        return 2
    out_dir = Path(cfg.get("out") or os.environ.get(OUTPUT_DIR_ENV) or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = int(cfg.get("workers", 1))
    try:
        if workers > 1 and len(seeds) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_one_seed, cfg, s, out_dir) for s in seeds]
                summaries = [f.result() for f in futures]
        else:
            summaries = [run_one_seed(cfg, s, out_dir) for s in seeds]
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ContractViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalAbort as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return 3
    print(json.dumps(summaries, indent=1))
    return 0


def summarize(csv_paths: list[str], out_path: str) -> int:
    """Per-iteration mean and std of primal_gap and fw_gap across seed runs."""
    runs = []
    for path in csv_paths:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != TRACE_COLUMNS:
                print(f"error: schema mismatch in {path}", file=sys.stderr)
                return 2
            rows = {}
            for row in reader:
                rec = dict(zip(header, row))
                rows[int(rec["k"])] = rec
            runs.append(rows)
    common = sorted(set.intersection(*(set(r) for r in runs)))
    out_rows = []
    for k in common:
        vals = {}
        for col in ("primal_gap", "fw_gap"):
            xs = [float(r[k][col]) for r in runs if r[k][col] != ""]
            if xs:
                vals[f"{col}_mean"] = float(np.mean(xs))
                vals[f"{col}_std"] = float(np.std(xs))
            else:
                vals[f"{col}_mean"] = ""
                vals[f"{col}_std"] = ""
        out_rows.append([k, vals["primal_gap_mean"], vals["primal_gap_std"],
                         vals["fw_gap_mean"], vals["fw_gap_std"]])
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "primal_gap_mean", "primal_gap_std",
                    "fw_gap_mean", "fw_gap_std"])
        for row in out_rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "summarize":
        sp = argparse.ArgumentParser(prog="adcgs-bench summarize")
        sp.add_argument("csvs", nargs="+")
        sp.add_argument("--out", required=True)
        sargs = sp.parse_args(argv[1:])
        return summarize(sargs.csvs, sargs.out)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if not cfg.get("alg"):
        print("error: --alg is required", file=sys.stderr)
        return 2
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
