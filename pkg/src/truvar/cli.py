"""Command-line entry point: simulate paths, compute TV^c, evaluate bounds,
run experiments, render reports.

Exit codes: 0 success, 1 usage/input error, 2 numeric or check failure
(invariant violation in `tv --check`, FAIL verdict in `experiment`).
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import math
import os
import sys

import numpy as np

from . import __version__, bounds, config, harness
from . import jump_measures as jm
from .path import PathError, read_path_csv, write_path_csv
from .tv import (
    TvError,
    level_crossing_skeleton,
    minimal_envelope,
    total_variation,
    truncated_variation,
    tv_oracle_dp,
    tv_profile,
)

USAGE_ERROR = 1
CHECK_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _echo_config(name: str, resolved: dict) -> None:
    # every run prints its full resolved configuration before executing
    print(f"# {name} config: {json.dumps(resolved, sort_keys=True, default=str)}", file=sys.stderr)


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w")


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise config.ConfigError(f"expected a comma-separated list of numbers, got {text!r}")


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return f"{x:.17g}"


# --- subcommands ----------------------------------------------------------------

def _cmd_simulate(args) -> int:
    source, seed = config.simulation_from_file(args.spec, args.seed)
    _echo_config("simulate", {"spec": args.spec, "seed": seed, "process": source.describe(),
                              "out": args.out, "replicates": args.replicates})
    if args.replicates == 1 and not args.out_dir:
        path = source.generate(seed)
        stream = _open_out(args.out)
        write_path_csv(path, stream)
        if stream is not sys.stdout:
            stream.close()
        return 0
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    for i in range(args.replicates):
        path = source.generate(harness.splitmix64(seed, i))
        write_path_csv(path, os.path.join(out_dir, f"path_{i:05d}.csv"))
    print(f"wrote {args.replicates} paths to {out_dir}", file=sys.stderr)
    return 0


def _check_path_invariants(path, levels) -> list:
    """Invariant battery for `tv --check`; returns failure messages."""
    failures = []
    vals = path.values
    for c in levels:
        tv = truncated_variation(path, c).value
        if c > 0:
            env = minimal_envelope(path, c)
            if abs(total_variation(env) - tv) > 1e-9 * (1.0 + tv):
                failures.append(f"envelope variation != TV^c at c={c:g}")
            if np.max(np.abs(env.values - vals)) > c / 2 + 1e-12:
                failures.append(f"envelope leaves the c/2 tube at c={c:g}")
            sk = level_crossing_skeleton(path, c)
            if tv > total_variation(sk.skel) + 1e-12:
                failures.append(f"TV^c exceeds skeleton variation at c={c:g}")
            if sk.tube_violation(path) > 1e-12:
                failures.append(f"skeleton leaves the c/2 tube at c={c:g} "
                                f"(overshoot {sk.tube_violation(path):.3g})")
        rev = truncated_variation(vals[::-1], c).value
        if abs(rev - tv) > 1e-9 * (1.0 + tv):
            failures.append(f"time-reversal invariance broken at c={c:g}")
        if vals.size <= 2000:
            dp = tv_oracle_dp(vals, c).value
            if abs(dp - tv) > 1e-9 * (1.0 + dp):
                failures.append(f"streaming/dp oracle mismatch at c={c:g}: {tv} vs {dp}")
    prof = tv_profile(path, sorted(set(levels)) if all(c > 0 for c in levels) else levels)
    if np.any(np.diff(prof) > 1e-12):
        failures.append("profile not nonincreasing in c")
    return failures


def _cmd_tv(args) -> int:
    path = read_path_csv(args.input)
    levels = _floats(args.c)
    if any(c < 0 for c in levels):
        raise TvError("truncation levels must be >= 0")
    _echo_config("tv", {"input": args.input, "c": levels, "check": args.check,
                        "out": args.out})
    stream = _open_out(args.out)
    stream.write("c,value,algorithm\n")
    if len(levels) > 1:
        values = tv_profile(path, levels)
        for c, v in zip(levels, values):
            stream.write(f"{_fmt(c)},{_fmt(v)},streaming\n")
    else:
        res = truncated_variation(path, levels[0])
        stream.write(f"{_fmt(res.c)},{_fmt(res.value)},{res.algorithm}\n")
    if stream is not sys.stdout:
        stream.close()
    if args.check:
        failures = _check_path_invariants(path, levels)
        for msg in failures:
            print(f"CHECK FAIL: {msg}", file=sys.stderr)
        if failures:
            return CHECK_FAILURE
        print("all invariant checks passed", file=sys.stderr)
    return 0


def _constants_table(kind: str, inputs: dict, chain, corollary) -> dict:
    return {
        "kind": kind,
        "inputs": inputs,
        "chain_constants": dataclasses.asdict(chain),
        "corollary_constants": dataclasses.asdict(corollary),
    }


def _cmd_bound_fbm(args) -> int:
    u = _floats(args.u)
    _echo_config("bound fbm", {"H": args.H, "S": args.S, "c": args.c, "u": u,
                               "out": args.out, "constants_out": args.constants_out})
    curve = bounds.fbm_tail_bound(args.H, args.S, args.c, u)
    stream = _open_out(args.out)
    stream.write("u,threshold,prob_bound\n")
    for j in range(curve.u.size):
        stream.write(f"{_fmt(curve.u[j])},{_fmt(curve.threshold[j])},{_fmt(curve.prob_bound[j])}\n")
    if stream is not sys.stdout:
        stream.close()
    if args.constants_out:
        table = _constants_table(
            "fbm-tail", {"H": args.H, "S": args.S, "c": args.c, "p": 2.0, "q": args.H,
                         "increment_scale": bounds.GAUSSIAN_UNIT_SCALE},
            curve.chain, curve.corollary,
        )
        table["A_H"], table["B_H"], table["C_H"] = curve.A_H, curve.B_H, curve.C_H
        with open(args.constants_out, "w") as fh:
            json.dump(table, fh, sort_keys=True, indent=1)
    return 0


def _cmd_bound_bm(args) -> int:
    lams = _floats(args.lambdas)
    _echo_config("bound bm", {"S": args.S, "c": args.c, "lambdas": lams, "out": args.out})
    stream = _open_out(args.out)
    stream.write("lambda,bound,log_bound\n")
    for lam in lams:
        b = bounds.bm_mgf_bound(args.S, args.c, lam)
        stream.write(f"{_fmt(lam)},{_fmt(b.value)},{_fmt(b.log_value)}\n")
    if stream is not sys.stdout:
        stream.close()
    if args.constants_out:
        spec, chain, cor = bounds.optimized_constants(2.0, 0.5, bounds.GAUSSIAN_UNIT_SCALE)
        with open(args.constants_out, "w") as fh:
            json.dump(_constants_table("bm-mgf", {"S": args.S, "c": args.c, "p": 2.0, "q": 0.5,
                                                  "increment_scale": bounds.GAUSSIAN_UNIT_SCALE},
                                       chain, cor), fh, sort_keys=True, indent=1)
    return 0


def _cmd_bound_diffusion(args) -> int:
    lams = _floats(args.lambdas)
    _echo_config("bound diffusion", {"R": args.R, "C": args.C, "D": args.D, "x0": args.x0,
                                     "S": args.S, "c": args.c, "lambdas": lams, "out": args.out})
    stream = _open_out(args.out)
    stream.write("lambda,bound,log_bound\n")
    for lam in lams:
        params = bounds.diffusion_bound_params(args.R, args.C, args.D, args.x0, args.S, args.c, lam)
        b = bounds.diffusion_mgf_bound(params)
        stream.write(f"{_fmt(lam)},{_fmt(b.value)},{_fmt(b.log_value)}\n")
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_bound_levy(args) -> int:
    table = {"family": args.family}
    if args.family == "tempered-stable":
        nu = jm.TemperedStable(args.alpha_p, args.alpha_n, args.lam_p, args.lam_n,
                               args.c_p, args.c_n)
    elif args.family == "meixner":
        nu = jm.Meixner(args.delta, args.eta, args.beta)
    else:  # none
        nu = jm.NoJumps()
    table.update({k: v for k, v in vars(args).items()
                  if k in ("alpha_p", "alpha_n", "lam_p", "lam_n", "c_p", "c_n",
                           "delta", "eta", "beta") and v is not None})
    _echo_config("bound levy", {**table, "alpha": args.alpha})
    chk = bounds.levy_exp_moment_check(nu, args.alpha)
    out = {
        "alpha": chk.alpha,
        "finite": chk.finite,
        "integral": chk.integral if math.isfinite(chk.integral) else "inf",
        "threshold": chk.threshold if math.isfinite(chk.threshold) else "inf",
    }
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_experiment(args) -> int:
    conf = config.experiment_from_file(args.config)
    if args.from_paths:
        files = sorted(glob.glob(os.path.join(args.from_paths, "*.csv")))
        if not files:
            raise config.ConfigError(f"no CSV paths found in {args.from_paths}")
        paths = tuple(read_path_csv(f) for f in files)
        conf = dataclasses.replace(conf, source=harness.StoredPaths(paths),
                                   replicates=len(paths))
    _echo_config("experiment", conf.describe())
    report = harness.run_replicates(conf, workers=args.workers)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.plot_csv:
        _write_plot_csv(report, args.plot_csv)
    verdicts = report.results["verdicts"]
    for v in verdicts:
        status = "PASS" if v["passed"] else "FAIL"
        print(f"{status} {v['name']} (margin {v['margin']:.6g})", file=sys.stderr)
    return 0 if report.passed else CHECK_FAILURE


def _write_plot_csv(report: harness.ExperimentReport, out_path: str) -> None:
    with open(out_path, "w") as fh:
        fh.write("x,estimate,ci_lo,ci_hi,bound\n")
        for row in report.plot_rows():
            fh.write(",".join(_fmt(row[k]) for k in ("x", "estimate", "ci_lo", "ci_hi", "bound")) + "\n")


def _cmd_report(args) -> int:
    _echo_config("report", {"input": args.input, "csv": args.csv})
    try:
        with open(args.input) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise config.ConfigError(f"report file not found: {args.input}")
    except json.JSONDecodeError as exc:
        raise config.ConfigError(f"malformed report JSON: {exc}")
    report = harness.ExperimentReport(config=data.get("config", {}),
                                      results=data.get("results", {}),
                                      meta=data.get("meta", {}))
    _write_plot_csv(report, args.csv)
    return 0


# --- parser wiring ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="truvar",
                     description="Truncated variation of sampled paths: simulation, "
                                 "exact computation, bounds, Monte Carlo verification.")
    parser.add_argument("--version", action="version", version=f"truvar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a path from a TOML process spec")
    p.add_argument("--spec", required=True, help="TOML file with one [fbm]/[diffusion]/[levy] section")
    p.add_argument("--seed", type=int, default=None, help="overrides the seed in the spec file")
    p.add_argument("--out", default="-", help="output CSV (default stdout)")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--out-dir", default=None, help="directory for multi-replicate output")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("tv", help="truncated variation of a path CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--c", required=True, help="level or comma-separated increasing levels")
    p.add_argument("--out", default="-")
    p.add_argument("--check", action="store_true",
                   help="run invariant checks; nonzero exit on violation")
    p.set_defaults(fn=_cmd_tv)

    p = sub.add_parser("bound", help="evaluate bound curves and constants tables")
    bsub = p.add_subparsers(dest="bound_kind", required=True)

    b = bsub.add_parser("fbm", help="fractional Brownian tail bound curve")
    b.add_argument("--H", type=float, required=True)
    b.add_argument("--S", type=float, required=True)
    b.add_argument("--c", type=float, required=True)
    b.add_argument("--u", required=True, help="comma-separated u grid")
    b.add_argument("--out", default="-")
    b.add_argument("--constants-out", default=None, help="write the constants table JSON here")
    b.set_defaults(fn=_cmd_bound_fbm)

    b = bsub.add_parser("bm", help="Brownian capped-MGF bound")
    b.add_argument("--S", type=float, required=True)
    b.add_argument("--c", type=float, required=True)
    b.add_argument("--lambdas", required=True, help="comma-separated lambda grid")
    b.add_argument("--out", default="-")
    b.add_argument("--constants-out", default=None)
    b.set_defaults(fn=_cmd_bound_bm)

    b = bsub.add_parser("diffusion", help="diffusion MGF bound")
    b.add_argument("--R", type=float, required=True)
    b.add_argument("--C", type=float, required=True)
    b.add_argument("--D", type=float, required=True)
    b.add_argument("--x0", type=float, default=0.0)
    b.add_argument("--S", type=float, required=True)
    b.add_argument("--c", type=float, required=True)
    b.add_argument("--lambdas", required=True)
    b.add_argument("--out", default="-")
    b.set_defaults(fn=_cmd_bound_diffusion)

    b = bsub.add_parser("levy", help="exponential-moment finiteness check")
    b.add_argument("--family", choices=("tempered-stable", "meixner", "none"), required=True)
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--alpha-p", dest="alpha_p", type=float)
    b.add_argument("--alpha-n", dest="alpha_n", type=float)
    b.add_argument("--lam-p", dest="lam_p", type=float)
    b.add_argument("--lam-n", dest="lam_n", type=float)
    b.add_argument("--c-p", dest="c_p", type=float)
    b.add_argument("--c-n", dest="c_n", type=float)
    b.add_argument("--delta", type=float)
    b.add_argument("--eta", type=float)
    b.add_argument("--beta", type=float)
    b.set_defaults(fn=_cmd_bound_levy)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="report JSON file (default stdout)")
    p.add_argument("--plot-csv", default=None, help="write plot-ready CSV here")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default TRUVAR_THREADS or machine parallelism)")
    p.add_argument("--from-paths", default=None,
                   help="directory of path CSVs to use instead of simulating")
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("report", help="render a report JSON to plot-ready CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--csv", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (config.ConfigError, PathError, TvError, harness.HarnessError,
            bounds.BoundsError, jm.JumpMeasureError, FileNotFoundError) as exc:
        print(f"truvar: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
