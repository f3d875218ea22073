"""Benchmark command line: ``parex bench | reference | convergence``.

A plain key=value config file can override defaults for any flag; explicit
command-line flags win over the config file.  ``PAREX_THREADS`` is the
worker-count fallback when ``--threads`` is not given.

Exit codes: 0 on a clean run, 2 when any sweep point failed, 1 on
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import convergence_study, emit, make_reference, run_sweep
from .core import ConfigError, ODEProblem
from .problems import get_problem
from .solvers import ALGORITHMS, IMPLICIT_FAMILIES

__all__ = ["main"]


def _load_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _resolve_threads(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("PAREX_THREADS")
    return int(env) if env else 0


def _default_algorithms(named) -> list[str]:
    tuned = [name for name in ALGORITHMS if name in named.tuned_orders]
    return tuned or list(IMPLICIT_FAMILIES)


def _cmd_bench(args, config) -> int:
    named = get_problem(args.problem or config.get("problem", "rober"))
    algs_raw = args.algs or config.get("algs")
    algs = algs_raw.split(",") if algs_raw else _default_algorithms(named)
    repeats = int(args.repeats or config.get("repeats", 5))
    threads = _resolve_threads(args.threads if args.threads is not None else config.get("threads"))
    out = args.out or config.get("out", named.name)

    reference = make_reference(named)
    points = run_sweep(
        named,
        algs,
        repeats=repeats,
        threaded=threads > 1,
        num_workers=threads if threads > 1 else None,
        reference=reference,
    )
    csv_path = emit(points, "csv", out + ".csv")
    svg_path = emit(points, "svg", out + ".svg")
    failed = [p for p in points if p.failed]
    for pt in points:
        status = "FAIL" if pt.failed else f"error={pt.error:.3e} runtime={pt.runtime_s:.4f}s"
        print(f"{pt.problem} {pt.algorithm} reltol={pt.reltol:g}: {status}")
    print(f"wrote {csv_path} and {svg_path}")
    return 2 if failed else 0


def _cmd_reference(args, config) -> int:
    named = get_problem(args.problem or config.get("problem", "rober"))
    ref = make_reference(named)
    payload = {
        "problem": ref.problem,
        "generator": ref.descriptor,
        "reltol": ref.reltol,
        "abstol": ref.abstol,
        "t_final": named.problem.tspan[1],
        "u_final": ref.u_final.tolist(),
    }
    out = args.out or config.get("out")
    if out:
        with open(out, "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"wrote {out}")
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def _decay_problem() -> ODEProblem:
    # scalar u' = -u with exact solution exp(-t); the convergence oracle
    return ODEProblem(
        rhs=lambda u, p, t: -u,
        u0=np.array([1.0]),
        tspan=(0.0, 1.0),
        jacobian=lambda u, p, t: np.array([[-1.0]]),
    )


def _cmd_convergence(args, config) -> int:
    alg = args.alg or config.get("alg", "implicit_euler")
    orders = [int(s) for s in (args.orders or config.get("orders", "1,2,3,4")).split(",")]
    dts = [float(s) for s in (args.dts or config.get("dts", "0.2,0.1,0.05,0.025")).split(",")]
    problem = _decay_problem()
    slopes = convergence_study(problem, alg, orders, dts, [np.exp(-1.0)])
    print(f"fixed-step convergence of {alg} on u' = -u, dts={dts}")
    for order in orders:
        print(f"  rows={order}: observed slope {slopes[order]:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="work-precision sweep with CSV and SVG output")
    bench.add_argument("--problem", help="benchmark problem name")
    bench.add_argument("--algs", help="comma-separated algorithm names")
    bench.add_argument("--threads", type=int, help="worker count; 0 or 1 disables threading")
    bench.add_argument("--repeats", type=int, help="timed repeats per point (default 5)")
    bench.add_argument("--out", help="output path prefix (.csv and .svg appended)")
    bench.add_argument("--config", help="key=value config file")

    ref = sub.add_parser("reference", help="generate the cross-checked reference solution")
    ref.add_argument("--problem", help="benchmark problem name")
    ref.add_argument("--out", help="JSON output path (stdout if omitted)")
    ref.add_argument("--config", help="key=value config file")

    conv = sub.add_parser("convergence", help="fixed-step order study on u' = -u")
    conv.add_argument("--alg", help="algorithm name")
    conv.add_argument("--orders", help="comma-separated row counts")
    conv.add_argument("--dts", help="comma-separated step sizes")
    conv.add_argument("--config", help="key=value config file")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config) if getattr(args, "config", None) else {}
        if args.command == "bench":
            return _cmd_bench(args, config)
        if args.command == "reference":
            return _cmd_reference(args, config)
        return _cmd_convergence(args, config)
    except (ConfigError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
