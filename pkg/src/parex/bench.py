"""Work-precision benchmark harness: references, tolerance sweeps, CSV/SVG output.

Mirrors the usual experimental protocol for comparing stiff solvers: solve
each problem over a tolerance grid, time each solve (median of repeats,
after a warmup), and measure the final-time error against an internally
cross-checked reference solution.  Solves run strictly one at a time so
timings are not confounded; only the solver-internal pool is parallel.
"""

from __future__ import annotations

import csv
import statistics
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import SolverOptions, Tolerances
from .problems import NamedProblem, options_for
from .solvers import get_algorithm, solve, solve_fixed

__all__ = [
    "ReferenceDisagreement",
    "IOFailure",
    "ReferenceSolution",
    "WorkPrecisionPoint",
    "error_metric",
    "make_reference",
    "run_sweep",
    "emit",
    "read_points",
    "convergence_study",
]

CSV_COLUMNS = [
    "problem",
    "algorithm",
    "threaded",
    "reltol",
    "abstol",
    "error",
    "runtime_s",
    "nf",
    "njac",
    "nlu",
    "nsolve",
    "naccept",
    "nreject",
]

REFERENCE_RELTOL = 1e-12
REFERENCE_ABSTOL = 1e-14
REFERENCE_AGREEMENT = 1e-8


class ReferenceDisagreement(Exception):
    """The two reference integrations disagree beyond the cross-check gate."""


class IOFailure(Exception):
    """Emitting a benchmark artifact failed."""


@dataclass(frozen=True)
class ReferenceSolution:
    problem: str
    u_final: np.ndarray
    descriptor: str
    reltol: float = REFERENCE_RELTOL
    abstol: float = REFERENCE_ABSTOL


@dataclass
class WorkPrecisionPoint:
    problem: str
    algorithm: str
    threaded: bool
    reltol: float
    abstol: float
    error: float
    runtime_s: float
    stats: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return not np.isfinite(self.error)


def error_metric(u: np.ndarray, ref: np.ndarray, abstol: float) -> float:
    """Relative l2 (RMS) error, falling back to absolute for tiny reference components.

    Components with ``|ref_i| > abstol`` contribute ``(u_i - ref_i) / ref_i``;
    the rest contribute the plain difference, avoiding division by the
    near-zero species of problems like ROBER.
    """
    u = np.asarray(u, dtype=float)
    ref = np.asarray(ref, dtype=float)
    diff = u - ref
    scaled = np.where(np.abs(ref) > abstol, diff / np.where(ref == 0.0, 1.0, ref), diff)
    return float(np.sqrt(np.mean(scaled * scaled)))


def _reference_options(named: NamedProblem, family: str) -> SolverOptions:
    return options_for(named, family, threading=False)


def make_reference(named: NamedProblem, agreement: float = REFERENCE_AGREEMENT) -> ReferenceSolution:
    """Tight-tolerance reference, cross-checked between two method families.

    Runs the smoothed implicit-midpoint solver at reltol 1e-12 / abstol 1e-14
    and verifies against implicit Euler at the same tolerance; the two must
    agree to ``agreement`` in the relative-l2 metric or the harness aborts.
    """
    tol = Tolerances(abstol=REFERENCE_ABSTOL, reltol=REFERENCE_RELTOL)
    primary = solve(named.problem, "implicit_hairer_wanner", _reference_options(named, "implicit_hairer_wanner"), tol)
    if not primary.success:
        raise ReferenceDisagreement(
            f"reference solve (implicit_hairer_wanner) failed on {named.name}: {primary.retcode}"
        )
    check = solve(named.problem, "implicit_euler", _reference_options(named, "implicit_euler"), tol)
    if not check.success:
        raise ReferenceDisagreement(
            f"reference cross-check (implicit_euler) failed on {named.name}: {check.retcode}"
        )
    gap = error_metric(check.u_final, primary.u_final, REFERENCE_ABSTOL)
    if gap > agreement:
        raise ReferenceDisagreement(
            f"reference solutions for {named.name} disagree by {gap:.3e} (> {agreement:g})"
        )
    return ReferenceSolution(
        problem=named.name,
        u_final=primary.u_final,
        descriptor=f"implicit_hairer_wanner@reltol={REFERENCE_RELTOL:g} cross-checked vs implicit_euler",
    )


def run_sweep(
    named: NamedProblem,
    algorithms,
    tol_grid=None,
    repeats: int = 5,
    threaded: bool = False,
    num_workers: Optional[int] = None,
    reference: Optional[ReferenceSolution] = None,
) -> list[WorkPrecisionPoint]:
    """Timed tolerance sweep producing one work-precision point per (alg, tol).

    Each point is the median of ``repeats`` timed solves after one warmup.
    Failed solves become points with error NaN rather than aborting the sweep.
    """
    if reference is None:
        reference = make_reference(named)
    points = []
    for alg_name in algorithms:
        alg = get_algorithm(alg_name)
        for reltol, abstol in tol_grid or named.default_tol_grid:
            opts = options_for(named, alg.name, threading=threaded, num_workers=num_workers)
            tol = Tolerances(abstol=abstol, reltol=reltol)
            sol = solve(named.problem, alg, opts, tol)  # warmup
            runtimes = []
            for _ in range(max(1, repeats)):
                start = time.perf_counter()
                sol = solve(named.problem, alg, opts, tol)
                runtimes.append(time.perf_counter() - start)
            err = (
                error_metric(sol.u_final, reference.u_final, abstol)
                if sol.success
                else float("nan")
            )
            points.append(
                WorkPrecisionPoint(
                    problem=named.name,
                    algorithm=alg.name,
                    threaded=threaded,
                    reltol=reltol,
                    abstol=abstol,
                    error=err,
                    runtime_s=statistics.median(runtimes),
                    stats=sol.stats.as_dict(),
                )
            )
    _warn_on_nonmonotone(points)
    return points


def _warn_on_nonmonotone(points) -> None:
    by_alg: dict = {}
    for pt in points:
        by_alg.setdefault((pt.algorithm, pt.threaded), []).append(pt)
    for key, pts in by_alg.items():
        pts = sorted(pts, key=lambda p: -p.reltol)
        for prev, cur in zip(pts, pts[1:]):
            if np.isfinite(prev.error) and np.isfinite(cur.error) and cur.error > prev.error:
                warnings.warn(
                    f"{key[0]}: error grew from {prev.error:.3e} to {cur.error:.3e} "
                    f"when tightening reltol {prev.reltol:g} -> {cur.reltol:g}",
                    stacklevel=2,
                )


def emit(points, fmt: str, path: str) -> str:
    """Write the sweep as CSV (bit-exact schema) or an SVG work-precision diagram."""
    if not points:
        raise IOFailure("no work-precision points to emit")
    try:
        if fmt == "csv":
            _emit_csv(points, path)
        elif fmt == "svg":
            _emit_svg(points, path)
        else:
            raise IOFailure(f"unknown output format {fmt!r}")
    except OSError as exc:
        raise IOFailure(f"could not write {path}: {exc}") from exc
    return path


def _emit_csv(points, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for pt in points:
            writer.writerow(
                [
                    pt.problem,
                    pt.algorithm,
                    "true" if pt.threaded else "false",
                    repr(pt.reltol),
                    repr(pt.abstol),
                    repr(pt.error),
                    repr(pt.runtime_s),
                    pt.stats.get("nf", 0),
                    pt.stats.get("njac", 0),
                    pt.stats.get("nlu", 0),
                    pt.stats.get("nsolve", 0),
                    pt.stats.get("naccept", 0),
                    pt.stats.get("nreject", 0),
                ]
            )


def read_points(path: str) -> list[WorkPrecisionPoint]:
    """Parse an emitted CSV back into points (exact round trip)."""
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise IOFailure(f"unexpected CSV header in {path}: {reader.fieldnames}")
        for row in reader:
            points.append(
                WorkPrecisionPoint(
                    problem=row["problem"],
                    algorithm=row["algorithm"],
                    threaded=row["threaded"] == "true",
                    reltol=float(row["reltol"]),
                    abstol=float(row["abstol"]),
                    error=float(row["error"]),
                    runtime_s=float(row["runtime_s"]),
                    stats={
                        key: int(row[name])
                        for key, name in [
                            ("nf", "nf"),
                            ("njac", "njac"),
                            ("nlu", "nlu"),
                            ("nsolve", "nsolve"),
                            ("naccept", "naccept"),
                            ("nreject", "nreject"),
                        ]
                    },
                )
            )
    return points


def _emit_svg(points, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    by_series: dict = {}
    for pt in points:
        label = pt.algorithm + (" (threaded)" if pt.threaded else "")
        by_series.setdefault(label, []).append(pt)
    plotted = False
    for label, pts in sorted(by_series.items()):
        pts = [p for p in pts if np.isfinite(p.error) and p.error > 0]
        pts.sort(key=lambda p: p.error)
        if not pts:
            continue
        ax.plot([p.error for p in pts], [p.runtime_s for p in pts], "o-", label=label)
        plotted = True
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("final-time error (relative l2)")
    ax.set_ylabel("runtime [s]")
    ax.set_title(f"work-precision: {points[0].problem}")
    ax.grid(True, which="both", alpha=0.3)
    if plotted:
        ax.legend()
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def convergence_study(problem, alg, orders, dts, reference_final) -> dict[int, float]:
    """Observed fixed-step convergence slope per extrapolation order.

    Solves with each fixed dt, measures the absolute l2 final-time error
    against ``reference_final``, and fits a log-log slope over the dts whose
    errors sit above rounding noise (1e-13); at least two usable points are
    required per order.
    """
    reference_final = np.asarray(reference_final, dtype=float)
    slopes = {}
    for order in orders:
        errs = []
        for dt in dts:
            sol = solve_fixed(problem, alg, order, dt)
            errs.append(float(np.linalg.norm(sol.u_final - reference_final)))
        pts = [(dt, e) for dt, e in zip(dts, errs) if e > 1e-13]
        if len(pts) < 2:
            raise ValueError(
                f"order {order}: fewer than two dt points above rounding noise; errors={errs}"
            )
        log_dt = np.log([p[0] for p in pts])
        log_err = np.log([p[1] for p in pts])
        slopes[order] = float(np.polyfit(log_dt, log_err, 1)[0])
    return slopes
