"""Acceptance suite: nine end-to-end gates, each printing one pass/fail line.

Run with ``pytest -v tests/test_acceptance.py`` (add ``-s`` to see the
summary lines for passing gates as well).
"""

import os
import statistics
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from parex import cli
from parex.bench import CSV_COLUMNS, convergence_study, error_metric
from parex.controller import optimal_step, select_order
from parex.core import ODEProblem, SolverOptions, Tolerances
from parex.extrapolate import (
    SubdividingSequence,
    aitken_neville,
    barycentric_extrapolate,
    build_barycentric_tableau,
    sequence_values,
)
from parex.problems import options_for
from parex.scheduler import build_schedule
from parex.solvers import IMPLICIT_FAMILIES, solve


def _report(num, name, ok, detail):
    line = f"[acceptance {num}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _decay(tf=2.0):
    return ODEProblem(
        rhs=lambda u, p, t: -u,
        u0=np.array([1.0]),
        tspan=(0.0, tf),
        jacobian=lambda u, p, t: np.array([[-1.0]]),
    )


def test_criterion_1_extrapolation_oracles():
    """Barycentric and Neville extrapolation agree with each other and with a
    dense Vandermonde oracle on polynomial data."""
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    worst_pair, worst_dense = 0.0, 0.0
    for power in (1, 2):
        for multiple in (1, 2, 4):
            seq = SubdividingSequence("harmonic", multiple)
            n_values = sequence_values(seq, 10)
            tableau = build_barycentric_tableau(seq, power, 10)
            for k in range(1, 11):
                column = rng.normal(size=(k, 3))
                bary = barycentric_extrapolate(tableau, k, column)
                nev, _ = aitken_neville(list(column), n_values, power)
                worst_pair = max(worst_pair, np.abs(bary - nev).max() / max(np.abs(nev).max(), 1.0))

                # polynomial data in x = n^-power: the h -> 0 limit is the
                # constant coefficient, recoverable from a dense linear solve
                coeffs = rng.normal(size=k)
                x = np.array([n ** (-float(power)) for n in n_values[:k]])
                data = np.polyval(coeffs[::-1], x)
                dense = np.linalg.solve(np.vander(x, k, increasing=True), data)[0]
                bary_val = barycentric_extrapolate(tableau, k, data.reshape(k, 1))[0]
                scale = max(abs(dense), 1.0)
                worst_dense = max(worst_dense, abs(bary_val - dense) / scale, abs(coeffs[0] - dense) / scale)
    elapsed = time.perf_counter() - start
    ok = worst_pair < 1e-11 and worst_dense < 1e-10 and elapsed < 1.0
    _report(1, "extrapolation oracle equivalence", ok,
            f"bary-vs-neville {worst_pair:.2e}, vs dense oracle {worst_dense:.2e}, {elapsed:.2f}s")


def test_criterion_2_order_increment_law():
    """Fixed-step convergence on u' = -u: each added T-table row raises the
    observed order by ~2 (power-2 families) or ~1 (implicit Euler families).

    The smoothed implicit-midpoint family uses a coarser dt ladder because at
    four rows its true error falls below float64 rounding for dt <= 0.2.
    """
    start = time.perf_counter()
    problem = _decay(tf=2.0)
    reference = [np.exp(-2.0)]
    base_dts = [0.4, 0.2, 0.1, 0.05, 0.025]
    coarse_dts = [1.0, 0.5, 0.25, 0.2, 0.1]
    cases = [
        ("midpoint_deuflhard", base_dts, 2.0),
        ("midpoint_hairer_wanner", base_dts, 2.0),
        ("implicit_euler", base_dts, 1.0),
        ("implicit_euler_barycentric", base_dts, 1.0),
        ("implicit_hairer_wanner", coarse_dts, 2.0),
    ]
    summary, ok = [], True
    for alg, dts, expected in cases:
        slopes = convergence_study(problem, alg, [1, 2, 3, 4], dts, reference)
        increments = [slopes[k + 1] - slopes[k] for k in (1, 2, 3)]
        good = all(abs(inc - expected) <= 0.3 for inc in increments)
        ok = ok and good
        summary.append(f"{alg} +[{', '.join(f'{i:.2f}' for i in increments)}]")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    _report(2, "order-increment law", ok, "; ".join(summary) + f", {elapsed:.2f}s")


def test_criterion_3_stiff_accuracy(problems, references):
    """All implicit families solve the four stiff benchmarks across their
    tolerance grids with final error within 100x reltol of the reference."""
    start = time.perf_counter()
    worst_ratio, ok = 0.0, True
    for name in ("rober", "orego", "hires", "pollu"):
        named = problems(name)
        ref = references(name)
        for family in IMPLICIT_FAMILIES:
            for reltol, abstol in named.default_tol_grid:
                sol = solve(
                    named.problem,
                    family,
                    options_for(named, family, threading=False),
                    Tolerances(abstol=abstol, reltol=reltol),
                )
                if not sol.success:
                    ok = False
                    continue
                ratio = error_metric(sol.u_final, ref.u_final, abstol) / reltol
                worst_ratio = max(worst_ratio, ratio)
    elapsed = time.perf_counter() - start
    ok = ok and worst_ratio <= 100.0 and elapsed < 120.0
    _report(3, "stiff accuracy", ok, f"worst error / reltol = {worst_ratio:.1f} (gate 100), {elapsed:.1f}s")


def test_criterion_4_determinism_under_threading(problems):
    """Threaded and serial solves are bitwise identical with equal counters."""
    start = time.perf_counter()
    cases = [("pollu", "implicit_euler_barycentric"), ("linear_100", "midpoint_hairer_wanner")]
    checked, ok = 0, True
    for pname, family in cases:
        named = problems(pname)
        for reltol, abstol in named.default_tol_grid:
            tol = Tolerances(abstol=abstol, reltol=reltol)
            serial = solve(named.problem, family, options_for(named, family, threading=False), tol)
            for workers in (2, 4, 8):
                threaded = solve(
                    named.problem,
                    family,
                    options_for(named, family, threading=True, num_workers=workers),
                    tol,
                )
                same = (
                    np.array_equal(serial.ts, threaded.ts)
                    and np.array_equal(serial.us, threaded.us)
                    and serial.stats.nf == threaded.stats.nf
                    and serial.stats.nlu == threaded.stats.nlu
                )
                ok = ok and same
                checked += 1
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    _report(4, "determinism under threading", ok, f"{checked} threaded/serial pairs bitwise identical, {elapsed:.1f}s")


def test_criterion_5_load_balance():
    """Harmonic schedules: even row counts split into exactly equal work,
    odd row counts leave a spread bounded by n_max."""
    start = time.perf_counter()
    ok = True
    for multiple in (1, 2, 4):
        values = sequence_values(SubdividingSequence("harmonic", multiple), 13)
        for workers in range(1, 9):
            for k in (4, 6, 8, 10, 12):
                sched = build_schedule(values, k, workers)
                ok = ok and len(set(sched.work_units)) == 1
            for k in (5, 7, 9, 11, 13):
                sched = build_schedule(values, k, workers)
                spread = max(sched.work_units) - min(sched.work_units)
                ok = ok and spread <= values[k - 1]
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 1.0
    _report(5, "static load balance", ok, f"even k exact, odd k spread <= n_max, {elapsed:.2f}s")


@pytest.mark.skipif(
    (os.cpu_count() or 1) < 4,
    reason="threading speedup gate is machine-dependent and waived on hosts "
    "with fewer than 4 cores (documented skip)",
)
def test_criterion_6_threading_benefit(problems):
    """On the 100-ODE ensemble, 4 workers beat serial by >= 1.25x; on the
    3-ODE ROBER the harness records (without failing) if threading loses."""
    start = time.perf_counter()
    named = problems("linear_100")
    tol = Tolerances(abstol=1e-12, reltol=1e-9)
    serial_opts = options_for(named, "midpoint_hairer_wanner", threading=False)
    threaded_opts = options_for(named, "midpoint_hairer_wanner", threading=True, num_workers=4)
    assert serial_opts.max_order >= 10

    def median_runtime(opts):
        times = []
        solve(named.problem, "midpoint_hairer_wanner", opts, tol)  # warmup
        for _ in range(5):
            t0 = time.perf_counter()
            solve(named.problem, "midpoint_hairer_wanner", opts, tol)
            times.append(time.perf_counter() - t0)
        return statistics.median(times)

    serial_t = median_runtime(serial_opts)
    threaded_t = median_runtime(threaded_opts)

    rober = problems("rober")
    rtol = Tolerances(abstol=1e-11, reltol=1e-8)
    t0 = time.perf_counter()
    solve(rober.problem, "implicit_euler", options_for(rober, "implicit_euler", threading=False), rtol)
    rober_serial_t = time.perf_counter() - t0
    t0 = time.perf_counter()
    solve(
        rober.problem,
        "implicit_euler",
        options_for(rober, "implicit_euler", threading=True, num_workers=4),
        rtol,
    )
    rober_threaded_t = time.perf_counter() - t0
    small_system_note = (
        "threading slower on 3-ODE rober (expected)"
        if rober_threaded_t > rober_serial_t
        else "threading not slower on rober"
    )

    elapsed = time.perf_counter() - start
    ok = threaded_t <= 0.8 * serial_t
    _report(6, "threading benefit", ok,
            f"linear_100 threaded {threaded_t:.3f}s vs serial {serial_t:.3f}s; "
            f"{small_system_note}; {elapsed:.1f}s")


def test_criterion_7_conservation(problems):
    """ROBER mass conservation: the species sum stays within 10x reltol of 1
    at every accepted point for all implicit families."""
    start = time.perf_counter()
    named = problems("rober")
    reltol = 1e-8
    worst, ok = 0.0, True
    for family in IMPLICIT_FAMILIES:
        sol = solve(
            named.problem,
            family,
            options_for(named, family, threading=False),
            Tolerances(abstol=1e-11, reltol=reltol),
        )
        ok = ok and sol.success
        drift = np.abs(sol.us.sum(axis=1) - 1.0).max()
        worst = max(worst, drift)
    elapsed = time.perf_counter() - start
    ok = ok and worst <= 10.0 * reltol and elapsed < 10.0
    _report(7, "mass conservation", ok, f"max |sum - 1| = {worst:.2e} (gate {10 * reltol:.0e}), {elapsed:.1f}s")


def test_criterion_8_controller_contracts():
    """Random-input contracts: clamping, monotonicity in the error, the fixed
    point at err = safety^(2k+1), and window containment of the next order."""
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    ok = True
    q_min, q_max, safety = 0.2, 10.0, 0.9
    for _ in range(2000):
        h = 10.0 ** rng.uniform(-9, 2)
        err = 10.0 ** rng.uniform(-12, 6)
        k = int(rng.integers(1, 13))
        power = int(rng.choice([1, 2]))
        h_new = optimal_step(h, err, k, safety, q_min, q_max, power)
        ok = ok and h / q_max <= h_new <= h / q_min
        ok = ok and optimal_step(h, 4.0 * err, k, safety, q_min, q_max, power) <= h_new * (1 + 1e-12)
        fixed = optimal_step(h, safety ** (2 * k + 1), k, safety, q_min, q_max, 2)
        ok = ok and abs(fixed - h) <= 1e-12 * h
    for _ in range(2000):
        k = int(rng.integers(3, 11))
        min_order, max_order = 2, 12
        candidates = [m for m in (k - 1, k, k + 1) if min_order <= m <= max_order]
        errs = {m: float(10.0 ** rng.uniform(-4, 1)) for m in candidates}
        hs = {m: float(10.0 ** rng.uniform(-6, 1)) for m in candidates}
        works = {m: float(rng.uniform(1.0, 100.0)) for m in candidates}
        decision = select_order(errs, hs, works, k, min_order, max_order)
        if decision.accept:
            ok = ok and errs[k] < 1.0 and decision.next_order in candidates
        else:
            ok = ok and not errs[k] < 1.0 and decision.next_order == k
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 1.0
    _report(8, "controller contracts", ok, f"4000 random cases, {elapsed:.2f}s")


def test_criterion_9_benchmark_artifact_integrity(tmp_path):
    """`parex bench` on HIRES emits a schema-exact CSV and well-formed SVG,
    and a re-run reproduces the error column exactly."""
    start = time.perf_counter()
    outs = [str(tmp_path / f"hires_{i}") for i in (1, 2)]
    codes = [cli.main(["bench", "--problem", "hires", "--repeats", "1", "--out", out]) for out in outs]

    def error_column(path):
        with open(path) as fh:
            header = fh.readline().rstrip("\n")
            rows = [line.rstrip("\n").split(",") for line in fh]
        return header, [row[CSV_COLUMNS.index("error")] for row in rows]

    header1, errors1 = error_column(outs[0] + ".csv")
    header2, errors2 = error_column(outs[1] + ".csv")
    svg_ok = all(ET.parse(out + ".svg").getroot().tag.endswith("svg") for out in outs)
    elapsed = time.perf_counter() - start
    ok = (
        codes == [0, 0]
        and header1 == header2 == ",".join(CSV_COLUMNS)
        and errors1 == errors2
        and len(errors1) >= 9  # three families x three tolerances
        and svg_ok
        and elapsed < 60.0
    )
    _report(9, "benchmark artifact integrity", ok,
            f"exit codes {codes}, {len(errors1)} rows, error column reproduced, {elapsed:.1f}s")
