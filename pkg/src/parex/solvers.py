"""Adaptive integration loop assembling steppers, extrapolation, controller, and scheduler.

Five public algorithms, each a fixed binding of an internal stepper, an
extrapolation route, the error-expansion power, and a sequence multiple:

==========================  =================  ============  =====  ========
name                        stepper            extrapolator  power  multiple
==========================  =================  ============  =====  ========
midpoint_deuflhard          explicit midpoint  barycentric   2      2
midpoint_hairer_wanner      explicit midpoint  barycentric   2      2
implicit_euler              implicit Euler     Neville       1      1
implicit_euler_barycentric  implicit Euler     barycentric   1      1
implicit_hairer_wanner      smoothed midpoint  barycentric   2      4
==========================  =================  ============  =====  ========

The two explicit variants differ only in when the order-raise probe row is
computed: ``midpoint_deuflhard`` computes row k+1 eagerly every step, the
others only after an accepted step.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .controller import optimal_step, scaled_error, select_order
from .core import ConfigError, ODEProblem, Solution, SolverOptions, SolverStats, Tolerances, validate
from .extrapolate import (
    SubdividingSequence,
    barycentric_extrapolate,
    build_barycentric_tableau,
    neville_table,
    sequence_values,
    stage_count,
)
from .linalg import NonFiniteRHS, SingularMatrix, finite_diff_jacobian, lu_factor
from .scheduler import WorkerPool, build_schedule, run_rows
from .steppers import (
    NonFiniteState,
    explicit_midpoint_row,
    implicit_euler_row,
    implicit_midpoint_smoothed_row,
)

__all__ = ["Algorithm", "ALGORITHMS", "get_algorithm", "solve", "solve_fixed"]


@dataclass(frozen=True)
class Algorithm:
    """Fixed binding of stepper, extrapolator, power, and sequence multiple."""

    name: str
    stepper: str  # midpoint | ieuler | smoothed
    extrapolator: str  # neville | barycentric
    power: int
    multiple: int
    probe: str  # eager | after_accept
    implicit: bool


MIDPOINT_DEUFLHARD = Algorithm("midpoint_deuflhard", "midpoint", "barycentric", 2, 2, "eager", False)
MIDPOINT_HAIRER_WANNER = Algorithm(
    "midpoint_hairer_wanner", "midpoint", "barycentric", 2, 2, "after_accept", False
)
IMPLICIT_EULER = Algorithm("implicit_euler", "ieuler", "neville", 1, 1, "after_accept", True)
IMPLICIT_EULER_BARYCENTRIC = Algorithm(
    "implicit_euler_barycentric", "ieuler", "barycentric", 1, 1, "after_accept", True
)
IMPLICIT_HAIRER_WANNER = Algorithm(
    "implicit_hairer_wanner", "smoothed", "barycentric", 2, 4, "after_accept", True
)

ALGORITHMS = {
    alg.name: alg
    for alg in (
        MIDPOINT_DEUFLHARD,
        MIDPOINT_HAIRER_WANNER,
        IMPLICIT_EULER,
        IMPLICIT_EULER_BARYCENTRIC,
        IMPLICIT_HAIRER_WANNER,
    )
}

IMPLICIT_FAMILIES = ("implicit_euler", "implicit_euler_barycentric", "implicit_hairer_wanner")


def get_algorithm(name) -> Algorithm:
    if isinstance(name, Algorithm):
        return name
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None


def default_num_workers() -> int:
    env = os.environ.get("PAREX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PAREX_THREADS must be an integer, got {env!r}") from None
    return min(4, os.cpu_count() or 1)


class _Integrator:
    """Shared per-solve state: sequence values, tableau, counters, worker pool."""

    def __init__(self, problem: ODEProblem, alg: Algorithm, opts: SolverOptions):
        self.problem = problem
        self.alg = alg
        self.opts = opts
        self.dim = problem.dim
        seq = SubdividingSequence(opts.sequence, alg.multiple)
        # one extra value beyond max_order: the explicit work model and the
        # eager probe row both look at row k+1
        self.n_values = sequence_values(seq, opts.max_order + 1)
        if alg.extrapolator == "barycentric":
            self.tableau = build_barycentric_tableau(seq, alg.power, opts.max_order)
        else:
            self.tableau = None
        self.stats = SolverStats()
        self.jac_cost = self.dim / 5.0
        self.work_model = "implicit" if alg.implicit else "explicit"

    def evaluate_jacobian(self, u, t):
        self.stats.njac += 1
        with np.errstate(over="ignore", invalid="ignore"):
            if self.problem.jacobian is not None:
                jac = np.asarray(self.problem.jacobian(u, self.problem.params, t), dtype=float)
            else:
                jac = finite_diff_jacobian(self.problem.rhs, u, self.problem.params, t)
                self.stats.nf += self.dim + 1
        if not np.isfinite(jac).all():
            raise NonFiniteRHS(f"jacobian evaluation returned non-finite values at t={t}")
        return jac

    def make_row_task(self, u, t, h, jac):
        """Row closure computing T_{j,1}; row-private buffers only."""
        rhs = self.problem.rhs
        p = self.problem.params
        alg = self.alg
        n_values = self.n_values
        eye = np.eye(self.dim)

        def row_task(j):
            n_j = n_values[j - 1]
            # overflow in trial evaluations of a stiff rhs is an expected
            # rejection signal, not a warning-worthy event
            with np.errstate(over="ignore", invalid="ignore"):
                if alg.stepper == "midpoint":
                    return explicit_midpoint_row(rhs, u, p, t, h, n_j)
                w = eye - (h / n_j) * jac
                factors = lu_factor(w)
                if alg.stepper == "ieuler":
                    return implicit_euler_row(rhs, factors, u, p, t, h, n_j)
                return implicit_midpoint_smoothed_row(rhs, factors, u, p, t, h, n_j)

        return row_task

    def account_rows(self, results):
        for r in results:
            self.stats.nf += r.rhs_calls
            self.stats.nsolve += r.solves
        if self.alg.implicit:
            self.stats.nlu += len(results)

    def estimates(self, column, m):
        """Order-m extrapolant and its error partner from the first m rows."""
        if self.alg.extrapolator == "barycentric":
            t_m = barycentric_extrapolate(self.tableau, m, column)
            t_sub = barycentric_extrapolate(self.tableau, m - 1, column) if m >= 2 else t_m
            return t_m, t_sub
        table = neville_table(column[:m], self.n_values, self.alg.power)
        t_m = table[m - 1][m - 1]
        t_sub = table[m - 1][m - 2] if m >= 2 else t_m
        return t_m, t_sub

    def extrapolant(self, column, m):
        return self.estimates(column, m)[0]

    def work(self, m):
        return stage_count(self.work_model, self.n_values, m, self.jac_cost)


def solve(
    problem: ODEProblem,
    alg,
    opts: SolverOptions | None = None,
    tol: Tolerances | None = None,
) -> Solution:
    """Adaptively integrate ``problem`` from t0 to tf.

    Per outer step: refresh the Jacobian (implicit families), compute the
    scheduled T-table rows in parallel, extrapolate, and let the controller
    pick acceptance, the next step size, and the next order.  Returns a
    Solution with a non-success retcode instead of raising, except for
    configuration errors.
    """
    alg = get_algorithm(alg)
    opts = opts or SolverOptions()
    tol = tol or Tolerances()
    validate(problem, opts, tol)
    if not alg.implicit and opts.max_order > 15:
        raise ConfigError("explicit midpoint families are unstable beyond order 15")

    integ = _Integrator(problem, alg, opts)
    stats = integ.stats
    t0, tf = problem.tspan
    span = tf - t0
    d = problem.dim

    use_threads = opts.threading
    if use_threads is None:
        use_threads = d >= 10 and opts.init_order >= 4
    num_workers = opts.num_workers if opts.num_workers is not None else default_num_workers()
    pool = WorkerPool(num_workers) if use_threads and num_workers > 1 else None

    eps = np.finfo(float).eps
    hmin_scale = max(abs(t0), abs(tf), 1.0)

    ts = [t0]
    us = [problem.u0.copy()]
    t = t0
    u = problem.u0.copy()
    h = opts.dt_init if opts.dt_init is not None else 1e-6 * span
    h = min(h, span)
    k = opts.init_order
    retcode = "max_steps_exceeded"

    try:
        while stats.nsteps_accepted + stats.nsteps_rejected < opts.max_steps:
            is_final = h >= tf - t
            h_step = tf - t if is_final else h

            eager_rows = alg.probe == "eager" and k + 1 <= opts.max_order
            n_rows = k + 1 if eager_rows else k

            try:
                jac = integ.evaluate_jacobian(u, t) if alg.implicit else None
                row_task = integ.make_row_task(u, t, h_step, jac)
                schedule = build_schedule(integ.n_values, n_rows, num_workers)
                results = run_rows(schedule, row_task, pool)
            except (SingularMatrix, NonFiniteState, NonFiniteRHS):
                stats.nsteps_rejected += 1
                h = 0.5 * h_step
                if h < 1e3 * eps * hmin_scale:
                    retcode = "singular_failure"
                    break
                continue

            integ.account_rows(results)
            column = [r.value for r in results]

            errors: dict[int, float] = {}
            values: dict[int, np.ndarray] = {}
            t_kk, t_sub = integ.estimates(column, k)
            values[k] = t_kk
            errors[k] = scaled_error(t_kk, t_sub, t_kk, u, tol)
            if k - 1 >= max(opts.min_order, 2):
                t_m, t_m_sub = integ.estimates(column, k - 1)
                errors[k - 1] = scaled_error(t_m, t_m_sub, t_m, u, tol)
            if len(column) > k:
                t_m, t_m_sub = integ.estimates(column, k + 1)
                errors[k + 1] = scaled_error(t_m, t_m_sub, t_m, u, tol)

            accept = errors[k] < 1.0

            if (
                accept
                and alg.probe == "after_accept"
                and k + 1 <= opts.max_order
                and len(column) == k
                and not is_final
            ):
                try:
                    probe = row_task(k + 1)
                except (SingularMatrix, NonFiniteState, NonFiniteRHS):
                    probe = None
                if probe is not None:
                    integ.account_rows([probe])
                    column.append(probe.value)
                    t_m, t_m_sub = integ.estimates(column, k + 1)
                    errors[k + 1] = scaled_error(t_m, t_m_sub, t_m, u, tol)

            h_opts = {
                m: optimal_step(h_step, e, m, opts.safety, opts.q_min, opts.q_max, alg.power)
                for m, e in errors.items()
            }
            works = {m: integ.work(m) for m in errors}
            decision = select_order(errors, h_opts, works, k, opts.min_order, opts.max_order)

            if decision.accept:
                stats.nsteps_accepted += 1
                t = tf if is_final else t + h_step
                u = values[k]
                ts.append(t)
                us.append(u)
                if t >= tf:
                    retcode = "success"
                    break
                k = decision.next_order
                h = min(decision.next_h, tf - t if tf - t > 0 else decision.next_h)
            else:
                stats.nsteps_rejected += 1
                # rejection never grows the step; order is frozen for the retry
                h = min(decision.next_h, h_step)
                if h < 1e3 * eps * hmin_scale:
                    retcode = "step_underflow"
                    break
    finally:
        if pool is not None:
            pool.close()

    return Solution(ts=np.array(ts), us=np.array(us), stats=stats, retcode=retcode)


def solve_fixed(problem: ODEProblem, alg, order: int, dt: float, opts: SolverOptions | None = None) -> Solution:
    """Fixed-order, fixed-step integration (convergence studies).

    ``dt`` must divide ``tf - t0``; each step performs one extrapolation of
    the given order with no adaptivity, serially.
    """
    alg = get_algorithm(alg)
    if order < 1:
        raise ConfigError(f"order must be >= 1, got {order}")
    t0, tf = problem.tspan
    span = tf - t0
    nsteps = round(span / dt)
    if nsteps < 1 or abs(nsteps * dt - span) > 1e-8 * span:
        raise ConfigError(f"dt={dt} does not divide the time span {span}")

    base_opts = opts or SolverOptions()
    fixed_opts = SolverOptions(
        min_order=2,
        init_order=max(order, 2),
        max_order=max(order, 2),
        sequence=base_opts.sequence,
    )
    integ = _Integrator(problem, alg, fixed_opts)
    stats = integ.stats

    ts = [t0]
    us = [problem.u0.copy()]
    u = problem.u0.copy()
    retcode = "success"
    for i in range(nsteps):
        t = t0 + i * dt
        try:
            jac = integ.evaluate_jacobian(u, t) if alg.implicit else None
            row_task = integ.make_row_task(u, t, dt, jac)
            results = [row_task(j) for j in range(1, order + 1)]
        except (SingularMatrix, NonFiniteState, NonFiniteRHS):
            retcode = "singular_failure"
            break
        integ.account_rows(results)
        u = integ.extrapolant([r.value for r in results], order)
        stats.nsteps_accepted += 1
        ts.append(tf if i == nsteps - 1 else t0 + (i + 1) * dt)
        us.append(u)

    return Solution(ts=np.array(ts), us=np.array(us), stats=stats, retcode=retcode)
