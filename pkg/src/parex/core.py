"""Problem, options, and solution data model shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConfigError",
    "ODEProblem",
    "Tolerances",
    "SolverOptions",
    "SolverStats",
    "Solution",
    "validate",
]

SEQUENCE_KINDS = ("harmonic", "romberg", "bulirsch")

RETCODES = ("success", "max_steps_exceeded", "step_underflow", "singular_failure")


class ConfigError(Exception):
    """Inconsistent problem or solver configuration."""


@dataclass(frozen=True)
class ODEProblem:
    """An initial value problem ``u' = f(u, p, t)`` on ``tspan = (t0, tf)``.

    ``rhs`` and ``jacobian`` must be re-entrant and side-effect-free: they
    are shared across worker threads during a solve.
    """

    rhs: Callable[[np.ndarray, object, float], np.ndarray]
    u0: np.ndarray
    tspan: tuple[float, float]
    params: object = None
    jacobian: Optional[Callable[[np.ndarray, object, float], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "u0", np.asarray(self.u0, dtype=float))

    @property
    def dim(self) -> int:
        return self.u0.shape[0]


@dataclass(frozen=True)
class Tolerances:
    """Absolute and relative error tolerances for the step controller."""

    abstol: float = 1e-8
    reltol: float = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    """Adaptivity and threading options.

    ``min_order``/``init_order``/``max_order`` bound the extrapolation order
    (number of T-table rows).  ``threading=None`` enables the worker pool
    automatically when the order window and system size are large enough for
    the pool overhead to pay off (init_order >= 4 and d >= 10); ``True`` and
    ``False`` force it.  ``num_workers=None`` falls back to the
    ``PAREX_THREADS`` environment variable, then to the CPU count.
    """

    min_order: int = 3
    init_order: int = 5
    max_order: int = 12
    sequence: str = "harmonic"
    threading: Optional[bool] = None
    num_workers: Optional[int] = None
    safety: float = 0.9
    q_min: float = 0.2
    q_max: float = 10.0
    dt_init: Optional[float] = None
    max_steps: int = 100_000


@dataclass
class SolverStats:
    """Exact operation counters mirroring the work model.

    ``nf`` includes RHS evaluations spent on finite-difference Jacobians.
    """

    nf: int = 0
    njac: int = 0
    nlu: int = 0
    nsolve: int = 0
    nsteps_accepted: int = 0
    nsteps_rejected: int = 0

    def as_dict(self) -> dict:
        return {
            "nf": self.nf,
            "njac": self.njac,
            "nlu": self.nlu,
            "nsolve": self.nsolve,
            "naccept": self.nsteps_accepted,
            "nreject": self.nsteps_rejected,
        }


@dataclass
class Solution:
    """Accepted time points, states, counters, and a return code.

    ``ts`` is strictly increasing with ``ts[0] = t0``; on success the last
    entry equals ``tf`` bit-exactly (the final step is clipped).
    """

    ts: np.ndarray
    us: np.ndarray
    stats: SolverStats = field(default_factory=SolverStats)
    retcode: str = "success"

    @property
    def success(self) -> bool:
        return self.retcode == "success"

    @property
    def u_final(self) -> np.ndarray:
        return self.us[-1]


def validate(problem: ODEProblem, opts: SolverOptions, tol: Optional[Tolerances] = None) -> None:
    """Reject inconsistent configurations with a human-readable ConfigError."""
    u0 = np.asarray(problem.u0, dtype=float)
    if u0.ndim != 1 or u0.shape[0] == 0:
        raise ConfigError(f"u0 must be a nonempty 1-d vector, got shape {u0.shape}")
    if not np.isfinite(u0).all():
        raise ConfigError("u0 contains non-finite entries")
    t0, tf = problem.tspan
    if not (np.isfinite(t0) and np.isfinite(tf) and tf > t0):
        raise ConfigError(f"tspan must satisfy t0 < tf, got {problem.tspan}")

    if not (2 <= opts.min_order <= opts.init_order <= opts.max_order):
        raise ConfigError(
            "order window must satisfy 2 <= min_order <= init_order <= max_order, "
            f"got ({opts.min_order}, {opts.init_order}, {opts.max_order})"
        )
    if opts.sequence not in SEQUENCE_KINDS:
        raise ConfigError(f"unknown sequence kind {opts.sequence!r}")
    if not (0.0 < opts.safety < 1.0):
        raise ConfigError(f"safety factor must be in (0, 1), got {opts.safety}")
    if not (0.0 < opts.q_min < 1.0 < opts.q_max):
        raise ConfigError(f"need 0 < q_min < 1 < q_max, got ({opts.q_min}, {opts.q_max})")
    if opts.dt_init is not None and not (0.0 < opts.dt_init):
        raise ConfigError(f"dt_init must be positive, got {opts.dt_init}")
    if opts.max_steps < 1:
        raise ConfigError(f"max_steps must be positive, got {opts.max_steps}")
    if opts.num_workers is not None and opts.num_workers < 1:
        raise ConfigError(f"num_workers must be positive, got {opts.num_workers}")

    if tol is not None:
        if not (tol.abstol > 0 and np.isfinite(tol.abstol)):
            raise ConfigError(f"abstol must be positive and finite, got {tol.abstol}")
        if not (tol.reltol > 0 and np.isfinite(tol.reltol)):
            raise ConfigError(f"reltol must be positive and finite, got {tol.reltol}")
