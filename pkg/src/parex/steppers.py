"""Fixed-step internal methods producing one first-column entry T_{j,1} each.

Three row kernels: the explicit two-step midpoint (symmetric, even-power
error expansion), the linearly-implicit Euler, and the linearly-implicit
midpoint with smoothing.  The implicit kernels take a prefactored
``W = I - h_j J`` for this row's substep size; the Jacobian is evaluated
once per outer step and shared across rows.

Each kernel touches only its own buffers plus shared immutable inputs, so
rows are safe to run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import LUFactors, lu_solve

__all__ = [
    "NonFiniteState",
    "RowResult",
    "explicit_midpoint_row",
    "implicit_euler_row",
    "implicit_midpoint_smoothed_row",
]


class NonFiniteState(Exception):
    """An intermediate state went NaN/Inf; the step must be rejected with smaller h."""


@dataclass(frozen=True)
class RowResult:
    """One T_{j,1} value with its exact operation counts."""

    value: np.ndarray
    rhs_calls: int
    solves: int


def _check_finite(u: np.ndarray, t: float) -> None:
    if not np.isfinite(u).all():
        raise NonFiniteState(f"non-finite state at t={t}")


def explicit_midpoint_row(rhs, u0, p, t, dt, n_j) -> RowResult:
    """Two-step explicit midpoint over ``n_j`` substeps of size ``dt / n_j``.

    Explicit Euler startup, then ``u_m = u_{m-2} + 2 h f(u_{m-1})``.
    ``n_j`` must be even so the row lands on t + dt symmetrically.
    """
    if n_j < 2 or n_j % 2:
        raise ValueError(f"explicit midpoint needs even n_j >= 2, got {n_j}")
    h = dt / n_j
    u_prev = np.asarray(u0, dtype=float)
    u = u_prev + h * np.asarray(rhs(u_prev, p, t), dtype=float)
    _check_finite(u, t + h)
    for m in range(2, n_j + 1):
        t_mid = t + (m - 1) * h
        u_next = u_prev + (2.0 * h) * np.asarray(rhs(u, p, t_mid), dtype=float)
        u_prev, u = u, u_next
        _check_finite(u, t + m * h)
    return RowResult(value=u, rhs_calls=n_j, solves=0)


def implicit_euler_row(rhs, lu_of_w: LUFactors, u0, p, t, dt, n_j) -> RowResult:
    """Linearly-implicit Euler: ``u_{m+1} = u_m + W^{-1} h f(u_m)`` with ``W = I - h J``.

    One RHS call and one back substitution per substep; no Newton iteration.
    """
    if n_j < 1:
        raise ValueError(f"need n_j >= 1, got {n_j}")
    h = dt / n_j
    u = np.asarray(u0, dtype=float)
    for m in range(n_j):
        t_m = t + m * h
        fu = np.asarray(rhs(u, p, t_m), dtype=float)
        u = u + lu_solve(lu_of_w, h * fu)
        _check_finite(u, t_m + h)
    return RowResult(value=u, rhs_calls=n_j, solves=n_j)


def implicit_midpoint_smoothed_row(rhs, lu_of_w: LUFactors, u0, p, t, dt, n_j) -> RowResult:
    """Linearly-implicit midpoint with a smoothing average of the final iterates.

    Startup solve ``W (u_1 - u_0) = h f(u_0)``, then the increment recursion
    ``D_{m+1} = D_m + 2 W^{-1} (h f(u_m) - D_m)`` with ``D_m = u_m - u_{m-1}``.
    One extra substep is run so that both ``u_{n_j - 1}`` and ``u_{n_j + 1}``
    exist; the row value is their average.  The increment form avoids the
    subtractive cancellation of re-deriving D from consecutive states.
    """
    if n_j < 4 or n_j % 4:
        raise ValueError(f"smoothed implicit midpoint needs n_j divisible by 4, got {n_j}")
    h = dt / n_j
    u = np.asarray(u0, dtype=float)
    f0 = np.asarray(rhs(u, p, t), dtype=float)
    delta = lu_solve(lu_of_w, h * f0)
    u_before = u + delta  # becomes u_{n_j - 1} when the loop below ends
    u = u_before
    _check_finite(u, t + h)
    for m in range(1, n_j + 1):
        t_m = t + m * h
        fm = np.asarray(rhs(u, p, t_m), dtype=float)
        delta = delta + 2.0 * lu_solve(lu_of_w, h * fm - delta)
        u_next = u + delta
        _check_finite(u_next, t_m + h)
        if m == n_j - 1:
            u_before = u  # u_{n_j - 1}
        u = u_next
    smoothed = 0.5 * (u + u_before)
    return RowResult(value=smoothed, rhs_calls=n_j + 1, solves=n_j + 1)
