"""Error estimation, step-size selection, and work-based order adaptation.

The controller is a pure function of step-local data: a scaled WRMS error,
the standard step-size controller ``h_opt = h / q`` with
``q = clamp(err^(1/(order+1)) / safety)``, and order selection inside the
``(k-1, k+1)`` window minimizing the work rate ``A_k / h_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Tolerances

__all__ = ["StepDecision", "scaled_error", "optimal_step", "select_order"]

# Relative margin a candidate order must win by before we switch away from
# the current order; changing order has cache and schedule costs.
_TIE_MARGIN = 1e-12


@dataclass(frozen=True)
class StepDecision:
    accept: bool
    next_h: float
    next_order: int


def scaled_error(t_kk, t_k_km1, u, u_prev, tol: Tolerances) -> float:
    """WRMS of ``T_{k,k} - T_{k,k-1}`` scaled per component.

    Each component is divided by ``abstol + max(|u_i|, |u_prev_i|) * reltol``;
    a result below 1 means the step is within tolerance.
    """
    diff = np.asarray(t_kk, dtype=float) - np.asarray(t_k_km1, dtype=float)
    scale = tol.abstol + np.maximum(np.abs(u), np.abs(u_prev)) * tol.reltol
    ratios = diff / scale
    return float(np.sqrt(np.mean(ratios * ratios)))


def optimal_step(h, err_scaled, k, safety, q_min, q_max, power=2) -> float:
    """Next step size ``h / q`` from the standard controller.

    The exponent is one over the achieved order plus one: ``power * k + 1``
    (2k+1 for the symmetric power-2 families, k+1 for implicit Euler).
    ``q`` is clamped to ``[q_min, q_max]``, bounding growth at ``1/q_min``
    and shrinkage at ``1/q_max`` per step.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    if err_scaled < 0:
        raise ValueError(f"err_scaled must be nonnegative, got {err_scaled}")
    exponent = 1.0 / (power * k + 1)
    q = max(q_min, min(err_scaled**exponent / safety, q_max))
    return h / q


def select_order(err_by_order, h_by_order, work_by_order, current_k, min_order, max_order) -> StepDecision:
    """Accept/reject the step and pick the next order inside the window.

    The step is accepted iff the scaled error at the current order is below 1.
    On acceptance, candidate orders ``{k-1, k, k+1}`` (clipped to the window,
    restricted to orders with an error estimate) compete on the work rate
    ``A_k / h_opt(k)``; ties keep the current order.  On rejection, the retry
    stays at the current order with the shrunk step.
    """
    err_k = err_by_order.get(current_k, np.inf)
    if not err_k < 1.0:
        return StepDecision(accept=False, next_h=h_by_order[current_k], next_order=current_k)

    best_k = current_k
    best_rate = work_by_order[current_k] / h_by_order[current_k]
    for cand in (current_k - 1, current_k + 1):
        if not (min_order <= cand <= max_order):
            continue
        if cand not in h_by_order or cand not in work_by_order:
            continue
        rate = work_by_order[cand] / h_by_order[cand]
        if rate < best_rate * (1.0 - _TIE_MARGIN):
            best_k, best_rate = cand, rate
    return StepDecision(accept=True, next_h=h_by_order[best_k], next_order=best_k)
