"""Built-in stiff benchmark problems with analytic right-hand sides.

Each constructor returns a :class:`NamedProblem` bundling the ODE system,
the tolerance grid used by the benchmark harness, and the per-family order
windows the solvers were tuned with.  Analytic Jacobians are attached where
they are cheap to write down (ROBER, OREGO, HIRES, the linear ensemble);
POLLU falls back to finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import ODEProblem, SolverOptions

__all__ = ["NamedProblem", "rober", "orego", "hires", "pollu", "linear_100", "PROBLEMS", "get_problem", "options_for"]


@dataclass(frozen=True)
class NamedProblem:
    """A benchmark problem with its tolerance grid and tuned order windows."""

    name: str
    problem: ODEProblem
    default_tol_grid: tuple  # ((reltol, abstol), ...)
    tuned_orders: dict = field(default_factory=dict)  # family -> (min, init, max)
    exact: Optional[Callable[[float], np.ndarray]] = None

    @property
    def dim(self) -> int:
        return self.problem.dim


def options_for(named: NamedProblem, family: str, **overrides) -> SolverOptions:
    """SolverOptions with this problem's tuned order window for ``family``."""
    kwargs = {}
    if family in named.tuned_orders:
        lo, init, hi = named.tuned_orders[family]
        kwargs.update(min_order=lo, init_order=init, max_order=hi)
    kwargs.update(overrides)
    return SolverOptions(**kwargs)


def rober() -> NamedProblem:
    """Robertson chemical kinetics, 3 ODEs, span (0, 1e5)."""
    k1, k2, k3 = 0.04, 3e7, 1e4

    def rhs(y, p, t):
        y1, y2, y3 = y
        r12 = k2 * y2 * y2
        r23 = k3 * y2 * y3
        return np.array([-k1 * y1 + r23, k1 * y1 - r12 - r23, r12])

    def jac(y, p, t):
        y1, y2, y3 = y
        return np.array(
            [
                [-k1, k3 * y3, k3 * y2],
                [k1, -2.0 * k2 * y2 - k3 * y3, -k3 * y2],
                [0.0, 2.0 * k2 * y2, 0.0],
            ]
        )

    return NamedProblem(
        name="rober",
        problem=ODEProblem(rhs=rhs, u0=np.array([1.0, 0.0, 0.0]), tspan=(0.0, 1e5), jacobian=jac),
        default_tol_grid=((1e-7, 1e-10), (1e-8, 1e-11), (1e-9, 1e-12)),
        tuned_orders={
            "implicit_euler": (3, 5, 12),
            "implicit_euler_barycentric": (4, 5, 12),
            "implicit_hairer_wanner": (2, 5, 10),
        },
    )


def orego() -> NamedProblem:
    """Oregonator oscillating reaction, 3 ODEs, span (0, 30)."""
    k1, k2, k3 = 77.27, 8.375e-6, 0.161

    def rhs(y, p, t):
        y1, y2, y3 = y
        return np.array(
            [
                k1 * (y2 + y1 * (1.0 - k2 * y1 - y2)),
                (y3 - (1.0 + y1) * y2) / k1,
                k3 * (y1 - y3),
            ]
        )

    def jac(y, p, t):
        y1, y2, y3 = y
        return np.array(
            [
                [k1 * (1.0 - 2.0 * k2 * y1 - y2), k1 * (1.0 - y1), 0.0],
                [-y2 / k1, -(1.0 + y1) / k1, 1.0 / k1],
                [k3, 0.0, -k3],
            ]
        )

    return NamedProblem(
        name="orego",
        problem=ODEProblem(rhs=rhs, u0=np.array([1.0, 2.0, 3.0]), tspan=(0.0, 30.0), jacobian=jac),
        default_tol_grid=((1e-7, 1e-10), (1e-8, 1e-11), (1e-9, 1e-12)),
        tuned_orders={
            "implicit_euler": (3, 4, 12),
            "implicit_euler_barycentric": (3, 4, 12),
            "implicit_hairer_wanner": (2, 5, 10),
        },
    )


def hires() -> NamedProblem:
    """High irradiance response of photomorphogenesis, 8 ODEs, span (0, 321.8122)."""

    def rhs(y, p, t):
        y1, y2, y3, y4, y5, y6, y7, y8 = y
        r68 = 280.0 * y6 * y8
        return np.array(
            [
                -1.71 * y1 + 0.43 * y2 + 8.32 * y3 + 0.0007,
                1.71 * y1 - 8.75 * y2,
                -10.03 * y3 + 0.43 * y4 + 0.035 * y5,
                8.32 * y2 + 1.71 * y3 - 1.12 * y4,
                -1.745 * y5 + 0.43 * y6 + 0.43 * y7,
                -r68 + 0.69 * y4 + 1.71 * y5 - 0.43 * y6 + 0.69 * y7,
                r68 - 1.81 * y7,
                -r68 + 1.81 * y7,
            ]
        )

    def jac(y, p, t):
        y6, y8 = y[5], y[7]
        j = np.zeros((8, 8))
        j[0, 0], j[0, 1], j[0, 2] = -1.71, 0.43, 8.32
        j[1, 0], j[1, 1] = 1.71, -8.75
        j[2, 2], j[2, 3], j[2, 4] = -10.03, 0.43, 0.035
        j[3, 1], j[3, 2], j[3, 3] = 8.32, 1.71, -1.12
        j[4, 4], j[4, 5], j[4, 6] = -1.745, 0.43, 0.43
        j[5, 3], j[5, 4], j[5, 5], j[5, 6], j[5, 7] = 0.69, 1.71, -280.0 * y8 - 0.43, 0.69, -280.0 * y6
        j[6, 5], j[6, 6], j[6, 7] = 280.0 * y8, -1.81, 280.0 * y6
        j[7, 5], j[7, 6], j[7, 7] = -280.0 * y8, 1.81, -280.0 * y6
        return j

    u0 = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057])
    return NamedProblem(
        name="hires",
        problem=ODEProblem(rhs=rhs, u0=u0, tspan=(0.0, 321.8122), jacobian=jac),
        default_tol_grid=((1e-7, 1e-10), (1e-8, 1e-11), (1e-9, 1e-12)),
        tuned_orders={
            "implicit_euler": (4, 7, 12),
            "implicit_euler_barycentric": (4, 7, 12),
            "implicit_hairer_wanner": (3, 6, 10),
        },
    )


_POLLU_K = np.array(
    [
        0.35, 26.6, 12300.0, 0.00086, 0.00082, 15000.0, 0.00013, 24000.0,
        16500.0, 9000.0, 0.022, 12000.0, 1.88, 16300.0, 4.8e6, 0.00035,
        0.0175, 1.0e8, 4.44e11, 1240.0, 2.1, 5.78, 0.0474, 1780.0, 3.12,
    ]
)


def pollu() -> NamedProblem:
    """Air pollution chemistry, 20 ODEs, span (0, 60)."""

    def rhs(y, p, t):
        k = _POLLU_K
        (y1, y2, y3, y4, y5, y6, y7, y8, y9, y10,
         y11, y12, y13, y14, y15, y16, y17, y18, y19, y20) = y
        r1 = k[0] * y1
        r2 = k[1] * y2 * y4
        r3 = k[2] * y5 * y2
        r4 = k[3] * y7
        r5 = k[4] * y7
        r6 = k[5] * y7 * y6
        r7 = k[6] * y9
        r8 = k[7] * y9 * y6
        r9 = k[8] * y11 * y2
        r10 = k[9] * y11 * y1
        r11 = k[10] * y13
        r12 = k[11] * y10 * y2
        r13 = k[12] * y14
        r14 = k[13] * y1 * y6
        r15 = k[14] * y3
        r16 = k[15] * y4
        r17 = k[16] * y4
        r18 = k[17] * y16
        r19 = k[18] * y16
        r20 = k[19] * y17 * y6
        r21 = k[20] * y19
        r22 = k[21] * y19
        r23 = k[22] * y1 * y4
        r24 = k[23] * y19 * y1
        r25 = k[24] * y20
        return np.array(
            [
                -r1 - r10 - r14 - r23 - r24 + r2 + r3 + r9 + r11 + r12 + r22 + r25,
                -r2 - r3 - r9 - r12 + r1 + r21,
                -r15 + r1 + r17 + r19 + r22,
                -r2 - r16 - r17 - r23 + r15,
                -r3 + 2.0 * r4 + r6 + r7 + r13 + r20,
                -r6 - r8 - r14 - r20 + r3 + 2.0 * r18,
                -r4 - r5 - r6 + r13,
                r4 + r5 + r6 + r7,
                -r7 - r8,
                -r12 + r7 + r9,
                -r9 - r10 + r8 + r11,
                r9,
                -r11 + r10,
                -r13 + r12,
                r14,
                -r18 - r19 + r16,
                -r20,
                r20,
                -r21 - r22 - r24 + r23 + r25,
                -r25 + r24,
            ]
        )

    u0 = np.array(
        [0.0, 0.2, 0.0, 0.04, 0.0, 0.0, 0.1, 0.3, 0.017, 0.0,
         0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.007, 0.0, 0.0, 0.0]
    )
    return NamedProblem(
        name="pollu",
        problem=ODEProblem(rhs=rhs, u0=u0, tspan=(0.0, 60.0)),
        default_tol_grid=((1e-8, 1e-10), (1e-9, 10**-11.5), (1e-10, 1e-13)),
        tuned_orders={
            "implicit_euler": (5, 6, 12),
            "implicit_euler_barycentric": (5, 6, 12),
            "implicit_hairer_wanner": (3, 6, 10),
        },
    )


def linear_100(seed: int = 42) -> NamedProblem:
    """100 independent linear ODEs ``u_i' = lambda_i u_i`` with known solution.

    The decay rates are drawn uniformly from [-1, 0) under ``seed``, so the
    problem is bit-exactly reproducible; the analytic solution
    ``u_i(t) = exp(lambda_i t)`` serves as the error oracle.
    """
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-1.0, 0.0, size=100)
    u0 = np.ones(100)
    jac_matrix = np.diag(lam)

    def rhs(u, p, t):
        return lam * u

    def jac(u, p, t):
        return jac_matrix

    def exact(t):
        return np.exp(lam * t)

    return NamedProblem(
        name="linear_100",
        problem=ODEProblem(rhs=rhs, u0=u0, tspan=(0.0, 1.0), jacobian=jac),
        default_tol_grid=((1e-7, 1e-10), (1e-9, 1e-12), (1e-11, 1e-14)),
        tuned_orders={
            "midpoint_deuflhard": (5, 10, 11),
            "midpoint_hairer_wanner": (5, 10, 11),
        },
        exact=exact,
    )


PROBLEMS = {
    "rober": rober,
    "orego": orego,
    "hires": hires,
    "pollu": pollu,
    "linear_100": linear_100,
}


def get_problem(name: str) -> NamedProblem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
