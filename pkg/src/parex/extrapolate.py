"""Subdividing sequences, Aitken-Neville recursion, barycentric tableaus, and the work model.

The extrapolation machinery turns a column of low-order approximations
``T_{j,1}`` (each computed with ``n_j`` internal substeps of size
``h_j = dt / n_j``) into a high-order approximation of the ``h -> 0``
limit.  Two routes are provided: the classical Aitken-Neville recursion
and a precomputed barycentric linear combination; they agree to rounding
on identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SubdividingSequence",
    "sequence_values",
    "aitken_neville",
    "neville_table",
    "BarycentricTableau",
    "build_barycentric_tableau",
    "barycentric_extrapolate",
    "stage_count",
]


@dataclass(frozen=True)
class SubdividingSequence:
    """Substep-count sequence, optionally scaled elementwise by ``multiple``."""

    kind: str = "harmonic"
    multiple: int = 1


def sequence_values(seq: SubdividingSequence, count: int) -> list[int]:
    """First ``count`` values of the sequence, each multiplied by ``seq.multiple``.

    harmonic: 1, 2, 3, 4, ...; romberg: 1, 2, 4, 8, ...;
    bulirsch: 1, 2, 3, 4, 6, 8, 12, 16, ... (doubling every other term).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if seq.kind == "harmonic":
        base = list(range(1, count + 1))
    elif seq.kind == "romberg":
        base = [2**i for i in range(count)]
    elif seq.kind == "bulirsch":
        base = [1, 2, 3][:count]
        while len(base) < count:
            base.append(2 * base[-2])
    else:
        raise ValueError(f"unknown sequence kind {seq.kind!r}")
    return [seq.multiple * n for n in base]


def neville_table(column, n_values, power: int):
    """Full Aitken-Neville triangle from the first-column data.

    ``table[j][c]`` is ``T_{j+1, c+1}`` (0-based storage of the 1-based
    T-table).  ``power=2`` replaces the node ratio ``n_j / n_{j-c}`` with its
    square, matching methods whose error expansion contains only even
    powers of h.
    """
    k = len(column)
    if k < 1:
        raise ValueError("need at least one first-column entry")
    if len(n_values) < k:
        raise ValueError("sequence shorter than the first column")
    table = [[np.asarray(column[j], dtype=float)] for j in range(k)]
    for c in range(1, k):
        for j in range(c, k):
            ratio = (n_values[j] / n_values[j - c]) ** power
            prev = table[j][c - 1]
            table[j].append(prev + (prev - table[j - 1][c - 1]) / (ratio - 1.0))
    return table


def aitken_neville(column, n_values, power: int):
    """Diagonal ``T_{k,k}`` and sub-diagonal ``T_{k,k-1}`` of the T-table.

    The sub-diagonal feeds the error estimate.  For k = 1 both returned
    values are the single entry.
    """
    table = neville_table(column, n_values, power)
    k = len(column)
    t_kk = table[k - 1][k - 1]
    t_sub = table[k - 1][k - 2] if k >= 2 else t_kk
    return t_kk, t_sub


@dataclass(frozen=True)
class BarycentricTableau:
    """Per-order coefficients combining the first column into the extrapolant.

    ``coefficients[k - 1]`` has length k; each row sums to 1 (extrapolating
    constant data returns the constant).  Precomputing all orders up to
    ``n_max`` costs O(n_max^2) and is done once per solver instance.
    """

    power: int
    n_values: tuple[int, ...]
    coefficients: list = field(repr=False)

    @property
    def n_max(self) -> int:
        return len(self.coefficients)


def build_barycentric_tableau(seq: SubdividingSequence, power: int, n_max: int) -> BarycentricTableau:
    """Tableau of extrapolation coefficients for orders 1..n_max.

    For order k with nodes ``x_j = n_j^(-power)``, the weights are
    ``w_j = prod_{i != j} 1 / (x_j - x_i)`` and the h -> 0 combination is
    ``c_j = rho(0) w_j / (-x_j)`` with ``rho(0) = prod_i (-x_i)``.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    n_values = sequence_values(seq, n_max)
    nodes = np.array([n ** (-float(power)) for n in n_values])
    coefficients = []
    for k in range(1, n_max + 1):
        x = nodes[:k]
        coeffs = np.empty(k)
        rho0 = np.prod(-x)
        for j in range(k):
            diffs = x[j] - np.delete(x, j)
            w_j = 1.0 / np.prod(diffs) if k > 1 else 1.0
            coeffs[j] = rho0 * w_j / (-x[j])
        coefficients.append(coeffs)
    return BarycentricTableau(power=power, n_values=tuple(n_values), coefficients=coefficients)


def barycentric_extrapolate(tableau: BarycentricTableau, k: int, column) -> np.ndarray:
    """Order-k extrapolant as the linear combination ``sum_j c_{k,j} T_{j,1}``.

    O(k d) per call; matches :func:`aitken_neville` on the same data and
    power to rounding.
    """
    if not (1 <= k <= tableau.n_max):
        raise ValueError(f"order {k} outside tableau range 1..{tableau.n_max}")
    if len(column) < k:
        raise ValueError(f"need {k} first-column rows, got {len(column)}")
    coeffs = tableau.coefficients[k - 1]
    data = np.asarray(column[:k], dtype=float)
    return coeffs @ data


def stage_count(method: str, seq_values, k: int, jac_cost: float = 1.0) -> float:
    """Work-model stage number A_k in RHS-evaluation equivalents.

    Explicit midpoint counts rows 1..k+1 (the eager probe row is part of the
    budget), each costing ``n_j + 1``.  Implicit methods count per row one LU,
    ``n_j`` RHS calls and ``n_j`` back substitutions, plus the per-step
    Jacobian at ``jac_cost`` (finite differences cost ~d RHS calls; pass
    ``d / 5`` for the solver's weighting, 1.0 for unit weights).
    """
    if method == "explicit":
        if len(seq_values) < k + 1:
            raise ValueError("explicit work model needs k + 1 sequence values")
        return float(sum(n + 1 for n in seq_values[: k + 1]))
    if method == "implicit":
        if len(seq_values) < k:
            raise ValueError("implicit work model needs k sequence values")
        return float(sum(2 * n + 1 for n in seq_values[:k])) + jac_cost
    raise ValueError(f"unknown work-model method {method!r}")
