"""Dense linear algebra kernels for the linearly-implicit row computations.

LU factorization with partial (row) pivoting, triangular solves against the
packed factors, and forward-difference Jacobians.  Matrices are dense,
row-major ``float64`` and small (the solvers target systems of fewer than
~200 equations), so no sparse or blocked machinery is used.

The factorization itself is always single-threaded: within-method
parallelism happens across the ensemble of row factorizations, never inside
one of them (see :mod:`parex.scheduler`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg.lapack import dgetrf, dgetrs

__all__ = [
    "SingularMatrix",
    "NonFiniteRHS",
    "LUFactors",
    "lu_factor",
    "lu_solve",
    "finite_diff_jacobian",
]

# Pivot magnitudes below PIVOT_RTOL times the largest row magnitude of the
# input are treated as singular.  Relative to row scale so badly scaled
# stiff Jacobians are not spuriously rejected.
PIVOT_RTOL = 1e-14


class SingularMatrix(Exception):
    """The matrix is singular to working precision; the step must be retried with smaller h."""


class NonFiniteRHS(Exception):
    """An RHS evaluation returned NaN or Inf during Jacobian estimation."""


@dataclass(frozen=True)
class LUFactors:
    """Packed LU factorization ``P A = L U`` of a square matrix.

    ``packed_lu`` stores the unit lower-triangular L strictly below the
    diagonal and U on and above it (row-major d x d).  ``pivots`` holds the
    LAPACK-style sequential row swaps (0-based): row ``i`` was swapped with
    row ``pivots[i]`` during elimination.
    """

    dim: int
    packed_lu: np.ndarray
    pivots: np.ndarray

    def permutation(self) -> np.ndarray:
        """Return the permutation matrix P with ``P A = L U``."""
        p = np.eye(self.dim)
        for i, j in enumerate(self.pivots):
            if i != j:
                p[[i, j]] = p[[j, i]]
        return p


def lu_factor(a: np.ndarray) -> LUFactors:
    """Factor a square matrix as ``P A = L U`` with partial pivoting.

    Raises :class:`SingularMatrix` when any pivot magnitude falls below
    ``PIVOT_RTOL`` times the largest row magnitude of ``a``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    d = a.shape[0]
    scale = np.abs(a).max() if d else 0.0
    lu, piv, info = dgetrf(a)
    if info < 0:
        raise ValueError(f"illegal value in argument {-info} of getrf")
    pivot_mags = np.abs(np.diagonal(lu))
    if info > 0 or scale == 0.0 or pivot_mags.min() < PIVOT_RTOL * scale:
        raise SingularMatrix(f"pivot below {PIVOT_RTOL:g} * max row magnitude ({scale:g})")
    return LUFactors(dim=d, packed_lu=lu, pivots=piv)


def lu_solve(factors: LUFactors, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` from the packed factors, without forming an inverse."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factors.dim:
        raise ValueError(f"rhs length {b.shape[0]} != matrix dim {factors.dim}")
    x, info = dgetrs(factors.packed_lu, factors.pivots, b)
    if info != 0:
        raise ValueError(f"illegal value in argument {-info} of getrs")
    return x


def finite_diff_jacobian(f, u: np.ndarray, p, t: float) -> np.ndarray:
    """Forward-difference Jacobian of ``f(u, p, t)`` with respect to ``u``.

    Column ``i`` uses perturbation ``sqrt(machine eps) * max(|u_i|, 1e-5)``;
    the floor protects components that start at exactly zero.  Costs ``d + 1``
    RHS evaluations for a d-dimensional state.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    f0 = np.asarray(f(u, p, t), dtype=float)
    if not np.isfinite(f0).all():
        raise NonFiniteRHS(f"rhs returned non-finite values at t={t}")
    sqrt_eps = np.sqrt(np.finfo(float).eps)
    jac = np.empty((d, d))
    u_pert = u.copy()
    for i in range(d):
        eps_i = sqrt_eps * max(abs(u[i]), 1e-5)
        u_pert[i] = u[i] + eps_i
        fi = np.asarray(f(u_pert, p, t), dtype=float)
        if not np.isfinite(fi).all():
            raise NonFiniteRHS(f"rhs returned non-finite values at t={t} (column {i})")
        jac[:, i] = (fi - f0) / eps_i
        u_pert[i] = u[i]
    return jac
