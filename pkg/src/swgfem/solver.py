"""Linear solvers: Jacobi-preconditioned CG, plus a dense direct oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import SparseSpd


class SolverError(RuntimeError):
    """The solve did not reach the requested tolerance (or A is not SPD)."""


@dataclass
class CgResult:
    x: np.ndarray
    iterations: int
    rel_residual: float


def cg_solve(
    system: SparseSpd,
    tol: float = 1e-12,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> CgResult:
    """Conjugate gradients with Jacobi preconditioning.

    Stops when ||b - Ax|| <= tol * ||b||.  The recurrence residual is
    refreshed from the true residual every 64 iterations to keep rounding
    drift out of the stopping decision.  Raises SolverError if the tolerance
    is not met within max_iter (default 10*N) iterations.
    """
    A, b = system.A, system.b
    n = system.n
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n == 0:
        return CgResult(np.zeros(0), 0, 0.0)
    if max_iter is None:
        max_iter = 10 * n

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return CgResult(np.zeros(n), 0, 0.0)

    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverError("non-positive diagonal entry; system is not SPD")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    best_x = x.copy()
    best_res = float(np.linalg.norm(r))

    for k in range(1, max_iter + 1):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0:
            raise SolverError("p'Ap <= 0 encountered; system is not SPD")
        alpha = rz / pAp
        x += alpha * p
        if k % 64 == 0:
            r = b - A @ x
        else:
            r -= alpha * Ap
        res = float(np.linalg.norm(r))
        if res < best_res:
            best_res = res
            best_x[:] = x
        if res <= tol * b_norm:
            return CgResult(x, k, res / b_norm)
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    raise SolverError(
        f"CG did not reach tol={tol:.1e} in {max_iter} iterations; "
        f"best relative residual {best_res / b_norm:.3e}"
    )


def dense_solve(A, b: np.ndarray) -> np.ndarray:
    """Cholesky solve of a small SPD system (test oracle, N <= 4096)."""
    if hasattr(A, "toarray"):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    n = len(b)
    if n == 0:
        return np.zeros(0)
    if n > 4096:
        raise ValueError(f"dense oracle capped at N=4096, got {n}")
    try:
        c, low = scipy.linalg.cho_factor(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SolverError(f"matrix is not SPD: {exc}") from exc
    except scipy.linalg.LinAlgError as exc:
        raise SolverError(f"matrix is not SPD: {exc}") from exc
    return scipy.linalg.cho_solve((c, low), b)
