"""Linear solvers for assembled systems.

1D systems are tridiagonal and solved directly (Thomas algorithm); all
others use conjugate gradients with a Jacobi preconditioner.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .assembly import assemble, to_density
from .errors import NonConvergenceError, NumericError

DIRECT = "direct-tridiagonal"
CG = "conjugate-gradient"


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray
    residual_norm: float
    iterations: int
    method: str


def _relres(A, x, b):
    nb = float(np.linalg.norm(b))
    r = float(np.linalg.norm(b - A @ x))
    return r / nb if nb > 0 else r


def _roundoff_floor(A, x, b):
    """Smallest relative residual a backward-stable solve can certify:
    a few ulps of |A||x| + |b| measured against ||b||."""
    nb = float(np.linalg.norm(b))
    scale = float(np.linalg.norm(abs(A) @ np.abs(x) + np.abs(b)))
    return 8.0 * np.finfo(float).eps * scale / nb if nb > 0 else 0.0


def _tridiagonal_bands(A):
    A = sp.csr_matrix(A)
    n = A.shape[0]
    coo = A.tocoo()
    if np.any(np.abs(coo.row - coo.col) > 1):
        return None
    main = A.diagonal()
    upper = A.diagonal(1) if n > 1 else np.zeros(0)
    lower = A.diagonal(-1) if n > 1 else np.zeros(0)
    return lower, main, upper


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm; ``lower``/``upper`` are the sub/super diagonals."""
    try:
        return _kernels.thomas(lower, diag, upper, rhs)
    except ZeroDivisionError as exc:
        raise NumericError(str(exc)) from exc


def conjugate_gradient(A, b, tol=1e-12, max_iter=None, x0=None):
    """Jacobi-preconditioned CG on the relative residual. Returns (x, relres, iters)."""
    n = A.shape[0]
    max_iter = 10 * n if max_iter is None else int(max_iter)
    d = A.diagonal()
    if np.any(~(d > 0)):
        raise NumericError("non-positive diagonal entry; matrix is not SPD")
    Minv = 1.0 / d
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return np.zeros(n), 0.0, 0
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    z = Minv * r
    p = z.copy()
    rz = float(r @ z)
    best = (x.copy(), float(np.linalg.norm(r)) / nb)
    it = 0
    while it < max_iter:
        res = float(np.linalg.norm(r)) / nb
        if res < best[1]:
            best = (x.copy(), res)
        if res <= tol:
            return x, res, it
        Ap = A @ p
        pAp = float(p @ Ap)
        if not np.isfinite(pAp) or pAp <= 0:
            raise NumericError("CG breakdown: p^T A p is not positive")
        step = rz / pAp
        x += step * p
        r -= step * Ap
        z = Minv * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
        if not np.all(np.isfinite(x)):
            raise NumericError("CG produced non-finite iterates")
    res = _relres(A, x, b)
    if res <= tol:
        return x, res, it
    if res < best[1]:
        best = (x.copy(), res)
    raise NonConvergenceError(
        f"CG did not reach relative residual {tol:g} in {max_iter} iterations (best {best[1]:.3e})",
        best=best,
    )


def solve(system, tol=1e-12, max_iter=None, method=None):
    """Solve an assembled system; ``method`` is 'direct', 'cg' or None (auto)."""
    A = system.matrix
    b = system.rhs
    if not (np.all(np.isfinite(A.data)) and np.all(np.isfinite(b))):
        raise NumericError("system contains non-finite entries")
    bands = None
    if method in (None, "direct", DIRECT):
        if system.mesh.dim == 1 or method is not None:
            bands = _tridiagonal_bands(A)
        if bands is None and method is not None:
            raise NumericError("direct solver needs a tridiagonal system")
    elif method not in ("cg", CG):
        raise ValueError(f"unknown method {method!r}")
    if bands is not None:
        x = solve_tridiagonal(*bands, b)
        res = _relres(A, x, b)
        steps = 0
        # a couple of refinement sweeps recover the last digits on stiff data
        while res > tol and steps < 3:
            x = x + solve_tridiagonal(*bands, b - A @ x)
            res = _relres(A, x, b)
            steps += 1
        if not np.all(np.isfinite(x)):
            raise NumericError("direct solve produced non-finite values")
        # badly scaled U-form systems cannot reach tol in double precision
        if res > max(tol, _roundoff_floor(A, x, b)):
            raise NonConvergenceError(f"direct solve residual {res:.3e} above {tol:g}", best=(x, res))
        return SolveReport(x, res, steps, DIRECT)
    x, res, it = conjugate_gradient(A, b, tol=tol, max_iter=max_iter)
    return SolveReport(x, res, it, CG)


@dataclass(frozen=True, eq=False)
class Solution:
    system: object
    U: np.ndarray
    u: np.ndarray
    report: SolveReport


def solve_problem(problem, mesh, mean, **kw):
    """Assemble and solve; returns U and u = U pi on all nodes."""
    system = assemble(problem, mesh, mean)
    rep = solve(system, **kw)
    U = system.full_U(rep.solution)
    return Solution(system, U, to_density(system, U), rep)
