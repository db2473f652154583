"""High-accuracy 1D reference solutions and exact edge formulas.

The reference solver shoots on the first-order system

    u' = -J / kappa - u V',    J' = f,

integrating with classical RK4 and adjusting J(a) with Brent's method
until u(b) matches the Dirichlet value.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import _kernels
from .assembly import evaluate_coefficient
from .errors import ConfigurationError, NonConvergenceError, NumericError
from .means import SCHARFETTER_GUMMEL, weight_B

DEFAULT_GRID = 136474
FD_STEP = 1e-6
_EPS = np.finfo(float).eps


def brent_root(g, lo, hi, tol=1e-12, xtol=0.0, max_iter=100):
    """Brent-Dekker root finder on a sign-changing bracket.

    Stops when |g(x)| <= tol or the bracket is below the floating-point
    resolution (plus ``xtol``). Returns ``(root, iterations)``.
    """
    a, b = float(lo), float(hi)
    fa, fb = g(a), g(b)
    if not (np.isfinite(fa) and np.isfinite(fb)):
        raise NumericError("non-finite function value at the bracket ends")
    if fa == 0.0:
        return a, 0
    if fb == 0.0:
        return b, 0
    if (fa > 0) == (fb > 0):
        raise NonConvergenceError(f"root not bracketed: g({a})={fa}, g({b})={fb}")
    c, fc = a, fa
    d = e = b - a
    for it in range(1, max_iter + 1):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * xtol
        xm = 0.5 * (c - b)
        if abs(fb) <= tol or abs(xm) <= tol1 or fb == 0.0:
            return b, it
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = g(b)
        if not np.isfinite(fb):
            raise NumericError(f"non-finite function value at {b}")
    raise NonConvergenceError(f"Brent did not converge in {max_iter} iterations", best=(b, fb))


def derivative_of(problem):
    """V' as a vectorised callable: exact if the problem provides it,
    otherwise a central difference with step 1e-6."""
    if problem.dV is not None:
        return problem.dV
    V = problem.V

    def dV(x):
        x = np.asarray(x, dtype=float)
        return (np.asarray(V(x + FD_STEP)) - np.asarray(V(x - FD_STEP))) / (2.0 * FD_STEP)

    return dV


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    x: np.ndarray
    u: np.ndarray
    J: np.ndarray
    du: np.ndarray
    dJ: np.ndarray
    V: np.ndarray
    kappa: np.ndarray
    J_a: float
    residual: float
    iterations: int
    _splines: dict = field(default_factory=dict, repr=False)

    def _spline(self, key):
        if key not in self._splines:
            if key == "u":
                self._splines[key] = CubicHermiteSpline(self.x, self.u, self.du)
            else:
                self._splines[key] = CubicHermiteSpline(self.x, self.J, self.dJ)
        return self._splines[key]

    def u_at(self, x):
        """Cubic Hermite interpolation of u (order four in the grid size)."""
        return self._spline("u")(np.asarray(x, dtype=float))

    def J_at(self, x):
        return self._spline("J")(np.asarray(x, dtype=float))

    @property
    def n_grid(self):
        return len(self.x)


def _sample(problem, xs):
    f = evaluate_coefficient(problem.f, xs[:, None], "f")
    kap = evaluate_coefficient(problem.kappa, xs[:, None], "kappa", positive=True)
    dV = evaluate_coefficient(derivative_of(problem), xs[:, None], "V'")
    V = evaluate_coefficient(problem.V, xs[:, None], "V")
    return f, kap, dV, V


def shoot_reference(problem, n_grid=DEFAULT_GRID, tol=1e-12, max_doublings=60):
    """Reference solution of a 1D problem on ``n_grid`` equidistant nodes."""
    if problem.dim != 1:
        raise ConfigurationError("the shooting reference is one-dimensional")
    if n_grid < 3:
        raise ConfigurationError("n_grid must be at least 3")
    a, b = problem.domain.lower[0], problem.domain.upper[0]
    u_a = float(np.asarray(problem.boundary(np.array([a])))[0])
    u_b = float(np.asarray(problem.boundary(np.array([b])))[0])
    n_steps = int(n_grid) - 1
    H = (b - a) / n_steps
    xs = a + (b - a) * np.arange(2 * n_steps + 1) / (2 * n_steps)
    f, kap, dV, V = _sample(problem, xs)
    inv_k = 1.0 / kap

    def end_residual(J0):
        u, _ = _kernels.rk4_linear(H, u_a, J0, f, inv_k, dV)
        return float(u[-1]) - u_b

    M = float(np.max(kap)) * (abs(u_a) + abs(u_b)) / (b - a) * math.exp(float(np.max(V) - np.min(V)))
    if not M > 0:
        M = 1.0
    r_lo, r_hi = end_residual(-M), end_residual(M)
    k = 0
    while (r_lo > 0) == (r_hi > 0) and r_lo != 0 and r_hi != 0:
        k += 1
        if k > max_doublings or not math.isfinite(M):
            raise NonConvergenceError("could not bracket the shooting parameter")
        M *= 2.0
        r_lo, r_hi = end_residual(-M), end_residual(M)
    J0, iters = brent_root(end_residual, -M, M, tol=tol)
    u, J = _kernels.rk4_linear(H, u_a, J0, f, inv_k, dV)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(J))):
        raise NumericError("reference integration overflowed")
    x = xs[::2]
    du = -J * inv_k[::2] - u * dV[::2]
    return ReferenceSolution(
        x=x, u=u, J=J, du=du, dJ=f[::2], V=V[::2], kappa=kap[::2],
        J_a=J0, residual=float(u[-1] - u_b), iterations=iters,
    )


def edge_flux_exact(kappa, q, h, u0, uh):
    """Exact flux of the single-edge problem with linear potential V' = -q,
    constant kappa and f = 0 (Scharfetter-Gummel form)."""
    r = q * h
    return kappa / h * (u0 * weight_B(SCHARFETTER_GUMMEL, -r) - uh * weight_B(SCHARFETTER_GUMMEL, r))


def pi_mean_quadrature(V, h, n_quad=16):
    """((1/h) int_0^h exp(V))^{-1} by composite 4-point Gauss-Legendre on n_quad panels."""
    if n_quad < 1:
        raise ConfigurationError("n_quad must be positive")
    xg, wg = np.polynomial.legendre.leggauss(4)
    edges = np.linspace(0.0, h, int(n_quad) + 1)
    c = 0.5 * (edges[:-1] + edges[1:])
    r = 0.5 * np.diff(edges)
    pts = (c[:, None] + r[:, None] * xg[None, :]).ravel()
    vals = np.exp(np.asarray(V(pts), dtype=float))
    integral = float(np.sum((r[:, None] * wg[None, :]).ravel() * vals))
    return h / integral


def _lambda(a):
    # (e^a - a - 1) / (e^-a + a - 1) with a = Vbar / 2
    if abs(a) < 1e-3:
        return (1 + a / 3 + a * a / 12 + a ** 3 / 60) / (1 - a / 3 + a * a / 12 - a ** 3 / 60)
    return (math.expm1(a) - a) / (math.expm1(-a) + a)


@dataclass(frozen=True)
class SqraPotential:
    """Piecewise-linear edge potential whose pi-mean is the geometric mean.

    V rises linearly from V0 to Vc = (V0 + Vh)/2 on [0, x1], stays at Vc
    on [x1, x2] and rises linearly to Vh on [x2, h]. With alpha + beta = 1
    the plateau is empty (x1 = x2).
    """

    V0: float
    Vh: float
    h: float
    Vc: float
    lam: float
    alpha: float
    beta: float
    x1: float
    x2: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.Vc)
        left = x < self.x1
        right = x > self.x2
        out[left] = self.V0 + (self.Vc - self.V0) * x[left] / self.x1
        out[right] = self.Vc + (self.Vh - self.Vc) * (x[right] - self.x2) / (self.h - self.x2)
        return out

    @property
    def delta1(self):
        """Gap to the linear interpolant at x1."""
        return abs(self.V0 - self.Vc + self.alpha * (self.Vh - self.V0))

    @property
    def delta2(self):
        return abs(self.V0 - self.Vc + (1.0 - self.beta) * (self.Vh - self.V0))

    def mean_exp(self, n_points=64):
        """(1/h) int_0^h exp(V) with n-point Gauss-Legendre on each linear piece."""
        xg, wg = np.polynomial.legendre.leggauss(int(n_points))
        total = 0.0
        for lo, hi in ((0.0, self.x1), (self.x1, self.x2), (self.x2, self.h)):
            if hi > lo:
                c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
                total += r * float(np.sum(wg * np.exp(self(c + r * xg))))
        return total / self.h


def sqra_potential_construct(V0, Vh, h):
    V0, Vh, h = float(V0), float(Vh), float(h)
    if not h > 0:
        raise ConfigurationError("edge length must be positive")
    lam = _lambda(0.5 * (Vh - V0))
    alpha = lam / (1.0 + lam)
    beta = 1.0 - alpha
    x1 = alpha * h
    return SqraPotential(V0, Vh, h, 0.5 * (V0 + Vh), lam, alpha, beta, x1, x1)
