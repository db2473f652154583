"""Pure-Python/numpy versions of the hot kernels.

These are the fallback when the compiled ``_core`` module is unavailable
and double as its reference implementation in the backend tests.

Weighted Stolarsky weights are evaluated through

    log B_{a,b}(s) = s * (avg_{u in [b s, a s]} h(u) - 1),
    h(u) = 1 / (1 - exp(-u)) - 1 / u,

which is exact for every (a, b) including the limit cases a = 0, b = 0
and a = b, so no parameter branch can lose digits to cancellation.
"""
import numpy as np

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)

# Bernoulli series of h around 0, in powers of u**2 after the leading u/12.
_SERIES_CUT = 0.25
_AVG_CUT = 1.0


def h_fun(u):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _SERIES_CUT
    us = u[small]
    u2 = us * us
    out[small] = 0.5 + us * (1.0 / 12 + u2 * (-1.0 / 720 + u2 * (1.0 / 30240 + u2 * (-1.0 / 1209600 + u2 / 47900160.0))))
    ul = u[~small]
    with np.errstate(over="ignore"):
        out[~small] = -1.0 / np.expm1(-ul) - 1.0 / ul
    return out


def big_h(u):
    """Antiderivative of h: log(expm1(u) / u)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    neg = u < 0
    up = u[pos]
    un = u[neg]
    out[pos] = up + np.log(-np.expm1(-up)) - np.log(up)
    out[neg] = np.log(-np.expm1(un)) - np.log(-un)
    return out


def avg_h(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    lo = np.minimum(p, q)
    hi = np.maximum(p, q)
    width = hi - lo
    out = np.empty_like(lo)
    short = width < _AVG_CUT
    c = 0.5 * (lo[short] + hi[short])
    r = 0.5 * width[short]
    acc = np.zeros_like(c)
    for x, w in zip(GL_NODES, GL_WEIGHTS):
        acc += w * h_fun(c + r * x)
    out[short] = 0.5 * acc
    lw = width[~short]
    out[~short] = (big_h(hi[~short]) - big_h(lo[~short])) / lw
    return np.clip(out, 0.0, 1.0)


def log_weight(alpha, beta, s):
    s = np.asarray(s, dtype=float)
    return s * (avg_h(alpha * s, beta * s) - 1.0)


def thomas(lower, diag, upper, rhs):
    """Tridiagonal solve; ``lower[i]`` couples rows i+1 and i."""
    n = len(diag)
    lower = [float(v) for v in lower]
    upper = [float(v) for v in upper]
    diag = [float(v) for v in diag]
    rhs = [float(v) for v in rhs]
    cp = [0.0] * n
    dp = [0.0] * n
    b = diag[0]
    if b == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    cp[0] = upper[0] / b if n > 1 else 0.0
    dp[0] = rhs[0] / b
    for i in range(1, n):
        b = diag[i] - lower[i - 1] * cp[i - 1]
        if b == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        cp[i] = upper[i] / b if i < n - 1 else 0.0
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / b
    x = [0.0] * n
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def rk4_linear(h, u0, J0, f, inv_kappa, dV):
    """Classical RK4 for u' = -J/kappa - u V', J' = f.

    Coefficient arrays are sampled on the half-step grid (length 2n+1).
    Returns (u, J) on the n+1 full-step nodes.
    """
    n = (len(f) - 1) // 2
    f = f.tolist() if hasattr(f, "tolist") else list(f)
    ik = inv_kappa.tolist() if hasattr(inv_kappa, "tolist") else list(inv_kappa)
    p = dV.tolist() if hasattr(dV, "tolist") else list(dV)
    us = [0.0] * (n + 1)
    Js = [0.0] * (n + 1)
    u = float(u0)
    J = float(J0)
    us[0] = u
    Js[0] = J
    hh = 0.5 * h
    h6 = h / 6.0
    for k in range(n):
        i = 2 * k
        f0 = f[i]
        fm = f[i + 1]
        f1 = f[i + 2]
        J2 = J + hh * f0
        J3 = J + hh * fm
        J4 = J + h * fm
        ku1 = -J * ik[i] - u * p[i]
        ku2 = -J2 * ik[i + 1] - (u + hh * ku1) * p[i + 1]
        ku3 = -J3 * ik[i + 1] - (u + hh * ku2) * p[i + 1]
        ku4 = -J4 * ik[i + 2] - (u + h * ku3) * p[i + 2]
        u = u + h6 * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4)
        J = J + h6 * (f0 + 4.0 * fm + f1)
        us[k + 1] = u
        Js[k + 1] = J
    return np.array(us), np.array(Js)
