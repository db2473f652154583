# cython: language_level=3
"""Compiled versions of the kernels in ``_pure``; same signatures and results."""
from libc.math cimport expm1, log, fabs

import numpy as np

cdef double GL_X[8]
cdef double GL_W[8]
_nodes, _weights = np.polynomial.legendre.leggauss(8)
for _k in range(8):
    GL_X[_k] = _nodes[_k]
    GL_W[_k] = _weights[_k]


cdef inline double _h(double u) noexcept nogil:
    cdef double u2
    if fabs(u) < 0.25:
        u2 = u * u
        return 0.5 + u * (1.0 / 12 + u2 * (-1.0 / 720 + u2 * (1.0 / 30240 + u2 * (-1.0 / 1209600 + u2 / 47900160.0))))
    return -1.0 / expm1(-u) - 1.0 / u


cdef inline double _big_h(double u) noexcept nogil:
    if u > 0:
        return u + log(-expm1(-u)) - log(u)
    if u < 0:
        return log(-expm1(u)) - log(-u)
    return 0.0


cdef double _avg_h(double p, double q) noexcept nogil:
    cdef double lo = p if p < q else q
    cdef double hi = q if p < q else p
    cdef double width = hi - lo
    cdef double c, r, acc, a
    cdef int k
    if width < 1.0:
        c = 0.5 * (lo + hi)
        r = 0.5 * width
        acc = 0.0
        for k in range(8):
            acc += GL_W[k] * _h(c + r * GL_X[k])
        a = 0.5 * acc
    else:
        a = (_big_h(hi) - _big_h(lo)) / width
    if a < 0.0:
        return 0.0
    if a > 1.0:
        return 1.0
    return a


def log_weight(double alpha, double beta, s):
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64).ravel()
    out = np.empty(sv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double si
    with nogil:
        for i in range(sv.shape[0]):
            si = sv[i]
            ov[i] = si * (_avg_h(alpha * si, beta * si) - 1.0)
    return out.reshape(np.shape(s))


def thomas(lower, diag, upper, rhs):
    cdef const double[::1] a = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(upper, dtype=np.float64)
    cdef const double[::1] d = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    cp_arr = np.zeros(n)
    dp_arr = np.zeros(n)
    x_arr = np.zeros(n)
    cdef double[::1] cp = cp_arr
    cdef double[::1] dp = dp_arr
    cdef double[::1] x = x_arr
    cdef double piv
    cdef Py_ssize_t i
    cdef bint bad = False
    with nogil:
        piv = b[0]
        if piv == 0.0:
            bad = True
        else:
            cp[0] = c[0] / piv if n > 1 else 0.0
            dp[0] = d[0] / piv
            for i in range(1, n):
                piv = b[i] - a[i - 1] * cp[i - 1]
                if piv == 0.0:
                    bad = True
                    break
                cp[i] = c[i] / piv if i < n - 1 else 0.0
                dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv
            if not bad:
                x[n - 1] = dp[n - 1]
                for i in range(n - 2, -1, -1):
                    x[i] = dp[i] - cp[i] * x[i + 1]
    if bad:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    return x_arr


def rk4_linear(double h, double u0, double J0, f, inv_kappa, dV):
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] ik = np.ascontiguousarray(inv_kappa, dtype=np.float64)
    cdef const double[::1] p = np.ascontiguousarray(dV, dtype=np.float64)
    cdef Py_ssize_t n = (fv.shape[0] - 1) // 2
    us_arr = np.empty(n + 1)
    Js_arr = np.empty(n + 1)
    cdef double[::1] us = us_arr
    cdef double[::1] Js = Js_arr
    cdef double u = u0, J = J0, hh = 0.5 * h, h6 = h / 6.0
    cdef double f0, fm, f1, J2, J3, J4, ku1, ku2, ku3, ku4
    cdef Py_ssize_t k, i
    us[0] = u
    Js[0] = J
    with nogil:
        for k in range(n):
            i = 2 * k
            f0 = fv[i]
            fm = fv[i + 1]
            f1 = fv[i + 2]
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
    return us_arr, Js_arr
