"""Discrete gradient structure of the geometric-mean (SQRA) scheme.

Energy      E(u)      = sum_i m_i (u_i log(u_i / pi_i) - u_i + 1)
Dissipation Psi*(u,xi) = sum_i sum_{j~i} m_ij h_ij kappa_ij sqrt(u_i u_j) h_ij^-2 C*(xi_i - xi_j)
with C*(r) = 2 (cosh(r/2) - 1); every edge appears twice in the double sum.
"""
import numpy as np

from .errors import DomainError
from .means import GEOMETRIC, stolarsky


def c_star(r):
    return 2.0 * (np.cosh(0.5 * np.asarray(r, dtype=float)) - 1.0)


def energy(mesh, u, pi):
    """Relative entropy of u with respect to pi over the cells of ``mesh``."""
    u = np.asarray(u, dtype=float)[: mesh.n_cells]
    pi = np.asarray(pi, dtype=float)[: mesh.n_cells]
    if np.any(~(u > 0)) or np.any(~(pi > 0)):
        raise DomainError("energy needs u > 0 and pi > 0")
    return float(np.sum(mesh.volumes * (u * np.log(u / pi) - u + 1.0)))


def energy_derivative(mesh, u, pi):
    """DE(u) per unit volume, log(u / pi)."""
    u = np.asarray(u, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("DE needs u > 0")
    return np.log(u / pi)


def _edge_nodes(mesh):
    ej = np.array(mesh.right)
    nb = int(np.sum(~mesh.is_interior))
    ej[~mesh.is_interior] = mesh.n_cells + np.arange(nb)
    return np.asarray(mesh.left), ej


def cosh_dissipation(mesh, kappa_ij, u, xi):
    """Dual dissipation potential Psi*(u, xi); ``u`` and ``xi`` live on all nodes."""
    u = np.asarray(u, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("dissipation needs u > 0")
    ei, ej = _edge_nodes(mesh)
    h = mesh.edge_length
    w = mesh.area * h * np.asarray(kappa_ij, dtype=float) * np.sqrt(u[ei] * u[ej]) / (h * h)
    # both orientations of each edge: C* is even
    return float(2.0 * np.sum(w * c_star(xi[ei] - xi[ej])))


def dissipation_gradient(mesh, kappa_ij, u, xi):
    """d Psi* / d xi at every node."""
    u = np.asarray(u, dtype=float)
    xi = np.asarray(xi, dtype=float)
    ei, ej = _edge_nodes(mesh)
    h = mesh.edge_length
    w = mesh.area / h * np.asarray(kappa_ij, dtype=float) * np.sqrt(u[ei] * u[ej])
    g = 2.0 * w * np.sinh(0.5 * (xi[ei] - xi[ej]))
    out = np.zeros(len(u))
    np.add.at(out, ei, g)
    np.add.at(out, ej, -g)
    return out


def kinetic_coefficient(u_i, u_j, pi_i, pi_j):
    """a_ij = sqrt(u_i u_j / (pi_i pi_j))."""
    args = [np.asarray(v, dtype=float) for v in (u_i, u_j, pi_i, pi_j)]
    if any(np.any(~(a > 0)) for a in args):
        raise DomainError("kinetic coefficient needs positive arguments")
    u_i, u_j, pi_i, pi_j = args
    out = np.sqrt(u_i * u_j / (pi_i * pi_j))
    return out if np.ndim(out) else float(out)


def geometric_factorization(u_i, u_j, pi_i, pi_j):
    """(S_{-1,1}(pi_i, pi_j) a_ij, sqrt(u_i u_j)); equal for every pi."""
    lhs = stolarsky(GEOMETRIC, pi_i, pi_j) * kinetic_coefficient(u_i, u_j, pi_i, pi_j)
    return lhs, np.sqrt(np.asarray(u_i, dtype=float) * np.asarray(u_j, dtype=float))
