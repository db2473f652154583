"""Assembly of the symmetric Stolarsky finite-volume scheme.

In the variable U = u / pi, pi = exp(-V), the scheme reads

    -sum_j (m_ij / h_ij) kappa_ij S_ij (U_j - U_i) = f_i,   f_i = int_{Omega_i} f,

with S_ij = S_{alpha,beta}(pi_i, pi_j). Nodes are the cell nodes followed
by one boundary point per boundary interface; Dirichlet data lives on the
boundary points and on cells whose node sits on the boundary.
"""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, InvalidMeshError, ProblemEvaluationError
from .exprparse import Expression
from .means import MeanSpec, log_mean_from_potential, log_weight
from .mesh import Box

_GAUSS2 = (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0))


class Constant:
    """Constant coefficient; picklable, unlike a closure."""

    def __init__(self, value):
        self.value = float(value)

    def __call__(self, *coords):
        if coords and np.ndim(coords[0]):
            return np.full(np.shape(coords[0]), self.value)
        return self.value

    def __repr__(self):
        return repr(self.value)


def _as_function(obj, name):
    if callable(obj):
        return obj
    if isinstance(obj, str):
        return Expression(obj)
    if np.isscalar(obj):
        return Constant(obj)
    raise ConfigurationError(f"{name} must be a callable, expression string or number")


class _IntervalBoundary:
    """Dirichlet data u(a) = u_a, u(b) = u_b on an interval."""

    def __init__(self, a, b, u_a, u_b):
        self.a, self.b, self.u_a, self.u_b = float(a), float(b), float(u_a), float(u_b)

    def __call__(self, x, *rest):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x - self.a) <= np.abs(x - self.b), self.u_a, self.u_b)

    def __repr__(self):
        return f"u({self.a:g})={self.u_a:g}, u({self.b:g})={self.u_b:g}"


@dataclass(frozen=True, eq=False)
class Problem:
    """Stationary Fokker-Planck problem on a box with Dirichlet data.

    Coefficients are functions of the coordinates ``(x, y, ...)`` that
    accept numpy arrays. ``dV`` is an optional exact derivative of V (1D),
    used by the reference solver instead of finite differences.
    """

    domain: Box
    V: object
    f: object
    kappa: object = 1.0
    boundary: object = 0.0
    dV: object = None
    name: str = ""

    def __post_init__(self):
        dom = self.domain if isinstance(self.domain, Box) else Box.from_bounds(self.domain)
        object.__setattr__(self, "domain", dom)
        for attr in ("V", "f", "kappa", "boundary"):
            object.__setattr__(self, attr, _as_function(getattr(self, attr), attr))
        if self.dV is not None:
            object.__setattr__(self, "dV", _as_function(self.dV, "dV"))

    @classmethod
    def interval(cls, V, f, kappa=1.0, a=0.0, b=1.0, u_a=0.0, u_b=1.0, dV=None, name=""):
        return cls(Box((a,), (b,)), V, f, kappa, _IntervalBoundary(a, b, u_a, u_b), dV, name)

    @property
    def dim(self):
        return self.domain.dim

    def with_boundary(self, boundary):
        return Problem(self.domain, self.V, self.f, self.kappa, boundary, self.dV, self.name)

    def with_f(self, f):
        return Problem(self.domain, self.V, f, self.kappa, self.boundary, self.dV, self.name)


def evaluate_coefficient(fn, points, name, positive=False):
    """Evaluate ``fn`` at the rows of ``points``; checks finiteness."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    try:
        vals = np.asarray(fn(*pts.T), dtype=float)
    except ProblemEvaluationError:
        raise
    except Exception as exc:
        raise ProblemEvaluationError(f"{name} could not be evaluated: {exc}") from exc
    vals = np.broadcast_to(vals, (len(pts),)).astype(float)
    bad = ~np.isfinite(vals)
    if positive:
        bad |= ~(vals > 0)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        what = "not positive" if np.isfinite(vals[k]) else "not finite"
        raise ProblemEvaluationError(f"{name} is {what} at {tuple(pts[k])}: {vals[k]!r}")
    return vals


def cell_quadrature(fn, lower, upper, name, positive=False):
    """Integrals of ``fn`` over boxes [lower, upper] with 2-point Gauss per axis."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n, d = lower.shape
    c = 0.5 * (lower + upper)
    r = 0.5 * (upper - lower)
    vol = np.prod(upper - lower, axis=1)
    pts = [c + r * np.array(xi) for xi in itertools.product(_GAUSS2, repeat=d)]
    vals = evaluate_coefficient(fn, np.concatenate(pts), name, positive).reshape(len(pts), n)
    return vol * vals.mean(axis=0)


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Assembled linear system together with everything needed to post-process it."""

    problem: Problem
    mesh: object
    mean: MeanSpec
    points: np.ndarray      # all nodes: cell nodes then boundary points
    V: np.ndarray           # potential at the nodes
    pi: np.ndarray
    unknown: np.ndarray     # node indices of the unknowns (in matrix order)
    dirichlet: np.ndarray   # node indices carrying Dirichlet data
    U_dirichlet: np.ndarray  # U = u / pi at the Dirichlet nodes
    edge_i: np.ndarray
    edge_j: np.ndarray
    m: np.ndarray
    h: np.ndarray
    kappa_bar: np.ndarray   # cell averages of kappa
    kappa: np.ndarray       # interface diffusivities kappa_ij
    log_S: np.ndarray
    f_cell: np.ndarray      # int_{Omega_i} f over all cells
    matrix: sp.csr_matrix
    rhs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self):
        return len(self.points)

    @property
    def n_unknowns(self):
        return len(self.unknown)

    @property
    def S(self):
        return np.exp(self.log_S)

    @property
    def coupling(self):
        """(m_ij / h_ij) kappa_ij S_ij per edge."""
        return self.m / self.h * self.kappa * self.S

    @property
    def node_volumes(self):
        """m_i for cell nodes, zero for boundary points."""
        out = np.zeros(self.n_nodes)
        out[: self.mesh.n_cells] = self.mesh.volumes
        return out

    def full_U(self, solution):
        """Scatter the unknowns and the Dirichlet data into a node vector."""
        U = np.empty(self.n_nodes)
        U[self.unknown] = solution
        U[self.dirichlet] = self.U_dirichlet
        return U

    def with_mean(self, mean):
        return assemble(self.problem, self.mesh, mean)


def kappa_edge(kappa_i, kappa_j, d_i, d_j, h):
    """Interface diffusivity kappa_i kappa_j h / (kappa_i d_i + kappa_j d_j)."""
    kappa_i, kappa_j, d_i, d_j, h = (np.asarray(v, dtype=float) for v in (kappa_i, kappa_j, d_i, d_j, h))
    out = kappa_i * kappa_j / (kappa_i * d_i / h + kappa_j * d_j / h)
    return out if np.ndim(out) else float(out)


def assemble(problem, mesh, mean):
    """Assemble the U-form system for ``problem`` on ``mesh`` with ``mean``."""
    if not isinstance(mean, MeanSpec):
        mean = MeanSpec.parse(str(mean))
    if mesh.dim != problem.dim:
        raise InvalidMeshError(f"mesh is {mesh.dim}D but the problem is {problem.dim}D")
    nc = mesh.n_cells
    bmask = ~mesh.is_interior
    bpts = mesh.midpoint[bmask]
    points = np.concatenate([mesh.centers, bpts]) if len(bpts) else np.array(mesh.centers)
    n_nodes = len(points)

    V = evaluate_coefficient(problem.V, points, "V")
    kappa_bar = cell_quadrature(problem.kappa, mesh.lower, mesh.upper, "kappa", positive=True) / mesh.volumes
    f_cell = np.zeros(nc)
    interior_cells = ~mesh.on_boundary
    if np.any(interior_cells):
        f_cell[interior_cells] = cell_quadrature(
            problem.f, mesh.lower[interior_cells], mesh.upper[interior_cells], "f"
        )

    ei = np.array(mesh.left, dtype=np.int64)
    ej = np.array(mesh.right, dtype=np.int64)
    ej[bmask] = nc + np.arange(int(bmask.sum()))
    m = np.array(mesh.area, dtype=float)
    h = mesh.edge_length
    dl = mesh.d_left
    dr = mesh.d_right
    kap = np.empty(len(m))
    inner = ~bmask
    kap[inner] = kappa_edge(kappa_bar[ei[inner]], kappa_bar[mesh.right[inner]], dl[inner], dr[inner], h[inner])
    kap[bmask] = kappa_bar[ei[bmask]]
    log_S = log_mean_from_potential(mean, V[ei], V[ej])

    is_unknown = np.zeros(n_nodes, dtype=bool)
    is_unknown[:nc] = interior_cells
    unknown = np.flatnonzero(is_unknown)
    dirichlet = np.flatnonzero(~is_unknown)
    if len(unknown) == 0:
        raise InvalidMeshError("mesh has no unknowns")
    u_d = evaluate_coefficient(problem.boundary, points[dirichlet], "boundary data")
    U_d = u_d * np.exp(V[dirichlet])

    a = m / h * kap * np.exp(log_S)
    pos = np.full(n_nodes, -1, dtype=np.int64)
    pos[unknown] = np.arange(len(unknown))
    pi_ = pos[ei]
    pj_ = pos[ej]
    N = len(unknown)
    diag = np.zeros(N)
    np.add.at(diag, pi_[pi_ >= 0], a[pi_ >= 0])
    np.add.at(diag, pj_[pj_ >= 0], a[pj_ >= 0])
    both = (pi_ >= 0) & (pj_ >= 0)
    rows = np.concatenate([np.arange(N), pi_[both], pj_[both]])
    cols = np.concatenate([np.arange(N), pj_[both], pi_[both]])
    vals = np.concatenate([diag, -a[both], -a[both]])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    A.sum_duplicates()
    A.sort_indices()

    Ufull = np.zeros(n_nodes)
    Ufull[dirichlet] = U_d
    rhs = f_cell[unknown].copy()
    only_i = (pi_ >= 0) & (pj_ < 0)
    only_j = (pj_ >= 0) & (pi_ < 0)
    np.add.at(rhs, pi_[only_i], a[only_i] * Ufull[ej[only_i]])
    np.add.at(rhs, pj_[only_j], a[only_j] * Ufull[ei[only_j]])

    return DiscreteSystem(
        problem=problem, mesh=mesh, mean=mean, points=points, V=V, pi=np.exp(-V),
        unknown=unknown, dirichlet=dirichlet, U_dirichlet=U_d, edge_i=ei, edge_j=ej,
        m=m, h=h, kappa_bar=kappa_bar, kappa=kap, log_S=log_S, f_cell=f_cell,
        matrix=A, rhs=rhs,
    )


def to_density(system, U):
    """u = U * pi on all nodes."""
    return np.asarray(U, dtype=float) * system.pi


def apply_operator_u_form(system, u):
    """(F u)_i - f_i for every unknown, using the Bernoulli-type weights.

    Independent of the U-form assembly: B(V_i - V_j) = S_ij / pi_j is
    evaluated from the potential difference directly.
    """
    u = np.asarray(u, dtype=float)
    ei, ej = system.edge_i, system.edge_j
    dV = system.V[ei] - system.V[ej]
    Bij = np.exp(log_weight(system.mean, dV))
    Bji = np.exp(log_weight(system.mean, -dV))
    w = system.m / system.h * system.kappa
    flux = -w * (Bij * u[ej] - Bji * u[ei])
    out = np.zeros(system.n_nodes)
    np.add.at(out, ei, flux)
    np.add.at(out, ej, -flux)
    res = out[system.unknown] - system.f_cell[system.unknown]
    return res


def apply_operator_U_form(system, U):
    """Residual of the U-form equations at the unknowns."""
    U = np.asarray(U, dtype=float)
    ei, ej = system.edge_i, system.edge_j
    flux = -system.coupling * (U[ej] - U[ei])
    out = np.zeros(system.n_nodes)
    np.add.at(out, ei, flux)
    np.add.at(out, ej, -flux)
    return out[system.unknown] - system.f_cell[system.unknown]
