"""Discrete norms, error reports, convergence rates and scheme comparisons."""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from .assembly import assemble, evaluate_coefficient
from .errors import ConfigurationError
from .linsolve import solve, solve_problem
from .means import MeanSpec, log_mean_from_potential
from .mesh import build_vertex_mesh, poincare_constant

_GAUSS2 = (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0))


def _node_weights(mesh, v):
    v = np.asarray(v, dtype=float)
    if len(v) == mesh.n_cells:
        return mesh.volumes, v
    if len(v) == mesh.n_cells + int(np.sum(~mesh.is_interior)):
        return mesh.volumes, v[: mesh.n_cells]
    raise ConfigurationError(f"vector of length {len(v)} does not match the mesh")


def norm_L2_P(mesh, v):
    """sqrt(sum_i m_i v_i^2) over cell nodes (boundary points carry no volume)."""
    m, v = _node_weights(mesh, v)
    return float(np.sqrt(np.sum(m * v * v)))


def norm_L2pi_P(mesh, pi, v):
    """sqrt(sum_i m_i v_i^2 / pi_i)."""
    m, v = _node_weights(mesh, v)
    _, p = _node_weights(mesh, pi)
    return float(np.sqrt(np.sum(m * v * v / p)))


def norm_L2_E(mesh, w):
    """sqrt(sum_ij m_ij h_ij w_ij^2) over all interfaces."""
    w = np.asarray(w, dtype=float)
    return float(np.sqrt(np.sum(mesh.area * mesh.edge_length * w * w)))


def norm_L2S_E(mesh, S, w):
    w = np.asarray(w, dtype=float)
    return float(np.sqrt(np.sum(mesh.area * mesh.edge_length * w * w / np.asarray(S))))


def norm_HT(system, v):
    """Energy norm sqrt(sum (m/h) kappa S (v_j - v_i)^2) of a node vector."""
    v = np.asarray(v, dtype=float)
    dv = v[system.edge_j] - v[system.edge_i]
    return float(np.sqrt(np.sum(system.coupling * dv * dv)))


def discrete_flux(system, U):
    """J_ij = -(kappa_ij / h_ij) S_ij (U_j - U_i), oriented from i to j."""
    U = np.asarray(U, dtype=float)
    return -system.kappa / system.h * system.S * (U[system.edge_j] - U[system.edge_i])


def reference_flux_on_edges(mesh, ref):
    """Reference flux J at every interface point of a 1D mesh."""
    if mesh.dim != 1:
        raise ConfigurationError("reference fluxes are one-dimensional")
    return ref.J_at(mesh.midpoint[:, 0])


@dataclass(frozen=True)
class ErrorReport:
    err_u_L2: float
    err_u_L2pi: float
    err_flux_L2: float
    err_flux_L2S: float
    err_HT: float
    h: float = float("nan")
    n: int = 0

    def as_dict(self):
        return {
            "err_u_L2": self.err_u_L2, "err_u_L2pi": self.err_u_L2pi,
            "err_flux_L2": self.err_flux_L2, "err_flux_L2S": self.err_flux_L2S,
            "err_HT": self.err_HT,
        }


def error_report(system, U, ref):
    """Errors of a 1D solution against a reference on the unknown nodes and all edges."""
    mesh = system.mesh
    if mesh.dim != 1:
        raise ConfigurationError("error reports need a 1D reference")
    U = np.asarray(U, dtype=float)
    u = U * system.pi
    x = system.points[:, 0]
    u_ref = ref.u_at(x)
    e_u = np.zeros(system.n_nodes)
    e_u[system.unknown] = (u - u_ref)[system.unknown]
    J = discrete_flux(system, U)
    e_J = J - reference_flux_on_edges(mesh, ref)
    U_ref = u_ref / system.pi
    e_U = U - U_ref
    e_U[system.dirichlet] = 0.0
    return ErrorReport(
        err_u_L2=norm_L2_P(mesh, e_u),
        err_u_L2pi=norm_L2pi_P(mesh, system.pi, e_u),
        err_flux_L2=norm_L2_E(mesh, e_J),
        err_flux_L2S=norm_L2S_E(mesh, system.S, e_J),
        err_HT=norm_HT(system, e_U),
        h=mesh.diameter,
        n=mesh.n_cells,
    )


def fit_eoc(hs, errs):
    """Least-squares slope of log(err) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if len(hs) < 3:
        raise ConfigurationError("need at least three levels to fit a rate")
    if len(np.unique(hs)) != len(hs):
        raise ConfigurationError("mesh sizes must be distinct")
    if np.any(~(errs > 0)) or np.any(~(hs > 0)):
        raise ConfigurationError("sizes and errors must be positive")
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


@dataclass
class ConvergenceTable:
    mean: MeanSpec
    rows: list = field(default_factory=list)

    @property
    def hs(self):
        return np.array([r.h for r in self.rows])

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def eoc(self, name="err_u_L2"):
        return fit_eoc(self.hs, self.column(name))

    @property
    def eoc_u(self):
        return self.eoc("err_u_L2")

    @property
    def eoc_flux(self):
        return self.eoc("err_flux_L2")


def level_nodes(k):
    return 2 ** int(k) + 1


def solve_and_report(problem, mesh, mean, ref):
    sol = solve_problem(problem, mesh, mean)
    return error_report(sol.system, sol.U, ref)


def convergence_study(problem, mean, levels, ref):
    """Error reports on vertex meshes with 2^k + 1 nodes for each k in ``levels``."""
    table = ConvergenceTable(mean)
    for k in levels:
        mesh = build_vertex_mesh(problem.domain, level_nodes(k))
        table.rows.append(solve_and_report(problem, mesh, mean, ref))
    return table


@dataclass(frozen=True)
class FluxGap:
    flux_gap: float
    bound_rhs: float

    @property
    def satisfied(self):
        return self.flux_gap ** 2 <= 1.05 * self.bound_rhs


def _ratio_term(log_hat, log_s):
    # (S_hat - S)^2 / (S_hat S) = 4 sinh^2((log S_hat - log S) / 2)
    return 4.0 * np.sinh(0.5 * (log_hat - log_s)) ** 2


def compare_schemes(sys_a, U_a, sys_b, U_b, hat_mean):
    """Flux gap of two schemes in the L2_{S_hat} norm and the a-posteriori bound.

    bound_rhs = (2 kappa^* / kappa_*) [sup (S_hat - S)^2/(S_hat S) ||J^S U||^2_{L2_S}
                                       + sup (S_hat - S~)^2/(S_hat S~) ||J^S~ U~||^2_{L2_S~}]
    """
    if sys_a.mesh is not sys_b.mesh and sys_a.n_nodes != sys_b.n_nodes:
        raise ConfigurationError("schemes must share the mesh")
    if not isinstance(hat_mean, MeanSpec):
        hat_mean = MeanSpec.parse(str(hat_mean))
    mesh = sys_a.mesh
    log_hat = log_mean_from_potential(hat_mean, sys_a.V[sys_a.edge_i], sys_a.V[sys_a.edge_j])
    S_hat = np.exp(log_hat)
    Ja = discrete_flux(sys_a, U_a)
    Jb = discrete_flux(sys_b, U_b)
    gap = norm_L2S_E(mesh, S_hat, Ja - Jb)
    sup_a = float(np.max(_ratio_term(log_hat, sys_a.log_S)))
    sup_b = float(np.max(_ratio_term(log_hat, sys_b.log_S)))
    na = norm_L2S_E(mesh, sys_a.S, Ja) ** 2
    nb = norm_L2S_E(mesh, sys_b.S, Jb) ** 2
    kap = np.concatenate([sys_a.kappa, sys_b.kappa])
    rhs = 2.0 * float(np.max(kap) / np.min(kap)) * (sup_a * na + sup_b * nb)
    return FluxGap(gap, rhs)


def compare_on_mesh(problem, mesh, mean_a, mean_b, hat_mean=None):
    sa = assemble(problem, mesh, mean_a)
    sb = assemble(problem, mesh, mean_b)
    Ua = sa.full_U(solve(sa).solution)
    Ub = sb.full_U(solve(sb).solution)
    return compare_schemes(sa, Ua, sb, Ub, hat_mean if hat_mean is not None else mean_a)


def face_quadrature(mesh, k):
    """Gauss points and weights (2 per tangential axis) on interface k."""
    c = mesh.midpoint[k]
    d = mesh.dim
    if d == 1:
        return c[None, :], np.array([mesh.area[k]])
    ax = int(np.argmax(np.abs(mesh.normal[k])))
    i = mesh.left[k]
    j = mesh.right[k]
    lo = np.array(mesh.lower[i])
    hi = np.array(mesh.upper[i])
    if j >= 0:
        lo = np.maximum(lo, mesh.lower[j])
        hi = np.minimum(hi, mesh.upper[j])
    tang = [a for a in range(d) if a != ax]
    pts = []
    for xi in itertools.product(_GAUSS2, repeat=d - 1):
        p = c.copy()
        for a, t in zip(tang, xi):
            p[a] = 0.5 * (lo[a] + hi[a]) + 0.5 * (hi[a] - lo[a]) * t
        pts.append(p)
    w = np.full(len(pts), mesh.area[k] / len(pts))
    return np.array(pts), w


def consistency_estimator(problem, mesh, mean, U_fn, gradU_fn, include_boundary=False):
    """sqrt(sum (h/m) (kappa_ij S_ij)^-1 (int_sigma kappa pi grad U . nu
                                            - kappa_ij S_ij (m/h) (U_j - U_i))^2)

    for a smooth field U with known gradient. By default only interfaces
    between two nodes enter; boundary half-edges are not centred on their
    face and are first-order consistent only.
    """
    system = assemble(problem, mesh, mean)
    sel = np.ones(mesh.n_interfaces, dtype=bool) if include_boundary else mesh.is_interior
    ks = np.flatnonzero(sel)
    all_pts, all_w, owner = [], [], []
    for k in ks:
        p, w = face_quadrature(mesh, k)
        all_pts.append(p)
        all_w.append(w)
        owner.append(np.full(len(w), k))
    pts = np.concatenate(all_pts)
    w = np.concatenate(all_w)
    owner = np.concatenate(owner)
    coords = pts.T
    grad = np.atleast_2d(np.asarray(gradU_fn(*coords), dtype=float))
    if grad.shape[0] != mesh.dim:
        grad = grad.T
    nu = mesh.normal[owner]
    kap = evaluate_coefficient(problem.kappa, pts, "kappa", positive=True)
    pi = np.exp(-evaluate_coefficient(problem.V, pts, "V"))
    integrand = kap * pi * np.sum(grad.T * nu, axis=1)
    flux_exact = np.zeros(mesh.n_interfaces)
    np.add.at(flux_exact, owner, w * integrand)
    Uv = np.asarray(U_fn(*system.points.T), dtype=float)
    kS = system.kappa * system.S
    flux_disc = kS * system.m / system.h * (Uv[system.edge_j] - Uv[system.edge_i])
    diff = (flux_exact - flux_disc)[ks]
    return float(np.sqrt(np.sum(system.h[ks] / system.m[ks] / kS[ks] * diff * diff)))


def reference_fields(problem, ref):
    """U = u/pi and its derivative -J/(kappa pi) from a 1D reference."""

    def U_fn(x):
        return ref.u_at(x) * np.exp(np.asarray(problem.V(x), dtype=float))

    def gradU_fn(x):
        x = np.asarray(x, dtype=float)
        pi = np.exp(-np.asarray(problem.V(x), dtype=float))
        kap = np.asarray(problem.kappa(x), dtype=float)
        return (-ref.J_at(x) / (kap * pi))[None, :]

    return U_fn, gradU_fn


def apriori_bound(system, U):
    """(lhs, rhs) of  sum (m/h) kappa S (dU)^2 <= C ||f||^2_{L2_pi},
    C = pi_max C_P / min(kappa_ij S_ij), for zero Dirichlet data.

    Also ||J^S U||^2_{L2_S} / kappa^* is bounded by the left-hand side.
    """
    U = np.asarray(U, dtype=float)
    mesh = system.mesh
    dU = U[system.edge_j] - U[system.edge_i]
    lhs = float(np.sum(system.coupling * dU * dU))
    cells = system.unknown
    fbar = system.f_cell[cells] / mesh.volumes[cells]
    f_norm2 = float(np.sum(mesh.volumes[cells] * fbar ** 2 / system.pi[cells]))
    C = float(np.max(system.pi[cells])) * poincare_constant(mesh) / float(np.min(system.kappa * system.S))
    return lhs, C * f_norm2


def poincare_terms(mesh, u):
    """(||u||^2_{L2(P)}, C_P sum (m_ij/h_ij) (u_j - u_i)^2) for u vanishing at
    the Dirichlet nodes; ``u`` is given on cells followed by boundary points."""
    u = np.asarray(u, dtype=float)
    nc = mesh.n_cells
    nb = int(np.sum(~mesh.is_interior))
    if len(u) == nc:
        u = np.concatenate([u, np.zeros(nb)])
    ej = np.array(mesh.right)
    ej[~mesh.is_interior] = nc + np.arange(nb)
    du = u[ej] - u[mesh.left]
    rhs = poincare_constant(mesh) * float(np.sum(mesh.area / mesh.edge_length * du * du))
    return norm_L2_P(mesh, u) ** 2, rhs


def integration_by_parts_terms(mesh, U):
    """Both sides of sum_i sum_{j~i} (U_j - U_i) U_i = -sum_edges (U_j - U_i)^2
    for U vanishing at Dirichlet nodes."""
    U = np.asarray(U, dtype=float)
    nc = mesh.n_cells
    nb = int(np.sum(~mesh.is_interior))
    if len(U) == nc:
        U = np.concatenate([U, np.zeros(nb)])
    ej = np.array(mesh.right)
    ej[~mesh.is_interior] = nc + np.arange(nb)
    ei = mesh.left
    dU = U[ej] - U[ei]
    lhs = float(np.sum(dU * U[ei]) + np.sum(-dU * U[ej]))
    return lhs, -float(np.sum(dU * dU))
