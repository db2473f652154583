import math

import numpy as np
import pytest
import scipy.sparse as sp

from stolarskyfv.assembly import (
    Problem, apply_operator_U_form, apply_operator_u_form, assemble, kappa_edge, to_density,
)
from stolarskyfv.errors import InvalidMeshError, ProblemEvaluationError
from stolarskyfv.linsolve import solve, solve_problem
from stolarskyfv.means import SG, SQRA, TABLE_MEANS, MeanSpec
from stolarskyfv.mesh import Box, build_cubic_mesh, build_interval_mesh, build_vertex_mesh
from stolarskyfv.reference import edge_flux_exact

UNIT = Box((0.0,), (1.0,))


@pytest.mark.parametrize("args,expected", [
    ((1.0, 3.0, 0.5, 0.5, 1.0), 1.5),
    ((2.0, 2.0, 0.1, 0.3, 0.4), 2.0),
    ((1.0, 1.0, 0.2, 0.2, 0.4), 1.0),
])
def test_kappa_edge(args, expected):
    assert kappa_edge(*args) == pytest.approx(expected, rel=1e-15)


def test_constant_kappa_gives_unit_edges():
    p = Problem(UNIT, "sin(x)", 0.0, 1.0, 0.0)
    s = assemble(p, build_interval_mesh(UNIT, nodes=[0.0, 0.1, 0.5, 0.55, 1.0]), SG)
    np.testing.assert_allclose(s.kappa, 1.0, rtol=1e-15)


@pytest.mark.parametrize("mean", TABLE_MEANS, ids=str)
def test_pure_laplace(mean):
    n = 9
    p = Problem.interval(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0)
    s = assemble(p, build_vertex_mesh(UNIT, n), mean)
    h = 1.0 / (n - 1)
    lap = sp.diags([-np.ones(n - 3), 2 * np.ones(n - 2), -np.ones(n - 3)], [-1, 0, 1]) / h
    assert abs(s.matrix - lap).max() < 1e-12
    np.testing.assert_array_equal(s.S, 1.0)


def test_affine_potential_single_node_reproduces_edge_flux():
    # one unknown between Dirichlet ends; f = 0, V = -q x
    q, h = 1.7, 0.5
    u0, u2 = 1.3, 0.4
    p = Problem.interval(f"-{q}*x", 0.0, 1.0, 0.0, 1.0, u0, u2)
    sol = solve_problem(p, build_vertex_mesh(UNIT, 3), SG)
    U = sol.U
    J = -sol.system.kappa / sol.system.h * sol.system.S * (U[sol.system.edge_j] - U[sol.system.edge_i])
    u1 = sol.u[1]
    assert J[0] == pytest.approx(edge_flux_exact(1.0, q, h, u0, u1), rel=1e-13)
    assert J[1] == pytest.approx(edge_flux_exact(1.0, q, h, u1, u2), rel=1e-13)
    assert J[0] == pytest.approx(J[1], rel=1e-13)


def random_problem(rng, dim):
    c = rng.uniform(-2, 2, 3)
    V = f"{c[0]}*sin(3*x) + {c[1]}*x*x" + (f" + {c[2]}*cos(2*y)" if dim == 2 else "")
    box = Box((0.0,) * dim, (1.0,) * dim)
    return Problem(box, V, "1 + x", "1 + 0.5*sin(x)", "x")


@pytest.mark.parametrize("dim", [1, 2])
def test_structure(dim):
    rng = np.random.default_rng(dim)
    for _ in range(5):
        p = random_problem(rng, dim)
        mesh = build_vertex_mesh(p.domain, 21) if dim == 1 else build_cubic_mesh(p.domain, 0.125)
        mean = MeanSpec.general(*rng.uniform(-5, 5, 2))
        s = assemble(p, mesh, mean)
        A = s.matrix
        assert (A != A.T).nnz == 0
        d = A.diagonal()
        off = A - sp.diags(d)
        assert np.all(d > 0) and off.max() <= 0
        # rows without Dirichlet neighbours sum to zero
        touched = np.zeros(s.n_unknowns, dtype=bool)
        pos = np.full(s.n_nodes, -1)
        pos[s.unknown] = np.arange(s.n_unknowns)
        for i, j in zip(s.edge_i, s.edge_j):
            if pos[i] < 0 and pos[j] >= 0:
                touched[pos[j]] = True
            if pos[j] < 0 and pos[i] >= 0:
                touched[pos[i]] = True
        rs = np.asarray(A.sum(axis=1)).ravel()
        assert np.all(np.abs(rs[~touched]) <= 1e-13 * d[~touched])
        lo = np.minimum(s.pi[s.edge_i], s.pi[s.edge_j])
        hi = np.maximum(s.pi[s.edge_i], s.pi[s.edge_j])
        assert np.all((s.S >= lo * (1 - 1e-14)) & (s.S <= hi * (1 + 1e-14)))


@pytest.mark.parametrize("mean", list(TABLE_MEANS) + [MeanSpec.general(3.2, 1.0)], ids=str)
def test_stationarity_residual(mean):
    p = Problem.interval("2*sin(2*pi*x)", 0.0, 1.0, 0.0, 1.0, 1.0, 1.0)
    s = assemble(p, build_vertex_mesh(UNIT, 65), mean)
    r = apply_operator_u_form(s, s.pi)
    rows = np.asarray(abs(s.matrix).sum(axis=1)).ravel()
    assert np.all(np.abs(r) <= 1e-12 * np.max(rows * s.pi[s.unknown]))


def test_u_and_U_forms_agree():
    rng = np.random.default_rng(11)
    p = random_problem(rng, 2)
    s = assemble(p, build_cubic_mesh(p.domain, 0.25), MeanSpec.general(1.5, -2.5))
    U = rng.uniform(0.5, 2.0, s.n_nodes)
    a = apply_operator_u_form(s, to_density(s, U))
    b = apply_operator_U_form(s, U)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(b)))


def test_to_density():
    p = Problem.interval("x", 0.0)
    s = assemble(p, build_vertex_mesh(UNIT, 5), SQRA)
    np.testing.assert_array_equal(to_density(s, np.ones(s.n_nodes)), s.pi)
    p0 = Problem.interval(0.0, 0.0)
    s0 = assemble(p0, build_vertex_mesh(UNIT, 5), SQRA)
    U = np.arange(s0.n_nodes, dtype=float)
    np.testing.assert_array_equal(to_density(s0, U), U)


def test_density_relation_scalar():
    # U_i = 2, pi_i = 0.5 -> u_i = 1
    p = Problem.interval(f"{math.log(2.0)}", 0.0)
    s = assemble(p, build_vertex_mesh(UNIT, 3), SG)
    assert to_density(s, np.full(s.n_nodes, 2.0))[1] == pytest.approx(1.0, rel=1e-15)


def test_cell_centred_mesh_has_boundary_nodes():
    p = Problem.interval(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0)
    s = assemble(p, build_interval_mesh(UNIT, n=4), SG)
    assert s.n_nodes == 6 and s.n_unknowns == 4
    sol = solve(s)
    np.testing.assert_allclose(s.full_U(sol.solution)[:4], [0.125, 0.375, 0.625, 0.875], rtol=1e-14)


def test_errors():
    with pytest.raises(ProblemEvaluationError, match="kappa"):
        assemble(Problem.interval(0.0, 0.0, "x - 0.5"), build_vertex_mesh(UNIT, 9), SG)
    with pytest.raises(ProblemEvaluationError, match="V"):
        assemble(Problem.interval("log(x - 0.3)", 0.0), build_vertex_mesh(UNIT, 9), SG)
    with pytest.raises(InvalidMeshError):
        assemble(Problem.interval(0.0, 0.0), build_cubic_mesh(Box((0, 0), (1, 1)), 0.5), SG)
