"""Embedded randomized property suite (run by ``stolarskyfv check``).

Each check draws from a seeded generator and returns a ``CheckResult``;
nothing here raises on a failed property.
"""
from dataclasses import dataclass
import math

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .analysis import integration_by_parts_terms, poincare_terms
from .assembly import Problem, apply_operator_U_form, apply_operator_u_form, assemble
from .exprparse import BinOp, Call, Const, Neg, Num, Var, evaluate, parse, to_string
from .gradientflow import cosh_dissipation, energy, geometric_factorization
from .linsolve import conjugate_gradient
from .means import (
    TABLE_MEANS, MeanSpec, diag_second_derivative, log_weight, stolarsky,
)
from .mesh import Box, build_cubic_mesh, build_interval_mesh
from .reference import sqra_potential_construct


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_mean(rng, p_named=0.3):
    if rng.random() < p_named:
        return TABLE_MEANS[int(rng.integers(len(TABLE_MEANS)))]
    a, b = rng.uniform(-6.0, 6.0, 2)
    return MeanSpec.general(a, b)


def _finite_means(rng, n):
    # parameter pairs for the pointwise identities; the limit means are exercised separately
    return [MeanSpec.general(*rng.uniform(-6.0, 6.0, 2)) for _ in range(n)]


def check_mean_identities(rng, samples):
    specs = _finite_means(rng, samples) + list(TABLE_MEANS)
    worst = {"diag": 0.0, "sym": 0.0, "homog": 0.0, "bounds": 0.0, "reflect": 0.0}
    for spec in specs:
        x, y = np.exp(rng.uniform(-5.0, 5.0, 2))
        t = math.exp(rng.uniform(-3.0, 3.0))
        sxy = stolarsky(spec, x, y)
        worst["diag"] = max(worst["diag"], abs(stolarsky(spec, x, x) - x) / x)
        worst["sym"] = max(worst["sym"], abs(sxy - stolarsky(spec, y, x)) / sxy)
        worst["homog"] = max(worst["homog"], abs(stolarsky(spec, t * x, t * y) - t * sxy) / (t * sxy))
        lo, hi = min(x, y), max(x, y)
        worst["bounds"] = max(worst["bounds"], max(lo - sxy, sxy - hi, 0.0) / hi)
        s = rng.uniform(-40.0, 40.0)
        r = abs(float(log_weight(spec, -s)) - s - float(log_weight(spec, s))) / (1.0 + abs(s))
        worst["reflect"] = max(worst["reflect"], r)
    ok = (worst["diag"] <= 1e-14 and worst["sym"] <= 1e-14 and worst["homog"] <= 1e-12
          and worst["bounds"] == 0.0 and worst["reflect"] <= 1e-13)
    detail = " ".join(f"{k}={v:.2e}" for k, v in worst.items())
    return CheckResult("stolarsky-identities", ok, detail)


def fd_second_derivative(spec, x, rel_step=1e-2):
    """Richardson-extrapolated central difference of x -> S(x, x0) at x0."""

    def d2(d):
        return (stolarsky(spec, x + d, x) - 2.0 * x + stolarsky(spec, x - d, x)) / (d * d)

    d = rel_step * x
    return (4.0 * d2(0.5 * d) - d2(d)) / 3.0


def check_second_derivative(rng, samples):
    worst = 0.0
    for spec in _finite_means(rng, samples):
        x = math.exp(rng.uniform(-3.0, 3.0))
        exact = float(diag_second_derivative(spec, x))
        approx = fd_second_derivative(spec, x)
        # relative to the natural scale 1/(12 x) when the coefficient nearly vanishes
        worst = max(worst, abs(approx - exact) / max(abs(exact), 1.0 / (12.0 * x)))
    return CheckResult("second-derivative", worst <= 1e-5, f"max rel err {worst:.2e}")


class _TrigPotential:
    """Random smooth potential sum_k c_k sin(k pi x + phase_k) (sum over axes)."""

    def __init__(self, rng, amplitude):
        self.c = rng.uniform(-amplitude, amplitude, 3)
        self.ph = rng.uniform(0.0, 2.0 * np.pi, 3)

    def __call__(self, *coords):
        out = 0.0
        for x in coords:
            for k in range(3):
                out = out + self.c[k] * np.sin((k + 1) * np.pi * x + self.ph[k])
        return out


def random_instance(rng):
    """A random mesh, problem and mean for the structural checks."""
    mean = random_mean(rng)
    V = _TrigPotential(rng, rng.uniform(0.0, 4.0))
    kap_c = rng.uniform(0.2, 2.0)

    def kappa(*coords):
        return kap_c * (1.5 + np.cos(coords[0]))

    if rng.random() < 0.6:
        n = int(rng.integers(3, 40))
        nodes = np.sort(rng.uniform(0.0, 1.0, n))
        if rng.random() < 0.5:
            nodes = np.concatenate([[0.0], nodes, [1.0]])
        nodes = np.unique(nodes)
        mesh = build_interval_mesh(Box((0.0,), (1.0,)), nodes=nodes)
        domain = Box((0.0,), (1.0,))
    else:
        domain = Box((0.0, 0.0), (1.0, 1.0))
        mesh = build_cubic_mesh(domain, 1.0 / int(rng.integers(2, 9)))
    problem = Problem(domain, V, 1.0, kappa, 0.0)
    return problem, mesh, mean


def check_structure(rng, instances):
    fails = []
    for k in range(instances):
        problem, mesh, mean = random_instance(rng)
        system = assemble(problem, mesh, mean)
        A = sp.csr_matrix(system.matrix)
        asym = abs(A - A.T)
        if asym.nnz and asym.max() != 0.0:
            fails.append(f"#{k} not symmetric")
        diag = A.diagonal()
        off = A - sp.diags(diag)
        if np.any(diag <= 0) or (off.nnz and off.max() > 0):
            fails.append(f"#{k} sign pattern")
        rowsum = np.asarray(A.sum(axis=1)).ravel()
        if np.any(rowsum < -1e-12 * diag):
            fails.append(f"#{k} not diagonally dominant")
        b = rng.standard_normal(A.shape[0])
        try:
            x, res, _ = conjugate_gradient(A, b, tol=1e-10)
        except Exception as exc:
            fails.append(f"#{k} CG failed: {exc}")
            continue
        # operator forms must agree: L(u) = pi-weighted L(U)
        U = system.full_U(x)
        lu = apply_operator_u_form(system, U * system.pi)
        lU = apply_operator_U_form(system, U)
        if np.max(np.abs(lu - lU)) > 1e-9 * (1.0 + np.max(np.abs(lU))):
            fails.append(f"#{k} u-form and U-form differ")
        w = rng.standard_normal(mesh.n_cells)
        w[mesh.on_boundary] = 0.0
        lhs, rhs = integration_by_parts_terms(mesh, w)
        if abs(lhs - rhs) > 1e-12 * (1.0 + abs(rhs)):
            fails.append(f"#{k} summation by parts")
        l2, bound = poincare_terms(mesh, w)
        if l2 > bound * (1.0 + 1e-12):
            fails.append(f"#{k} Poincare {l2:.3e} > {bound:.3e}")
    ok = not fails
    return CheckResult("structure", ok, f"{instances} instances" + ("" if ok else ": " + "; ".join(fails[:5])))


def check_gradient_structure(rng, samples):
    ui, uj, pi_i, pi_j = np.exp(rng.uniform(-8.0, 8.0, (4, samples)))
    lhs, rhs = geometric_factorization(ui, uj, pi_i, pi_j)
    fact = float(np.max(np.abs(lhs - rhs) / rhs))
    mesh = build_cubic_mesh(Box((0.0, 0.0), (1.0, 1.0)), 0.25)
    ones = np.ones(mesh.n_cells)
    e0 = energy(mesh, ones, ones)
    nb = int(np.sum(~mesh.is_interior))
    u = np.exp(rng.uniform(-2.0, 2.0, mesh.n_cells + nb))
    kap = rng.uniform(0.5, 2.0, mesh.n_interfaces)
    psi = cosh_dissipation(mesh, kap, u, np.full(len(u), rng.uniform(-5.0, 5.0)))
    ok = fact <= 1e-12 and e0 == 0.0 and psi == 0.0
    return CheckResult("gradient-structure", ok, f"factorization {fact:.2e}, E(1)={e0}, Psi*(const)={psi}")


def check_sqra_construction(step=0.25):
    grid = np.arange(-3.0, 3.0 + 0.5 * step, step)
    worst = 0.0
    for V0 in grid:
        for Vh in grid:
            pot = sqra_potential_construct(V0, Vh, 1.0)
            target = math.exp(0.5 * (V0 + Vh))
            worst = max(worst, abs(pot.mean_exp() - target) / target)
    return CheckResult("sqra-construction", worst <= 1e-10, f"max rel err {worst:.2e}")


def check_backends(rng, samples):
    backends = _kernels.available_backends()
    if len(backends) < 2:
        return CheckResult("backend-agreement", True, "single backend: " + ", ".join(backends))
    mods = list(backends.values())
    s = rng.uniform(0.0, 50.0, samples)
    worst = 0.0
    for _ in range(20):
        a, b = rng.uniform(-6.0, 6.0, 2)
        r = [np.asarray(m.log_weight(a, b, s)) for m in mods]
        worst = max(worst, float(np.max(np.abs(r[0] - r[1]) / (1.0 + np.abs(r[1])))))
    return CheckResult("backend-agreement", worst <= 1e-13, f"max diff {worst:.2e}")


def random_expr(rng, depth=3):
    r = rng.random()
    if depth == 0 or r < 0.25:
        c = rng.random()
        if c < 0.4:
            return Num(float(np.round(rng.uniform(0.0, 5.0), 3)))
        if c < 0.8:
            return Var("x")
        return Const("pi")
    if r < 0.35:
        return Neg(random_expr(rng, depth - 1))
    if r < 0.5:
        return Call(str(rng.choice(["sin", "cos", "exp", "abs"])), random_expr(rng, depth - 1))
    op = str(rng.choice(["+", "-", "*"]))
    return BinOp(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))


def check_expressions(rng, samples):
    xs = rng.uniform(-1.0, 1.0, 16)
    bad = 0
    for _ in range(samples):
        node = random_expr(rng)
        text = to_string(node)
        again = parse(text)
        try:
            v1 = evaluate(node, {"x": xs})
            v2 = evaluate(again, {"x": xs})
        except Exception:
            continue
        if to_string(again) != text or not np.array_equal(v1, v2):
            bad += 1
    return CheckResult("expression-roundtrip", bad == 0, f"{bad} mismatches in {samples}")


def run_all(samples=2000, seed=0, instances=200):
    rng = np.random.default_rng(seed)
    return [
        check_mean_identities(rng, samples),
        check_second_derivative(rng, samples),
        check_structure(rng, instances),
        check_gradient_structure(rng, samples),
        check_sqra_construction(),
        check_backends(rng, samples),
        check_expressions(rng, min(samples, 500)),
    ]
