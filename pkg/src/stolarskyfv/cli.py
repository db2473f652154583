"""Command-line interface.

    stolarskyfv SUBCOMMAND [--config FILE] [--key=value ...]

Subcommands: solve, sweep, convergence, compare, reference, check.
Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import contextlib
import csv
import math
import sys

import numpy as np

from . import _kernels, checks
from .analysis import compare_on_mesh, error_report, fit_eoc, level_nodes
from .config import merge, parse_config_text, parse_overrides
from .errors import ConfigurationError, ExprError, StolarskyFVError
from .linsolve import solve_problem
from .means import MeanSpec
from .mesh import build_vertex_mesh
from .reference import shoot_reference

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

REPORT_FIELDS = ("err_u_L2", "err_u_L2pi", "err_flux_L2", "err_flux_L2S")
SUBCOMMANDS = ("solve", "sweep", "convergence", "compare", "reference", "check")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


@contextlib.contextmanager
def _open_out(path, stream):
    if path in ("", "-"):
        yield stream
        stream.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def write_csv(path, header, rows, stream=None):
    with _open_out(path, stream or sys.stdout) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _summary_stream(cfg):
    return cfg["summary"] or None


def _emit_summary(cfg, header, rows):
    path = _summary_stream(cfg)
    write_csv(path if path else "-", header, rows, stream=sys.stderr)


def _reference(cfg, problem):
    return shoot_reference(problem, **cfg.reference_args())


# worker state for the parallel map; set in each process by the initializer
_STATE = {}


def _init_worker(state):
    _STATE.clear()
    _STATE.update(state)


def _sweep_cell(ab):
    alpha, beta = ab
    try:
        sol = solve_problem(_STATE["problem"], _STATE["mesh"], MeanSpec.general(alpha, beta), **_STATE["solver"])
        rep = error_report(sol.system, sol.U, _STATE["ref"])
        return alpha, beta, [getattr(rep, k) for k in REPORT_FIELDS], ""
    except StolarskyFVError as exc:
        return alpha, beta, [math.nan] * len(REPORT_FIELDS), f"{type(exc).__name__}: {exc}"


def _convergence_cell(task):
    mean_text, k = task
    try:
        mesh = build_vertex_mesh(_STATE["problem"].domain, level_nodes(k))
        sol = solve_problem(_STATE["problem"], mesh, MeanSpec.parse(mean_text), **_STATE["solver"])
        rep = error_report(sol.system, sol.U, _STATE["ref"])
        return rep, ""
    except StolarskyFVError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def parallel_map(fn, items, workers, state):
    """Order-preserving map; every cell is a pure function of its item and ``state``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        _init_worker(state)
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(state,)) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def cmd_solve(cfg):
    problem = cfg.problem()
    mesh = cfg.mesh()
    sol = solve_problem(problem, mesh, cfg.mean(), **cfg.solver_args())
    pts = sol.system.points
    names = ["x", "y", "z"][: mesh.dim] if mesh.dim <= 3 else [f"x{i}" for i in range(mesh.dim)]
    order = np.lexsort(pts.T[::-1])
    rows = ([*pts[i], sol.u[i], sol.U[i]] for i in order)
    write_csv(cfg.output, [*names, "u", "U"], rows)
    if cfg.reference_enabled:
        ref = _reference(cfg, problem)
        rep = error_report(sol.system, sol.U, ref)
        _emit_summary(cfg, ["mean", "n", *REPORT_FIELDS, "err_HT"],
                      [[str(cfg.mean()), mesh.n_cells, *[getattr(rep, k) for k in REPORT_FIELDS], rep.err_HT]])
    return EXIT_OK


def cmd_sweep(cfg):
    problem = cfg.problem()
    mesh = cfg.mesh()
    grid = cfg.sweep_grid()
    ref = _reference(cfg, problem)
    state = {"problem": problem, "mesh": mesh, "ref": ref, "solver": cfg.solver_args()}
    results = parallel_map(_sweep_cell, grid, cfg.workers, state)
    write_csv(cfg.output, ["alpha", "beta", *REPORT_FIELDS], ([a, b, *errs] for a, b, errs, _ in results))
    failures = [(a, b, msg) for a, b, _, msg in results if msg]
    for a, b, msg in failures:
        print(f"sweep cell alpha={a:g} beta={b:g} failed: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if failures else EXIT_OK


def cmd_convergence(cfg):
    problem = cfg.problem()
    if problem.dim != 1:
        raise ConfigurationError("convergence studies use the 1D reference solver")
    levels = cfg.levels()
    means = cfg.means()
    ref = _reference(cfg, problem)
    tasks = [(str(m), k) for m in means for k in levels]
    state = {"problem": problem, "ref": ref, "solver": cfg.solver_args()}
    results = parallel_map(_convergence_cell, tasks, cfg.workers, state)
    header = ["mean", "level", "n", "h", *REPORT_FIELDS, "err_HT"]
    rows = []
    failed = False
    for (mean, k), (rep, msg) in zip(tasks, results):
        if rep is None:
            failed = True
            print(f"convergence cell {mean} k={k} failed: {msg}", file=sys.stderr)
            rows.append([mean, k, level_nodes(k), math.nan, *[math.nan] * (len(REPORT_FIELDS) + 1)])
        else:
            rows.append([mean, k, level_nodes(k), rep.h, *[getattr(rep, f) for f in REPORT_FIELDS], rep.err_HT])
    # one summary row per mean holding the fitted orders in the error columns
    for m in means:
        mine = [r for r in rows if r[0] == str(m)]
        hs = [r[3] for r in mine]
        eocs = []
        for col in range(4, len(header)):
            try:
                eocs.append(fit_eoc(hs, [r[col] for r in mine]))
            except ConfigurationError:
                eocs.append(math.nan)
        rows.append([str(m), "eoc", "", "", *eocs])
    write_csv(cfg.output, header, rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def gap_slope(hs, gaps):
    """Fitted slope of log(gap) against log(h); inf when the schemes agree exactly."""
    gaps = np.asarray(gaps, dtype=float)
    if np.all(gaps == 0.0):
        return math.inf
    if np.any(~(gaps > 0)):
        return math.nan
    return fit_eoc(hs, gaps)


def cmd_compare(cfg):
    problem = cfg.problem()
    levels = cfg.levels()
    a, b, hat = cfg.compare_means()
    rows, hs, gaps = [], [], []
    for k in levels:
        mesh = cfg.mesh(n=level_nodes(k)) if cfg["mesh.kind"] == "interval" else None
        if mesh is None:
            raise ConfigurationError("compare refines interval meshes by level")
        res = compare_on_mesh(problem, mesh, a, b, hat)
        hs.append(mesh.diameter)
        gaps.append(res.flux_gap)
        rows.append([k, level_nodes(k), mesh.diameter, res.flux_gap, res.bound_rhs, res.satisfied])
    rows.append(["slope", "", "", gap_slope(hs, gaps), "", ""])
    write_csv(cfg.output, ["level", "n", "h", "flux_gap", "bound_rhs", "bound_ok"], rows)
    return EXIT_OK


def cmd_reference(cfg):
    problem = cfg.problem()
    ref = _reference(cfg, problem)
    write_csv(cfg.output, ["x", "u", "J"], zip(ref.x, ref.u, ref.J))
    _emit_summary(cfg, ["n_grid", "J_a", "residual", "iterations"],
                  [[ref.n_grid, ref.J_a, ref.residual, ref.iterations]])
    return EXIT_OK


def cmd_check(cfg):
    samples = int(cfg["check.samples"])
    results = checks.run_all(samples=samples, seed=cfg.seed)
    rows = [[r.name, r.passed, r.detail] for r in results]
    rows.append(["backend", True, _kernels.BACKEND])
    write_csv(cfg.output, ["check", "passed", "detail"], rows)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "convergence": cmd_convergence,
    "compare": cmd_compare,
    "reference": cmd_reference,
    "check": cmd_check,
}


def build_config(argv):
    parser = argparse.ArgumentParser(
        prog="stolarskyfv",
        description="Stolarsky-mean finite volume schemes for the stationary Fokker-Planck equation.",
        epilog="Any configuration key may be given as --key=value, e.g. --problem.V='2*sin(2*pi*x)'.",
    )
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key = value configuration file")
    args, rest = parser.parse_known_args(argv)
    layers = []
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                layers.append(parse_config_text(fh.read(), args.config))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file: {exc}") from exc
    layers.append(parse_overrides(rest))
    return args.command, merge(*layers)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, cfg = build_config(argv)
    except (ConfigurationError, ExprError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[command](cfg)
    except (ConfigurationError, ExprError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StolarskyFVError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
