import csv
import io

import pytest

from stolarskyfv.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, fmt, main
from stolarskyfv.config import DEFAULTS, PRESETS, merge, parse_config_text, parse_overrides
from stolarskyfv.errors import ConfigurationError


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main([*args, f"--output={out}"])
    text = out.read_bytes().decode("utf-8") if out.exists() else ""
    return code, text


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_solve_example1_shape(tmp_path, capsys):
    code, text = run(["solve", "--preset=example1", "--mean=sg"], tmp_path)
    assert code == EXIT_OK
    r = rows(text)
    assert len(r) == 1025 and list(r[0]) == ["x", "u", "U"]
    assert "\r" not in text and text.endswith("\n")
    report = rows(capsys.readouterr().err)
    assert len(report) == 1 and float(report[0]["err_u_L2"]) < 1e-6


def test_solve_linear(tmp_path):
    code, text = run(["solve", "--problem.V=0", "--problem.f=0", "--mesh.n=65"], tmp_path)
    assert code == EXIT_OK
    assert max(abs(float(r["u"]) - float(r["x"])) for r in rows(text)) <= 1e-12


def test_seventeen_digits(tmp_path):
    _, text = run(["solve", "--problem.V=x", "--mesh.n=5"], tmp_path)
    r = rows(text)
    assert float(r[1]["x"]) == 0.25 and len(r[2]["u"].replace(".", "").lstrip("0")) >= 15
    assert fmt(0.1) == "0.10000000000000001" and fmt(float("nan")) == "nan"


def test_sweep_single_cell_equals_solve(tmp_path, capsys):
    code, text = run(["sweep", "--preset=example1", "--sweep.alpha=3.2,3.2", "--sweep.beta=1,1"], tmp_path)
    assert code == EXIT_OK
    sweep = rows(text)
    assert len(sweep) == 1
    capsys.readouterr()
    summary = tmp_path / "report.csv"
    main(["solve", "--preset=example1", "--mean=general:3.2,1", f"--output={tmp_path / 'x.csv'}",
          f"--summary={summary}"])
    solo = rows(summary.read_text())[0]
    for k in ("err_u_L2", "err_u_L2pi", "err_flux_L2", "err_flux_L2S"):
        assert sweep[0][k] == solo[k]


def test_sweep_is_deterministic_across_workers(tmp_path):
    args = ["sweep", "--preset=example2", "--sweep.alpha=-2,1", "--sweep.beta=0,1", "--sweep.step=1", "--mesh.n=129"]
    c1, a = run([*args, "--workers=1"], tmp_path, "a.csv")
    c2, b = run([*args, "--workers=2"], tmp_path, "b.csv")
    assert c1 == c2 == EXIT_OK and a == b
    r = rows(a)
    assert [(float(x["alpha"]), float(x["beta"])) for x in r] == [(a_, b_) for a_ in (-2, -1, 0, 1) for b_ in (0, 1)]


def test_sweep_failed_cells(tmp_path):
    # kappa vanishes at x = 0.5 so every cell fails
    code, text = run(["sweep", "--preset=example1", "--problem.kappa=abs(x-0.5)+0", "--mesh.n=9",
                      "--reference.n_grid=101", "--sweep.alpha=0,1", "--sweep.beta=0,0"], tmp_path)
    assert code != EXIT_OK


def test_convergence_rows_and_eoc(tmp_path):
    code, text = run(["convergence", "--preset=example1", "--means=sg general:3.2,1", "--levels=5..8"], tmp_path)
    assert code == EXIT_OK
    r = rows(text)
    assert len(r) == 2 * 4 + 2
    eoc = [x for x in r if x["level"] == "eoc"]
    assert [x["mean"] for x in eoc] == ["scharfetter-gummel", "general:3.2,1"]
    assert all(1.9 <= float(x["err_u_L2"]) <= 2.1 for x in eoc)


def test_compare_equal_means(tmp_path):
    code, text = run(["compare", "--preset=example1", "--compare.a=harmonic", "--compare.b=harmonic",
                      "--levels=4..6"], tmp_path)
    assert code == EXIT_OK
    r = rows(text)
    assert all(float(x["flux_gap"]) == 0.0 for x in r if x["level"] != "slope")
    assert r[-1]["flux_gap"] == "inf"


def test_compare_sg_sqra(tmp_path):
    code, text = run(["compare", "--preset=example1", "--compare.a=sg", "--compare.b=sqra",
                      "--compare.hat=sqra"], tmp_path)
    r = rows(text)
    assert code == EXIT_OK and all(x["bound_ok"] == "1" for x in r[:-1])
    assert 1.8 <= float(r[-1]["flux_gap"]) <= 2.6


def test_reference_dump(tmp_path, capsys):
    code, text = run(["reference", "--problem.V=0", "--reference.n_grid=11"], tmp_path)
    r = rows(text)
    assert code == EXIT_OK and len(r) == 11 and abs(float(r[5]["u"]) - 0.5) < 1e-12
    assert rows(capsys.readouterr().err)[0]["iterations"] in {"0", "1", "2", "3"}


def test_check_subcommand(tmp_path):
    code, text = run(["check", "--check.samples=200", "--seed=3"], tmp_path)
    r = rows(text)
    assert code == EXIT_OK and all(x["passed"] == "1" for x in r)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text('# comment\npreset = example2\nmesh.n = 33\nproblem.f = "0"  # trailing\n', encoding="utf-8")
    code, text = run(["solve", f"--config={cfg}", "--mesh.n", "17"], tmp_path)
    assert code == EXIT_OK and len(rows(text)) == 17


@pytest.mark.parametrize("args", [
    ["solve", "--nope=1"],
    ["solve", "--mesh.n=1"],
    ["solve", "--mean=median"],
    ["solve", "--problem.V=2*"],
    ["solve", "--preset=example9"],
    ["convergence", "--levels=5,6"],
    ["sweep", "--sweep.step=0"],
    ["solve", "--config=/nonexistent/file"],
    ["solve", "stray"],
    ["solve", "--problem.domain=0,1;0,1"],
])
def test_config_errors(args, tmp_path, capsys):
    assert main([*args, f"--output={tmp_path / 'o.csv'}"]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path):
    assert main(["solve", "--problem.kappa=x-0.5", "--mesh.n=9", f"--output={tmp_path / 'o.csv'}"]) == EXIT_NUMERIC


def test_parsers():
    assert parse_config_text("a.b = 1\n\n; c\nx = 'q r'") == {"a.b": "1", "x": "q r"}
    with pytest.raises(ConfigurationError):
        parse_config_text("not a pair")
    with pytest.raises(ConfigurationError):
        parse_config_text("a = 'open")
    assert parse_config_text('v = "x # y" # note') == {"v": "x # y"}
    assert parse_overrides(["--a=1", "--b", "2"]) == {"a": "1", "b": "2"}
    with pytest.raises(ConfigurationError):
        parse_overrides(["--dangling"])


def test_presets_are_frozen():
    for name in ("example1", "example2"):
        cfg = merge({"preset": name})
        assert cfg["reference.n_grid"] == "136474" and cfg.mesh_n() == 1025
        assert set(PRESETS[name]) <= set(DEFAULTS)
    assert PRESETS["example1"]["problem.V"] == "2*sin(2*pi*x)"
    assert PRESETS["example2"]["problem.V"] == "5*(x+1)*x"
    assert merge({"levels": "5..10"}).levels() == [5, 6, 7, 8, 9, 10]
    # overriding V drops the preset's derivative
    assert merge({"preset": "example1", "problem.V": "x"})["problem.dV"] == ""
    assert merge({"preset": "example1"}, {"mesh.n": "9"})["problem.dV"] == PRESETS["example1"]["problem.dV"]


@pytest.mark.parametrize("preset, target, fields", [
    ("example1", 4.2, ("err_u_L2",)),
    ("example2", -1.0, ("err_u_L2", "err_flux_L2")),
])
def test_full_sweep_minimum_location(tmp_path, preset, target, fields):
    code, text = run(["sweep", f"--preset={preset}", "--workers=4"], tmp_path)
    assert code == EXIT_OK
    table = rows(text)
    assert len(table) == 21 * 21
    for field in fields:
        best = min(table, key=lambda r: float(r[field]))
        assert abs(float(best["alpha"]) + float(best["beta"]) - target) <= 0.5, (field, best)
