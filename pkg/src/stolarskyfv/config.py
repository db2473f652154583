"""Run configuration: flat ``key = value`` files, dotted CLI overrides, presets."""
from dataclasses import dataclass
import math
import re

from .assembly import Problem
from .errors import ConfigurationError, ExprError
from .exprparse import Expression
from .means import MeanSpec
from .mesh import Box, build_cubic_mesh, build_interval_mesh, build_vertex_mesh
from .reference import DEFAULT_GRID

DEFAULTS = {
    "preset": "",
    "problem.domain": "0,1",
    "problem.V": "0",
    "problem.dV": "",
    "problem.f": "0",
    "problem.kappa": "1",
    "problem.u_left": "0",
    "problem.u_right": "1",
    "problem.boundary": "",
    "mesh.kind": "interval",
    "mesh.layout": "vertex",
    "mesh.n": "1025",
    "mesh.h": "",
    "mean": "sg",
    "means": "sg sqra arithmetic harmonic",
    "levels": "5..10",
    "reference.enabled": "false",
    "reference.n_grid": str(DEFAULT_GRID),
    "reference.tol": "1e-12",
    "sweep.alpha": "-4,6",
    "sweep.beta": "-4,6",
    "sweep.step": "0.5",
    "compare.a": "sg",
    "compare.b": "sqra",
    "compare.hat": "",
    "solver.tol": "1e-12",
    "solver.method": "auto",
    "output": "-",
    "summary": "",
    "seed": "0",
    "workers": "1",
    "check.samples": "2000",
}

PRESETS = {
    "example1": {
        "problem.domain": "0,1",
        "problem.V": "2*sin(2*pi*x)",
        "problem.dV": "4*pi*cos(2*pi*x)",
        "problem.f": "x*(1-x)",
        "problem.kappa": "1",
        "problem.u_left": "0",
        "problem.u_right": "1",
        "mesh.kind": "interval",
        "mesh.layout": "vertex",
        "mesh.n": "1025",
        "reference.enabled": "true",
        "reference.n_grid": str(DEFAULT_GRID),
    },
    "example2": {
        "problem.domain": "0,1",
        "problem.V": "5*(x+1)*x",
        "problem.dV": "5*(2*x+1)",
        "problem.f": "x*(1-x)",
        "problem.kappa": "1",
        "problem.u_left": "0",
        "problem.u_right": "1",
        "mesh.kind": "interval",
        "mesh.layout": "vertex",
        "mesh.n": "1025",
        "reference.enabled": "true",
        "reference.n_grid": str(DEFAULT_GRID),
    },
}

_LINE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*=\s*(.*?)\s*$")


def _unquote(value):
    """Strip one level of quotes and any trailing ``# comment``."""
    value = value.strip()
    if value[:1] in ("\"", "'"):
        end = value.find(value[0], 1)
        if end < 0:
            raise ConfigurationError(f"unterminated quote in {value!r}")
        rest = value[end + 1:].strip()
        if rest and not rest.startswith("#"):
            raise ConfigurationError(f"unexpected text after quoted value: {rest!r}")
        return value[1:end]
    return value.split("#", 1)[0].rstrip()


def parse_config_text(text, source="<config>"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        m = _LINE.match(line)
        if m is None:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        out[m.group(1)] = _unquote(m.group(2))
    return out


def parse_overrides(tokens):
    """``--key=value`` or ``--key value`` pairs into a dict."""
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigurationError(f"unexpected argument {tok!r}")
        body = tok[2:]
        if "=" in body:
            key, value = body.split("=", 1)
        else:
            if i + 1 >= len(tokens):
                raise ConfigurationError(f"missing value for {tok}")
            key, value = body, tokens[i + 1]
            i += 1
        out[key] = _unquote(value.strip())
        i += 1
    return out


def merge(*layers):
    """Defaults, then preset, then later layers; unknown keys are errors."""
    values = dict(DEFAULTS)
    for layer in layers:
        for key in layer:
            if key not in DEFAULTS:
                raise ConfigurationError(f"unknown configuration key {key!r}")
    preset = ""
    for layer in layers:
        preset = layer.get("preset", preset)
    if preset:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
        values["preset"] = preset
    for layer in layers:
        values.update({k: v for k, v in layer.items() if k != "preset"})
    # a preset's exact V' belongs to the preset's V
    if any("problem.V" in layer for layer in layers) and not any("problem.dV" in layer for layer in layers):
        values["problem.dV"] = ""
    return RunConfig(values)


def _float(values, key):
    try:
        v = float(values[key])
    except ValueError as exc:
        raise ConfigurationError(f"{key}: not a number: {values[key]!r}") from exc
    if not math.isfinite(v):
        raise ConfigurationError(f"{key}: must be finite")
    return v


def _int(values, key):
    try:
        return int(values[key])
    except ValueError as exc:
        raise ConfigurationError(f"{key}: not an integer: {values[key]!r}") from exc


def _bool(values, key):
    v = values[key].strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise ConfigurationError(f"{key}: not a boolean: {values[key]!r}")


def _pair(values, key):
    parts = [p for p in re.split(r"[,\s]+", values[key].strip()) if p]
    if len(parts) != 2:
        raise ConfigurationError(f"{key}: expected 'lo,hi'")
    lo, hi = (float(p) for p in parts)
    if hi < lo:
        raise ConfigurationError(f"{key}: empty range")
    return lo, hi


@dataclass(frozen=True)
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def seed(self):
        return _int(self.values, "seed")

    @property
    def workers(self):
        w = _int(self.values, "workers")
        if w < 1:
            raise ConfigurationError("workers must be >= 1")
        return w

    @property
    def output(self):
        return self.values["output"]

    def domain(self):
        text = self.values["problem.domain"]
        boxes = [b for b in text.split(";") if b.strip()]
        try:
            bounds = [tuple(float(v) for v in re.split(r"[,\s]+", b.strip()) if v) for b in boxes]
        except ValueError as exc:
            raise ConfigurationError(f"problem.domain: cannot parse {text!r}") from exc
        if not bounds or any(len(b) != 2 for b in bounds):
            raise ConfigurationError("problem.domain: expected 'a,b' or 'a0,b0; a1,b1; ...'")
        try:
            return Box.from_bounds(bounds)
        except Exception as exc:
            raise ConfigurationError(f"problem.domain: {exc}") from exc

    def _expr(self, key):
        try:
            return Expression(self.values[key])
        except ExprError as exc:
            raise ConfigurationError(f"{key}: {exc}") from exc

    def problem(self):
        box = self.domain()
        V = self._expr("problem.V")
        f = self._expr("problem.f")
        kappa = self._expr("problem.kappa")
        dV = self._expr("problem.dV") if self.values["problem.dV"].strip() else None
        name = self.values["preset"] or "custom"
        if self.values["problem.boundary"].strip():
            g = self._expr("problem.boundary")
            return Problem(box, V, f, kappa, g, dV, name)
        if box.dim != 1:
            raise ConfigurationError("problem.boundary is required for multi-dimensional domains")
        return Problem.interval(
            V, f, kappa, box.lower[0], box.upper[0],
            _float(self.values, "problem.u_left"), _float(self.values, "problem.u_right"), dV, name,
        )

    def mesh_n(self):
        n = _int(self.values, "mesh.n")
        if n < 2:
            raise ConfigurationError("mesh.n must be >= 2")
        return n

    def mesh(self, n=None):
        box = self.domain()
        kind = self.values["mesh.kind"]
        try:
            if kind == "cubic":
                if not self.values["mesh.h"].strip():
                    raise ConfigurationError("mesh.h is required for cubic meshes")
                return build_cubic_mesh(box, _float(self.values, "mesh.h"))
            if kind != "interval":
                raise ConfigurationError(f"mesh.kind must be interval or cubic, got {kind!r}")
            n = self.mesh_n() if n is None else n
            layout = self.values["mesh.layout"]
            if layout == "vertex":
                return build_vertex_mesh(box, n)
            if layout == "cell":
                return build_interval_mesh(box, n=n)
            raise ConfigurationError(f"mesh.layout must be vertex or cell, got {layout!r}")
        except ConfigurationError:
            raise
        except Exception as exc:
            raise ConfigurationError(f"mesh: {exc}") from exc

    def mean(self):
        return MeanSpec.parse(self.values["mean"])

    def means(self):
        items = [t for t in re.split(r"[;\s]+", self.values["means"].strip()) if t]
        if not items:
            raise ConfigurationError("means: empty list")
        return [MeanSpec.parse(t) for t in items]

    def levels(self):
        text = self.values["levels"].strip()
        m = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", text)
        if m:
            out = list(range(int(m.group(1)), int(m.group(2)) + 1))
        else:
            try:
                out = [int(t) for t in re.split(r"[,\s]+", text) if t]
            except ValueError as exc:
                raise ConfigurationError(f"levels: cannot parse {text!r}") from exc
        if len(out) < 3:
            raise ConfigurationError("levels: need at least three levels")
        if any(k < 1 for k in out):
            raise ConfigurationError("levels must be positive")
        return out

    @property
    def reference_enabled(self):
        return _bool(self.values, "reference.enabled")

    def reference_args(self):
        n = _int(self.values, "reference.n_grid")
        tol = _float(self.values, "reference.tol")
        if n < 3 or not tol > 0:
            raise ConfigurationError("reference.n_grid >= 3 and reference.tol > 0 required")
        return {"n_grid": n, "tol": tol}

    def solver_args(self):
        tol = _float(self.values, "solver.tol")
        if not tol > 0:
            raise ConfigurationError("solver.tol must be positive")
        method = self.values["solver.method"]
        if method not in ("auto", "direct", "cg"):
            raise ConfigurationError("solver.method must be auto, direct or cg")
        return {"tol": tol, "method": None if method == "auto" else method}

    def sweep_grid(self):
        a_lo, a_hi = _pair(self.values, "sweep.alpha")
        b_lo, b_hi = _pair(self.values, "sweep.beta")
        step = _float(self.values, "sweep.step")
        if not step > 0:
            raise ConfigurationError("sweep.step must be positive")
        na = int(math.floor((a_hi - a_lo) / step + 1e-9)) + 1
        nb = int(math.floor((b_hi - b_lo) / step + 1e-9)) + 1
        alphas = [a_lo + i * step for i in range(na)]
        betas = [b_lo + j * step for j in range(nb)]
        return [(a, b) for a in alphas for b in betas]

    def compare_means(self):
        a = MeanSpec.parse(self.values["compare.a"])
        b = MeanSpec.parse(self.values["compare.b"])
        hat_text = self.values["compare.hat"].strip()
        hat = MeanSpec.parse(hat_text) if hat_text else b
        return a, b, hat
