"""Weighted Stolarsky means and the associated Bernoulli-type weights.

S_{a,b}(x, y) = (b (x^a - y^a) / (a (x^b - y^b)))^(1/(a-b))

with its continuous extensions. The weight of a mean is
B_{a,b}(s) = S_{a,b}(1, exp(-s)), so that for nodal potentials V_i, V_j

    S(pi_i, pi_j) = pi_j * B(V_i - V_j),   pi = exp(-V).

Everything here works in log space; see ``_pure`` for the kernel.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError

_LOG2 = math.log(2.0)

NAMED_PARAMS = {
    "max": (math.inf, 1.0),
    "quadratic": (4.0, 2.0),
    "arithmetic": (2.0, 1.0),
    "logarithmic": (0.0, 1.0),
    "geometric": (-1.0, 1.0),
    "scharfetter-gummel": (0.0, -1.0),
    "harmonic": (-2.0, -1.0),
    "min": (-math.inf, 1.0),
}

ALIASES = {
    "sqra": "geometric",
    "sg": "scharfetter-gummel",
    "scharfettergummel": "scharfetter-gummel",
    "scharfetter_gummel": "scharfetter-gummel",
}


@dataclass(frozen=True)
class MeanSpec:
    """Either one of the named means or a general (alpha, beta) pair."""

    alpha: float
    beta: float
    name: str | None = None

    @classmethod
    def named(cls, name):
        key = ALIASES.get(name.lower(), name.lower())
        if key not in NAMED_PARAMS:
            raise ConfigurationError(f"unknown mean {name!r}")
        a, b = NAMED_PARAMS[key]
        return cls(a, b, key)

    @classmethod
    def general(cls, alpha, beta):
        alpha = float(alpha)
        beta = float(beta)
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise ConfigurationError("general mean parameters must be finite")
        return cls(alpha, beta, None)

    @classmethod
    def parse(cls, text):
        """Parse ``sg``, ``harmonic``, ``general:A,B`` and friends."""
        t = text.strip()
        if t.lower().startswith("general:"):
            parts = t.split(":", 1)[1].split(",")
            if len(parts) != 2:
                raise ConfigurationError(f"bad general mean {text!r}; expected general:A,B")
            try:
                return cls.general(float(parts[0]), float(parts[1]))
            except ValueError as exc:
                raise ConfigurationError(f"bad general mean {text!r}") from exc
        return cls.named(t)

    @property
    def is_named(self):
        return self.name is not None

    @property
    def param_sum(self):
        return self.alpha + self.beta

    def __str__(self):
        if self.name is not None:
            return self.name
        return f"general:{self.alpha:g},{self.beta:g}"


MAX = MeanSpec.named("max")
QUADRATIC = MeanSpec.named("quadratic")
ARITHMETIC = MeanSpec.named("arithmetic")
LOGARITHMIC = MeanSpec.named("logarithmic")
GEOMETRIC = MeanSpec.named("geometric")
SQRA = GEOMETRIC
SCHARFETTER_GUMMEL = MeanSpec.named("scharfetter-gummel")
SG = SCHARFETTER_GUMMEL
HARMONIC = MeanSpec.named("harmonic")
MIN = MeanSpec.named("min")

TABLE_MEANS = (MAX, QUADRATIC, ARITHMETIC, LOGARITHMIC, GEOMETRIC, SCHARFETTER_GUMMEL, HARMONIC, MIN)


def _log_sg(x):
    # log(x / expm1(x)), stable for all x
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    mid = (np.abs(x) < 1.0) & (x != 0)
    out[mid] = np.log(x[mid] / np.expm1(x[mid]))
    pos = x >= 1.0
    xp = x[pos]
    out[pos] = np.log(xp) - xp - np.log(-np.expm1(-xp))
    neg = x <= -1.0
    xn = x[neg]
    out[neg] = np.log(-xn) - np.log(-np.expm1(xn))
    return out


def _log_weight_named(name, x):
    if name == "max":
        return np.maximum(0.0, -x)
    if name == "min":
        return np.minimum(0.0, -x)
    if name == "geometric":
        return -0.5 * x
    if name == "arithmetic":
        return np.logaddexp(0.0, -x) - _LOG2
    if name == "harmonic":
        return _LOG2 - np.logaddexp(0.0, x)
    if name == "quadratic":
        return 0.5 * (np.logaddexp(0.0, -2.0 * x) - _LOG2)
    if name == "scharfetter-gummel":
        return _log_sg(x)
    if name == "logarithmic":
        return -_log_sg(-x)
    raise ConfigurationError(f"unknown mean {name!r}")  # pragma: no cover


def log_weight(spec, x):
    """log B_{alpha,beta}(x); closed forms for the named means."""
    x = np.asarray(x, dtype=float)
    if spec.name is not None:
        return _log_weight_named(spec.name, x)
    if spec.alpha == -spec.beta:
        # S_{a,-a} is the geometric mean for every a
        return -0.5 * x
    return _kernels.log_weight(spec.alpha, spec.beta, x)


def weight_B(spec, x):
    """B_{alpha,beta}(x) = S_{alpha,beta}(1, exp(-x)), elementwise."""
    out = np.exp(log_weight(spec, x))
    return out if np.ndim(out) else float(out)


def stolarsky(spec, x, y):
    """Weighted Stolarsky mean of positive arguments, elementwise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("Stolarsky means need strictly positive finite arguments")
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    if spec.name == "max":
        out = hi
    elif spec.name == "min":
        out = lo
    else:
        ratio = hi / lo
        with np.errstate(over="ignore"):
            s = np.where(ratio < 2.0, np.log1p((hi - lo) / lo), np.log(hi) - np.log(lo))
        out = np.clip(hi * np.exp(log_weight(spec, s)), lo, hi)
    if not np.all(np.isfinite(out)):
        raise DomainError("Stolarsky mean is not representable")
    return out if np.ndim(out) else float(out)


def log_mean_from_potential(spec, Vi, Vj):
    """log S(exp(-Vi), exp(-Vj)) without forming exp(-V)."""
    Vi = np.asarray(Vi, dtype=float)
    Vj = np.asarray(Vj, dtype=float)
    return -np.minimum(Vi, Vj) + log_weight(spec, np.abs(Vi - Vj))


def diag_second_derivative(spec, x):
    """d^2/dx^2 S(x, y) at y = x, which equals (alpha + beta - 3) / (12 x)."""
    return (spec.param_sum - 3.0) / (12.0 * np.asarray(x, dtype=float))


def mean_expansion_coefficient(spec):
    """C in S(x, y) = (x + y)/2 + C (x - y)^2 / ((x + y)/2) + O(|x - y|^3)."""
    return (spec.param_sum / 3.0 - 1.0) / 8.0
