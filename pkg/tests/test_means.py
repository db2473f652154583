import math

from hypothesis import given, settings, strategies as st
import mpmath
import numpy as np
import pytest

from stolarskyfv.errors import ConfigurationError, DomainError
from stolarskyfv.means import (
    ARITHMETIC, GEOMETRIC, HARMONIC, LOGARITHMIC, MAX, MIN, QUADRATIC, SG, SQRA, TABLE_MEANS,
    MeanSpec, diag_second_derivative, log_mean_from_potential, log_weight,
    mean_expansion_coefficient, stolarsky, weight_B,
)

mpmath.mp.dps = 50


def mp_stolarsky(a, b, x, y):
    """Independent high-precision evaluation of the defining formula and its limits."""
    a, b, x, y = (mpmath.mpf(v) for v in (a, b, x, y))
    if x == y:
        return x

    def pw(t, p):
        # (t^p - 1)/p with its p -> 0 limit log t
        return mpmath.log(t) if p == 0 else mpmath.expm1(p * mpmath.log(t)) / p

    if a == b:
        # S_{a,a} = exp(-1/a + (x^a log x - y^a log y)/(x^a - y^a)); a=0 is the geometric mean
        if a == 0:
            return mpmath.sqrt(x * y)
        return mpmath.exp(-1 / a + (x ** a * mpmath.log(x) - y ** a * mpmath.log(y)) / (x ** a - y ** a))
    r = x / y
    return y * (pw(r, a) / pw(r, b)) ** (1 / (a - b))


@pytest.mark.parametrize("spec,x,y,expected", [
    (ARITHMETIC, 1.0, 3.0, 2.0),
    (GEOMETRIC, 1.0, 4.0, 2.0),
    (HARMONIC, 1.0, 3.0, 1.5),
    (LOGARITHMIC, 1.0, math.e, math.e - 1.0),
    (MeanSpec.general(3.2, 1.0), 5.0, 5.0, 5.0),
    (MAX, 2.0, 7.0, 7.0),
    (MIN, 2.0, 7.0, 2.0),
    (QUADRATIC, 1.0, 7.0, 5.0),
])
def test_stolarsky_table_values(spec, x, y, expected):
    assert stolarsky(spec, x, y) == pytest.approx(expected, rel=1e-14)


def test_sg_mean_of_boltzmann_factors():
    # S_{0,-1}(e^-V0, e^-Vh) = (Vh - V0)/(e^Vh - e^V0)
    for V0, Vh in [(0.0, 1.0), (-2.0, 0.5), (3.0, -1.0)]:
        want = (Vh - V0) / (math.exp(Vh) - math.exp(V0))
        assert stolarsky(SG, math.exp(-V0), math.exp(-Vh)) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("spec,x,expected", [
    (SG, 0.0, 1.0),
    (GEOMETRIC, 2.0, math.exp(-1.0)),
    (MAX, -3.0, math.exp(3.0)),
    (MAX, 3.0, 1.0),
    (MIN, 3.0, math.exp(-3.0)),
    (MIN, -3.0, 1.0),
    (HARMONIC, 1.0, 2.0 / (math.e + 1.0)),
    (SG, 1.0, 1.0 / (math.e - 1.0)),
    (LOGARITHMIC, 1.0, (1.0 - math.exp(-1.0))),
    (ARITHMETIC, 1.0, 0.5 * (1.0 + math.exp(-1.0))),
])
def test_weight_values(spec, x, expected):
    assert weight_B(spec, x) == pytest.approx(expected, rel=1e-14)


def test_named_means_are_their_parameter_pairs():
    finite = [m for m in TABLE_MEANS if math.isfinite(m.alpha)]
    s = np.concatenate([-np.logspace(-8, 2, 60), [0.0], np.logspace(-8, 2, 60)])
    for m in finite:
        gen = MeanSpec.general(m.alpha, m.beta)
        np.testing.assert_allclose(log_weight(gen, s), log_weight(m, s), rtol=1e-12, atol=1e-13)


def test_extreme_parameters_approach_max_and_min():
    # the limits are slow, roughly log(a)/a; check that the gap shrinks
    s = np.linspace(-5, 5, 41)
    for limit, sign in ((MAX, 1.0), (MIN, -1.0)):
        gaps = [np.max(np.abs(log_weight(MeanSpec.general(sign * a, 1.0), s) - log_weight(limit, s)))
                for a in (40.0, 400.0, 4000.0)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 5e-3


def test_against_high_precision_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(400):
        a, b = np.round(rng.uniform(-6, 6, 2), 6)
        x = float(np.exp(rng.uniform(-6, 6)))
        # include nearly equal arguments
        y = x * float(np.exp(rng.choice([rng.uniform(-6, 6), rng.uniform(-1e-6, 1e-6)])))
        got = stolarsky(MeanSpec.general(a, b), x, y)
        want = mp_stolarsky(a, b, x, y)
        worst = max(worst, float(abs(got - want) / want))
    assert worst < 1e-12


def test_oracle_near_coincident_parameters():
    for a, b in [(1.0, 1.0 + 1e-9), (0.0, 1e-10), (-2.0, -2.0), (2.5, 2.5)]:
        got = stolarsky(MeanSpec.general(a, b), 0.3, 4.0)
        want = mp_stolarsky(a, (a + b) / 2 if a != b and abs(a - b) < 1e-6 else b, 0.3, 4.0)
        assert got == pytest.approx(float(want), rel=1e-9)


def test_continuity_across_parameter_diagonal():
    x = np.linspace(-8, 8, 33)
    for a in (-3.0, 0.0, 1.0, 4.5):
        lo = log_weight(MeanSpec.general(a, a - 1e-7), x)
        mid = log_weight(MeanSpec.general(a, a), x)
        hi = log_weight(MeanSpec.general(a, a + 1e-7), x)
        assert np.max(np.abs(lo - mid)) < 1e-6
        assert np.max(np.abs(hi - mid)) < 1e-6


def test_antisymmetric_parameters_give_geometric_mean():
    s = np.linspace(-20, 20, 81)
    for a in (0.5, 1.0, 3.7):
        np.testing.assert_array_equal(log_weight(MeanSpec.general(a, -a), s), -0.5 * s)


def test_parse_and_names():
    assert MeanSpec.parse("sg") == SG
    assert MeanSpec.parse("SQRA") == SQRA == GEOMETRIC
    assert MeanSpec.parse("general:3.2,1") == MeanSpec.general(3.2, 1.0)
    assert str(MeanSpec.parse("general:3.2,1")) == "general:3.2,1"
    assert SG.param_sum == -1.0 and SG.is_named
    for bad in ("median", "general:1", "general:a,b", "general:inf,1"):
        with pytest.raises(ConfigurationError):
            MeanSpec.parse(bad)


def test_domain_errors():
    for x, y in [(0.0, 1.0), (-1.0, 2.0), (1.0, float("nan")), (float("inf"), 1.0)]:
        with pytest.raises(DomainError):
            stolarsky(ARITHMETIC, x, y)


@pytest.mark.parametrize("spec,x,expected", [
    (SG, 1.0, -1.0 / 3.0),
    (GEOMETRIC, 2.0, -1.0 / 8.0),
    (ARITHMETIC, 1.0, 0.0),
])
def test_diag_second_derivative_values(spec, x, expected):
    assert diag_second_derivative(spec, x) == pytest.approx(expected, abs=1e-15)


def test_expansion_coefficient_values():
    assert mean_expansion_coefficient(GEOMETRIC) == -0.125
    assert mean_expansion_coefficient(ARITHMETIC) == 0.0
    assert mean_expansion_coefficient(SG) == pytest.approx(-1.0 / 6.0, abs=1e-16)


def test_expansion_coefficient_matches_mean():
    # S(x,y) - (x+y)/2 ~ C (x-y)^2 / ((x+y)/2)
    for spec in (SG, GEOMETRIC, HARMONIC, MeanSpec.general(3.2, 1.0)):
        x, y = 1.0, 1.0 + 1e-3
        got = (stolarsky(spec, x, y) - 0.5 * (x + y)) * 0.5 * (x + y) / (x - y) ** 2
        assert got == pytest.approx(mean_expansion_coefficient(spec), abs=1e-5)


def test_log_mean_from_potential_large_potentials():
    # exp(-V) underflows, the log-space form does not
    got = log_mean_from_potential(SG, 800.0, 801.0)
    want = -801.0 + math.log(1.0 / (1.0 - math.exp(-1.0)))
    assert got == pytest.approx(want, rel=1e-15)


params = st.floats(-8, 8, allow_nan=False)
positives = st.floats(1e-6, 1e6, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(params, params, positives, positives, st.floats(1e-3, 1e3))
def test_mean_properties(a, b, x, y, t):
    spec = MeanSpec.general(a, b)
    s = stolarsky(spec, x, y)
    assert min(x, y) <= s <= max(x, y)
    assert s == pytest.approx(stolarsky(spec, y, x), rel=1e-14)
    assert stolarsky(spec, t * x, t * y) == pytest.approx(t * s, rel=1e-12)
    assert stolarsky(spec, x, x) == pytest.approx(x, rel=1e-15)


@settings(max_examples=300, deadline=None)
@given(params, params, st.floats(-60, 60))
def test_weight_reflection(a, b, x):
    spec = MeanSpec.general(a, b)
    assert float(log_weight(spec, -x)) == pytest.approx(x + float(log_weight(spec, x)), abs=1e-12 * (1 + abs(x)))


@settings(max_examples=200, deadline=None)
@given(params, params, params, st.floats(-10, 10))
def test_monotone_in_parameters(a, b, c, x):
    # S_{a,b} is nondecreasing in each parameter
    lo, hi = sorted((a, c))
    assert float(log_weight(MeanSpec.general(lo, b), x)) <= float(log_weight(MeanSpec.general(hi, b), x)) + 1e-13
