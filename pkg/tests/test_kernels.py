import numpy as np
import pytest

from stolarskyfv import _kernels, _pure

BACKENDS = _kernels.available_backends()


def test_pure_backend_always_available():
    assert "python" in BACKENDS
    assert _kernels.BACKEND in BACKENDS


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree():
    cy, py = BACKENDS["cython"], BACKENDS["python"]
    rng = np.random.default_rng(3)
    s = np.concatenate([[0.0, 1e-12, 1e-3], rng.uniform(0, 60, 200)])
    for _ in range(25):
        a, b = rng.uniform(-8, 8, 2)
        np.testing.assert_allclose(cy.log_weight(a, b, s), py.log_weight(a, b, s), rtol=1e-13, atol=1e-14)
    n = 50
    lower, upper = -rng.uniform(0.1, 1, n - 1), -rng.uniform(0.1, 1, n - 1)
    diag = 3.0 + rng.uniform(0, 1, n)
    rhs = rng.standard_normal(n)
    np.testing.assert_allclose(cy.thomas(lower, diag, upper, rhs), py.thomas(lower, diag, upper, rhs), rtol=1e-13)
    m = 40
    args = (0.01, 0.3, -0.2, rng.standard_normal(2 * m + 1), 1.0 + rng.uniform(0, 1, 2 * m + 1),
            rng.standard_normal(2 * m + 1))
    for x, y in zip(cy.rk4_linear(*args), py.rk4_linear(*args)):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("mod", list(BACKENDS.values()), ids=list(BACKENDS))
def test_thomas_solves_laplacian(mod):
    n = 9
    x = np.asarray(mod.thomas(-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1), np.r_[1.0, np.zeros(n - 2), 1.0]))
    np.testing.assert_allclose(x, 1.0, rtol=1e-14)
    with pytest.raises(ZeroDivisionError):
        mod.thomas(np.ones(1), np.zeros(2), np.ones(1), np.ones(2))


@pytest.mark.parametrize("mod", list(BACKENDS.values()), ids=list(BACKENDS))
def test_h_function_symmetry(mod):
    u = np.linspace(-30, 30, 121)
    s = np.asarray(mod.log_weight(2.0, 1.0, u))
    assert np.all(np.isfinite(s))
    np.testing.assert_allclose(_pure.h_fun(u) + _pure.h_fun(-u), 1.0, rtol=1e-15)
