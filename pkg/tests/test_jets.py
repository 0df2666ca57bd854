import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigma2lab.manifold.domains import TorusGrid
from sigma2lab.manifold.fields import Field, ein
from sigma2lab.manifold.jets import JetAlgebra

ALG = JetAlgebra(2, 4)


def poly_jet(coeffs):
    """Jet at a single point from a dict {alpha: coefficient}."""
    out = np.zeros((1, ALG.size))
    for alpha, c in coeffs.items():
        out[0, ALG.index[alpha]] = c
    return out


monomial = st.tuples(st.integers(0, 2), st.integers(0, 2))
polys = st.dictionaries(monomial, st.floats(-3, 3), min_size=1, max_size=4)


@given(polys, polys)
@settings(max_examples=60, deadline=None)
def test_product_matches_polynomial_multiplication(p, q):
    prod = ALG.einsum(",->", poly_jet(p), poly_jet(q))
    expect = {}
    for a, ca in p.items():
        for b, cb in q.items():
            c = (a[0] + b[0], a[1] + b[1])
            if sum(c) <= ALG.order:
                expect[c] = expect.get(c, 0.0) + ca * cb
    np.testing.assert_allclose(prod, poly_jet(expect), atol=1e-12)


def test_derivative_shifts_coefficients():
    # u = x^2 y + 3 y^3
    u = poly_jet({(2, 1): 1.0, (0, 3): 3.0})
    du = ALG.derivative(u)
    assert du.shape == (1, ALG.count(3), 2)
    alg3 = JetAlgebra(2, 3)
    dx = np.zeros(alg3.size)
    dx[alg3.index[(1, 1)]] = 2.0
    dy = np.zeros(alg3.size)
    dy[alg3.index[(2, 0)]] = 1.0
    dy[alg3.index[(0, 2)]] = 9.0
    np.testing.assert_allclose(du[0, :, 0], dx)
    np.testing.assert_allclose(du[0, :, 1], dy)


def test_derivative_needs_order():
    with pytest.raises(ValueError):
        ALG.derivative(np.zeros((1, 1)))


@given(st.floats(0.5, 3.0), st.floats(-2.0, 2.0))
@settings(max_examples=30, deadline=None)
def test_power_is_taylor_series(a0, p):
    # (a0 + x)^p about x = 0
    u = poly_jet({(0, 0): a0, (1, 0): 1.0})
    out = ALG.power(u, p)
    for k in range(ALG.order + 1):
        coef = math.prod(p - j for j in range(k)) / math.factorial(k) * a0 ** (p - k)
        assert out[0, ALG.index[(k, 0)]] == pytest.approx(coef, rel=1e-12, abs=1e-12)


def test_matrix_inverse_of_jet():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, ALG.size, 2, 2)) * 0.1
    a[:, 0] += np.eye(2) * 2
    inv = ALG.matrix_inverse(a)
    ident = ALG.einsum("ij,jk->ik", a, inv)
    target = np.zeros_like(ident)
    target[:, 0] = np.eye(2)
    np.testing.assert_allclose(ident, target, atol=1e-12)


def test_truncation_is_prefix():
    u = poly_jet({(1, 2): 1.0, (0, 1): 2.0})
    assert ALG.truncate(u, 2).shape[1] == ALG.count(2)
    assert ALG.order_of(ALG.truncate(u, 1)) == 1


def test_spectral_jet_of_band_limited_sample():
    dom = TorusGrid.cube(3, 8, 1.0, 3)
    x, y, _ = dom.coordinates()
    f = Field.from_values(dom, np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y), 0)
    d = f.d().values()
    np.testing.assert_allclose(d[..., 0], 2 * np.pi * np.cos(2 * np.pi * x) * np.cos(4 * np.pi * y), atol=1e-11)
    np.testing.assert_allclose(d[..., 1], -4 * np.pi * np.sin(2 * np.pi * x) * np.sin(4 * np.pi * y), atol=1e-11)


def test_field_products_are_alias_free():
    # cos^2 has a mode at twice the frequency; the pointwise jet product keeps it exact
    dom = TorusGrid.cube(3, 8, 1.0, 2)
    x = dom.coordinates()[0]
    c = Field.from_values(dom, np.cos(2 * np.pi * x), 0)
    sq = c * c
    lap = ein("ii->", sq.d().d())
    np.testing.assert_allclose(lap.values(), -8 * np.pi**2 * np.cos(4 * np.pi * x), atol=1e-10)
