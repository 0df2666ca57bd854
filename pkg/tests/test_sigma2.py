import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sigma2lab.errors import DimensionFour, InvalidSpec, NotEinstein, WrongDimension, ZeroCovector
from sigma2lab.manifold.fields import Field
from sigma2lab.manifold.spaces import SpaceSpec, build_space, low_mode_field
from sigma2lab.sigma2 import Sigma2Context, SymbolData, principal_symbol, symbol_matrix_trace, symbol_trace
from sigma2lab.suites import sample_functions

from conftest import space


@pytest.fixture(scope="module")
def perturbed12():
    dom, g = space("perturbed-torus-3-12-a0.1")
    return dom, g, Sigma2Context(g)


def test_sigma2_equals_schouten_form(perturbed12):
    # sigma_2 as the second symmetric function of A: (sigma_1^2 - |A|^2) / 2
    _, _, ctx = perturbed12
    A = ctx.a_tensor
    alt = 0.5 * (ctx.sigma1 * ctx.sigma1 - ctx.inner(A, A))
    np.testing.assert_allclose(alt.values(), ctx.sigma2.values(), atol=1e-11)


def test_trace_and_divergence_identities(perturbed12):
    dom, _, ctx = perturbed12
    assert ctx.trace_identity_residual().max_abs() < 1e-9
    for f in sample_functions(dom):
        lam = ctx.lambda_adjoint(f)
        assert ctx.divergence_identity_residual(f, lam).max_abs() < 1e-8
        closed = ctx.trace_lambda_adjoint(f)
        assert (ctx.trace(lam) - closed).max_abs() < 1e-9 * max(1.0, closed.max_abs())


def test_lambda_is_linear_and_scales(perturbed12):
    dom, g, ctx = perturbed12
    h1, h2 = low_mode_field(dom, 2, 1), low_mode_field(dom, 2, 2)
    lhs = ctx.lambda_lin(h1 * 2.0 + h2)
    rhs = ctx.lambda_lin(h1) * 2.0 + ctx.lambda_lin(h2)
    assert (lhs - rhs).max_abs() < 1e-10
    assert (ctx.lambda_lin(g) + 2.0 * ctx.sigma2).max_abs() < 1e-10


def test_lambda_matches_oracle_derivative(oracle):
    from tests_support import oracle_direction

    dom, g = space("perturbed-torus-3-16-a0.1")
    ctx = Sigma2Context(g.truncate(2))
    lin = ctx.lambda_lin(oracle_direction(dom).truncate(2)).values()
    for row in oracle["perturbed_mixed_a0.1_grid16"]:
        assert lin[tuple(row["index"])] == pytest.approx(row["lambda_h"], abs=1e-9)


def test_einstein_specialization():
    dom, g = space("sphere-3-r2")
    ctx = Sigma2Context(g)
    f = sample_functions(dom)[-1]
    assert (ctx.lambda_adjoint(f) - ctx.einstein_lambda_adjoint(f)).max_abs() < 1e-12
    _, gp = space("perturbed-torus-3-8-a0.1")
    with pytest.raises(NotEinstein):
        Sigma2Context(gp.truncate(2)).einstein_lambda_adjoint(Field.constant(gp.domain, 1.0))


@pytest.mark.parametrize("n, stable", [(3, False), (4, False), (5, True), (6, True)])
def test_stability_predicate_on_spheres(n, stable):
    _, g = build_space(SpaceSpec("sphere", dim=n))
    ctx = Sigma2Context(g.truncate(2))
    assert bool(np.all(ctx.stability_condition())) is stable
    forms = ctx.stability_forms()
    np.testing.assert_allclose(forms["ricci_form"], n / (8 * (n - 1)) * forms["equivalent"], atol=1e-12)
    np.testing.assert_allclose(forms["scalar_form"], forms["equivalent"] / 8, atol=1e-12)


def test_q_curvature_in_dimension_three():
    _, g = space("sphere-3-r1")
    ctx = Sigma2Context(g)
    np.testing.assert_allclose(ctx.q_curvature.values(), 1.875, atol=1e-12)
    assert ctx.q_dim3_check().max_abs() < 1e-12
    _, g5 = build_space(SpaceSpec("sphere", dim=5))
    with pytest.raises(WrongDimension):
        Sigma2Context(g5).q_dim3_check()


def test_sectional_decomposition_dim3():
    _, g = space("perturbed-torus-3-8-a0.1")
    ctx = Sigma2Context(g.truncate(2))
    u, v = np.array([1.0, 0.2, -0.3]), np.array([0.1, 1.0, 0.5])
    np.testing.assert_allclose(ctx.sectional_dim3(u, v), ctx.sectional(u, v), atol=1e-12)


def test_almost_schur_guards():
    _, g = space("flat-torus-3-8")
    ctx = Sigma2Context(g.truncate(4))
    with pytest.raises(InvalidSpec):
        ctx.almost_schur_sides(-1.0, 1.0)
    with pytest.raises(InvalidSpec):
        ctx.almost_schur_sides(0.0, 0.0)
    _, g4 = build_space(SpaceSpec("flat-torus", dim=4, resolution=8))
    with pytest.raises(DimensionFour):
        Sigma2Context(g4.truncate(2)).almost_schur_sides(0.0, 1.0)


# principal symbol on random algebraic data


def _spd(n):
    return arrays(float, (n, n), elements=st.floats(-1, 1)).map(lambda a: a @ a.T + n * np.eye(n))


def _sym(n):
    return arrays(float, (n, n), elements=st.floats(-5, 5)).map(lambda a: a + a.T)


@st.composite
def symbol_data(draw):
    n = draw(st.integers(3, 6))
    xi = draw(arrays(float, n, elements=st.floats(-2, 2)).filter(lambda v: np.linalg.norm(v) > 1e-3))
    g, ric = draw(_spd(n)), draw(_sym(n))
    # the scalar curvature must be the trace of the Ricci data
    return SymbolData(xi, g, ric, float(np.einsum("ij,ij->", np.linalg.inv(g), ric)))


@given(symbol_data())
@settings(max_examples=100, deadline=None)
def test_symbol_trace_matches_matrix_trace(sd):
    a, b = symbol_trace(sd), symbol_matrix_trace(sd)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a), np.abs(principal_symbol(sd)).max())


@given(symbol_data())
@settings(max_examples=50, deadline=None)
def test_symbol_is_symmetric(sd):
    S = principal_symbol(sd)
    np.testing.assert_allclose(S, S.T, atol=1e-12)


def test_symbol_rejects_zero_covector():
    with pytest.raises(ZeroCovector):
        symbol_trace(SymbolData(np.zeros(3), np.eye(3), np.eye(3), 3.0))
