import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigma2lab.errors import ChartDomainError, InvalidSpec, TooLargeGrid
from sigma2lab.manifold.fields import Field
from sigma2lab.manifold.spaces import SpaceSpec, build_space, low_mode_field
from sigma2lab.models import (
    EigenTriple,
    assemble_discrete_adjoint,
    constant_rejection,
    hyperbolic_kernel_check,
    laplace_lambda1,
    monte_carlo_certificate,
    ricci_lower_bound,
    sample_admissible_triples,
    singular_spectrum,
    sphere_kernel_check,
    sphere_lambda1,
    torus3_certificate,
)
from sigma2lab.sigma2 import Sigma2Context

from conftest import space


@pytest.mark.parametrize("n, r", [(3, 1.0), (3, 2.0), (4, 1.0), (5, 0.5)])
def test_sphere_coordinates_span_the_kernel(n, r):
    for k in range(1, n + 2):
        rep = sphere_kernel_check(n, r, k)
        assert rep.passed, rep.summary()
        assert rep.details["eigenvalue"] == pytest.approx(sphere_lambda1(n, r), rel=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_hyperbolic_coordinates_span_the_kernel(n):
    for k in range(1, n + 2):
        assert hyperbolic_kernel_check(n, k).passed


def test_kernel_index_validation():
    with pytest.raises(InvalidSpec):
        sphere_kernel_check(3, 1.0, 0)
    with pytest.raises(InvalidSpec):
        hyperbolic_kernel_check(3, 5)


def test_constant_rejection_on_unit_sphere():
    _, g = space("sphere-3-r1")
    rep = constant_rejection(g, 1.0)
    assert rep.passed
    assert rep.details["sigma2"] == pytest.approx(0.75, abs=1e-12)
    assert rep.details["trace"] == pytest.approx(-1.5, abs=1e-12)
    assert rep.details["rejected"]


def test_discrete_adjoint_applies_lambda_star():
    dom, g = space("perturbed-torus-3-8-a0.1")
    A = assemble_discrete_adjoint(g)
    assert A.shape == (dom.size * 6, dom.size)
    f = low_mode_field(dom, 0, 4)
    direct = Sigma2Context(g).lambda_adjoint(f).values().reshape(dom.size, 3, 3)
    iu = np.triu_indices(3)
    applied = (A @ f.values().ravel()).reshape(dom.size, 6)
    np.testing.assert_allclose(applied, direct[:, iu[0], iu[1]], atol=1e-10 * np.abs(direct).max())


def test_flat_discrete_adjoint_vanishes():
    _, g = space("flat-torus-3-8")
    spec = singular_spectrum(assemble_discrete_adjoint(g), 3)
    assert spec["largest"] == 0.0
    assert spec["kernel_dimension"] == 512


def test_discrete_adjoint_guards():
    _, g = space("sphere-3-r1")
    with pytest.raises(ChartDomainError):
        assemble_discrete_adjoint(g)
    _, big = space("flat-torus-3-17")
    with pytest.raises(TooLargeGrid):
        assemble_discrete_adjoint(big)


def test_flat_lambda1():
    _, g = space("flat-torus-3-8")
    assert laplace_lambda1(g) == pytest.approx(4 * math.pi**2, rel=1e-12)
    dom, g2 = build_space(SpaceSpec("flat-torus", resolution=8, period=2.0))
    assert laplace_lambda1(g2) == pytest.approx(math.pi**2, rel=1e-12)


def test_lambda1_guards():
    _, g = space("sphere-3-r1")
    with pytest.raises(ChartDomainError):
        laplace_lambda1(g)
    _, big = space("flat-torus-3-16")
    with pytest.raises(TooLargeGrid):
        laplace_lambda1(big)


def test_lambda1_of_conformally_scaled_torus():
    # constant conformal factor c: eigenvalues scale by 1/c
    dom, g = space("flat-torus-3-8")
    assert laplace_lambda1(g * 4.0) == pytest.approx(math.pi**2, rel=1e-12)


def test_ricci_lower_bound():
    _, g = space("flat-torus-3-8")
    assert ricci_lower_bound(g) == 0.0
    _, gp = space("perturbed-torus-3-8-a0.1")
    K = ricci_lower_bound(gp)
    lam = Sigma2Context(gp.truncate(2)).curv.ricci_eigenvalues()
    assert K == pytest.approx(-lam.min() / 2)


# eigenvalue algebra on the 3-torus


admissible = st.tuples(st.floats(-0.5, -1 / 6), st.floats(-0.5, -1 / 6)).map(
    lambda p: (p[0], p[1], -1.0 - p[0] - p[1])
).filter(lambda t: sum(v * v for v in t) <= 3 / 8)


@given(admissible)
@settings(max_examples=300)
def test_admissible_triples_have_nonpositive_sectional(t):
    cert = torus3_certificate(t)
    assert cert["verdict"] == "holds"
    assert all(-5 / 6 - 1e-12 <= s <= -0.5 + 1e-12 for s in cert["pairwise_sums"])


@given(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)))
@settings(max_examples=200)
def test_certificate_never_reports_a_violation(t):
    # admissibility always implies the bounds, so only "holds" or "inadmissible" may appear
    assert torus3_certificate(t)["verdict"] in ("holds", "inadmissible")


def test_boundary_triple():
    cert = torus3_certificate((-0.5, -0.25, -0.25))
    assert cert["admissible"]
    assert max(cert["sectional"]) == 0.0
    assert max(cert["pairwise_sums"]) == -0.5
    assert torus3_certificate((-1.0, 0.0, 0.0))["verdict"] == "inadmissible"


def test_eigen_triple_sorts():
    assert EigenTriple((0.0, -1.0, 0.5)).values == (-1.0, 0.0, 0.5)
    with pytest.raises(InvalidSpec):
        EigenTriple((1.0, 2.0))


def test_sampler_is_seeded():
    a = sample_admissible_triples(500, seed=3)
    b = sample_admissible_triples(500, seed=3)
    assert np.array_equal(a, b)
    assert np.allclose(a.sum(axis=1), -1.0)
    assert np.all(np.sum(a**2, axis=1) <= 3 / 8)
    mc = monte_carlo_certificate(500, 3)
    assert mc["holds"] == mc["admissible"] == 500
