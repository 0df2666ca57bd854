import numpy as np
import pytest

from sigma2lab.errors import IndefiniteMetric, InvalidSpec
from sigma2lab.manifold.domains import ChartSpec, TorusGrid
from sigma2lab.manifold.fields import Field
from sigma2lab.manifold.integrate import volume_integral
from sigma2lab.manifold.spaces import (
    Mode,
    SpaceSpec,
    build_space,
    coordinate_function,
    low_mode_field,
    parse_space,
)
from sigma2lab.sigma2 import Sigma2Context

from conftest import space


@pytest.mark.parametrize(
    "text, kind, dim, res, amp, rad",
    [
        ("flat-torus-3-16", "flat-torus", 3, 16, 0.0, 1.0),
        ("perturbed-torus-3-12-a0.1", "perturbed-torus", 3, 12, 0.1, 1.0),
        ("sphere-5-r2", "sphere-stereographic", 5, 16, 0.0, 2.0),
        ("hyperbolic-3", "hyperboloid-upper", 3, 16, 0.0, 1.0),
    ],
)
def test_parse_space(text, kind, dim, res, amp, rad):
    s = parse_space(text)
    assert (s.kind, s.dim, s.resolution, s.amplitude, s.radius) == (kind, dim, res, amp, rad)
    assert parse_space(s.shorthand()) == s


@pytest.mark.parametrize("bad", ["torus", "flat-torus-3", "blob-3-8", "sphere-x"])
def test_parse_space_rejects(bad):
    with pytest.raises(InvalidSpec):
        parse_space(bad)


def test_space_validation():
    with pytest.raises(InvalidSpec):
        build_space(parse_space("perturbed-torus-3-8-a0.6"))
    with pytest.raises(InvalidSpec):
        build_space(parse_space("flat-torus-3-4"))
    with pytest.raises(InvalidSpec):
        build_space(SpaceSpec("perturbed-torus", amplitude=0.1, resolution=8, modes=(Mode(0, 0, 0.4, (1, 0, 0)),)))
    with pytest.raises(InvalidSpec):
        TorusGrid.cube(2, 8)
    with pytest.raises(InvalidSpec):
        ChartSpec("sphere-stereographic", 3, -1.0)


def test_indefinite_metric_rejected():
    # a single off-diagonal mode of amplitude 0.3 stays definite; stacking two of them does not
    modes = tuple(Mode(0, 1, 0.3, (0, 0, 0)) for _ in range(4))
    with pytest.raises(IndefiniteMetric):
        build_space(SpaceSpec("perturbed-torus", amplitude=0.1, resolution=8, modes=modes))


def test_space_spec_dict_roundtrip():
    s = parse_space("perturbed-torus-3-8-a0.2")
    assert SpaceSpec.from_dict(s.to_dict()) == s
    assert SpaceSpec.from_dict({"shorthand": "sphere-3-r2", "radius": 3.0}).radius == 3.0
    with pytest.raises(InvalidSpec):
        SpaceSpec.from_dict({"kind": "flat-torus", "colour": 1})


def test_low_mode_field_is_deterministic_and_symmetric():
    dom, _ = space("flat-torus-3-8")
    a = low_mode_field(dom, 2, 3).values()
    b = low_mode_field(dom, 2, 3).values()
    assert np.array_equal(a, b)
    np.testing.assert_array_equal(a, np.swapaxes(a, -1, -2))


def test_pointwise_curvature_matches_oracle(oracle):
    _, g = space("perturbed-torus-3-16-a0.1")
    ctx = Sigma2Context(g.truncate(2))
    R = ctx.scalar.values()
    n2 = ctx.curv.ricci_norm2.values()
    s2 = ctx.sigma2.values()
    for row in oracle["perturbed_mixed_a0.1_grid16"]:
        i = tuple(row["index"])
        assert R[i] == pytest.approx(row["scalar"], abs=1e-10)
        assert n2[i] == pytest.approx(row["ricci_norm2"], abs=1e-10)
        assert s2[i] == pytest.approx(row["sigma2"], abs=1e-10)


@pytest.mark.parametrize("n, r", [(3, 1.0), (3, 2.0), (4, 1.0), (5, 1.5)])
def test_round_sphere_curvature(n, r):
    _, g = build_space(SpaceSpec("sphere", dim=n, radius=r))
    ctx = Sigma2Context(g)
    gv, ric = ctx.g.values(), ctx.ricci.values()
    np.testing.assert_allclose(ric, (n - 1) / r**2 * gv, atol=1e-12)
    np.testing.assert_allclose(ctx.scalar.values(), n * (n - 1) / r**2, rtol=1e-12)


def test_hyperbolic_curvature():
    _, g = space("hyperbolic-3")
    ctx = Sigma2Context(g)
    np.testing.assert_allclose(ctx.ricci.values(), -2 * g.values(), atol=1e-12)


def test_sphere_coordinates_lie_on_the_sphere():
    dom, _ = space("sphere-3-r2")
    xs = [coordinate_function(dom, k).values() for k in range(4)]
    np.testing.assert_allclose(sum(x**2 for x in xs), 4.0, rtol=1e-13)


def test_flat_volume_and_curvature():
    dom, g = space("flat-torus-3-8")
    assert volume_integral(Field.constant(dom, 1.0), g) == pytest.approx(1.0, rel=1e-15)
    assert Sigma2Context(g.truncate(2)).riemann.max_abs() == 0.0


def test_contracted_bianchi_on_perturbed_torus():
    _, g = space("perturbed-torus-3-12-a0.1")
    ctx = Sigma2Context(g.truncate(3))
    assert ctx.div_ricci_residual.max_abs() < 1e-9 * ctx.scalar.d().max_abs()


def test_field_csv_export(tmp_path):
    dom, g = space("flat-torus-3-8")
    path = g.to_csv(tmp_path / "g.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + dom.size
