"""Finite-difference derivatives along straight metric paths g(t) = g0 + t h.

Every FD quantity here depends on at most two derivatives of the metric, so
path metrics are truncated to second-order jets before evaluation; this keeps
each probe cheap without changing any sampled value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    IndefiniteAlongPath,
    InvalidSpec,
    KindMismatch,
    NonFlatBackground,
    NotDivergenceFree,
)
from .manifold.fields import Field
from .manifold.integrate import volume_integral
from .report import Series, make_report, relative_residual, stopwatch
from .sigma2 import FunctionalSpec, Sigma2Context, f_epsilon

__all__ = [
    "PathProbe",
    "FDResult",
    "fd_derivative",
    "verify_evolution",
    "verify_ricci_norm_variation",
    "verify_linearization",
    "verify_adjoint",
    "project_div_free",
    "second_variation_F",
    "SecondVariation",
    "traceless_split_residual",
    "ricci_of",
    "scalar_of",
    "sigma2_of",
    "ricci_norm2_of",
]

FD_ORDER = 2  # metric derivatives needed by every FD quantity below


@dataclass(frozen=True)
class PathProbe:
    """Straight path g0 + t h probed at steps t, t/2, ..., t/2^(levels-1)."""

    g0: Field
    h: Field
    t: float = 1e-3
    levels: int = 3

    def __post_init__(self):
        if self.levels < 2:
            raise InvalidSpec("Richardson needs at least two levels")
        if not self.t > 0:
            raise InvalidSpec("base step must be positive")
        if self.h.rank != 2 or self.g0.rank != 2:
            raise KindMismatch("path probes need a metric and a symmetric 2-tensor")
        self.g0._check(self.h)

    @property
    def steps(self) -> list[float]:
        return [self.t / 2**k for k in range(self.levels)]

    @property
    def domain(self):
        return self.g0.domain

    def metric(self, s: float) -> Field:
        return (self.g0 + self.h * s).truncate(FD_ORDER)

    def check_positive(self, margin: float = 1.0) -> None:
        """Raise unless g0 + s h is positive definite for |s| <= margin * t."""
        g = self.g0.values()
        h = self.h.values()
        for s in (margin * self.t, -margin * self.t):
            lam = np.linalg.eigvalsh(g + s * h)
            if not np.all(np.isfinite(lam)) or lam.min() <= 0:
                raise IndefiniteAlongPath(f"g0 + {s:g} h has eigenvalue {lam.min():.3e}")


@dataclass
class FDResult:
    value: Field | float
    error: float
    steps: list[float]
    raw: list  # plain central differences per step
    tableau_diag: list = field(default_factory=list)

    def convergence_series(self, name: str = "convergence") -> Series:
        """Distance of each raw difference from the extrapolated value, with log-log slope."""
        dist = [_max_abs(r - self.value) for r in self.raw]
        slope = [float("nan")]
        for k in range(1, len(dist)):
            if dist[k] > 0 and dist[k - 1] > 0:
                slope.append(float(np.log(dist[k - 1] / dist[k]) / np.log(self.steps[k - 1] / self.steps[k])))
            else:
                slope.append(float("nan"))
        return Series(name, {"step": list(self.steps), "distance": dist, "slope": slope}, x="step", logy=True)


def _max_abs(x) -> float:
    if isinstance(x, Field):
        return x.max_abs()
    return float(np.max(np.abs(x)))


def fd_derivative(quantity: Callable, probe: PathProbe, order: int = 1) -> FDResult:
    """Central difference of ``quantity(g(t))`` at t = 0 with ratio-2 Richardson extrapolation."""
    if order not in (1, 2):
        raise InvalidSpec("order must be 1 or 2")
    probe.check_positive()
    center = quantity(probe.metric(0.0)) if order == 2 else None
    raw = []
    for s in probe.steps:
        plus = quantity(probe.metric(s))
        minus = quantity(probe.metric(-s))
        if order == 1:
            raw.append((plus - minus) * (0.5 / s))
        else:
            raw.append((plus + minus - center * 2.0) * (1.0 / s**2))
    # Richardson tableau; both stencils have even error expansions in s
    rows = [[r] for r in raw]
    for k in range(1, len(raw)):
        for j in range(1, k + 1):
            fac = 4.0**j - 1.0
            prev, lower = rows[k][j - 1], rows[k - 1][j - 1]
            rows[k].append(prev + (prev - lower) * (1.0 / fac))
    diag = [rows[k][k] for k in range(len(raw))]
    best = diag[-1]
    return FDResult(best, _max_abs(best - diag[-2]), probe.steps, raw, diag)


# FD quantities (truncated metrics come in from PathProbe.metric)


def ricci_of(g: Field) -> Field:
    return Sigma2Context(g).ricci


def scalar_of(g: Field) -> Field:
    return Sigma2Context(g).scalar


def sigma2_of(g: Field) -> Field:
    return Sigma2Context(g).sigma2


def ricci_norm2_of(g: Field) -> Field:
    return Sigma2Context(g).curv.ricci_norm2


def _label(domain, space: str | None) -> str:
    return space if space else domain.describe()


# evolution equations


def ricci_evolution(ctx: Sigma2Context, h: Field) -> Field:
    """-(1/2)(Delta_L h + nabla^2 tr h + 2 delta* delta h)."""
    return -0.5 * (
        ctx.lichnerowicz(h) + ctx.hessian(ctx.trace(h)) + 2.0 * ctx.delta_star(ctx.delta(h))
    )


def verify_evolution(probe: PathProbe, tol: float = 1e-5, space: str | None = None):
    """FD time derivatives of Ric and R against their closed-form evolution."""
    with stopwatch() as clock:
        ctx = Sigma2Context(probe.g0.truncate(FD_ORDER))
        h = probe.h.truncate(FD_ORDER)
        d_ric = fd_derivative(ricci_of, probe, 1)
        d_R = fd_derivative(scalar_of, probe, 1)
        ric_closed = ricci_evolution(ctx, h)
        R_closed = ctx.scalar_lin(h)
        abs_ric = _max_abs(d_ric.value - ric_closed)
        abs_R = _max_abs(d_R.value - R_closed)
        rel_ric = relative_residual((d_ric.value - ric_closed).values(), ric_closed.values())
        rel_R = relative_residual((d_R.value - R_closed).values(), R_closed.values())
    rep = make_report(
        "evolution-equations",
        _label(probe.domain, space),
        max(abs_ric, abs_R),
        max(rel_ric, rel_R),
        tol,
        "first variation of Ricci and scalar curvature",
        clock,
        gate="relative",
        ricci_residual=abs_ric,
        scalar_residual=abs_R,
        fd_error=max(d_ric.error, d_R.error),
    )
    rep.series.append(d_ric.convergence_series("convergence"))
    return rep


# derivatives of |Ric|^2


def _ricci_norm2_first(ctx: Sigma2Context, d_ric: Field, h: Field) -> Field:
    ric = ctx.ricci
    return 2.0 * ctx.inner(ric, d_ric) - 2.0 * ctx.inner(ctx.circ(ric, ric), h)


def _ricci_norm2_second(ctx: Sigma2Context, d_ric: Field, dd_ric: Field, h: Field) -> Field:
    """Five-term second derivative along a straight path.

    The |Ric o h|^2 term is the trace of the squared endomorphism, i.e.
    <Ric o h, h o Ric>; this is what a direct expansion of
    g^ia g^jb R_ij R_ab with g'' = 0 produces.
    """
    ric = ctx.ricci
    rh = ctx.circ(ric, h)
    hr = ctx.circ(h, ric)
    return (
        4.0 * ctx.inner(ctx.circ(h, h), ctx.circ(ric, ric))
        + 2.0 * ctx.inner(rh, hr)
        - 8.0 * ctx.inner(rh, d_ric)
        + 2.0 * ctx.inner(d_ric, d_ric)
        + 2.0 * ctx.inner(ric, dd_ric)
    )


def verify_ricci_norm_variation(probe: PathProbe, tol_first: float = 1e-5, tol_second: float = 1e-4, space=None):
    """First and second t-derivatives of |Ric|^2 versus the product-rule formulas.

    Returns two reports (first order, second order).  Ric' and Ric'' come from
    FD as well, so the check is independent of the evolution equations.
    """
    label = _label(probe.domain, space)
    with stopwatch() as c1:
        ctx = Sigma2Context(probe.g0.truncate(FD_ORDER))
        h = probe.h.truncate(FD_ORDER)
        d_ric = fd_derivative(ricci_of, probe, 1).value
        d_n2 = fd_derivative(ricci_norm2_of, probe, 1)
        rhs1 = _ricci_norm2_first(ctx, d_ric, h)
        diff1 = (d_n2.value - rhs1).values()
    first = make_report(
        "ricci-norm-first-variation",
        label,
        float(np.max(np.abs(diff1))),
        relative_residual(diff1, rhs1.values()),
        tol_first,
        "first variation of |Ric|^2",
        c1,
        gate="relative",
        fd_error=d_n2.error,
    )
    with stopwatch() as c2:
        dd_ric = fd_derivative(ricci_of, probe, 2).value
        dd_n2 = fd_derivative(ricci_norm2_of, probe, 2)
        rhs2 = _ricci_norm2_second(ctx, d_ric, dd_ric, h)
        diff2 = (dd_n2.value - rhs2).values()
    second = make_report(
        "ricci-norm-second-variation",
        label,
        float(np.max(np.abs(diff2))),
        relative_residual(diff2, rhs2.values()),
        tol_second,
        "second variation of |Ric|^2",
        c2,
        gate="relative",
        fd_error=dd_n2.error,
    )
    return [first, second]


# linearization and adjoint


def verify_linearization(probe: PathProbe, tol: float = 1e-6, space=None, name="sigma2-linearization"):
    """FD derivative of sigma_2 along the path versus Lambda_g(h)."""
    with stopwatch() as clock:
        ctx = Sigma2Context(probe.g0.truncate(FD_ORDER))
        fd = fd_derivative(sigma2_of, probe, 1)
        lin = ctx.lambda_lin(probe.h.truncate(FD_ORDER))
        diff = (fd.value - lin).values()
    rep = make_report(
        name,
        _label(probe.domain, space),
        float(np.max(np.abs(diff))),
        relative_residual(diff, lin.values()),
        tol,
        "linearization of the sigma_2 map",
        clock,
        gate="relative",
        fd_error=fd.error,
    )
    rep.series.append(fd.convergence_series(f"{name}-convergence"))
    return rep


def adjoint_sides(g: Field, h: Field, f: Field, ctx: Sigma2Context | None = None):
    # values only: Lambda* needs four metric derivatives, Lambda two of h
    ctx = ctx or Sigma2Context(g.truncate(4))
    h, f = h.truncate(2), f.truncate(4)
    lhs = volume_integral(f * ctx.lambda_lin(h), g)
    rhs = volume_integral(ctx.inner(ctx.lambda_adjoint(f), h), g)
    return lhs, rhs


def verify_adjoint(g: Field, h: Field, f: Field, tol: float = 1e-8, space=None, ctx=None):
    """Integral pairing of f with Lambda(h) against <Lambda*(f), h>."""
    with stopwatch() as clock:
        lhs, rhs = adjoint_sides(g, h, f, ctx)
        diff = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
    return make_report(
        "adjointness",
        _label(g.domain, space),
        diff,
        diff / scale if scale > 0 else diff,
        tol,
        "L2-formal adjoint of the linearization",
        clock,
        gate="relative",
        lhs=lhs,
        rhs=rhs,
    )


# divergence-free projection on flat tori


def _require_flat(g0: Field, tol: float = 1e-10) -> np.ndarray:
    if not g0.domain.is_grid:
        raise NonFlatBackground("projection needs a torus grid")
    vals = g0.values()
    flat_axes = tuple(range(g0.domain.dim))
    mean = vals.mean(axis=flat_axes)
    if np.max(np.abs(vals - mean)) > tol * (1 + np.max(np.abs(mean))):
        raise NonFlatBackground("background metric has non-constant components")
    return mean


def project_div_free(h: Field, g0: Field) -> Field:
    """h - 2 delta* w with 2 delta delta* w = delta h, solved per Fourier mode.

    The factor 2 makes delta of the result vanish.  Modes where the symbol is
    singular (only k = 0) get w = 0.
    """
    g = _require_flat(g0)
    dom = h.domain
    n = dom.dim
    ginv = np.linalg.inv(g)
    hv = h.values()
    H = np.fft.fftn(hv, axes=tuple(range(n)))
    ks = np.meshgrid(*[dom.wavenumbers(a) for a in range(n)], indexing="ij")
    k = np.stack(ks, axis=-1)  # covector components
    k_up = k @ ginv
    k2 = np.einsum("...i,...i->...", k, k_up)
    # delta h = -g^{ik} d_i h_kj  ->  -i k^k H_kj
    dh = -1j * np.einsum("...k,...kj->...j", k_up, H)
    # 2 delta delta* w = |k|^2 w_j + k_j (k^l w_l)
    M = k2[..., None, None] * np.eye(n) + np.einsum("...j,...l->...jl", k, k_up)
    zero = k2 == 0
    M[zero] = np.eye(n)
    w = np.linalg.solve(M, dh[..., None])[..., 0]
    w[zero] = 0.0
    # 2 delta* w = i (k_i w_j + k_j w_i)
    corr = 1j * (k[..., :, None] * w[..., None, :] + k[..., None, :] * w[..., :, None])
    out = np.fft.ifftn(H - corr, axes=tuple(range(n))).real
    return Field.from_values(dom, out, 2)


# second variation of F_eps on a flat background


@dataclass
class SecondVariation:
    closed_form: float
    fd_value: float
    fd_error: float

    @property
    def difference(self) -> float:
        return self.fd_value - self.closed_form

    @property
    def relative(self) -> float:
        s = max(abs(self.closed_form), abs(self.fd_value))
        return abs(self.difference) / s if s > 0 else abs(self.difference)


def second_variation_closed_form(eps: float, g0: Field, h: Field) -> float:
    """-int (2 eps (Delta tr h)^2 + |Delta h0|^2 / 4) dv_{g0}, h0 the traceless part."""
    g0, h = g0.truncate(FD_ORDER), h.truncate(FD_ORDER)
    ctx = Sigma2Context(g0)
    n = ctx.n
    trh = ctx.trace(h)
    lap_tr = ctx.laplacian(trh)
    h0 = h - (trh * g0) / n
    lap_h0 = ctx.laplacian(h0)
    dens = 2.0 * eps * (lap_tr * lap_tr) + 0.25 * ctx.inner(lap_h0, lap_h0)
    return -volume_integral(dens, g0)


def second_variation_F(
    spec: FunctionalSpec, h: Field, t: float = 1e-3, levels: int = 3, div_tol: float = 1e-9
) -> SecondVariation:
    """Closed-form second variation of F_eps at a flat metric versus its FD value."""
    g0 = spec.g0.truncate(FD_ORDER)
    h = h.truncate(FD_ORDER)
    _require_flat(g0)
    ctx = Sigma2Context(g0)
    if ctx.riemann.max_abs() > 1e-10:
        raise NonFlatBackground("background is not flat")
    div = ctx.delta(h).max_abs()
    scale = max(1.0, h.d().max_abs())
    if div > div_tol * scale:
        raise NotDivergenceFree(f"max |delta h| = {div:.3e}")
    probe = PathProbe(g0, h, t, levels)
    probe.check_positive(margin=2.0)
    closed = second_variation_closed_form(spec.eps, g0, h)
    fd = fd_derivative(lambda g: f_epsilon(FunctionalSpec(spec.eps, g0), g), probe, 2)
    return SecondVariation(closed, float(fd.value), fd.error)


def traceless_split_residual(h: Field, g0: Field) -> Field:
    """|Delta h0|^2 - (|Delta h|^2 - (Delta tr h)^2 / n) pointwise on a flat background."""
    _require_flat(g0)
    g0, h = g0.truncate(FD_ORDER), h.truncate(FD_ORDER)
    ctx = Sigma2Context(g0)
    n = ctx.n
    trh = ctx.trace(h)
    lap_h = ctx.laplacian(h)
    lap_tr = ctx.laplacian(trh)
    lap_h0 = ctx.laplacian(h - (trh * g0) / n)
    return ctx.inner(lap_h0, lap_h0) - (ctx.inner(lap_h, lap_h) - (lap_tr * lap_tr) / n)
