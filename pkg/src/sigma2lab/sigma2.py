"""The sigma_2 curvature, its linearization Lambda_g and adjoint Lambda*_g, and
the derived quantities built on them (symbol, stability predicate, F_eps,
almost-Schur sides, dimension-three curvature relations).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .calculus import OperatorContext
from .errors import (
    ChartDomainError,
    DimensionFour,
    InvalidSpec,
    NotEinstein,
    RicciBoundViolated,
    WrongDimension,
    ZeroCovector,
)
from .manifold.fields import Field, ein
from .manifold.integrate import volume_density, volume_integral

__all__ = [
    "Sigma2Context",
    "SymbolData",
    "FunctionalSpec",
    "principal_symbol",
    "symbol_trace",
    "f_epsilon",
    "f_epsilon_density",
]

EINSTEIN_TOL = 1e-8


class Sigma2Context(OperatorContext):
    """Operator context with cached sigma_1, sigma_2, Schouten-type tensor and Q."""

    @property
    def c_n(self) -> float:
        """n / (4(n-1)), the weight of the scalar-curvature part of sigma_2."""
        return self.n / (4.0 * (self.n - 1))

    @cached_property
    def a_tensor(self) -> Field:
        return self.ricci - (self.scalar * self.g) / (2.0 * (self.n - 1))

    @cached_property
    def sigma1(self) -> Field:
        return self.trace(self.a_tensor)

    @cached_property
    def sigma2(self) -> Field:
        n = self.n
        R = self.scalar
        return -0.5 * self.curv.ricci_norm2 + (n / (8.0 * (n - 1))) * (R * R)

    @cached_property
    def q_curvature(self) -> Field:
        n = self.n
        if n == 2:
            raise WrongDimension("Q-curvature needs n != 2")
        s1 = self.sigma1
        return (
            -self.laplacian(s1) / (n - 2)
            + (4.0 / (n - 2) ** 2) * self.sigma2
            + ((n - 4) / (2.0 * (n - 2) ** 2)) * (s1 * s1)
        )

    # scalar curvature linearization and its adjoint

    def scalar_lin(self, h: Field) -> Field:
        return -self.laplacian(self.trace(h)) + self.delta_sq(h) - self.inner(self.ricci, h)

    def scalar_adjoint(self, f: Field) -> Field:
        return self.hessian(f) - self.laplacian(f) * self.g - f * self.ricci

    # sigma_2 linearization and its adjoint

    def lambda_lin(self, h: Field) -> Field:
        self._own(h)
        ric, R = self.ricci, self.scalar
        trh = self.trace(h)
        bracket = (
            self.laplacian(h)
            + self.hessian(trh)
            + 2.0 * self.delta_star(self.delta(h))
            + 2.0 * self.ring(h)
        )
        scalar_part = self.laplacian(trh) - self.delta_sq(h) + self.inner(ric, h)
        return 0.5 * self.inner(ric, bracket) - self.c_n * (R * scalar_part)

    def lambda_adjoint(self, f: Field) -> Field:
        self._own(f)
        ric, R, g = self.ricci, self.scalar, self.g
        fric = f * ric
        fR = f * R
        return (
            0.5 * self.laplacian(fric)
            + 0.5 * (self.delta_sq(fric) * g)
            + self.delta_star(self.delta(fric))
            + f * self.ring(ric)
            - self.c_n * (self.laplacian(fR) * g - self.hessian(fR) + fR * ric)
        )

    def trace_lambda_adjoint(self, f: Field) -> Field:
        n, R = self.n, self.scalar
        return (
            ((2.0 - n) / 4.0) * (R * self.laplacian(f))
            + ((n - 2.0) / 2.0) * self.inner(self.hessian(f), self.ricci)
            - 2.0 * (self.sigma2 * f)
        )

    # Einstein specialization

    def einstein_residual(self) -> float:
        n = self.n
        dev = self.ricci - (self.scalar * self.g) / n
        scale = 1.0 + float(np.max(np.abs(self.scalar.values())))
        return dev.max_abs() / scale

    def is_einstein(self, tol: float = EINSTEIN_TOL) -> bool:
        return self.einstein_residual() < tol

    def einstein_lambda_adjoint(self, f: Field, tol: float = EINSTEIN_TOL) -> Field:
        res = self.einstein_residual()
        if res >= tol:
            raise NotEinstein(f"max |Ric - (R/n) g| / (1 + |R|) = {res:.3e}")
        n, R, g = self.n, self.scalar, self.g
        coef = (n - 2) ** 2 / (4.0 * n * (n - 1))
        return coef * (
            R * self.hessian(f) - (R * self.laplacian(f)) * g - ((R * R * f) * g) / n
        )

    def einstein_kernel_residual(self, f: Field) -> Field:
        """R nabla^2 f + R^2/(n(n-1)) f g, zero for f in ker Lambda* on Einstein spaces."""
        n, R = self.n, self.scalar
        return R * self.hessian(f) + ((R * R * f) * self.g) / (n * (n - 1))

    # identities

    def diffeo_residual(self, X: Field) -> Field:
        """Lambda(L_X g) - <d sigma_2, X>."""
        lhs = self.lambda_lin(self.lie_metric(X))
        return lhs - ein("i,i->", self.sigma2.d(), X)

    def trace_identity_residual(self) -> Field:
        one = Field.constant(self.domain, 1.0)
        return self.trace(self.lambda_adjoint(one)) + 2.0 * self.sigma2

    def divergence_identity_residual(self, f: Field, adjoint: Field | None = None) -> Field:
        """div Lambda*(f) + f d sigma_2 / 2; pass a precomputed Lambda*(f) to reuse it."""
        lam = self.lambda_adjoint(f) if adjoint is None else adjoint
        return self.divergence(lam) + 0.5 * (f * self.sigma2.d())

    # stability predicate

    def stability_margin(self) -> Field:
        R = self.scalar
        return R * R - 4.0 * self.curv.ricci_norm2

    def stability_condition(self, rtol: float = 1e-9) -> np.ndarray:
        """Pointwise R^2 > 4|Ric|^2, strict beyond a relative round-off band."""
        R2 = (self.scalar * self.scalar).values()
        r4 = 4.0 * self.curv.ricci_norm2.values()
        return (R2 - r4) > rtol * (np.abs(R2) + np.abs(r4) + 1e-300)

    def stability_forms(self) -> dict[str, np.ndarray]:
        """Both printed sigma_2 lower bounds, as margins (positive means satisfied)."""
        n = self.n
        s2 = self.sigma2.values()
        R = self.scalar.values()
        ric2 = self.curv.ricci_norm2.values()
        return {
            "ricci_form": s2 - ric2 / (2.0 * (n - 1)),
            "scalar_form": s2 - R**2 / (8.0 * (n - 1)),
            "equivalent": R**2 - 4.0 * ric2,
        }

    # almost-Schur

    def schur_deficit(self) -> Field:
        """|Lambda*(1) + (2/n) sigma_2 g|^2 pointwise."""
        one = Field.constant(self.domain, 1.0)
        T = self.lambda_adjoint(one) + (2.0 / self.n) * (self.sigma2 * self.g)
        return self.inner(T, T)

    def almost_schur_sides(self, K: float, lambda1: float) -> tuple[float, float]:
        n = self.n
        if n == 4:
            raise DimensionFour("the almost-Schur constant is undefined for n = 4")
        if not self.domain.is_grid:
            raise ChartDomainError("almost-Schur sides need integration")
        if K < 0:
            raise InvalidSpec("K must be non-negative")
        if not lambda1 > 0:
            raise InvalidSpec("lambda1 must be positive")
        lam_min = float(self.curv.ricci_eigenvalues().min())
        if lam_min < -(n - 1) * K - 1e-12 * (1 + abs(lam_min)):
            raise RicciBoundViolated(f"min Ricci eigenvalue {lam_min:.6g} < -(n-1)K")
        s2 = self.sigma2
        vol = float(np.sum(volume_density(self.g)) * self.domain.cell_volume)
        mean = volume_integral(s2, self.g) / vol
        dev = s2 - Field.constant(self.domain, mean)
        lhs = volume_integral(dev * dev, self.g)
        const = 8.0 * n * (n - 1) / (n - 4) ** 2 * (1.0 + n * K / lambda1)
        rhs = const * volume_integral(self.schur_deficit(), self.g)
        return lhs, rhs

    # dimension three

    def _need_dim3(self) -> None:
        if self.n != 3:
            raise WrongDimension(f"needs n = 3, got n = {self.n}")

    def riemann_dim3(self) -> Field:
        """Riemann tensor rebuilt from Ricci (Weyl-free decomposition in n = 3)."""
        self._need_dim3()
        g, ric, R = self.g, self.ricci, self.scalar
        gg = ein("il,jk->ijkl", g, g) - ein("ik,jl->ijkl", g, g)
        return (
            ein("il,jk->ijkl", ric, g)
            + ein("jk,il->ijkl", ric, g)
            - ein("ik,jl->ijkl", ric, g)
            - ein("jl,ik->ijkl", ric, g)
            - 0.5 * (R * gg)
        )

    def sectional_dim3(self, u, v) -> np.ndarray:
        """Sectional curvature of span(u, v) at every sample point via the decomposition."""
        self._need_dim3()
        return _sectional(self.riemann_dim3().values(), self.g.values(), u, v)

    def sectional(self, u, v) -> np.ndarray:
        """Sectional curvature from the computed Riemann tensor (any n)."""
        return _sectional(self.riemann.values(), self.g.values(), u, v)

    def q_dim3_check(self) -> Field:
        self._need_dim3()
        R = self.scalar
        return self.q_curvature - ((23.0 / 32.0) * (R * R) - 2.0 * self.curv.ricci_norm2)


def _sectional(riem, g, u, v) -> np.ndarray:
    u = np.broadcast_to(np.asarray(u, dtype=float), g.shape[:-1])
    v = np.broadcast_to(np.asarray(v, dtype=float), g.shape[:-1])
    num = np.einsum("...ijkl,...i,...j,...k,...l->...", riem, u, v, v, u)
    guu = np.einsum("...ij,...i,...j->...", g, u, u)
    gvv = np.einsum("...ij,...i,...j->...", g, v, v)
    guv = np.einsum("...ij,...i,...j->...", g, u, v)
    return num / (guu * gvv - guv**2)


# principal symbol


@dataclass
class SymbolData:
    """Pointwise data for the principal symbol of Lambda*: xi is a covector."""

    xi: np.ndarray
    g: np.ndarray
    ricci: np.ndarray
    scalar: float

    @property
    def n(self) -> int:
        return self.g.shape[-1]

    @classmethod
    def at(cls, ctx: OperatorContext, index: int, xi) -> "SymbolData":
        g = ctx.g.values().reshape(-1, ctx.n, ctx.n)[index]
        ric = ctx.ricci.values().reshape(-1, ctx.n, ctx.n)[index]
        R = float(ctx.scalar.values().ravel()[index])
        return cls(np.asarray(xi, dtype=float), g, ric, R)


def _symbol_parts(sd: SymbolData):
    xi = np.asarray(sd.xi, dtype=float)
    if not np.any(xi):
        raise ZeroCovector("principal symbol needs xi != 0")
    ginv = np.linalg.inv(sd.g)
    xi_up = ginv @ xi
    xi2 = float(xi @ xi_up)
    xx_ric = float(xi_up @ sd.ricci @ xi_up)
    return xi, ginv, xi_up, xi2, xx_ric


def principal_symbol(sd: SymbolData) -> np.ndarray:
    xi, ginv, xi_up, xi2, xx_ric = _symbol_parts(sd)
    n, R, ric, g = sd.n, sd.scalar, sd.ricci, sd.g
    c = n / (4.0 * (n - 1))
    v = ric @ xi_up  # g^ij xi_i R_kj
    cross = np.outer(xi, v)  # xi_l (g^ij xi_i R_kj) at [l, k]
    return (
        0.5 * xi2 * ric
        + 0.5 * xx_ric * g
        - 0.5 * (cross.T + cross)
        - c * R * xi2 * g
        + c * R * np.outer(xi, xi)
    )


def symbol_trace(sd: SymbolData) -> float:
    _, _, _, xi2, xx_ric = _symbol_parts(sd)
    n = sd.n
    return (n - 2) / 2.0 * (-0.5 * xi2 * sd.scalar + xx_ric)


def symbol_matrix_trace(sd: SymbolData) -> float:
    return float(np.einsum("ij,ij->", np.linalg.inv(sd.g), principal_symbol(sd)))


# the functional F_eps


@dataclass(frozen=True)
class FunctionalSpec:
    eps: float
    g0: Field

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidSpec(f"eps must be > 0, got {self.eps}")


def f_epsilon_density(eps: float, ctx: Sigma2Context) -> Field:
    """sigma_2(g) - (1/(8n(n-1)) + eps) R_g^2, to be integrated against dv_{g0}."""
    n, R = ctx.n, ctx.scalar
    return ctx.sigma2 - (1.0 / (8.0 * n * (n - 1)) + eps) * (R * R)


def f_epsilon(spec: FunctionalSpec, g: Field) -> float:
    if not g.domain.is_grid:
        raise ChartDomainError("F_eps needs integration over a torus grid")
    ctx = Sigma2Context(g)
    return volume_integral(f_epsilon_density(spec.eps, ctx), spec.g0)
