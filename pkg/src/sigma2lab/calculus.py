"""Covariant differential operators on scalar, 1-form and symmetric 2-tensor fields.

Sign conventions: Delta f = g^ij nabla_i nabla_j f (non-positive spectrum),
(delta h)_j = -g^ik nabla_i h_kj, delta of a 1-form is -g^ij nabla_i w_j, and
delta* w = sym(nabla w) is the L2 adjoint of delta.  delta^2 h is the 1-form
codifferential applied to delta h, i.e. div div h.
"""

from __future__ import annotations

import string
from functools import cached_property

from .manifold.curvature import CurvaturePack
from .manifold.fields import DomainMismatch, Field, ein

__all__ = ["OperatorContext"]


class OperatorContext:
    """A metric together with its memoized connection and curvature."""

    def __init__(self, g: Field):
        self.g = g
        self.domain = g.domain
        self.n = g.domain.dim
        self.curv = CurvaturePack(g)

    @classmethod
    def from_pack(cls, pack: CurvaturePack) -> "OperatorContext":
        ctx = cls.__new__(cls)
        ctx.g, ctx.domain, ctx.n, ctx.curv = pack.g, pack.domain, pack.dim, pack
        return ctx

    @property
    def ginv(self) -> Field:
        return self.curv.ginv

    @property
    def christoffel(self) -> Field:
        return self.curv.christoffel

    @property
    def ricci(self) -> Field:
        return self.curv.ricci

    @property
    def scalar(self) -> Field:
        return self.curv.scalar

    @property
    def riemann(self) -> Field:
        return self.curv.riemann

    def _own(self, *fields: Field) -> None:
        for f in fields:
            if f.domain != self.domain:
                raise DomainMismatch("domain-mismatch: field and context live on different domains")

    # index gymnastics

    def trace(self, h: Field) -> Field:
        self._own(h)
        return ein("ij,ij->", self.ginv, h)

    def flat(self, X: Field) -> Field:
        return ein("ij,j->i", self.g, X)

    def sharp(self, w: Field) -> Field:
        return ein("ij,j->i", self.ginv, w)

    def inner(self, a: Field, b: Field) -> Field:
        from .manifold.integrate import pointwise_inner

        self._own(a, b)
        return pointwise_inner(a, b, self.g, self.ginv)

    def circ(self, A: Field, B: Field) -> Field:
        """(A o B)_ij = g^kl A_ki B_lj."""
        return ein("kl,ki,lj->ij", self.ginv, A, B)

    # derivatives

    def nabla(self, T: Field) -> Field:
        """Covariant derivative of a covariant tensor; the new index comes first."""
        self._own(T)
        out = T.d()
        if T.rank == 0:
            return out
        G = self.christoffel
        letters = string.ascii_lowercase[: T.rank]
        for s in range(T.rank):
            inner = letters[:s] + "z" + letters[s + 1 :]
            out = out - ein(f"zy{letters[s]},{inner}->y{letters}", G, T)
        return out

    def gradient(self, f: Field) -> Field:
        return self.nabla(f)

    def hessian(self, f: Field) -> Field:
        if f.rank != 0:
            raise ValueError("hessian expects a scalar field")
        return self.nabla(self.nabla(f))

    def laplacian(self, T: Field) -> Field:
        """g^ij nabla_i nabla_j T; the rough Laplacian for tensors."""
        letters = string.ascii_lowercase[2 : 2 + T.rank]
        return ein(f"ab,ab{letters}->{letters}", self.ginv, self.nabla(self.nabla(T)))

    def delta(self, T: Field) -> Field:
        """Negative divergence on the first index (1-forms and symmetric 2-tensors)."""
        if T.rank not in (1, 2):
            raise ValueError("delta acts on 1-forms or 2-tensors")
        rest = "c" if T.rank == 2 else ""
        return -ein(f"ab,ab{rest}->{rest}", self.ginv, self.nabla(T))

    def divergence(self, T: Field) -> Field:
        return -self.delta(T)

    def delta_sq(self, h: Field) -> Field:
        return self.delta(self.delta(h))

    def delta_star(self, w: Field) -> Field:
        if w.rank != 1:
            raise ValueError("delta_star acts on 1-forms")
        return self.nabla(w).sym()

    def lie_metric(self, X: Field) -> Field:
        """Lie derivative of g along a vector field X (upper index)."""
        return 2.0 * self.delta_star(self.flat(X))

    # curvature actions

    def ring(self, h: Field) -> Field:
        """R(h)_ij = g^kl g^st R_kijs h_lt."""
        self._own(h)
        return ein("kl,st,kijs,lt->ij", self.ginv, self.ginv, self.riemann, h)

    def lichnerowicz(self, h: Field) -> Field:
        ric = self.ricci
        return (
            self.laplacian(h)
            + 2.0 * self.ring(h)
            - self.circ(ric, h)
            - self.circ(h, ric)
        )

    @cached_property
    def div_ricci_residual(self) -> Field:
        """div Ric - dR/2 (contracted second Bianchi identity)."""
        return self.divergence(self.ricci) - 0.5 * self.scalar.d()
