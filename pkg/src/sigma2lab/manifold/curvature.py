"""Levi-Civita connection and curvature of a metric field.

Conventions: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
R_ijkl = g(R(e_i, e_j) e_k, e_l), Ric_ij = g^kl R_kijl.  With these the unit
sphere has R_ijkl = g_il g_jk - g_ik g_jl and Ric = (n-1) g.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..errors import SingularMetric
from .fields import Field, ein, inverse

__all__ = ["CurvaturePack", "curvature"]


class CurvaturePack:
    """Memoized curvature stack for one metric.

    ``christoffel`` holds Gamma^k_ij with the upper index first.
    """

    def __init__(self, g: Field):
        self.g = g
        self.domain = g.domain
        self.dim = g.domain.dim

    @cached_property
    def ginv(self) -> Field:
        vals = self.g.values()
        if not np.all(np.isfinite(vals)):
            raise SingularMetric("non-finite metric components")
        det = np.linalg.det(vals)
        if np.min(np.abs(det)) < 1e-14:
            raise SingularMetric(f"metric determinant {np.min(np.abs(det)):.3e}")
        return inverse(self.g)

    @cached_property
    def christoffel(self) -> Field:
        dg = self.g.d()  # dg[k,i,j] = d_k g_ij
        first = 0.5 * (ein("ijl->lij", dg) + ein("jil->lij", dg) - ein("lij->lij", dg))
        return ein("kl,lij->kij", self.ginv, first)

    @cached_property
    def riemann(self) -> Field:
        G = self.christoffel
        dG = G.d()  # dG[a,m,j,k] = d_a Gamma^m_jk
        t = (
            ein("imjk->ijkm", dG)
            - ein("jmik->ijkm", dG)
            + ein("pjk,mip->ijkm", G, G)
            - ein("pik,mjp->ijkm", G, G)
        )
        return ein("ijkm,ml->ijkl", t, self.g)

    @cached_property
    def ricci(self) -> Field:
        return ein("kl,kijl->ij", self.ginv, self.riemann)

    @cached_property
    def scalar(self) -> Field:
        return ein("ij,ij->", self.ginv, self.ricci)

    @cached_property
    def ricci_norm2(self) -> Field:
        return ein("ia,jb,ij,ab->", self.ginv, self.ginv, self.ricci, self.ricci)

    def ricci_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of Ric relative to g, ascending, per sample point."""
        g = self.g.values()
        ric = self.ricci.values()
        L = np.linalg.cholesky(g)
        Linv = np.linalg.inv(L)
        A = Linv @ ric @ np.swapaxes(Linv, -1, -2)
        return np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2)))


def curvature(g: Field) -> CurvaturePack:
    return CurvaturePack(g)
