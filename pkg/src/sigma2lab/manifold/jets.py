"""Truncated multivariate Taylor polynomials ("jets") at a batch of points.

A jet of order K in n variables is a coefficient array of shape
(P, m(K), *comps): P sample points, then the monomials y^alpha with
|alpha| <= K in graded order, so the jet of any lower order is a prefix of
the monomial axis.  Derivatives are exact coefficient shifts and products
apply the Leibniz rule pointwise, which is what keeps nonlinear curvature
expressions free of aliasing on periodic grids.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from numba import njit


class JetAlgebra:
    """Monomial bookkeeping and product tables for n variables up to order K."""

    def __init__(self, n: int, order: int):
        self.n = n
        self.order = order
        monos = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(n), deg):
                alpha = [0] * n
                for i in combo:
                    alpha[i] += 1
                monos.append(tuple(alpha))
        self.monomials = monos
        self.index = {a: m for m, a in enumerate(monos)}
        self.size = len(monos)
        self.degree = np.array([sum(a) for a in monos])
        self._count = [math.comb(k + n, n) for k in range(order + 1)]
        self.factorial = np.array([math.prod(math.factorial(a) for a in alpha) for alpha in monos])

        # targets[a][b] = index of alpha_a + beta_b, for every b in the admissible prefix
        self.targets = []
        for alpha in monos:
            room = order - sum(alpha)
            self.targets.append(
                np.array(
                    [self.index[tuple(x + y for x, y in zip(alpha, beta))] for beta in monos[: self._count[room]]]
                )
            )

        # d/dx_i: coefficient of alpha is (alpha_i + 1) * c[alpha + e_i]
        self.deriv_src = np.zeros((n, self.size), dtype=int)
        self.deriv_fac = np.zeros((n, self.size))
        for i in range(n):
            for m, alpha in enumerate(monos):
                up = list(alpha)
                up[i] += 1
                up = tuple(up)
                if up in self.index:
                    self.deriv_src[i, m] = self.index[up]
                    self.deriv_fac[i, m] = alpha[i] + 1

    def count(self, order: int) -> int:
        return self._count[order]

    def order_of(self, a: np.ndarray) -> int:
        return self._count.index(a.shape[1])

    def truncate(self, a: np.ndarray, order: int) -> np.ndarray:
        return a[:, : self.count(order)]

    def variable(self, x0: np.ndarray, i: int, order: int | None = None) -> np.ndarray:
        """Jet of the coordinate x_i at the points x0 (shape (P, n))."""
        order = self.order if order is None else order
        out = np.zeros((x0.shape[0], self.count(order)))
        out[:, 0] = x0[:, i]
        if order >= 1:
            e = [0] * self.n
            e[i] = 1
            out[:, self.index[tuple(e)]] = 1.0
        return out

    def constant(self, values: np.ndarray, order: int | None = None) -> np.ndarray:
        """Embed point values of shape (P, *comps) as constant jets."""
        order = self.order if order is None else order
        values = np.asarray(values, dtype=float)
        out = np.zeros((values.shape[0], self.count(order)) + values.shape[1:])
        out[:, 0] = values
        return out

    @lru_cache(maxsize=None)
    def pairs(self, order: int):
        """Flattened (alpha, beta, alpha + beta) monomial index triples with |alpha + beta| <= order."""
        ai, bi, gi = [], [], []
        for a in range(self.count(order)):
            nb = self.count(order - self.degree[a])
            ai.extend([a] * nb)
            bi.extend(range(nb))
            gi.extend(self.targets[a][:nb])
        return tuple(np.asarray(v, dtype=np.int64) for v in (ai, bi, gi))

    def einsum(self, spec: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Two-operand einsum with the truncated jet product on the monomial axis."""
        lhs, out = spec.split("->")
        sa, sb = lhs.split(",")
        order = min(self.order_of(a), self.order_of(b))
        ta, tb, to, out_shape = _component_triples(sa, sb, out, a.shape[2:], b.shape[2:])
        ai, bi, gi = self.pairs(order)
        P = a.shape[0]
        res = np.zeros((P, self.count(order), max(1, int(np.prod(out_shape)))))
        _jet_product(
            np.ascontiguousarray(a).reshape(P, a.shape[1], -1),
            np.ascontiguousarray(b).reshape(P, b.shape[1], -1),
            ai, bi, gi, ta, tb, to, res,
        )
        return res.reshape((P, self.count(order)) + out_shape)

    def derivative(self, a: np.ndarray) -> np.ndarray:
        """Stack of d/dx_i; the new component axis follows the monomial axis."""
        order = self.order_of(a)
        if order == 0:
            raise ValueError("jet order exhausted: not enough derivatives available")
        m = self.count(order - 1)
        parts = []
        for i in range(self.n):
            fac = self.deriv_fac[i, :m].reshape((1, m) + (1,) * (a.ndim - 2))
            parts.append(a[:, self.deriv_src[i, :m]] * fac)
        return np.stack(parts, axis=2)

    def compose(self, u: np.ndarray, derivs) -> np.ndarray:
        """Scalar jet phi(u) given derivs(a0, k) = phi^(k)(a0)."""
        order = self.order_of(u)
        a0 = u[:, 0].copy()
        du = u.copy()
        du[:, 0] = 0.0
        out = np.zeros_like(u)
        power = self.constant(np.ones_like(a0), order)
        for k in range(order + 1):
            out += (derivs(a0, k) / math.factorial(k))[:, None] * power
            if k < order:
                power = self.einsum(",->", power, du)
        return out

    def power(self, u: np.ndarray, p: float) -> np.ndarray:
        def derivs(a0, k):
            coef = 1.0
            for j in range(k):
                coef *= p - j
            return coef * a0 ** (p - k)

        return self.compose(u, derivs)

    def matrix_inverse(self, a: np.ndarray) -> np.ndarray:
        """Inverse of a matrix-valued jet via the Neumann series around a[:, 0]."""
        order = self.order_of(a)
        a0inv = self.constant(np.linalg.inv(a[:, 0]), order)
        nil = a.copy()
        nil[:, 0] = 0.0
        step = -self.einsum("ij,jk->ik", a0inv, nil)
        term = a0inv
        out = term.copy()
        for _ in range(order):
            term = self.einsum("ij,jk->ik", step, term)
            out += term
        return out


@lru_cache(maxsize=None)
def _component_triples(sa: str, sb: str, out: str, shape_a: tuple, shape_b: tuple):
    """Flat component offsets (into a, b, out) for every assignment of the subscript letters."""
    sizes = {}
    for letters, shape in ((sa, shape_a), (sb, shape_b)):
        if len(letters) != len(shape):
            raise ValueError(f"operand {letters!r} does not match component shape {shape}")
        for c, k in zip(letters, shape):
            if sizes.setdefault(c, k) != k:
                raise ValueError(f"index {c!r} has inconsistent extents")
    names = sorted(sizes)
    if any(c not in sizes for c in out):
        raise ValueError(f"output index of {sa},{sb}->{out} missing from inputs")
    if names:
        grid = np.indices([sizes[c] for c in names]).reshape(len(names), -1)
    else:
        grid = np.zeros((0, 1), dtype=np.int64)
    pos = {c: grid[i] for i, c in enumerate(names)}

    def flat(letters):
        idx = np.zeros(grid.shape[1], dtype=np.int64)
        for c in letters:
            idx = idx * sizes[c] + pos[c]
        return idx

    out_shape = tuple(sizes[c] for c in out)
    return flat(sa), flat(sb), flat(out), out_shape


@njit(cache=True, nogil=True)
def _jet_product(a, b, ai, bi, gi, ta, tb, to, res):  # pragma: no cover - compiled
    for p in range(a.shape[0]):
        for k in range(ai.shape[0]):
            x, y, z = ai[k], bi[k], gi[k]
            for t in range(ta.shape[0]):
                res[p, z, to[t]] += a[p, x, ta[t]] * b[p, y, tb[t]]


@lru_cache(maxsize=None)
def algebra(n: int, order: int) -> JetAlgebra:
    return JetAlgebra(n, order)
