"""Tensor fields on a domain.

A ``Field`` is a fully covariant (or, for vector fields, fully
contravariant) tensor sampled on a domain.  All index bookkeeping is done
with einsum-style specs that name component indices only.  Storage is a
jet per sample point, shape (points, monomials, *components); ``values()``
returns the plain samples.
"""

from __future__ import annotations

import csv
import string
from pathlib import Path

import numpy as np

__all__ = ["Field", "ein", "inverse", "DomainMismatch"]


class DomainMismatch(ValueError):
    """Fields from different domains were combined."""


class Field:
    __slots__ = ("domain", "data", "rank", "_values")

    def __init__(self, domain, data, rank: int):
        self.domain = domain
        self.data = data
        self.rank = rank
        self._values = None

    @property
    def order(self) -> int:
        """Number of derivatives still available."""
        return self.domain._order(self.data)

    def truncate(self, order: int) -> "Field":
        if order >= self.order:
            return self
        return Field(self.domain, self.domain._truncate(self.data, order), self.rank)

    # construction helpers

    @classmethod
    def constant(cls, domain, value) -> "Field":
        value = np.asarray(value, dtype=float)
        return cls(domain, domain._constant(value), value.ndim)

    @classmethod
    def from_values(cls, domain, values, rank: int) -> "Field":
        """Wrap sampled values (grid shape + components on grids, (points,) + components on charts).

        Grid samples get spectral derivatives; chart samples carry none.
        """
        return cls(domain, domain._from_points(values), rank)

    @classmethod
    def zeros(cls, domain, rank: int) -> "Field":
        return cls.constant(domain, np.zeros((domain.dim,) * rank))

    # arithmetic

    def _check(self, other: "Field") -> None:
        if other.domain != self.domain:
            raise DomainMismatch("domain-mismatch: fields live on different domains")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            if other.rank != self.rank:
                raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")
            a, b = self.data, other.data
            if a.shape[1] != b.shape[1]:
                m = min(a.shape[1], b.shape[1])
                a, b = a[:, :m], b[:, :m]
            return Field(self.domain, a + b, self.rank)
        if other == 0:
            return self
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Field(self.domain, -self.data, self.rank)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Field):
            if other.rank == 0:
                return scalar_times(other, self)
            if self.rank == 0:
                return scalar_times(self, other)
            raise ValueError("use ein() for tensor products")
        return Field(self.domain, self.data * float(other), self.rank)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / float(other))

    # differential structure

    def d(self) -> "Field":
        """Coordinate partial derivatives; the new index comes first."""
        return Field(self.domain, self.domain._deriv(self.data), self.rank + 1)

    def values(self) -> np.ndarray:
        """Sampled values: grid shape + components, or (points,) + components."""
        if self._values is None:
            self._values = self.domain._values(self.data)
        return self._values

    def transpose(self, perm) -> "Field":
        letters = string.ascii_lowercase[: self.rank]
        out = "".join(letters[p] for p in perm)
        return ein(f"{letters}->{out}", self)

    def sym(self) -> "Field":
        return 0.5 * (self + self.transpose((1, 0)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values()))) if self.values().size else 0.0

    def to_csv(self, path: str | Path) -> Path:
        """One row per sample point: coordinates, then components in lexicographic order."""
        path = Path(path)
        vals = self.values()
        dom = self.domain
        if dom.is_grid:
            pts = dom.points()
        else:
            pts = dom.point_array()
        flat = vals.reshape(pts.shape[0], -1)
        n = dom.dim
        idx_names = [
            "v" + "".join(str(i) for i in ix) if self.rank else "v"
            for ix in np.ndindex(*((n,) * self.rank))
        ]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(n)] + idx_names)
            for p, row in zip(pts, flat):
                w.writerow([repr(float(v)) for v in p] + [repr(float(v)) for v in row])
        return path


def ein(spec: str, *fields: Field) -> Field:
    """Pointwise einsum over component indices, e.g. ``ein("ij,jk->ik", a, b)``."""
    dom = fields[0].domain
    for f in fields[1:]:
        fields[0]._check(f)
    lhs, out = spec.split("->")
    if len(lhs.split(",")) != len(fields):
        raise ValueError(f"spec {spec!r} does not match {len(fields)} operands")
    return Field(dom, dom._ein(spec, *(f.data for f in fields)), len(out))


def scalar_times(f: Field, t: Field) -> Field:
    letters = string.ascii_lowercase[: t.rank]
    return ein(f",{letters}->{letters}", f, t)


def inverse(g: Field) -> Field:
    return Field(g.domain, g.domain._inv(g.data), 2)
