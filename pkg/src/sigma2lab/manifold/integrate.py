"""Quadrature and L2 pairings on torus grids.

The rectangle rule on a uniform periodic grid integrates every
trigonometric polynomial below the Nyquist frequency exactly.
"""

from __future__ import annotations

import numpy as np

from ..errors import ChartDomainError, KindMismatch
from .fields import Field, ein, inverse

__all__ = ["volume_density", "volume_integral", "l2_pair", "pointwise_inner"]


def _require_grid(domain) -> None:
    if not domain.is_grid:
        raise ChartDomainError("integration is only supported on torus grids")


def volume_density(g: Field) -> np.ndarray:
    return np.sqrt(np.linalg.det(g.values()))


def volume_integral(f: Field, g: Field) -> float:
    """Integral of a scalar field against dv_g."""
    _require_grid(g.domain)
    if f.rank != 0:
        raise KindMismatch("volume_integral expects a scalar field")
    f._check(g)
    w = f.values() * volume_density(g)
    # fixed summation order (flattened C order) for reproducibility
    return float(np.sum(w.ravel()) * g.domain.cell_volume)


def pointwise_inner(a: Field, b: Field, g: Field, ginv: Field | None = None) -> Field:
    """<a, b>_g with every index raised by g^{-1}; a and b of equal rank."""
    if a.rank != b.rank:
        raise KindMismatch(f"rank {a.rank} paired with rank {b.rank}")
    if ginv is None:
        ginv = inverse(g)
    r = a.rank
    if r == 0:
        return a * b
    lo = "abcdefgh"[:r]
    up = "ijklmnop"[:r]
    spec = ",".join(f"{x}{y}" for x, y in zip(lo, up)) + f",{lo},{up}->"
    return ein(spec, *([ginv] * r), a, b)


def l2_pair(a: Field, b: Field, g: Field, ginv: Field | None = None) -> float:
    """Integral of <a, b>_g dv_g."""
    _require_grid(g.domain)
    return volume_integral(pointwise_inner(a, b, g, ginv), g)
