"""Helpers that rebuild the oracle's fields on a grid."""

import numpy as np

from sigma2lab.manifold.fields import Field


def oracle_direction(dom) -> Field:
    """The direction used by tests/oracles/derive_values.py for the linearization values."""
    x, y, z = dom.coordinates()
    tau = 2 * np.pi
    h = np.zeros(dom.shape + (3, 3))
    h[..., 0, 0] = np.cos(tau * y)
    h[..., 1, 2] = h[..., 2, 1] = 0.5 * np.cos(tau * x - np.pi / 2)
    h[..., 2, 2] = np.cos(tau * (x + z))
    return Field.from_values(dom, h, 2)
