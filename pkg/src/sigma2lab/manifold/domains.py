"""Sampling domains: periodic torus grids and closed-form charts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidSpec
from .jets import algebra

__all__ = ["TorusGrid", "ChartSpec", "CHART_KINDS", "default_chart_points"]

CHART_KINDS = ("sphere-stereographic", "hyperboloid-upper")


class _JetBackend:
    """Pointwise jet arithmetic shared by grids and charts (data shape (P, m, *comps))."""

    is_grid = False

    @property
    def alg(self):
        return algebra(self.dim, self.jet_order)

    def _ein(self, spec: str, *arrays: np.ndarray) -> np.ndarray:
        lhs, out = spec.split("->")
        specs = lhs.split(",")
        if len(arrays) == 1:
            return np.einsum(f"PM{specs[0]}->PM{out}", arrays[0])
        acc, acc_spec = arrays[0], specs[0]
        for k in range(1, len(arrays)):
            if k == len(arrays) - 1:
                keep = out
            else:
                later = "".join(specs[k + 1 :]) + out
                keep = "".join(dict.fromkeys(ch for ch in acc_spec + specs[k] if ch in later))
            acc = self.alg.einsum(f"{acc_spec},{specs[k]}->{keep}", acc, arrays[k])
            acc_spec = keep
        return acc

    def _deriv(self, a: np.ndarray) -> np.ndarray:
        return self.alg.derivative(a)

    def _inv(self, a: np.ndarray) -> np.ndarray:
        return self.alg.matrix_inverse(a)

    def _order(self, a: np.ndarray) -> int:
        return self.alg.order_of(a)

    def _truncate(self, a: np.ndarray, order: int) -> np.ndarray:
        return self.alg.truncate(a, order)

    def _values(self, a: np.ndarray) -> np.ndarray:
        return a[:, 0].reshape(self.shape + a.shape[2:])

    def _constant(self, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        return self.alg.constant(np.broadcast_to(value, (self.size,) + value.shape))


@dataclass(frozen=True)
class TorusGrid(_JetBackend):
    """Uniform periodic grid on R^n / (L_1 Z x ... x L_n Z).

    Sampled fields get their jets from Fourier-spectral derivatives, with the
    Nyquist wavenumber zeroed for even resolutions so that every derivative
    operator is exactly skew-adjoint under the rectangle rule.  Products and
    inverses are then taken pointwise on jets, so band-limited metrics yield
    curvature without aliasing.
    """

    dim: int
    resolution: tuple[int, ...]
    periods: tuple[float, ...]
    jet_order: int = 5

    is_grid = True

    def __post_init__(self):
        if self.dim < 3:
            raise InvalidSpec(f"torus dimension must be >= 3, got {self.dim}")
        if len(self.resolution) != self.dim or len(self.periods) != self.dim:
            raise InvalidSpec("resolution/periods must have one entry per axis")
        if min(self.resolution) < 8:
            raise InvalidSpec(f"resolution must be >= 8, got {self.resolution}")
        if min(self.periods) <= 0:
            raise InvalidSpec("periods must be positive")

    @classmethod
    def cube(cls, dim: int, resolution: int, period: float = 1.0, jet_order: int = 5) -> "TorusGrid":
        return cls(dim, (int(resolution),) * dim, (float(period),) * dim, jet_order)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.resolution

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def cell_volume(self) -> float:
        return float(np.prod([L / N for L, N in zip(self.periods, self.resolution)]))

    @property
    def volume(self) -> float:
        return float(np.prod(self.periods))

    def coordinates(self) -> list[np.ndarray]:
        axes = [np.arange(N) * (L / N) for N, L in zip(self.resolution, self.periods)]
        return np.meshgrid(*axes, indexing="ij")

    def points(self) -> np.ndarray:
        return np.stack([c.ravel() for c in self.coordinates()], axis=1)

    def wavenumbers(self, axis: int, nyquist: bool = False) -> np.ndarray:
        """Angular wavenumbers in FFT order; Nyquist zeroed unless requested."""
        N, L = self.resolution[axis], self.periods[axis]
        k = 2 * np.pi * np.fft.fftfreq(N, d=L / N)
        if N % 2 == 0 and not nyquist:
            k[N // 2] = 0.0
        return k

    def describe(self) -> str:
        res = "x".join(str(r) for r in self.resolution)
        return f"torus dim={self.dim} res={res} periods={list(self.periods)}"

    def spectral_jet(self, samples: np.ndarray, order: int | None = None) -> np.ndarray:
        """Taylor coefficients d^alpha u / alpha! at every grid point via FFT."""
        order = self.jet_order if order is None else order
        alg = self.alg
        samples = np.asarray(samples, dtype=float)
        comps = samples.shape[self.dim :]
        axes = tuple(range(self.dim))
        uhat = np.fft.fftn(samples, axes=axes)
        ik = []
        for a in range(self.dim):
            shape = [1] * samples.ndim
            shape[a] = self.resolution[a]
            ik.append((1j * self.wavenumbers(a)).reshape(shape))
        m = alg.count(order)
        out = np.empty((self.size, m) + comps)
        for idx in range(m):
            alpha = alg.monomials[idx]
            if idx == 0:
                deriv = samples
            else:
                mult = 1.0
                for a, p in enumerate(alpha):
                    if p:
                        mult = mult * ik[a] ** p
                deriv = np.fft.ifftn(uhat * mult, axes=axes).real
            out[:, idx] = deriv.reshape((self.size,) + comps) / alg.factorial[idx]
        return out

    def _from_points(self, values: np.ndarray) -> np.ndarray:
        return self.spectral_jet(values)


def default_chart_points(kind: str, dim: int) -> tuple[tuple[float, ...], ...]:
    """Deterministic evaluation points, well inside the chart."""
    rng = np.random.default_rng(20170707 + dim)
    pts = [np.zeros(dim)]
    extent = 0.6 if kind == "sphere-stereographic" else 1.5
    for _ in range(5):
        pts.append(rng.uniform(-extent, extent, size=dim) / np.sqrt(dim))
    pts.append(np.full(dim, extent / np.sqrt(dim)))
    return tuple(tuple(float(v) for v in p) for p in pts)


@dataclass(frozen=True)
class ChartSpec(_JetBackend):
    """Closed-form model chart evaluated through Taylor jets at fixed points.

    ``sphere-stereographic`` is S^n(r) with g = 4 r^2 |dx|^2 / (1 + |x|^2)^2.
    ``hyperboloid-upper`` parameterizes the upper sheet
    {|x'|^2 - x_{n+1}^2 = -r^2} by x', giving
    g = dx^2 - (x.dx)^2 / (r^2 + |x|^2).
    """

    kind: str
    dim: int
    radius: float = 1.0
    points: tuple[tuple[float, ...], ...] = ()
    jet_order: int = 5

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise InvalidSpec(f"unknown chart kind {self.kind!r}")
        if self.dim < 2:
            raise InvalidSpec("chart dimension must be >= 2")
        if not self.radius > 0:
            raise InvalidSpec(f"radius must be positive, got {self.radius}")
        if not self.points:
            object.__setattr__(self, "points", default_chart_points(self.kind, self.dim))
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise InvalidSpec("chart points must be dim-length tuples")
        if self.kind == "sphere-stereographic" and np.max(np.sum(pts**2, axis=1)) > 25.0:
            raise InvalidSpec("sphere chart points too close to the pole")

    @property
    def shape(self) -> tuple[int, ...]:
        return (len(self.points),)

    @property
    def size(self) -> int:
        return len(self.points)

    def point_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def describe(self) -> str:
        return f"{self.kind} dim={self.dim} radius={self.radius} points={self.size}"

    def variable(self, i: int) -> np.ndarray:
        return self.alg.variable(self.point_array(), i)

    def _from_points(self, values: np.ndarray) -> np.ndarray:
        # pointwise data carries no derivative information on a chart
        return self.alg.constant(values, 0)
