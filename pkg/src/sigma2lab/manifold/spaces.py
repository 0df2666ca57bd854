"""Declarative model-space specs and metric construction."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import IndefiniteMetric, InvalidSpec
from .domains import ChartSpec, TorusGrid
from .fields import Field, ein

__all__ = [
    "Mode",
    "SpaceSpec",
    "build_space",
    "parse_space",
    "check_metric",
    "default_modes",
    "coordinate_function",
    "low_mode_field",
]

KIND_ALIASES = {
    "flat-torus": "flat-torus",
    "torus": "flat-torus",
    "perturbed-torus": "perturbed-torus",
    "sphere": "sphere-stereographic",
    "sphere-stereographic": "sphere-stereographic",
    "hyperbolic": "hyperboloid-upper",
    "hyperboloid": "hyperboloid-upper",
    "hyperboloid-upper": "hyperboloid-upper",
}

MAX_AMPLITUDE = 0.5
MAX_MODE_AMPLITUDE = 0.3


@dataclass(frozen=True)
class Mode:
    """Adds ``amplitude * cos(2 pi k.x / L + phase)`` to g_ij and g_ji."""

    i: int
    j: int
    amplitude: float
    wavevector: tuple[int, ...]
    phase: float = 0.0


def default_modes(dim: int, amplitude: float, pattern: str = "mixed") -> tuple[Mode, ...]:
    """Low-mode perturbation families; entries scale linearly with ``amplitude``.

    ``single`` is g_11 = 1 + a cos(2 pi x_2).  ``mixed`` touches every diagonal
    entry and two off-diagonals; its Gershgorin bound keeps g positive for a < 0.5.
    """

    def e(*axes):
        k = [0] * dim
        for ax in axes:
            k[ax] += 1
        return tuple(k)

    a = amplitude
    if pattern == "single":
        return (Mode(0, 0, a, e(1)),)
    if pattern != "mixed":
        raise InvalidSpec(f"unknown perturbation pattern {pattern!r}")
    return (
        Mode(0, 0, a, e(1)),
        Mode(1, 1, 0.6 * a, e(2), -math.pi / 2),
        Mode(2, 2, 0.5 * a, e(0, 1)),
        Mode(0, 1, 0.3 * a, e(2), -math.pi / 2),
        Mode(1, 2, 0.25 * a, e(0)),
    )


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    dim: int = 3
    resolution: int = 16
    amplitude: float = 0.0
    radius: float = 1.0
    period: float = 1.0
    pattern: str = "mixed"
    modes: tuple[Mode, ...] = ()
    points: tuple[tuple[float, ...], ...] = ()
    jet_order: int | None = None

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind)
        if kind is None:
            raise InvalidSpec(f"unknown space kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        modes = tuple(m if isinstance(m, Mode) else Mode(**_mode_kwargs(m)) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        points = tuple(tuple(float(v) for v in p) for p in self.points)
        object.__setattr__(self, "points", points)

    @property
    def is_torus(self) -> bool:
        return self.kind.endswith("torus")

    def shorthand(self) -> str:
        if self.kind == "flat-torus":
            return f"flat-torus-{self.dim}-{self.resolution}"
        if self.kind == "perturbed-torus":
            return f"perturbed-torus-{self.dim}-{self.resolution}-a{self.amplitude:g}"
        base = "sphere" if self.kind == "sphere-stereographic" else "hyperbolic"
        return f"{base}-{self.dim}-r{self.radius:g}"

    @classmethod
    def from_dict(cls, data: dict) -> "SpaceSpec":
        data = dict(data)
        if "shorthand" in data:
            base = parse_space(data.pop("shorthand"))
            merged = asdict(base)
            merged.update(data)
            data = merged
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidSpec(f"unknown space fields {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["modes"] = [asdict(m) for m in self.modes]
        return out


def _mode_kwargs(m) -> dict:
    if not isinstance(m, dict):
        raise InvalidSpec(f"mode must be a mapping, got {m!r}")
    kw = dict(m)
    kw["wavevector"] = tuple(int(v) for v in kw.get("wavevector", ()))
    return kw


_SHORTHAND = re.compile(
    r"^(?P<kind>[a-z]+(?:-[a-z]+)*?)-(?P<dim>\d+)(?:-(?P<res>\d+))?"
    r"(?:-a(?P<amp>[0-9.eE+-]+))?(?:-r(?P<rad>[0-9.eE+-]+))?$"
)


def parse_space(text: str) -> SpaceSpec:
    """Parse ``<kind>-<dim>-<resolution>[-a<amplitude>]`` (tori) or ``<kind>-<dim>[-r<radius>]``."""
    m = _SHORTHAND.match(text.strip())
    if not m:
        raise InvalidSpec(f"cannot parse space shorthand {text!r}")
    kw = {"kind": m["kind"], "dim": int(m["dim"])}
    if m["res"]:
        kw["resolution"] = int(m["res"])
    if m["amp"]:
        kw["amplitude"] = float(m["amp"])
    if m["rad"]:
        kw["radius"] = float(m["rad"])
    spec = SpaceSpec(**kw)
    if spec.is_torus and not m["res"]:
        raise InvalidSpec(f"torus shorthand needs a resolution: {text!r}")
    return spec


def check_metric(g: Field) -> Field:
    vals = g.values()
    if not np.allclose(vals, np.swapaxes(vals, -1, -2), atol=1e-12, rtol=0):
        raise IndefiniteMetric("metric components are not symmetric")
    lam = np.linalg.eigvalsh(vals)
    if not np.all(np.isfinite(lam)) or lam.min() <= 0:
        raise IndefiniteMetric(f"minimum eigenvalue {lam.min():.3e} <= 0")
    return g


def build_space(spec: SpaceSpec):
    """Return ``(domain, metric)`` for a space spec."""
    if spec.is_torus:
        return _build_torus(spec)
    return _build_chart(spec)


def _build_torus(spec: SpaceSpec):
    if spec.resolution < 8:
        raise InvalidSpec(f"resolution must be >= 8, got {spec.resolution}")
    if spec.period <= 0:
        raise InvalidSpec("period must be positive")
    dom = TorusGrid.cube(spec.dim, spec.resolution, spec.period, _jet_order(spec))
    n = spec.dim
    comps = np.zeros(dom.shape + (n, n))
    comps[...] = np.eye(n)
    if spec.kind == "perturbed-torus":
        if not 0 <= abs(spec.amplitude) < MAX_AMPLITUDE:
            raise InvalidSpec(f"amplitude must satisfy |a| < {MAX_AMPLITUDE}, got {spec.amplitude}")
        if spec.modes:
            modes = spec.modes
            for m in modes:
                if abs(m.amplitude) > MAX_MODE_AMPLITUDE:
                    raise InvalidSpec(
                        f"mode amplitude {m.amplitude} exceeds {MAX_MODE_AMPLITUDE}"
                    )
        else:
            modes = default_modes(n, spec.amplitude, spec.pattern)
        x = dom.coordinates()
        for m in modes:
            if len(m.wavevector) != n or not (0 <= m.i < n and 0 <= m.j < n):
                raise InvalidSpec(f"mode {m} does not fit dimension {n}")
            arg = sum(2 * np.pi * k * xi / spec.period for k, xi in zip(m.wavevector, x))
            wave = m.amplitude * np.cos(arg + m.phase)
            comps[..., m.i, m.j] += wave
            if m.i != m.j:
                comps[..., m.j, m.i] += wave
    elif spec.amplitude != 0 or spec.modes:
        raise InvalidSpec("flat torus takes no perturbation")
    g = Field.from_values(dom, comps, 2)
    return dom, check_metric(g)


def _jet_order(spec: SpaceSpec) -> int:
    """Five derivatives cover every identity checked here; large tori default lower."""
    if spec.jet_order is not None:
        if spec.jet_order < 0:
            raise InvalidSpec("jet_order must be non-negative")
        return spec.jet_order
    # charts hold a handful of points, so full order stays cheap in any dimension
    return 5 if spec.dim <= 4 or not spec.is_torus else 3


def _build_chart(spec: SpaceSpec):
    dom = ChartSpec(spec.kind, spec.dim, spec.radius, spec.points, _jet_order(spec))
    n, r = spec.dim, spec.radius
    alg = dom.alg
    xs = [Field(dom, dom.variable(i), 0) for i in range(n)]
    sq = sum((x * x for x in xs[1:]), xs[0] * xs[0])
    eye = Field.constant(dom, np.eye(n))
    if spec.kind == "sphere-stereographic":
        s = sq + Field.constant(dom, 1.0)
        conf = Field(dom, alg.power(s.data, -2.0), 0) * (4.0 * r * r)
        g = conf * eye
    else:
        t2 = sq + Field.constant(dom, r * r)
        inv_t2 = Field(dom, alg.power(t2.data, -1.0), 0)
        xvec = Field(dom, np.stack([x.data for x in xs], axis=-1), 1)
        g = eye - inv_t2 * ein("i,j->ij", xvec, xvec)
    return dom, check_metric(g)


def coordinate_function(domain: ChartSpec, k: int) -> Field:
    """Ambient coordinate x_k (0-based, k <= n) restricted to the model space."""
    n, r = domain.dim, domain.radius
    if not 0 <= k <= n:
        raise InvalidSpec(f"coordinate index must be in [0, {n}], got {k}")
    alg = domain.alg
    xs = [Field(domain, domain.variable(i), 0) for i in range(n)]
    sq = sum((x * x for x in xs[1:]), xs[0] * xs[0])
    if domain.kind == "sphere-stereographic":
        s = sq + Field.constant(domain, 1.0)
        inv_s = Field(domain, alg.power(s.data, -1.0), 0)
        if k < n:
            return inv_s * xs[k] * (2.0 * r)
        return inv_s * (sq - Field.constant(domain, 1.0)) * r
    if k < n:
        return xs[k]
    t2 = sq + Field.constant(domain, r * r)
    return Field(domain, alg.power(t2.data, 0.5), 0)


def low_mode_field(domain: TorusGrid, rank: int, seed: int, amplitude: float = 1.0, kmax: int = 1) -> Field:
    """Random trigonometric polynomial with wavenumbers in [-kmax, kmax]^n (symmetric for rank 2)."""
    if rank not in (0, 1, 2):
        raise InvalidSpec("rank must be 0, 1 or 2")
    rng = np.random.default_rng(seed)
    n = domain.dim
    x = domain.coordinates()
    comps = (n,) * rank
    out = np.zeros(domain.shape + comps)
    waves = [k for k in np.ndindex(*(2 * kmax + 1,) * n)]
    for k in waves:
        k = np.array(k) - kmax
        if not np.any(k):
            coef = rng.normal(size=comps)
            out += coef
            continue
        phase = sum(2 * np.pi * kk * xx / L for kk, xx, L in zip(k, x, domain.periods))
        a, b = rng.normal(size=comps), rng.normal(size=comps)
        c, sn = np.cos(phase), np.sin(phase)
        out += c[(...,) + (None,) * rank] * a + sn[(...,) + (None,) * rank] * b
    out *= amplitude / len(waves) ** 0.5
    if rank == 2:
        out = 0.5 * (out + np.swapaxes(out, -1, -2))
    return Field.from_values(domain, out, rank)
