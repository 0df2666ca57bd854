"""Model geometries: chart kernel functions, the assembled discrete adjoint,
Laplace eigenvalues on tori, and the three-dimensional eigenvalue certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ChartDomainError, InvalidSpec, TooLargeGrid
from .manifold.domains import ChartSpec, TorusGrid
from .manifold.fields import Field
from .manifold.integrate import volume_density
from .manifold.spaces import SpaceSpec, build_space, coordinate_function
from .report import Series, make_report, stopwatch
from .sigma2 import Sigma2Context

__all__ = [
    "KernelCandidate",
    "EigenTriple",
    "sphere_kernel_check",
    "hyperbolic_kernel_check",
    "constant_rejection",
    "assemble_discrete_adjoint",
    "singular_spectrum",
    "laplace_lambda1",
    "sphere_lambda1",
    "ricci_lower_bound",
    "torus3_certificate",
    "sample_admissible_triples",
    "monte_carlo_certificate",
    "MAX_ASSEMBLY_POINTS",
    "MAX_EIGEN_POINTS",
]

MAX_ASSEMBLY_POINTS = 4096
MAX_EIGEN_POINTS = 2000
KERNEL_TOL = 1e-9


@dataclass(frozen=True)
class KernelCandidate:
    f: Field
    source: str  # sphere-coordinate k, hyperbolic-coordinate k, constant, custom


def _chart(kind: str, n: int, r: float) -> tuple[ChartSpec, Field]:
    return build_space(SpaceSpec(kind, dim=n, radius=r))


def sphere_kernel_check(n: int, r: float = 1.0, k: int = 1, tol: float = KERNEL_TOL):
    """x_k (1-based, k <= n+1) on S^n(r): Hessian, eigenfunction and Lambda* residuals."""
    if not 1 <= k <= n + 1:
        raise InvalidSpec(f"coordinate index must be in [1, {n + 1}], got {k}")
    with stopwatch() as clock:
        dom, g = _chart("sphere-stereographic", n, r)
        ctx = Sigma2Context(g)
        f = coordinate_function(dom, k - 1)
        hess = ctx.hessian(f) + (f * g) / r**2
        R = ctx.scalar
        eig = ctx.laplacian(f) + (R * f) / (n - 1)
        lam = ctx.lambda_adjoint(f)
        parts = {"hessian": hess.max_abs(), "eigenfunction": eig.max_abs(), "lambda_adjoint": lam.max_abs()}
        scale = max(1.0, f.max_abs())
    return make_report(
        f"sphere-kernel-x{k}",
        f"{dom.describe()}",
        max(parts.values()),
        max(parts.values()) / scale,
        tol,
        "coordinate functions on the round sphere",
        clock,
        eigenvalue=float(np.mean(R.values())) / (n - 1),
        **parts,
    )


def hyperbolic_kernel_check(n: int, k: int = 1, r: float = 1.0, tol: float = KERNEL_TOL, points=()):
    """Ambient coordinate x_k of the hyperboloid: nabla^2 f - f g / r^2 and Lambda* f."""
    if not 1 <= k <= n + 1:
        raise InvalidSpec(f"coordinate index must be in [1, {n + 1}], got {k}")
    with stopwatch() as clock:
        dom, g = build_space(SpaceSpec("hyperboloid-upper", dim=n, radius=r, points=tuple(points)))
        ctx = Sigma2Context(g)
        f = coordinate_function(dom, k - 1)
        hess = ctx.hessian(f) - (f * g) / r**2
        lam = ctx.lambda_adjoint(f)
        parts = {"hessian": hess.max_abs(), "lambda_adjoint": lam.max_abs()}
        scale = max(1.0, f.max_abs())
    return make_report(
        f"hyperbolic-kernel-x{k}",
        dom.describe(),
        max(parts.values()),
        max(parts.values()) / scale,
        tol,
        "coordinate functions on hyperbolic space",
        clock,
        **parts,
    )


def constant_rejection(g: Field, c: float = 1.0, tol: float = 1e-12):
    """A constant is not a kernel element: tr Lambda*(c) = -2 sigma_2 c while Lambda*(c) != 0."""
    with stopwatch() as clock:
        ctx = Sigma2Context(g)
        f = Field.constant(g.domain, c)
        lam = ctx.lambda_adjoint(f)
        tr = ctx.trace(lam)
        res = (tr + 2.0 * c * ctx.sigma2).max_abs()
    return make_report(
        "constant-rejection",
        g.domain.describe(),
        res,
        res / max(1.0, abs(c)),
        tol,
        "trace of the adjoint on constants",
        clock,
        trace=float(np.mean(tr.values())),
        sigma2=float(np.mean(ctx.sigma2.values())),
        adjoint_norm=lam.max_abs(),
        rejected=bool(lam.max_abs() > tol),
    )


# discrete adjoint operator


def _sym_pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i, n)]


def _adjoint_coefficients(ctx: Sigma2Context, order: int) -> dict[int, np.ndarray]:
    """Values of Lambda* on the monomial jets y^alpha, |alpha| <= 2.

    Lambda* is a second-order linear operator, so Lambda*(f)(p) is the sum over
    alpha of these values times the Taylor coefficient of f at p.
    """
    dom = ctx.domain
    alg = dom.alg
    out = {}
    for idx in range(alg.count(2)):
        data = np.zeros((dom.size, alg.count(order)))
        data[:, idx] = 1.0
        out[idx] = ctx.lambda_adjoint(Field(dom, data, 0)).values().reshape(dom.size, dom.dim, dom.dim)
    return out


def assemble_discrete_adjoint(g: Field, chunk: int = 512) -> np.ndarray:
    """Dense matrix of Lambda* on grid samples.

    Column j is Lambda* of the periodic cardinal function of node j (the
    band-limited interpolant of a unit spike); rows list the components
    (i <= j) point by point, i.e. row = point * n(n+1)/2 + pair.
    """
    dom = g.domain
    if not dom.is_grid:
        raise ChartDomainError("the discrete adjoint needs a torus grid")
    N = dom.size
    if N > MAX_ASSEMBLY_POINTS:
        raise TooLargeGrid(f"{N} points exceed the dense assembly bound {MAX_ASSEMBLY_POINTS}")
    n = dom.dim
    order = 4
    ctx = Sigma2Context(g.truncate(order))
    coef = _adjoint_coefficients(ctx, order)
    pairs = _sym_pairs(n)
    A = np.zeros((N, len(pairs), N))
    for start in range(0, N, chunk):
        cols = np.arange(start, min(N, start + chunk))
        spikes = np.zeros((N, len(cols)))
        spikes[cols, np.arange(len(cols))] = 1.0
        # Taylor coefficients of the cardinal functions: (node, alpha, column)
        taylor = dom.spectral_jet(spikes.reshape(dom.shape + (len(cols),)), 2)
        for idx, c in coef.items():
            for q, (i, j) in enumerate(pairs):
                A[:, q, cols] += c[:, i, j][:, None] * taylor[:, idx, :]
    return A.reshape(N * len(pairs), N)


def singular_spectrum(matrix: np.ndarray, k: int = 6) -> dict:
    """k smallest singular values and the numerical kernel dimension."""
    if k < 1:
        raise InvalidSpec("k must be positive")
    s = scipy.linalg.svdvals(matrix)  # descending
    smax = float(s[0]) if s.size else 0.0
    tol = max(matrix.shape) * np.finfo(float).eps * smax
    smallest = np.sort(s)[:k]
    # columns beyond the row count add exact zeros
    deficit = max(0, matrix.shape[1] - matrix.shape[0])
    return {
        "smallest": smallest,
        "largest": smax,
        "rank_tolerance": tol,
        "kernel_dimension": int(np.sum(s <= tol)) + deficit,
        "basis": "periodic cardinal functions at grid nodes",
        "all": s,
    }


def spectrum_series(spec: dict, name: str = "svd") -> Series:
    s = np.sort(spec["all"])
    return Series(name, {"index": list(range(len(s))), "value": [float(v) for v in s]},
                  x="index", logy=True, script="spectrum")


# Laplace eigenvalues


def _real_fourier_1d(N: int, L: float):
    """Values and derivatives of 1, cos, sin (wavenumbers below Nyquist) at N nodes."""
    x = np.arange(N) * (L / N)
    cols, dcols = [np.ones(N)], [np.zeros(N)]
    for m in range(1, (N - 1) // 2 + 1):
        w = 2 * np.pi * m / L
        cols += [np.cos(w * x), np.sin(w * x)]
        dcols += [-w * np.sin(w * x), w * np.cos(w * x)]
    return np.stack(cols, 1), np.stack(dcols, 1)


def laplace_lambda1(g: Field) -> float:
    """Smallest nonzero eigenvalue of -Delta_g by Fourier-Galerkin on the grid.

    The trial space is every real Fourier mode strictly below Nyquist; the
    stiffness and mass matrices use the grid quadrature, so a flat metric
    reproduces (2 pi |m| / L)^2 exactly.
    """
    dom = g.domain
    if not dom.is_grid:
        raise ChartDomainError("use sphere_lambda1 for the closed-form sphere value")
    if dom.size > MAX_EIGEN_POINTS:
        raise TooLargeGrid(f"{dom.size} points exceed the eigensolve bound {MAX_EIGEN_POINTS}")
    n = dom.dim
    vals, ders = zip(*(_real_fourier_1d(N, L) for N, L in zip(dom.resolution, dom.periods)))

    def kron(mats):
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    phi = kron(list(vals))
    grads = [kron([ders[a] if a == i else vals[a] for a in range(n)]) for i in range(n)]
    gv = g.values().reshape(dom.size, n, n)
    w = volume_density(g).ravel() * dom.cell_volume
    ginv = np.linalg.inv(gv)
    K = np.zeros((phi.shape[1],) * 2)
    for i in range(n):
        for j in range(i, n):
            block = grads[i].T @ ((w * ginv[:, i, j])[:, None] * grads[j])
            K += block if i == j else block + block.T
    M = phi.T @ (w[:, None] * phi)
    ev = scipy.linalg.eigh(K, M, eigvals_only=True, subset_by_index=[0, 1])
    return float(ev[1])


def sphere_lambda1(n: int, r: float = 1.0) -> float:
    """First nonzero eigenvalue of the round sphere, R/(n-1) = n/r^2."""
    return n / r**2


def ricci_lower_bound(g: Field) -> float:
    """K = max(0, -min Ric eigenvalue / (n-1)), eigenvalues relative to g."""
    ctx = Sigma2Context(g.truncate(min(g.order, 2)))
    lam = ctx.curv.ricci_eigenvalues()
    return max(0.0, -float(np.min(lam)) / (ctx.n - 1))


# three-dimensional eigenvalue algebra


@dataclass(frozen=True)
class EigenTriple:
    """Pointwise Ricci eigenvalues in dimension three, normalized so that R = -1."""

    values: tuple[float, float, float]

    def __post_init__(self):
        if len(self.values) != 3:
            raise InvalidSpec("an eigen triple has three entries")
        object.__setattr__(self, "values", tuple(sorted(float(v) for v in self.values)))


def torus3_certificate(t, tol: float = 1e-12) -> dict:
    """Admissibility (sum = -1, sum of squares <= 3/8) and, if admissible, the sign of every K_ij."""
    t = t if isinstance(t, EigenTriple) else EigenTriple(tuple(t))
    lam = np.array(t.values)
    total = float(lam.sum())
    squares = float(np.sum(lam**2))
    admissible = abs(total + 1.0) <= tol and squares <= 3.0 / 8.0 + tol
    pairs = [(0, 1), (0, 2), (1, 2)]
    sums = [float(lam[i] + lam[j]) for i, j in pairs]
    sectional = [s + 0.5 for s in sums]
    out = {
        "triple": list(t.values),
        "sum": total,
        "sum_squares": squares,
        "admissible": bool(admissible),
        "pairwise_sums": sums,
        "sectional": sectional,
    }
    if not admissible:
        out["verdict"] = "inadmissible"
        return out
    in_range = all(-5.0 / 6.0 - tol <= s <= -0.5 + tol for s in sums)
    nonpos = all(k <= tol for k in sectional)
    out["in_range"] = bool(in_range)
    out["nonpositive"] = bool(nonpos)
    out["verdict"] = "holds" if (in_range and nonpos) else "violated"
    return out


def sample_admissible_triples(count: int, seed: int = 7, batch: int = 4096) -> np.ndarray:
    """Rejection sampling: (l1, l2) uniform on [-1/2, -1/6]^2, l3 = -1 - l1 - l2.

    The box contains the whole admissible set, since every admissible
    eigenvalue lies in [-1/2, -1/6].
    """
    if count < 0:
        raise InvalidSpec("count must be non-negative")
    rng = np.random.default_rng(seed)
    out = []
    have = 0
    while have < count:
        xy = rng.uniform(-0.5, -1.0 / 6.0, size=(batch, 2))
        z = -1.0 - xy.sum(axis=1)
        tri = np.column_stack([xy, z])
        ok = np.sum(tri**2, axis=1) <= 3.0 / 8.0
        tri = tri[ok]
        out.append(tri)
        have += len(tri)
    tri = np.concatenate(out)[:count] if out else np.zeros((0, 3))
    return np.sort(tri, axis=1)


def monte_carlo_certificate(count: int = 10_000, seed: int = 7) -> dict:
    tris = sample_admissible_triples(count, seed)
    certs = [torus3_certificate(t) for t in tris]
    sums = np.array([c["pairwise_sums"] for c in certs]) if certs else np.zeros((0, 3))
    return {
        "samples": count,
        "seed": seed,
        "admissible": sum(c["admissible"] for c in certs),
        "holds": sum(c["verdict"] == "holds" for c in certs),
        "min_pairwise_sum": float(sums.min()) if count else float("nan"),
        "max_pairwise_sum": float(sums.max()) if count else float("nan"),
        "max_sectional": float((sums + 0.5).max()) if count else float("nan"),
    }
