"""Named verification suites: each maps a space and a run configuration to reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartDomainError, InvalidSpec, WrongDimension
from .manifold.fields import Field
from .manifold.integrate import l2_pair
from .manifold.spaces import SpaceSpec, build_space, low_mode_field, parse_space
from .models import (
    assemble_discrete_adjoint,
    constant_rejection,
    hyperbolic_kernel_check,
    laplace_lambda1,
    monte_carlo_certificate,
    ricci_lower_bound,
    singular_spectrum,
    spectrum_series,
    sphere_kernel_check,
    torus3_certificate,
)
from .report import Series, make_report, relative_residual, stopwatch
from .sigma2 import FunctionalSpec, Sigma2Context, SymbolData, symbol_matrix_trace, symbol_trace
from .variation import (
    PathProbe,
    project_div_free,
    second_variation_F,
    verify_adjoint,
    verify_evolution,
    verify_ricci_norm_variation,
    verify_linearization,
)

__all__ = ["DEFAULT_TOLERANCES", "SUITES", "RunConfig", "run_suite", "sample_functions", "canonical_h"]

DEFAULT_TOLERANCES = {
    "trace-identity": 1e-7,
    "divergence-identity": 1e-6,
    "trace-formula": 1e-7,
    "contracted-bianchi": 1e-9,
    "scaling-identity": 1e-8,
    "diffeomorphism-identity": 1e-6,
    "linearization": 1e-6,
    "adjoint": 1e-8,
    "delta-adjoint": 1e-9,
    "evolution": 1e-5,
    "ricci-norm-first": 1e-5,
    "ricci-norm-second": 1e-4,
    "kernel": 1e-9,
    "einstein-adjoint": 1e-9,
    "constant-trace": 1e-12,
    "second-variation": 1e-4,
    "eps-linearity": 1e-8,
    "canonical-closed-form": 1e-8,
    "projection": 1e-10,
    "flat-operator-norm": 1e-10,
    "assembly": 1e-9,
    "almost-schur": 0.0,
    "symbol-trace": 1e-12,
    "stability-forms": 1e-12,
    "q-relation": 1e-9,
    "sectional-dim3": 1e-9,
    "torus3": 0.0,
}

DEFAULT_EPS = (1.0 / 24.0, 1.0 / 12.0, 1.0 / 6.0)


@dataclass
class RunConfig:
    space: SpaceSpec
    suites: list[str]
    tolerances: dict[str, float] = field(default_factory=dict)
    out: str | None = None
    seed: int = 7
    eps: tuple[float, ...] = DEFAULT_EPS
    samples: int = 10_000
    xi: tuple[float, ...] | None = None
    amplitude: float = 0.1
    parallel: bool = False
    plots: str | None = None
    timing: bool = True

    def __post_init__(self):
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise InvalidSpec(f"unknown suite(s) {unknown}; known: {sorted(SUITES)}")
        bad = [k for k in self.tolerances if k not in DEFAULT_TOLERANCES]
        if bad:
            raise InvalidSpec(f"unknown tolerance name(s) {bad}")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidSpec(f"tolerance {k} must be positive, got {v!r}")
        if any(not e > 0 for e in self.eps):
            raise InvalidSpec("eps values must be positive")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))


def _need_grid(space: SpaceSpec, suite: str) -> None:
    if not space.is_torus:
        raise ChartDomainError(f"suite {suite!r} needs a torus space, got {space.shorthand()}")


def sample_functions(domain, seed: int = 7) -> list[Field]:
    """Three fixed scalar test functions: a constant, a single mode and a random low-mode field."""
    if domain.is_grid:
        x = domain.coordinates()
        L = domain.periods[0]
        return [
            Field.constant(domain, 1.0),
            Field.from_values(domain, np.cos(2 * np.pi * x[0] / L), 0),
            low_mode_field(domain, 0, seed),
        ]
    xs = [Field(domain, domain.variable(i), 0) for i in range(domain.dim)]
    return [Field.constant(domain, 1.0), xs[0], xs[0] * xs[-1] + xs[1] * xs[1]]


def canonical_h(domain, amplitude: float) -> Field:
    """h_11 = a cos(2 pi x_2): the first two axes, divergence-free on flat tori."""
    x = domain.coordinates()
    hv = np.zeros(domain.shape + (domain.dim, domain.dim))
    hv[..., 0, 0] = amplitude * np.cos(2 * np.pi * x[1] / domain.periods[1])
    return Field.from_values(domain, hv, 2)


def _vector_fields(domain, seed: int) -> list[Field]:
    if domain.is_grid:
        return [low_mode_field(domain, 1, seed + k, 0.3) for k in range(3)]
    xs = [Field(domain, domain.variable(i), 0) for i in range(domain.dim)]
    comps = []
    for k in range(3):
        comps.append([xs[(i + k) % domain.dim] * (0.3 * (i + 1)) for i in range(domain.dim)])
    return [Field(domain, np.stack([c.data for c in v], axis=-1), 1) for v in comps]


def _report_field(name, space, diff: Field, scale: Field | float, tol, anchor, clock, gate="relative", **kw):
    d = diff.values()
    s = scale.values() if isinstance(scale, Field) else np.asarray(scale)
    return make_report(name, space, float(np.max(np.abs(d))), relative_residual(d, s), tol, anchor, clock, gate=gate, **kw)


# suites


def _contexts(g: Field) -> dict[int, Sigma2Context]:
    """Contexts on jets truncated to each order; checks use the lowest order they need."""
    top = g.order
    return {k: Sigma2Context(g.truncate(k)) for k in range(2, top + 1)}


def suite_identities(space: SpaceSpec, cfg: RunConfig):
    dom, g = build_space(space)
    label = space.shorthand()
    if g.order < 5:
        raise InvalidSpec("the identity suite needs jet order >= 5")
    ctx = _contexts(g)
    reps = []
    with stopwatch() as clock:
        res = ctx[4].trace_identity_residual()
    reps.append(_report_field("trace-identity", label, res, ctx[4].sigma2, cfg.tol("trace-identity"),
                              "trace of the adjoint at f = 1", clock, gate="absolute"))
    for k, f in enumerate(sample_functions(dom, cfg.seed)):
        with stopwatch() as clock:
            lam = ctx[5].lambda_adjoint(f)
            res = ctx[5].divergence_identity_residual(f, lam)
        reps.append(_report_field(f"divergence-identity-f{k + 1}", label, res, ctx[5].sigma2.d(),
                                  cfg.tol("divergence-identity"), "divergence of the adjoint", clock, gate="absolute"))
        with stopwatch() as clock:
            closed = ctx[4].trace_lambda_adjoint(f)
            res = ctx[4].trace(lam) - closed
        reps.append(_report_field(f"trace-formula-f{k + 1}", label, res, closed,
                                  cfg.tol("trace-formula"), "closed-form trace of the adjoint", clock))
    with stopwatch() as clock:
        res = ctx[3].div_ricci_residual
    reps.append(_report_field("contracted-bianchi", label, res, ctx[3].scalar.d(), cfg.tol("contracted-bianchi"),
                              "contracted second Bianchi identity", clock))
    with stopwatch() as clock:
        res = ctx[2].lambda_lin(g) + 2.0 * ctx[2].sigma2
    reps.append(_report_field("scaling-identity", label, res, ctx[2].sigma2, cfg.tol("scaling-identity"),
                              "linearization along the metric itself", clock, gate="absolute"))
    for k, X in enumerate(_vector_fields(dom, cfg.seed)):
        with stopwatch() as clock:
            res = ctx[3].diffeo_residual(X)
        reps.append(_report_field(f"diffeomorphism-identity-X{k + 1}", label, res, ctx[3].sigma2.d(),
                                  cfg.tol("diffeomorphism-identity"), "diffeomorphism invariance of sigma_2",
                                  clock, gate="absolute"))
    if ctx[4].is_einstein():
        f = sample_functions(dom, cfg.seed)[-1]
        with stopwatch() as clock:
            full = ctx[4].lambda_adjoint(f)
            res = full - ctx[4].einstein_lambda_adjoint(f)
        reps.append(_report_field("einstein-adjoint", label, res, full, cfg.tol("einstein-adjoint"),
                                  "adjoint on Einstein metrics", clock, gate="absolute"))
    return reps


def suite_linearization(space: SpaceSpec, cfg: RunConfig):
    _need_grid(space, "linearization")
    dom, g = build_space(space)
    label = space.shorthand()
    ctx = Sigma2Context(g)
    X = low_mode_field(dom, 1, cfg.seed + 11, 0.3)
    directions = [
        ("random-1", low_mode_field(dom, 2, cfg.seed + 1, 0.3)),
        ("random-2", low_mode_field(dom, 2, cfg.seed + 2, 0.3)),
        ("single-mode", canonical_h(dom, 1.0)),
        ("metric", g),
        ("lie-derivative", ctx.lie_metric(X)),
    ]
    reps = []
    for name, h in directions:
        reps.append(verify_linearization(PathProbe(g, h), cfg.tol("linearization"), label,
                                         name=f"sigma2-linearization-{name}"))
    return reps


def suite_adjoint(space: SpaceSpec, cfg: RunConfig):
    _need_grid(space, "adjoint")
    dom, g = build_space(space)
    label = space.shorthand()
    ctx = Sigma2Context(g.truncate(4))
    reps = []
    for k in range(5):
        f = low_mode_field(dom, 0, cfg.seed + 100 + k)
        h = low_mode_field(dom, 2, cfg.seed + 200 + k)
        rep = verify_adjoint(g, h, f, cfg.tol("adjoint"), label, ctx=ctx)
        rep.check_name = f"adjointness-pair{k + 1}"
        reps.append(rep)
    with stopwatch() as clock:
        w = low_mode_field(dom, 1, cfg.seed + 300)
        h = low_mode_field(dom, 2, cfg.seed + 301)
        c2 = Sigma2Context(g.truncate(2))
        a = l2_pair(c2.delta_star(w), h, g, c2.ginv)
        b = l2_pair(w, c2.delta(h), g, c2.ginv)
    diff = abs(a - b)
    reps.append(make_report("delta-adjointness", label, diff, diff / max(abs(a), abs(b), 1e-300),
                            cfg.tol("delta-adjoint"), "delta* as the adjoint of delta", clock, gate="relative"))
    return reps


def suite_evolution(space: SpaceSpec, cfg: RunConfig):
    _need_grid(space, "evolution")
    dom, g = build_space(space)
    label = space.shorthand()
    h = low_mode_field(dom, 2, cfg.seed + 400, 0.3)
    probe = PathProbe(g, h)
    reps = [verify_evolution(probe, cfg.tol("evolution"), label)]
    reps += verify_ricci_norm_variation(probe, cfg.tol("ricci-norm-first"), cfg.tol("ricci-norm-second"), label)
    return reps


def suite_kernel(space: SpaceSpec, cfg: RunConfig):
    if space.is_torus:
        raise ChartDomainError("the kernel suite runs on sphere or hyperbolic charts")
    n, r = space.dim, space.radius
    tol = cfg.tol("kernel")
    if space.kind == "sphere-stereographic":
        reps = [sphere_kernel_check(n, r, k, tol) for k in range(1, n + 2)]
    else:
        reps = [hyperbolic_kernel_check(n, k, r, tol, space.points) for k in range(1, n + 2)]
    for rep in reps:
        rep.space_description = space.shorthand()
    dom, g = build_space(space)
    rep = constant_rejection(g, 1.0, cfg.tol("constant-trace"))
    rep.space_description = space.shorthand()
    reps.append(rep)
    return reps


def suite_second_variation(space: SpaceSpec, cfg: RunConfig):
    if space.kind != "flat-torus":
        raise ChartDomainError("the second-variation suite needs a flat torus")
    dom, g = build_space(space)
    label = space.shorthand()
    a = cfg.amplitude
    h = canonical_h(dom, a)
    reps, closed = [], []
    for eps in cfg.eps:
        with stopwatch() as clock:
            sv = second_variation_F(FunctionalSpec(eps, g), h)
        closed.append(sv.closed_form)
        reps.append(make_report(f"second-variation-eps{eps:.6g}", label, abs(sv.difference), sv.relative,
                                cfg.tol("second-variation"), "second variation of F_eps at a flat metric", clock,
                                gate="relative", closed_form=sv.closed_form, fd_value=sv.fd_value,
                                fd_error=sv.fd_error))
    L = dom.periods
    if dom.dim == 3 and all(abs(p - 1.0) < 1e-15 for p in L):
        with stopwatch() as clock:
            expect = [-16 * math.pi**4 * a * a * (eps + 1.0 / 12.0) for eps in cfg.eps]
            diff = np.abs(np.array(closed) - expect)
        reps.append(make_report("canonical-closed-form", label, float(diff.max()),
                                relative_residual(diff, expect), cfg.tol("canonical-closed-form"),
                                "second variation for a single cosine mode", clock, gate="relative",
                                expected=expect))
    if len(cfg.eps) >= 3:
        with stopwatch() as clock:
            e = np.array(cfg.eps)
            coef = np.polyfit(e, closed, 1)
            fit = np.polyval(coef, e)
            diff = np.abs(fit - closed)
        reps.append(make_report("eps-linearity", label, float(diff.max()), relative_residual(diff, closed),
                                cfg.tol("eps-linearity"), "linear dependence of the second variation on eps",
                                clock, gate="relative", slope=float(coef[0]), intercept=float(coef[1])))
    with stopwatch() as clock:
        ctx = Sigma2Context(g.truncate(1))
        proj = project_div_free(low_mode_field(dom, 2, cfg.seed + 500), g)
        div = ctx.delta(proj).max_abs()
        idem = (project_div_free(proj, g) - proj).max_abs()
        keep = (project_div_free(h, g) - h).max_abs()
    worst = max(div, idem, keep)
    reps.append(make_report("divergence-free-projection", label, worst, worst, cfg.tol("projection"),
                            "divergence-free gauge on flat tori", clock, divergence=div,
                            idempotence=idem, fixed_point=keep))
    return reps


def suite_singularity(space: SpaceSpec, cfg: RunConfig):
    _need_grid(space, "singularity")
    dom, g = build_space(space)
    label = space.shorthand()
    with stopwatch() as clock:
        A = assemble_discrete_adjoint(g)
        spec = singular_spectrum(A, 6)
        f = low_mode_field(dom, 0, cfg.seed + 600)
        direct = Sigma2Context(g).lambda_adjoint(f).values().reshape(dom.size, dom.dim, dom.dim)
        iu = np.triu_indices(dom.dim)
        applied = (A @ f.values().ravel()).reshape(dom.size, -1)
        ref = direct[:, iu[0], iu[1]]
        diff = applied - ref
    rep = make_report("discrete-adjoint-assembly", label, float(np.max(np.abs(diff))),
                      relative_residual(diff, ref), cfg.tol("assembly"), "discrete sigma_2-singularity test",
                      clock, gate="relative" if np.max(np.abs(ref)) > 0 else "absolute",
                      smallest_singular_values=[float(v) for v in spec["smallest"]],
                      largest_singular_value=spec["largest"], kernel_dimension=spec["kernel_dimension"],
                      rank_tolerance=spec["rank_tolerance"], basis=spec["basis"])
    rep.series.append(spectrum_series(spec))
    reps = [rep]
    ctx = Sigma2Context(g.truncate(2))
    if ctx.ricci.max_abs() < 1e-12:
        reps.append(make_report("flat-operator-norm", label, spec["largest"], spec["largest"],
                                cfg.tol("flat-operator-norm"), "Ricci-flat spaces are singular", clock))
    return reps


def suite_schur(space: SpaceSpec, cfg: RunConfig):
    _need_grid(space, "schur")
    dom, g = build_space(space)
    label = space.shorthand()
    with stopwatch() as clock:
        lam1 = laplace_lambda1(g)
        K = ricci_lower_bound(g)
        ctx = Sigma2Context(g.truncate(4))
        lhs, rhs = ctx.almost_schur_sides(K, lam1)
        excess = max(0.0, lhs - rhs)
    return [make_report("almost-schur", label, excess, excess / rhs if rhs > 0 else excess,
                        cfg.tol("almost-schur"), "almost-Schur inequality for sigma_2", clock,
                        lhs=lhs, rhs=rhs, margin=rhs - lhs, lambda1=lam1, K=K)]


def _symbol_covectors(n: int, xi):
    if xi is not None:
        if len(xi) != n:
            raise InvalidSpec(f"xi needs {n} components, got {len(xi)}")
        return [np.asarray(xi, dtype=float)]
    rng = np.random.default_rng(11)
    return [np.eye(n)[0]] + [rng.normal(size=n) for _ in range(3)]


def suite_symbol(space: SpaceSpec, cfg: RunConfig):
    dom, g = build_space(space)
    label = space.shorthand()
    n = dom.dim
    with stopwatch() as clock:
        ctx = Sigma2Context(g.truncate(2))
        worst, scale = 0.0, 0.0
        points = range(min(dom.size, 8)) if not dom.is_grid else np.linspace(0, dom.size - 1, 8).astype(int)
        for p in points:
            for xi in _symbol_covectors(n, cfg.xi):
                sd = SymbolData.at(ctx, int(p), xi)
                a, b = symbol_trace(sd), symbol_matrix_trace(sd)
                worst = max(worst, abs(a - b))
                scale = max(scale, abs(a))
    reps = [make_report("symbol-trace", label, worst, worst / scale if scale > 0 else worst,
                        cfg.tol("symbol-trace"), "trace of the principal symbol", clock)]
    with stopwatch() as clock:
        forms = ctx.stability_forms()
        eq = forms["equivalent"]
        r1 = forms["ricci_form"] - n / (8.0 * (n - 1)) * eq
        r2 = forms["scalar_form"] - eq / 8.0
        diff = np.maximum(np.abs(r1), np.abs(r2))
        cond = ctx.stability_condition()
    reps.append(make_report("stability-forms", label, float(np.max(diff)),
                            relative_residual(diff, eq), cfg.tol("stability-forms"),
                            "equivalent forms of the stability condition", clock,
                            stable_everywhere=bool(np.all(cond)), stable_somewhere=bool(np.any(cond))))
    return reps


def suite_dimension_three(space: SpaceSpec, cfg: RunConfig):
    dom, g = build_space(space)
    if dom.dim != 3:
        raise WrongDimension(f"the dimension-three suite needs n = 3, got {dom.dim}")
    label = space.shorthand()
    ctx = Sigma2Context(g)
    reps = []
    with stopwatch() as clock:
        R = ctx.scalar.values()
        const_R = np.ptp(R) <= 1e-12 * (1 + np.max(np.abs(R)))
        res = ctx.q_dim3_check() if const_R else None
    if res is not None:
        reps.append(_report_field("q-relation", label, res, ctx.q_curvature, cfg.tol("q-relation"),
                                  "Q-curvature in dimension three", clock, gate="absolute"))
    with stopwatch() as clock:
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for _ in range(4):
            u, v = rng.normal(size=3), rng.normal(size=3)
            worst = max(worst, float(np.max(np.abs(ctx.sectional_dim3(u, v) - ctx.sectional(u, v)))))
        scale = max(1.0, ctx.ricci.max_abs())
    reps.append(make_report("sectional-dim3", label, worst, worst / scale, cfg.tol("sectional-dim3"),
                            "curvature decomposition in dimension three", clock, gate="absolute"))
    return reps


def suite_torus3(space: SpaceSpec, cfg: RunConfig):
    with stopwatch() as clock:
        mc = monte_carlo_certificate(cfg.samples, cfg.seed)
        boundary = torus3_certificate((-0.5, -0.25, -0.25))
        failures = mc["samples"] - mc["holds"]
        failures += boundary["verdict"] != "holds" or abs(max(boundary["sectional"])) > 1e-15
    return [make_report("torus3-certificate", f"{cfg.samples} samples seed {cfg.seed}", float(failures),
                        float(failures) / max(1, cfg.samples), cfg.tol("torus3"),
                        "eigenvalue algebra on the 3-torus", clock, **mc, boundary=boundary)]


SUITES = {
    "identities": suite_identities,
    "linearization": suite_linearization,
    "adjoint": suite_adjoint,
    "evolution": suite_evolution,
    "kernel": suite_kernel,
    "second-variation": suite_second_variation,
    "singularity": suite_singularity,
    "schur": suite_schur,
    "symbol": suite_symbol,
    "dimension-three": suite_dimension_three,
    "torus3": suite_torus3,
}


def run_suite(name: str, cfg: RunConfig, space: SpaceSpec | None = None):
    return SUITES[name](space or cfg.space, cfg)
