"""Command-line driver: ``sigma2-lab <verify|kernel|schur|symbol|torus3|info> ...``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import EmptySeries, Sigma2LabError
from .manifold.spaces import SpaceSpec, build_space, parse_space
from .report import emit_plots, write_reports
from .sigma2 import Sigma2Context
from .suites import DEFAULT_EPS, SUITES, RunConfig, run_suite

log = logging.getLogger("sigma2lab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_SPACES = {
    "verify": "perturbed-torus-3-16-a0.1",
    "kernel": "sphere-3-r1",
    "schur": "perturbed-torus-3-12-a0.1",
    "symbol": "sphere-3-r1",
    "info": "perturbed-torus-3-16-a0.1",
}

KERNEL_SPACES = ("sphere-3-r1", "sphere-3-r2", "hyperbolic-3")


class ConfigError(Exception):
    pass


def _parse_tol(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--tol value for {name!r} is not a number: {value!r}") from None
    return out


def _split(values) -> list[str]:
    out = []
    for v in values or []:
        out += [s.strip() for s in v.split(",") if s.strip()]
    return out


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {"space", "suites", "tolerances", "out", "seed", "eps", "resolution", "amplitude", "samples", "xi",
             "parallel"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    return data


def _space_from(value, resolution=None) -> SpaceSpec:
    if isinstance(value, SpaceSpec):
        spec = value
    elif isinstance(value, str):
        spec = parse_space(value)
    elif isinstance(value, dict):
        spec = SpaceSpec.from_dict(value)
    else:
        raise ConfigError(f"cannot interpret space {value!r}")
    if resolution is not None:
        spec = replace(spec, resolution=int(resolution))
    return spec


def build_config(args, command: str) -> RunConfig:
    file_cfg = _load_config(getattr(args, "config", None))
    space_value = file_cfg.get("space") or getattr(args, "space", None) or DEFAULT_SPACES.get(command, "flat-torus-3-8")
    if isinstance(space_value, list):
        space_value = space_value[0]
    space = _space_from(space_value, file_cfg.get("resolution"))
    if command == "verify":
        suites = _split(getattr(args, "suite", None)) or file_cfg.get("suites") or ["identities"]
    else:
        suites = {"kernel": ["kernel"], "schur": ["schur"], "symbol": ["symbol"], "torus3": ["torus3"]}.get(command, [])
    tolerances = dict(file_cfg.get("tolerances", {}))
    tolerances.update(_parse_tol(getattr(args, "tol", None)))
    eps = getattr(args, "eps", None) or file_cfg.get("eps") or DEFAULT_EPS
    xi = getattr(args, "xi", None)
    if xi is not None:
        try:
            xi = tuple(float(v) for v in xi.split(","))
        except ValueError:
            raise ConfigError(f"--xi expects comma-separated numbers, got {xi!r}") from None
    elif file_cfg.get("xi") is not None:
        xi = tuple(float(v) for v in file_cfg["xi"])
    seed = args.seed if getattr(args, "seed", None) is not None else file_cfg.get("seed", 7)
    samples = getattr(args, "samples", None) or file_cfg.get("samples", 10_000)
    amplitude = getattr(args, "amplitude", None)
    if amplitude is None:
        amplitude = file_cfg.get("amplitude", 0.1)
    return RunConfig(
        space=space,
        suites=list(suites),
        tolerances=tolerances,
        out=getattr(args, "out", None) or file_cfg.get("out"),
        seed=int(seed),
        eps=tuple(float(e) for e in eps),
        samples=int(samples),
        xi=xi,
        amplitude=float(amplitude),
        parallel=bool(getattr(args, "parallel", False) or file_cfg.get("parallel", False)),
        plots=getattr(args, "plots", None),
        timing=not getattr(args, "no_timing", False),
    )


def _threads() -> int:
    raw = os.environ.get("SIGMA2_LAB_THREADS")
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SIGMA2_LAB_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("SIGMA2_LAB_THREADS must be >= 1")
    return n


def execute(cfg: RunConfig, spaces: list[SpaceSpec] | None = None) -> list:
    """Run every (space, suite) job; report order always follows the configuration."""
    jobs = [(sp, name) for sp in (spaces or [cfg.space]) for name in cfg.suites]

    def one(job):
        sp, name = job
        try:
            return run_suite(name, cfg, sp)
        except Sigma2LabError as exc:
            raise ConfigError(f"suite {name!r} on {sp.shorthand()}: {exc}") from exc

    if cfg.parallel and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=min(_threads(), len(jobs))) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    return [rep for group in results for rep in group]


def finish(cfg: RunConfig, reports, stream=sys.stdout) -> int:
    for rep in reports:
        print(rep.summary(), file=stream)
    failed = [r for r in reports if not r.passed]
    for rep in failed:
        print(f"check {rep.check_name} failed: residual {rep.residual:.6g} > tolerance {rep.tolerance:.6g}",
              file=sys.stderr)
    if cfg.out:
        write_reports(reports, cfg.out, with_runtime=cfg.timing)
    if cfg.plots:
        try:
            for path in emit_plots(reports, cfg.plots):
                log.info("wrote %s", path)
        except EmptySeries:
            print("no series data to plot", file=sys.stderr)
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed", file=stream)
    return EXIT_FAIL if failed else EXIT_OK


# subcommands


def cmd_run(args, command) -> int:
    cfg = build_config(args, command)
    spaces = None
    if command == "kernel" and not args.space and not args.config:
        spaces = [parse_space(s) for s in KERNEL_SPACES]
    elif command == "kernel":
        spaces = [parse_space(s) for s in _split(args.space)]
    reports = execute(cfg, spaces)
    return finish(cfg, reports)


def cmd_info(args) -> int:
    cfg = build_config(args, "info")
    dom, g = build_space(cfg.space)
    ctx = Sigma2Context(g.truncate(min(g.order, 2)))
    lines = {
        "space": cfg.space.shorthand(),
        "domain": dom.describe(),
        "jet_order": dom.jet_order,
        "points": dom.size,
    }
    for name, fld in (("scalar", ctx.scalar), ("sigma2", ctx.sigma2), ("sigma1", ctx.sigma1)):
        v = fld.values()
        lines[f"{name}_min"] = float(np.min(v))
        lines[f"{name}_max"] = float(np.max(v))
    lines["stability_everywhere"] = bool(np.all(ctx.stability_condition()))
    lines["einstein"] = bool(ctx.is_einstein())
    for k, v in lines.items():
        print(f"{k}: {v:.17g}" if isinstance(v, float) else f"{k}: {v}")
    fields = {"scalar": ctx.scalar, "sigma2": ctx.sigma2, "sigma1": ctx.sigma1, "ricci": ctx.ricci, "metric": g}
    for item in args.export or []:
        name, sep, path = item.partition("=")
        if not sep or name not in fields:
            raise ConfigError(f"--export expects one of {sorted(fields)}=PATH, got {item!r}")
        fields[name].to_csv(path)
        print(f"wrote {path}")
    return EXIT_OK


def _common(p, space_help=True):
    if space_help:
        p.add_argument("--space", action="append" if p.prog.endswith("kernel") else None,
                       help="space shorthand, e.g. perturbed-torus-3-16-a0.1 or sphere-3-r2")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="write the JSON report array here")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("--config", help="JSON run configuration; its space overrides --space")
    p.add_argument("--parallel", action="store_true", help="run independent suites concurrently")
    p.add_argument("--plots", metavar="DIR", help="write CSV series and gnuplot scripts here")
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for byte-stable reports")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigma2-lab", description="Numerical checks for the sigma_2 curvature.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run verification suites on one space")
    _common(p)
    p.add_argument("--suite", action="append", help=f"suite name(s): {', '.join(SUITES)}")
    p.add_argument("--eps", action="append", type=float, help="eps values for the second variation")
    p.add_argument("--amplitude", type=float, default=None, help="amplitude of the canonical direction")
    p.add_argument("--xi", help="covector for the symbol suite, comma-separated")
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("kernel", help="kernel functions on sphere and hyperbolic charts")
    _common(p)

    p = sub.add_parser("schur", help="almost-Schur inequality with computed lambda_1 and K")
    _common(p)

    p = sub.add_parser("symbol", help="principal symbol trace and stability predicate")
    _common(p)
    p.add_argument("--xi", help="covector, comma-separated")

    p = sub.add_parser("torus3", help="Monte-Carlo check of the 3-torus eigenvalue algebra")
    _common(p, space_help=False)
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("info", help="describe a space and export fields")
    p.add_argument("--space")
    p.add_argument("--config")
    p.add_argument("--export", action="append", metavar="FIELD=PATH", help="write a field as CSV")

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "info":
            return cmd_info(args)
        return cmd_run(args, args.command)
    except (ConfigError, Sigma2LabError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
