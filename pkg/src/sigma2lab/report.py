"""Verification reports, JSON serialization and plot-data emission."""

from __future__ import annotations

import csv
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptySeries

__all__ = [
    "VerificationReport",
    "Series",
    "make_report",
    "stopwatch",
    "reports_to_json",
    "write_reports",
    "emit_plots",
    "relative_residual",
]

FIELD_ORDER = (
    "check_name",
    "space_description",
    "max_absolute_residual",
    "relative_residual",
    "tolerance",
    "pass",
    "runtime_ms",
    "paper_anchor",
)


@dataclass
class Series:
    """A named column table destined for CSV and a plot script."""

    name: str
    columns: dict[str, list[float]]
    x: str | None = None
    logy: bool = False
    script: str | None = None

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"series {self.name!r} has ragged columns")


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``gate`` selects which residual is compared with the tolerance
    ("relative" or "absolute"); ``passed`` is always derived, never set.
    """

    check_name: str
    space_description: str
    max_absolute_residual: float
    relative_residual: float
    tolerance: float
    runtime_ms: float
    paper_anchor: str
    gate: str = "absolute"
    details: dict = field(default_factory=dict)
    series: list[Series] = field(default_factory=list)

    def __post_init__(self):
        if not self.paper_anchor:
            raise ValueError("a report needs a non-empty anchor")
        if self.gate not in ("absolute", "relative"):
            raise ValueError(f"unknown gate {self.gate!r}")

    @property
    def residual(self) -> float:
        return self.relative_residual if self.gate == "relative" else self.max_absolute_residual

    @property
    def passed(self) -> bool:
        r = self.residual
        return bool(math.isfinite(r) and r <= self.tolerance)

    def with_tolerance(self, tol: float) -> "VerificationReport":
        self.tolerance = float(tol)
        return self

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "space_description": self.space_description,
            "max_absolute_residual": float(self.max_absolute_residual),
            "relative_residual": float(self.relative_residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "runtime_ms": float(self.runtime_ms),
            "paper_anchor": self.paper_anchor,
        }

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.check_name} [{self.space_description}] "
            f"{self.gate} residual {self.residual:.3e} (tol {self.tolerance:.1e})"
        )


def relative_residual(diff, scale) -> float:
    """max|diff| / max|scale|, falling back to the absolute value when scale vanishes."""
    d = float(np.max(np.abs(diff))) if np.size(diff) else 0.0
    s = float(np.max(np.abs(scale))) if np.size(scale) else 0.0
    return d / s if s > 0 else d


class _Clock:
    ms = 0.0


@contextmanager
def stopwatch():
    clock = _Clock()
    t0 = time.perf_counter()
    try:
        yield clock
    finally:
        clock.ms = (time.perf_counter() - t0) * 1e3


def make_report(name, space, abs_res, rel_res, tol, anchor, clock=None, gate="absolute", **details):
    return VerificationReport(
        check_name=name,
        space_description=space,
        max_absolute_residual=float(abs_res),
        relative_residual=float(rel_res),
        tolerance=float(tol),
        runtime_ms=clock.ms if clock is not None else 0.0,
        paper_anchor=anchor,
        gate=gate,
        details=details,
    )


# serialization


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return json.dumps(x)


def reports_to_json(reports, with_runtime: bool = True) -> str:
    """JSON array of report objects; floats carry 17 significant digits."""
    lines = ["["]
    for k, rep in enumerate(reports):
        d = rep.to_dict()
        if not with_runtime:
            d["runtime_ms"] = 0.0
        body = ", ".join(f"{json.dumps(key)}: {_fmt(d[key])}" for key in FIELD_ORDER)
        lines.append("  {" + body + "}" + ("," if k < len(reports) - 1 else ""))
    lines.append("]")
    return "\n".join(lines) + "\n"


def write_reports(reports, path, with_runtime: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(reports_to_json(reports, with_runtime))
    return path


# plot data


def emit_plots(reports, outdir) -> list[Path]:
    """Write every attached series as CSV plus a gnuplot script; never runs a plotter."""
    outdir = Path(outdir)
    series = [s for rep in reports for s in rep.series]
    if not series or all(not s.columns or not next(iter(s.columns.values())) for s in series):
        raise EmptySeries("no series data attached to the reports")
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for s in series:
        names = list(s.columns)
        csv_path = outdir / f"{s.name}.csv"
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in zip(*(s.columns[c] for c in names)):
                w.writerow([format(float(v), ".17g") for v in row])
        written.append(csv_path)
        x = s.x or names[0]
        xi = names.index(x) + 1
        plots = ", ".join(
            f"'{csv_path.name}' using {xi}:{names.index(c) + 1} with linespoints title '{c}'"
            for c in names
            if c != x
        )
        script = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set xlabel '{x}'",
        ]
        if s.logy:
            script.append("set logscale y")
        script += ["set terminal pngcairo", f"set output '{s.name}.png'", f"plot {plots}" if plots else ""]
        gp = outdir / f"{s.script or s.name}.gp"
        gp.write_text("\n".join(line for line in script if line) + "\n")
        written.append(gp)
    return written
