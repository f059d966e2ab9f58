"""Experiment reports: one JSON document per run, a flat CSV table of the
sweep rows, and matplotlib figures rendered next to them when an output
directory is given.  Reports are byte-deterministic for a fixed seed:
no timestamps, sorted keys, repr-stable floats."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    name: str
    params: dict
    seed: int
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(CheckResult(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "experiment": self.name,
            "params": _plain(self.params),
            "seed": self.seed,
            "rows": _plain(self.rows),
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
            "extra": _plain(self.extra),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def table_csv(self) -> str:
        buf = io.StringIO()
        if self.rows:
            cols = sorted({k for row in self.rows for k in row})
            writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: _cell(row.get(k)) for k in cols})
        return buf.getvalue()

    def write(self, out_dir: str | Path, figures: bool = True) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        report_path = out / "report.json"
        report_path.write_text(self.to_json())
        written.append(report_path)
        table_path = out / "table.csv"
        table_path.write_text(self.table_csv())
        written.append(table_path)
        if figures:
            written.extend(render_figures(self, out))
        return written


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _cell(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, bool):
        return str(v).lower()
    return v


def fit_affine(x, y) -> dict:
    """Least-squares affine fit with its R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return {"slope": 0.0, "intercept": float(y[0]) if len(y) else 0.0, "r2": 1.0}
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_figures(report: ExperimentReport, out_dir: Path) -> list[Path]:
    """Figures for the standard sweep reports; silently skips shapes it
    does not recognize."""
    written: list[Path] = []
    rows = report.rows
    plt = None

    def sweep_plot(xkey, ykey, fname, ylabel, fit=None):
        nonlocal plt
        xs = [r[xkey] for r in rows if xkey in r and ykey in r]
        ys = [r[ykey] for r in rows if xkey in r and ykey in r]
        if len(xs) < 2:
            return
        if plt is None:
            plt = _pyplot()
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        ax.plot(xs, ys, "o-", label=ylabel)
        if fit is not None:
            xf = np.array(xs, dtype=float)
            ax.plot(xf, fit["slope"] * xf + fit["intercept"], "--",
                    label=f"fit (R^2={fit['r2']:.4f})")
        ax.set_xlabel(xkey)
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / fname
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)

    if any("kappa" in r for r in rows):
        fit = report.extra.get("kappa_fit")
        sweep_plot("log2_inv_eps", "kappa", "kappa_scaling.png", "charts", fit)
    if any("dc_measured" in r for r in rows):
        sweep_plot("log2_inv_eps", "dc_measured", "doubling_constant.png",
                   "measured DC")
    if any("count" in r for r in rows):
        sweep_plot("log2_inv_delta", "count", "cover_count.png", "retained balls")

    layout = report.extra.get("ball_layout")
    if layout:
        if plt is None:
            plt = _pyplot()
        fig, ax = plt.subplots(figsize=(5.0, 5.0))
        for cx, cy, r in layout["balls"]:
            ax.add_patch(plt.Circle((cx, cy), r, fill=False, lw=0.4, color="tab:blue"))
        for px, py in layout.get("punctures", []):
            ax.plot(px, py, "rx", ms=8)
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.set_aspect("equal")
        fig.tight_layout()
        path = out_dir / "cover_layout.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written
