"""Render convergence figures from benchmark trace CSVs.

Consumes the benchmark harness output schema only: per-seed run CSVs
(one row per outer iteration) or aggregated summary CSVs (per-iteration
mean/std columns). Produces a static vector figure with a logarithmic
y-axis; values above the clip ceiling are omitted.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# harness trace schema (documented CSV contract, ordered)
RUN_COLUMNS = (
    "k", "foo_calls", "lmo_calls", "elapsed_seconds", "f_value",
    "primal_gap", "fw_gap", "eta_k", "tau_k", "delta_k", "L_k", "L_hat_k",
    "inner_iters_used", "hit_cap", "certified_bound",
)
SUMMARY_COLUMNS = (
    "k", "primal_gap_mean", "primal_gap_std", "fw_gap_mean", "fw_gap_std",
)

X_COLUMN = {"iter": "k", "time": "elapsed_seconds", "lmo": "lmo_calls"}
X_LABEL = {"iter": "iteration", "time": "wall time (s)", "lmo": "LMO calls"}
Y_AXES = ("primal_gap", "fw_gap")


class PlotError(ValueError):
    pass


@dataclass
class PlotSpec:
    """One figure: several labeled CSVs on a shared pair of axes."""

    inputs: list[tuple[str, str]]   # (csv path, legend label)
    x_axis: str = "iter"
    y_axis: str = "primal_gap"
    out_path: str = "figure.svg"
    y_clip: float = 1e6

    def __post_init__(self):
        if not self.inputs:
            raise PlotError("at least one input CSV is required")
        labels = [label for _, label in self.inputs]
        if len(set(labels)) != len(labels):
            raise PlotError(f"labels must be unique, got {labels}")
        if self.x_axis not in X_COLUMN:
            raise PlotError(f"x_axis must be one of {sorted(X_COLUMN)}")
        if self.y_axis not in Y_AXES:
            raise PlotError(f"y_axis must be one of {sorted(Y_AXES)}")
        if not self.y_clip > 0:
            raise PlotError("y_clip must be positive")


def load_series(path: str, x_axis: str, y_axis: str):
    """Returns (x, y, std) arrays; std is None for per-seed run CSVs."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PlotError(f"{path} is empty")
        rows = list(reader)
    if tuple(header) == SUMMARY_COLUMNS:
        if x_axis != "iter":
            raise PlotError(
                f"missing column '{X_COLUMN[x_axis]}' in {path} "
                f"(summary CSVs only support x=iter)")
        cols = {name: i for i, name in enumerate(header)}
        yi, si = cols[y_axis + "_mean"], cols[y_axis + "_std"]
        kept = [r for r in rows if r[yi] != ""]
        x = np.array([float(r[cols["k"]]) for r in kept])
        y = np.array([float(r[yi]) for r in kept])
        std = np.array([float(r[si]) for r in kept])
        return x, y, std
    cols = {name: i for i, name in enumerate(header)}
    for needed in (X_COLUMN[x_axis], y_axis):
        if needed not in cols:
            raise PlotError(f"missing column '{needed}' in {path}")
    xi, yi = cols[X_COLUMN[x_axis]], cols[y_axis]
    kept = [r for r in rows if r[yi] != ""]
    x = np.array([float(r[xi]) for r in kept])
    y = np.array([float(r[yi]) for r in kept])
    return x, y, None


def clip_series(x, y, std, ceiling):
    """Drop points that are non-finite, nonpositive, or above the ceiling."""
    keep = np.isfinite(x) & np.isfinite(y) & (y > 0.0) & (y <= ceiling)
    return x[keep], y[keep], (None if std is None else std[keep])


def build_figure(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for path, label in spec.inputs:
        x, y, std = clip_series(*load_series(path, spec.x_axis, spec.y_axis),
                                spec.y_clip)
        line, = ax.plot(x, y, label=label)
        if std is not None and np.any(std > 0):
            lo = np.maximum(y - std, y * 1e-3)  # keep the band positive
            ax.fill_between(x, lo, y + std, alpha=0.25,
                            color=line.get_color(), linewidth=0)
    ax.set_yscale("log")
    ax.set_xlabel(X_LABEL[spec.x_axis])
    ax.set_ylabel(spec.y_axis.replace("_", " "))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> str:
    """Writes the figure to spec.out_path and returns the path."""
    with plt.rc_context({"svg.hashsalt": "adcgs-plots"}):
        fig = build_figure(spec)
        # fixed metadata keeps repeat renders byte-identical
        fig.savefig(spec.out_path, metadata={"Date": None}
                    if spec.out_path.endswith(".svg") else None)
    plt.close(fig)
    return spec.out_path


def _parse_input(text: str) -> tuple[str, str]:
    path, sep, label = text.rpartition(":")
    if not sep:
        return text, text
    return path, label


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="adcgs-plot", description=__doc__)
    p.add_argument("--csv", action="append", required=True,
                   metavar="PATH:LABEL",
                   help="input CSV with legend label (repeatable)")
    p.add_argument("--x", choices=sorted(X_COLUMN), default="iter")
    p.add_argument("--y", choices=sorted(Y_AXES), default="primal_gap")
    p.add_argument("--out", required=True)
    p.add_argument("--clip", type=float, default=1e6,
                   help="omit y values above this ceiling")
    args = p.parse_args(argv)
    try:
        spec = PlotSpec(inputs=[_parse_input(c) for c in args.csv],
                        x_axis=args.x, y_axis=args.y, out_path=args.out,
                        y_clip=args.clip)
        render(spec)
    except (PlotError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
