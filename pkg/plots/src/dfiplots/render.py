"""Batch rendering of probability time series from simulator CSV files.

Consumes only the documented CSV schema
(``t,P_A,P_B[,P_C],P_tot,re_uA,im_uA,...``): one panel per input file, the
selected probability columns as lines over t*Gamma0.  No coupling to the
simulator beyond the file format.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class MissingColumn(KeyError):
    """A requested curve is not present in the CSV header."""


@dataclass(frozen=True)
class PlotSpec:
    """One rendering job: input CSVs, curve selection, output image."""

    csv_paths: tuple[Path, ...]
    columns: tuple[str, ...]
    output: Path
    xlabel: str = r"$t\,\Gamma_0$"
    ylabel: str = "probability"
    legend_labels: tuple[str, ...] = field(default=())
    panel_titles: tuple[str, ...] = field(default=())


def read_columns(path: Path, columns: tuple[str, ...]):
    """Times plus the requested columns of one CSV.

    Raises MissingColumn (with the column name) when the header lacks a
    requested curve.  A header-only file yields empty series.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        for name in columns:
            if name not in header:
                raise MissingColumn(name)
        want = [header.index("t")] + [header.index(name) for name in columns]
        rows = [[float(row[i]) for i in want] for row in reader if row]
    times = [r[0] for r in rows]
    series = {name: [r[k + 1] for r in rows] for k, name in enumerate(columns)}
    return times, series


def render_timeseries(spec: PlotSpec) -> Path:
    """Render one panel per CSV, all selected columns as lines; returns the
    output path.  Inputs are opened read-only and never modified."""
    n_panels = len(spec.csv_paths)
    fig, axes = plt.subplots(
        1, n_panels, figsize=(4.2 * n_panels, 3.2), sharey=True, squeeze=False)
    labels = spec.legend_labels or spec.columns
    for k, (path, ax) in enumerate(zip(spec.csv_paths, axes[0])):
        times, series = read_columns(Path(path), spec.columns)
        for name, label in zip(spec.columns, labels):
            ax.plot(times, series[name], lw=1.2, label=label)
        title = (spec.panel_titles[k] if k < len(spec.panel_titles)
                 else Path(path).stem)
        ax.set_title(title)
        ax.set_xlabel(spec.xlabel)
        ax.set_ylim(0.0, 1.05)
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel(spec.ylabel)
    axes[0][-1].legend(frameon=False, loc="upper right")
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dfiplots", description="Render probability time series from CSV.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="line plot of selected P_j columns")
    p.add_argument("--csv", nargs="+", required=True,
                   help="input CSV files, one panel each")
    p.add_argument("--cols", required=True,
                   help="comma-separated probability columns, e.g. P_A,P_B,P_C")
    p.add_argument("--out", required=True, help="output image (PNG or SVG)")
    p.add_argument("--titles", default=None,
                   help="comma-separated panel titles (default: file stems)")
    args = parser.parse_args(argv)

    columns = tuple(c.strip() for c in args.cols.split(",") if c.strip())
    if not columns:
        print("error: --cols selected no columns", file=sys.stderr)
        return 2
    titles = tuple(t.strip() for t in args.titles.split(",")) if args.titles else ()
    spec = PlotSpec(csv_paths=tuple(Path(p) for p in args.csv),
                    columns=columns, output=Path(args.out), panel_titles=titles)
    try:
        render_timeseries(spec)
    except MissingColumn as exc:
        print(f"error: column {exc.args[0]!r} not found in CSV header",
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
