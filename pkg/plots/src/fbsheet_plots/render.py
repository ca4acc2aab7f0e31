"""Render diagnostic figures from fbsheet harness CSV files.

Four figure kinds: normality diagnostics (qq, histogram) from per-replication
sample CSVs, log-log rate plots with fitted-slope overlays from report CSVs,
and Monte-Carlo-vs-exact covariance heatmaps from covariance CSVs.  The
renderer validates the input schema before touching the output path, so a
failed job never leaves a file behind.  No statistic is computed here beyond
plotting transforms and slope overlays; acceptance numbers live upstream.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import beta as beta_dist
from scipy.stats import norm

FIGURE_KINDS = ("qq", "histogram", "rate_loglog", "covariance_heatmap")

REQUIRED_COLUMNS = {
    "qq": ("value",),
    "histogram": ("value",),
    "rate_loglog": ("N", "ks", "rate_bound"),
    "covariance_heatmap": ("t1", "s1", "t2", "s2", "mc_cov", "exact_cov"),
}

_STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


class SchemaError(ValueError):
    """Input CSV does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class PlotJob:
    input_csv_path: str
    figure_kind: str
    output_image_path: str

    def __post_init__(self) -> None:
        if self.figure_kind not in FIGURE_KINDS:
            raise ValueError(
                f"figure_kind must be one of {FIGURE_KINDS}, got {self.figure_kind!r}"
            )


def _read_columns(path: str, required: tuple) -> dict:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return {col: np.array([float(r[col]) for r in rows]) for col in required}


def normal_qq_band(n: int, level: float = 0.95) -> tuple:
    """Pointwise order-statistic band for a standard normal QQ plot.

    The i-th order statistic of n uniforms is Beta(i, n+1-i); mapping its
    central `level` interval through the normal quantile function gives the
    band around the theoretical quantiles.
    """
    i = np.arange(1, n + 1)
    tail = (1.0 - level) / 2.0
    lo = norm.ppf(beta_dist.ppf(tail, i, n + 1 - i))
    hi = norm.ppf(beta_dist.ppf(1.0 - tail, i, n + 1 - i))
    mid = norm.ppf((i - 0.5) / n)
    return mid, lo, hi


def _render_qq(data: dict, ax) -> None:
    x = np.sort(data["value"])
    mid, lo, hi = normal_qq_band(x.size)
    ax.fill_between(mid, lo, hi, color="tab:blue", alpha=0.2, label="95% band")
    ax.plot(mid, mid, color="black", lw=1, label="identity")
    ax.plot(mid, x, ".", ms=3, color="tab:red", label="sample quantiles")
    ax.set_xlabel("standard normal quantile")
    ax.set_ylabel("sample quantile")
    ax.set_title("normal QQ plot")
    ax.legend()


def _render_histogram(data: dict, ax) -> None:
    x = data["value"]
    ax.hist(x, bins=min(60, max(10, x.size // 30)), density=True,
            color="tab:blue", alpha=0.6, label="samples")
    grid = np.linspace(min(-4.0, x.min()), max(4.0, x.max()), 400)
    ax.plot(grid, norm.pdf(grid), color="black", lw=1.2, label="N(0,1) density")
    ax.set_xlabel("normalized variation")
    ax.set_ylabel("density")
    ax.set_title("histogram vs standard normal")
    ax.legend()


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _render_rate_loglog(data: dict, ax) -> None:
    n = data["N"]
    ks = data["ks"]
    bound = data["rate_bound"]
    order = np.argsort(n)
    n, ks, bound = n[order], ks[order], bound[order]
    title = "rate decay"
    if ks.min() > 0:
        title = f"ks slope {_loglog_slope(n, ks):+.3f}"
        ax.loglog(n, ks, "o-", color="tab:red", label="Kolmogorov distance")
    if np.isfinite(bound).all() and bound.min() > 0:
        ax.loglog(n, bound, "s--", color="tab:blue",
                  label=f"rate bound (slope {_loglog_slope(n, bound):+.3f})")
    ax.set_xlabel("grid size N")
    ax.set_ylabel("distance")
    ax.set_title(title)
    ax.legend()


def _render_covariance_heatmap(data: dict, fig) -> None:
    points = sorted({(t, s) for t, s in zip(data["t1"], data["s1"])}
                    | {(t, s) for t, s in zip(data["t2"], data["s2"])})
    index = {p: k for k, p in enumerate(points)}
    size = len(points)
    mc = np.full((size, size), np.nan)
    exact = np.full((size, size), np.nan)
    for t1, s1, t2, s2, m, e in zip(
        data["t1"], data["s1"], data["t2"], data["s2"],
        data["mc_cov"], data["exact_cov"],
    ):
        i, j = index[(t1, s1)], index[(t2, s2)]
        mc[i, j] = mc[j, i] = m
        exact[i, j] = exact[j, i] = e
    fig.clf()
    axes = fig.subplots(1, 2)
    vmax = float(np.nanmax([np.nanmax(np.abs(mc)), np.nanmax(np.abs(exact))]))
    for sub, mat, title in ((axes[0], mc, "Monte Carlo"), (axes[1], exact, "exact")):
        im = sub.imshow(mat, vmin=-vmax, vmax=vmax, cmap="RdBu_r")
        sub.set_title(title)
        sub.set_xticks(range(size))
        sub.set_yticks(range(size))
        ticklabels = [f"({t:g},{s:g})" for t, s in points]
        sub.set_xticklabels(ticklabels, rotation=45, fontsize=7)
        sub.set_yticklabels(ticklabels, fontsize=7)
    fig.colorbar(im, ax=list(axes), shrink=0.8)
    fig.suptitle("partial-sum process covariance")


def render(job: PlotJob) -> Path:
    """Validate the job's input schema, draw the figure, and write the image.

    Returns the output path.  Raises SchemaError (and writes nothing) when a
    required column is absent or the CSV has no rows.
    """
    data = _read_columns(job.input_csv_path, REQUIRED_COLUMNS[job.figure_kind])
    out = Path(job.output_image_path)
    with plt.rc_context(_STYLE):
        fig = plt.figure()
        try:
            if job.figure_kind == "qq":
                _render_qq(data, fig.add_subplot())
            elif job.figure_kind == "histogram":
                _render_histogram(data, fig.add_subplot())
            elif job.figure_kind == "rate_loglog":
                _render_rate_loglog(data, fig.add_subplot())
            else:
                _render_covariance_heatmap(data, fig)
            fig.savefig(out)
        finally:
            plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fbsheet-plot",
        description="Render one diagnostic figure from an fbsheet harness CSV.",
    )
    parser.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS,
                        help="figure kind")
    parser.add_argument("--out", required=True,
                        help="output image path (.png or .svg)")
    args = parser.parse_args(argv)
    try:
        out = render(PlotJob(args.input_csv, args.kind, args.out))
    except (SchemaError, OSError, ValueError) as exc:
        print(f"fbsheet-plot: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
