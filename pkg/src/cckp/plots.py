"""Render benchmark figures from a report CSV.

Produces the two standard views of a sweep next to the plot-ready
aggregate CSV: mean empirical ratio against instance size (one curve per
cardinality rule, 90% confidence band) and, for online reports, a
histogram of per-run ratios.
"""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import read_report


def _card_label(n: int, C: int) -> str:
    if C == 2:
        return "C = 2"
    if C == math.floor(0.3 * n + 1e-9):
        return "C = 30% of n"
    if C == math.floor(0.6 * n + 1e-9):
        return "C = 60% of n"
    return f"C = {C}"


def _run_rows(path: str | Path) -> list[dict]:
    """Per-run rows of a report: aggregates and error rows dropped."""
    rows = []
    for row in read_report(path):
        if row["error"] or not row["ratio"] or row["zero_utility_runs"]:
            continue
        rows.append(
            {
                "n": int(row["n"]),
                "C": int(row["C"]),
                "algorithm": row["algorithm"],
                "ratio": float(row["ratio"]),
            }
        )
    return rows


def plot_ratio_curves(report: str | Path, out_png: str | Path) -> Path:
    """Mean ratio vs n, one curve per cardinality rule (90% CI band)."""
    groups: dict[tuple[str, str], dict[int, list[float]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for row in _run_rows(report):
        label = _card_label(row["n"], row["C"])
        groups[(row["algorithm"], label)][row["n"]].append(row["ratio"])

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (algorithm, label), by_n in sorted(groups.items()):
        ns = sorted(by_n)
        means, half = [], []
        for n in ns:
            vals = by_n[n]
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                half.append(1.645 * math.sqrt(var / len(vals)))
            else:
                half.append(0.0)
            means.append(mean)
        name = label if len({a for a, _ in groups}) == 1 else f"{algorithm}, {label}"
        line = ax.plot(ns, means, marker="o", label=name)[0]
        lo = [m - h for m, h in zip(means, half)]
        hi = [m + h for m, h in zip(means, half)]
        ax.fill_between(ns, lo, hi, alpha=0.2, color=line.get_color())
    ax.set_xlabel("number of items n")
    ax.set_ylabel("empirical ratio")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def plot_ratio_histogram(report: str | Path, out_png: str | Path) -> Path:
    """Distribution of per-run ratios (useful for online sweeps)."""
    ratios = [row["ratio"] for row in _run_rows(report)]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.hist(ratios, bins=20, range=(0.0, 1.0), edgecolor="black", alpha=0.8)
    ax.set_xlabel("empirical ratio")
    ax.set_ylabel("runs")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def render_report_figures(report: str | Path, outdir: str | Path) -> list[Path]:
    """Write the figures plus the aggregate CSV next to them."""
    from .harness import ReportRow, write_aggregate

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(report).stem
    written = [
        plot_ratio_curves(report, outdir / f"{stem}_ratio_vs_n.png"),
        plot_ratio_histogram(report, outdir / f"{stem}_ratio_hist.png"),
    ]
    rows = []
    for raw in read_report(report):
        if raw["error"] or not raw["ratio"] or raw["zero_utility_runs"]:
            continue
        rows.append(
            ReportRow(
                instance=raw["instance"], n=int(raw["n"]), C=int(raw["C"]),
                algorithm=raw["algorithm"], params=raw["params"],
                objective=float(raw["objective"]), optimum=float(raw["optimum"]),
                ratio=float(raw["ratio"]), runtime_ms=None,
                seed=int(raw["seed"]),
            )
        )
    agg_path = outdir / f"{stem}_aggregate.csv"
    write_aggregate(rows, agg_path)
    written.append(agg_path)
    return written
