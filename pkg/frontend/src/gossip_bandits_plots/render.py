"""Render the four standard figure kinds from gossip-bandits CSV outputs.

Figure kinds
------------
regret-by-m    summary CSV(s): panels per action count m, one line per
               algorithm over T, seed-mean with first/third-quartile bars.
regret-by-n    summary CSV(s): panels per population size n, same lines.
mass-evolution one per-round run CSV: all m arm-share series over rounds.
convex-error   summary CSV(s): one panel per input file (e.g. one per
               noise level), mean optimization error over T per algorithm.

Inputs are read-only; the output image is written only on success.

Usage: gossip-bandits-plot --kind regret-by-m --input sweep_summary.csv
                           --output regret_by_m.png
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

KINDS = ("regret-by-m", "regret-by-n", "mass-evolution", "convex-error")

SUMMARY_COLUMNS = [
    "config_hash", "n", "m", "T", "beta", "algorithm",
    "mean_avg_regret", "q1", "q3", "mean_coupling_sum", "mean_convex_err",
]
RUN_KEY_COLUMNS = ["run_id", "seed", "t"]


class SchemaError(Exception):
    """Input CSV does not carry the documented columns."""


def _read_csv(path: str) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: empty CSV")
    if df.empty:
        raise SchemaError(f"{path}: no data rows")
    return df


def load_summary(paths: list[str]) -> pd.DataFrame:
    frames = []
    for path in paths:
        df = _read_csv(path)
        missing = [c for c in SUMMARY_COLUMNS if c not in df.columns]
        if missing:
            raise SchemaError(f"{path}: missing summary columns {missing}")
        df = df.copy()
        df["source"] = Path(path).stem
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


def load_run(path: str) -> tuple[pd.DataFrame, list[str]]:
    df = _read_csv(path)
    missing = [c for c in RUN_KEY_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing run columns {missing}")
    mass_cols = [c for c in df.columns if c.startswith("p_")]
    if not mass_cols:
        raise SchemaError(f"{path}: no arm-share columns p_0..p_(m-1)")
    mass_cols = sorted(mass_cols, key=lambda c: int(c.split("_")[1]))
    return df, mass_cols


def _quartile_errorbars(ax, sub: pd.DataFrame, label: str):
    sub = sub.sort_values("T")
    mean = sub["mean_avg_regret"].to_numpy(float)
    q1 = sub["q1"].to_numpy(float)
    q3 = sub["q3"].to_numpy(float)
    # bars span the quartiles; clip in case a skewed mean escapes them
    yerr = np.vstack([np.maximum(mean - q1, 0.0), np.maximum(q3 - mean, 0.0)])
    ax.errorbar(sub["T"], mean, yerr=yerr, marker="o", capsize=3, label=label)


def _regret_panels(df: pd.DataFrame, by: str) -> plt.Figure:
    values = sorted(df[by].unique())
    fig, axes = plt.subplots(1, len(values), figsize=(4.2 * len(values), 3.4), squeeze=False)
    for ax, val in zip(axes[0], values):
        panel = df[df[by] == val]
        for algo in sorted(panel["algorithm"].unique()):
            _quartile_errorbars(ax, panel[panel["algorithm"] == algo], algo)
        ax.set_title(f"{by} = {val}")
        ax.set_xlabel("rounds T")
        ax.set_ylabel("average regret R(T)/T")
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def figure_regret_by_m(paths: list[str]) -> plt.Figure:
    return _regret_panels(load_summary(paths), "m")


def figure_regret_by_n(paths: list[str]) -> plt.Figure:
    return _regret_panels(load_summary(paths), "n")


def figure_mass_evolution(paths: list[str]) -> plt.Figure:
    if len(paths) != 1:
        raise SchemaError("mass-evolution takes exactly one per-round run CSV")
    df, mass_cols = load_run(paths[0])
    one_seed = df[df["seed"] == df["seed"].iloc[0]]
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    for j, col in enumerate(mass_cols):
        ax.plot(one_seed["t"], one_seed[col].astype(float), label=f"arm {j}")
    ax.set_xlabel("round t")
    ax.set_ylabel("share of agents")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8, ncols=2)
    fig.tight_layout()
    return fig


def figure_convex_error(paths: list[str]) -> plt.Figure:
    df = load_summary(paths)
    if df["mean_convex_err"].isna().any():
        raise SchemaError("convex-error needs summaries with a mean_convex_err value")
    sources = list(dict.fromkeys(df["source"]))
    fig, axes = plt.subplots(1, len(sources), figsize=(4.2 * len(sources), 3.4), squeeze=False)
    for ax, source in zip(axes[0], sources):
        panel = df[df["source"] == source].sort_values("T")
        for algo in sorted(panel["algorithm"].unique()):
            sub = panel[panel["algorithm"] == algo]
            ax.plot(sub["T"], sub["mean_convex_err"].astype(float), marker="o", label=algo)
        ax.set_title(source)
        ax.set_xlabel("rounds T")
        ax.set_ylabel("optimization error")
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


BUILDERS = {
    "regret-by-m": figure_regret_by_m,
    "regret-by-n": figure_regret_by_n,
    "mass-evolution": figure_mass_evolution,
    "convex-error": figure_convex_error,
}


def render(kind: str, inputs: list[str], output: str) -> str:
    """Build the requested figure and write it to `output` (png/pdf/svg)."""
    if kind not in BUILDERS:
        raise SchemaError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    fig = BUILDERS[kind](inputs)
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return str(out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="gossip-bandits-plot", description=__doc__)
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--input", required=True, nargs="+", help="input CSV path(s)")
    ap.add_argument("--output", required=True, help="output image path")
    args = ap.parse_args(argv)
    try:
        path = render(args.kind, args.input, args.output)
    except SchemaError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
