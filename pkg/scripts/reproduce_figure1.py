"""Normalized risk curves of SMA1 and SMA2 over the default n grid.

    python scripts/reproduce_figure1.py [--replicates R] [--out DIR] [--oracle shared|mean]

Writes long-format ``figure1a.csv`` / ``figure1b.csv`` (one series per
estimator, case and alpha) and prints each series as a row.  ``--oracle mean``
switches the denominator to the mean of per-replicate all-models minima.
"""
import argparse
import csv
import io
from collections import defaultdict
from pathlib import Path

from nested_ma.cli import run_experiment
from nested_ma.config import load_config, with_overrides

HERE = Path(__file__).parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replicates", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--oracle", choices=("shared", "mean"))
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("figure1a", "figure1b"):
        cfg = with_overrides(load_config(HERE / "configs" / f"{name}.cfg"),
                             replicates=args.replicates, workers=args.workers,
                             figure_oracle=args.oracle)
        text = run_experiment(cfg, figure=True)
        (out / f"{name}.csv").write_text(text, newline="\n")
        series = defaultdict(list)
        for row in csv.DictReader(io.StringIO(text)):
            series[row["series"]].append((int(row["n"]), float(row["norm_risk"])))
        print(f"== {name} ==")
        ns = [n for n, _ in next(iter(series.values()))]
        print(f"{'series':<26}" + "".join(f"{n:>8}" for n in ns))
        for key, pts in series.items():
            print(f"{key:<26}" + "".join(f"{v:8.2f}" for _, v in pts))
        print()


if __name__ == "__main__":
    main()
