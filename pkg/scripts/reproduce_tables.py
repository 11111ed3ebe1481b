"""Run the Case 1-4 comparison tables and print them as n x estimator grids.

    python scripts/reproduce_tables.py [--replicates R] [--workers W] [--out DIR]

Writes ``table1.csv`` and ``table2.csv`` (same schema as ``nested-ma simulate``)
to ``--out`` and prints normalized risks with standard errors.
"""
import argparse
import csv
import io
from collections import defaultdict
from pathlib import Path

from nested_ma.cli import run_experiment
from nested_ma.config import load_config, with_overrides

HERE = Path(__file__).parent


def pivot(text):
    cells = defaultdict(dict)
    columns = []
    for row in csv.DictReader(io.StringIO(text)):
        col = f"case{row['case']} a={row['alpha']}"
        if col not in columns:
            columns.append(col)
        cells[(int(row["n"]), row["estimator"])][col] = f"{float(row['norm_risk']):.3f} ({float(row['se']):.3f})"
    lines = ["n     est   " + "".join(f"{c:>18}" for c in columns)]
    for (n, est), vals in cells.items():
        lines.append(f"{n:<5} {est:<5} " + "".join(f"{vals.get(c, ''):>18}" for c in columns))
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replicates", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("table1", "table2"):
        cfg = with_overrides(load_config(HERE / "configs" / f"{name}.cfg"),
                             replicates=args.replicates, workers=args.workers)
        text = run_experiment(cfg, figure=False)
        (out / f"{name}.csv").write_text(text, newline="\n")
        print(f"== {name} ==")
        print(pivot(text))
        print()


if __name__ == "__main__":
    main()
