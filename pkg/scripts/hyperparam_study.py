"""Sensitivity of the penalized Stein rule to tau and to the first block size.

    python scripts/hyperparam_study.py [--replicates R]

Prints normalized risks for tau in {1/6, 1/4, 1/3} and nu in {log n, log log n}
under beta_j = 1/j and beta_j = exp(-j), then paired t-tests on the
per-replicate losses (replicates share their data draws, so pairing is exact).
"""
import argparse
from pathlib import Path

from scipy import stats

from nested_ma.config import load_config, with_overrides
from nested_ma.simulation import run_all, summarize

HERE = Path(__file__).parent

PAIRS = [("T6_log", "T3_log"), ("T3_log", "T3_loglog"), ("T6_loglog", "T3_loglog")]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replicates", type=int)
    args = ap.parse_args()
    cfg = with_overrides(load_config(HERE / "configs" / "hyperparams.cfg"), replicates=args.replicates)
    for sim in cfg.simulations:
        label = f"case {sim.case.case_id}, alpha {sim.case.alpha}"
        print(f"== {label} ==")
        for n in sim.n_values:
            results = run_all(sim, n)
            rows = summarize(sim, n, results)
            print(f"n={n}: " + "  ".join(f"{r.estimator} {r.norm_risk:.3f}" for r in rows))
            for a, b in PAIRS:
                la = [r.losses[a] for r in results]
                lb = [r.losses[b] for r in results]
                t = stats.ttest_rel(la, lb)
                print(f"    {a} vs {b}: t = {t.statistic:.3f}, p = {t.pvalue:.4f}")
        print()


if __name__ == "__main__":
    main()
