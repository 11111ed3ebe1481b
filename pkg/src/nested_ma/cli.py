"""Command line entry point: ``nested-ma simulate|figure|check``.

Exit codes: 0 success, 2 configuration or flag error, 3 runtime abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from .candidates import (
    check_assumptions,
    equal_block_set,
    full_nested_set,
    geometric_set,
    schedule_params,
    two_model_set,
)
from .config import ExperimentConfig, load_config, with_overrides
from .errors import ConfigError, NestedMAError, PhiZero
from .oracle import (
    SignalDecomposition,
    bound_corollary41,
    bound_theorem41,
    bound_theorem42,
    optimal_relaxed_risk,
    optimal_simplex_risk,
    regroup,
)
from .simulation import RiskReport, monte_carlo, p_rule
from .weights import PenaltySchedule, penalty_schedule

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

TABLE_COLUMNS = (
    "estimator", "n", "p_n", "case", "alpha", "snr", "mode",
    "mean_loss", "norm_risk", "se", "replicates", "seed",
)
FIGURE_COLUMNS = (
    "series", "estimator", "case", "alpha", "snr", "n", "p_n",
    "norm_risk", "se", "mean_loss", "replicates", "seed",
)


def fmt(x) -> str:
    """Locale-free float text: ``repr``-stable 12 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def table_rows(report: RiskReport):
    cfg = report.config
    for row in report.rows:
        yield {
            "estimator": row.estimator,
            "n": row.n,
            "p_n": row.p_n,
            "case": cfg.case.case_id,
            "alpha": cfg.case.alpha,
            "snr": cfg.case.snr,
            "mode": cfg.mode,
            "mean_loss": row.mean_loss,
            "norm_risk": row.norm_risk,
            "se": row.se,
            "replicates": row.replicates,
            "seed": cfg.seed,
        }


def figure_rows(report: RiskReport):
    cfg = report.config
    for row in report.rows:
        yield {
            "series": f"{row.estimator}/case{cfg.case.case_id}/alpha{fmt(cfg.case.alpha)}",
            "estimator": row.estimator,
            "case": cfg.case.case_id,
            "alpha": cfg.case.alpha,
            "snr": cfg.case.snr,
            "n": row.n,
            "p_n": row.p_n,
            "norm_risk": row.norm_risk,
            "se": row.se,
            "mean_loss": row.mean_loss,
            "replicates": row.replicates,
            "seed": cfg.seed,
        }


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] if isinstance(r[c], str) else fmt(r[c]) for c in columns])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, figure: bool) -> str:
    reports = [monte_carlo(sim) for sim in cfg.simulations]
    if figure:
        # Long format, one series per (estimator, case, alpha), n ascending.
        rows = [r for rep in reports for r in figure_rows(rep)]
        rows.sort(key=lambda r: (r["case"], r["alpha"], r["estimator"], r["n"]))
        return render_csv(FIGURE_COLUMNS, rows)
    return render_csv(TABLE_COLUMNS, [r for rep in reports for r in table_rows(rep)])


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_bytes(text.encode("utf-8"))


def _experiment(args, figure: bool) -> int:
    cfg = load_config(args.config)
    if figure:
        if cfg.explicit_mode not in (None, "figure"):
            raise ConfigError(f"'figure' needs mode = figure, config has {cfg.explicit_mode!r}")
        cfg = with_overrides(cfg, mode="figure")
    cfg = with_overrides(cfg, workers=args.workers)
    text = run_experiment(cfg, figure)
    _write(text, args.output or cfg.output)
    return EXIT_OK


def build_set(args, p_n: int):
    if args.schedule == "geometric":
        return geometric_set(schedule_params(args.n, p_n, args.nu))
    if args.schedule == "equal":
        return equal_block_set(p_n, args.block)
    if args.schedule == "two":
        return two_model_set(p_n)
    return full_nested_set(p_n)


def read_signal(path, p_n: int, sigma2: float) -> SignalDecomposition:
    """Per-coordinate mean energies, one per line; an optional ``tail <x>`` line."""
    energies, tail = [], 0.0
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read signal file {path}: {exc}") from None
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("tail"):
                tail = float(line.split()[1])
            else:
                energies.append(float(line))
        except (ValueError, IndexError):
            raise ConfigError(f"signal file: cannot parse {raw!r}") from None
    if len(energies) != p_n:
        raise ConfigError(f"signal file has {len(energies)} energies, expected p_n={p_n}")
    return SignalDecomposition.from_energies(energies, full_nested_set(p_n), sigma2, tail)


def _check(args) -> int:
    if args.n < 3:
        raise ConfigError(f"--n must be >= 3, got {args.n}")
    p_n = args.p if args.p is not None else p_rule(args.n)
    if not 1 <= p_n <= args.n:
        raise ConfigError(f"--p must lie in [1, n], got {p_n}")
    try:
        mset = build_set(args, p_n)
        phi = penalty_schedule(mset, args.tau) if args.tau else PenaltySchedule.zeros(len(mset))
    except NestedMAError as exc:
        raise ConfigError(str(exc)) from None
    rep = check_assumptions(mset, phi)
    out = sys.stdout
    yes = {True: "pass", False: "fail"}
    print(f"n = {args.n}", file=out)
    print(f"p_n = {p_n}", file=out)
    print(f"schedule = {args.schedule}", file=out)
    print(f"sizes = {' '.join(map(str, mset.sizes))}", file=out)
    print(f"block_sizes = {' '.join(map(str, mset.increments))}", file=out)
    print(f"phi = {' '.join(fmt(f) for f in phi.phi)}", file=out)
    print(f"c1_lhs = {fmt(rep.c1_lhs)}", file=out)
    print(f"zeta = {fmt(rep.zeta)}", file=out)
    print(f"phi_bar = {fmt(rep.phi_bar) if math.isfinite(rep.phi_bar) else 'inf'}", file=out)
    print(f"a2_ok = {yes[rep.a2_ok]}", file=out)
    print(f"a2add_ok = {yes[rep.a2add_ok]}", file=out)
    if args.signal:
        sig_a = read_signal(args.signal, p_n, args.sigma2)
        sig = regroup(sig_a, mset.sizes)
        r_star, _ = optimal_simplex_risk(sig_a)
        print(f"optimal_simplex_risk_all = {fmt(r_star)}", file=out)
        print(f"optimal_relaxed_risk = {fmt(optimal_relaxed_risk(sig)[0])}", file=out)
        print(f"bound_corollary41 = {fmt(bound_corollary41(sig))}", file=out)
        try:
            print(f"bound_theorem41 = {fmt(bound_theorem41(sig, rep))}", file=out)
            print(f"bound_theorem42 = {fmt(bound_theorem42(sig_a, rep, mset.sizes[0]))}", file=out)
        except PhiZero:
            print("bound_theorem41 = undefined (zero penalty factor)", file=out)
            print("bound_theorem42 = undefined (zero penalty factor)", file=out)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _ArgParser(prog="nested-ma", description="Nested model averaging experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgParser)
    for name, help_ in (
        ("simulate", "run a Monte Carlo table and write CSV"),
        ("figure", "write long-format figure data as CSV"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("-o", "--output", help="CSV path ('-' for stdout); overrides the config")
        p.add_argument("--workers", type=int, help="replicate threads; overrides the config")
    c = sub.add_parser("check", help="print the candidate set and assumption report")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", type=int, help="regressor count (default floor(4 n^(2/3)), capped at n)")
    c.add_argument("--schedule", choices=("geometric", "equal", "two", "full"), default="geometric")
    c.add_argument("--tau", type=float, help="penalty exponent in (0, 1/2); omit for phi = 0")
    c.add_argument("--nu", choices=("log", "loglog"), default="log")
    c.add_argument("--block", type=int, default=4)
    c.add_argument("--signal", help="file of per-coordinate mean energies for bound values")
    c.add_argument("--sigma2", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        if args.command == "check":
            return _check(args)
        return _experiment(args, figure=args.command == "figure")
    except ConfigError as exc:
        print(f"nested-ma: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NestedMAError as exc:
        print(f"nested-ma: aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
