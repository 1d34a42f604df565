"""Command-line interface: example tables, one-off tests, curve dumps.

Three subcommands:

- ``gof table``: Monte Carlo medians of the statistics for a built-in
  example, drawing both from the null density and from its alternative.
- ``gof test``: run the chosen statistics on a sample file against a
  density (a built-in name or a density spec file) and print verdicts.
- ``gof df``: write the density, its distribution function, and the
  distribution function of the density value as CSV curves.

Exit codes: 0 on success, 1 for usage-level problems (bad flags,
unknown names, missing files, refused work), 2 for failures while
computing (unparseable file contents, invalid densities, kernel
errors).  All output files are byte-deterministic for fixed inputs.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from gof.approx import ApproxError
from gof.density import Density, density_from_spec_lines, read_samples
from gof.examples import SUITE_NAMES, builtin
from gof.rearranged import build_rearranged
from gof.stats import TestReport, kuiper_u, kuiper_v, w_statistic, w_tilde

__all__ = [
    "TableRow",
    "UsageError",
    "COLUMNS",
    "STAT_TOKENS",
    "run_table",
    "run_test",
    "emit_curves",
    "write_table_csv",
    "main",
]

DEFAULT_N = "10,100,1000,10000,100000"
DEFAULT_TRIALS = 33
DEFAULT_POINTS = 1001
DEFAULT_MAX_WORK = 1e9

COLUMNS = ("u0", "u1", "v0", "v1", "w0", "w1", "log10_sig_u1", "log10_sig_v1")
STAT_TOKENS = ("u", "v", "w", "wtilde")


class UsageError(Exception):
    """A request the tool refuses at the command level (exit code 1)."""


@dataclass(frozen=True)
class TableRow:
    """Per-sample-size medians over the Monte Carlo trials.

    Columns ending in 0 are computed on draws from the example density
    itself, columns ending in 1 on draws from its alternative; the
    log10_sig columns are median log10 p-values of the corresponding
    Kuiper statistics.  ``iqr`` maps each column to its interquartile
    range across trials, and ``per_trial`` (filled only on request)
    maps each column to the full array of trial values.
    """

    example: str
    n: int
    trials: int
    u0: float
    u1: float
    v0: float
    v1: float
    w0: float
    w1: float
    log10_sig_u1: float
    log10_sig_v1: float
    iqr: dict = field(default_factory=dict)
    per_trial: dict = field(default_factory=dict)


def _work_limit(max_work):
    if max_work is not None:
        return float(max_work)
    env = os.environ.get("GOF_MAX_WORK")
    if env is not None:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"GOF_MAX_WORK must be a number, got {env!r}")
    return DEFAULT_MAX_WORK


def run_table(
    example, n_list, seed=0, trials=DEFAULT_TRIALS, max_work=None, keep_trials=False
):
    """Monte Carlo table rows for a built-in example.

    Trial i of row j draws the null sample with seed
    ``seed + 2 (j trials + i)`` and the alternative sample with the next
    seed, so any (row, trial) pair is reproducible in isolation.  Rows
    with n * trials beyond the work limit (flag, else GOF_MAX_WORK, else
    1e9) are refused.
    """
    if trials < 1:
        raise UsageError(f"trials must be at least 1, got {trials}")
    limit = _work_limit(max_work)
    suite = builtin(example)
    for n in n_list:
        if n < 1:
            raise UsageError(f"sample sizes must be at least 1, got {n}")
        if n * trials > limit:
            raise UsageError(
                f"row n={n} with {trials} trials exceeds the work limit "
                f"{limit:g} draws; raise --max-work or GOF_MAX_WORK to allow it"
            )
    P = suite.p.cdf()
    r = build_rearranged(suite.p)
    rows = []
    for j, n in enumerate(n_list):
        data = {c: np.empty(trials) for c in COLUMNS}
        base = seed + 2 * trials * j
        for i in range(trials):
            null_draws = suite.p.sample(n, base + 2 * i)
            alt_draws = suite.q.sample(n, base + 2 * i + 1)
            u1 = kuiper_u(alt_draws, P)
            v1 = kuiper_v(alt_draws, suite.p, r)
            data["u0"][i] = kuiper_u(null_draws, P).statistic
            data["u1"][i] = u1.statistic
            data["v0"][i] = kuiper_v(null_draws, suite.p, r).statistic
            data["v1"][i] = v1.statistic
            data["w0"][i] = w_statistic(null_draws, suite.p, r).w
            data["w1"][i] = w_statistic(alt_draws, suite.p, r).w
            data["log10_sig_u1"][i] = u1.log10_pvalue
            data["log10_sig_v1"][i] = v1.log10_pvalue
        med = {c: float(np.median(v)) for c, v in data.items()}
        iqr = {}
        for c, v in data.items():
            q25, q75 = np.percentile(v, [25.0, 75.0])
            iqr[c] = float(q75 - q25)
        detail = {c: v.copy() for c, v in data.items()} if keep_trials else {}
        rows.append(
            TableRow(
                example=example,
                n=int(n),
                trials=int(trials),
                iqr=iqr,
                per_trial=detail,
                **med,
            )
        )
    return rows


def write_table_csv(rows, fh):
    """Long-format CSV: one line per (row, column) with median and IQR."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(
        ["example", "n", "trials", "column", "median", "median_raw", "iqr", "iqr_raw"]
    )
    for row in rows:
        for col in COLUMNS:
            med = getattr(row, col)
            iqr = row.iqr.get(col, 0.0)
            writer.writerow(
                [
                    row.example,
                    row.n,
                    row.trials,
                    col,
                    "%.2E" % med,
                    repr(med),
                    "%.2E" % iqr,
                    repr(iqr),
                ]
            )


def _resolve_density(spec: str) -> Density:
    """A density from ``builtin:<name>``, a bare suite name, or a file."""
    name = None
    if spec.startswith("builtin:"):
        name = spec[len("builtin:") :]
    elif spec in SUITE_NAMES:
        name = spec
    if name is not None:
        try:
            return builtin(name).p
        except ValueError as e:
            raise UsageError(str(e))
    if not os.path.exists(spec):
        raise UsageError(
            f"density {spec!r} is neither a built-in name "
            f"({', '.join(SUITE_NAMES)}) nor an existing file"
        )
    with open(spec, encoding="utf-8") as fh:
        return density_from_spec_lines(fh, origin=spec)


def _parse_stats(stats) -> tuple[str, ...]:
    if isinstance(stats, str):
        tokens = [t.strip() for t in stats.split(",") if t.strip()]
    else:
        tokens = list(stats)
    for t in tokens:
        if t not in STAT_TOKENS:
            raise UsageError(
                f"unknown statistic {t!r}; choose from {', '.join(STAT_TOKENS)}"
            )
    if not tokens:
        raise UsageError("at least one statistic is required")
    return tuple(dict.fromkeys(tokens))


def run_test(samples, density, stats=("u", "v", "w")) -> TestReport:
    """Run the chosen statistics on a sample file against a density.

    Draws outside the density's support are counted and reported on
    stderr; they enter the statistics with density value 0, hence level
    map value 0, which is the strongest possible evidence against the
    density.
    """
    tokens = _parse_stats(stats)
    if not os.path.exists(samples):
        raise UsageError(f"samples file not found: {samples}")
    s = read_samples(samples)
    d = _resolve_density(density)
    outside = int(
        np.count_nonzero(
            (s.draws < d.support.lo) | (s.draws > d.support.hi)
        )
    )
    if outside:
        print(
            f"warning: {outside} of {s.n} draws lie outside the support "
            f"[{d.support.lo:g}, {d.support.hi:g}] of {d.label}",
            file=sys.stderr,
        )
    u = v = w = None
    wt = None
    if "u" in tokens:
        u = kuiper_u(s, d.cdf())
    if any(t in tokens for t in ("v", "w", "wtilde")):
        r = build_rearranged(d)
        if "v" in tokens:
            v = kuiper_v(s, d, r)
        if "w" in tokens:
            w = w_statistic(s, d, r)
        if "wtilde" in tokens:
            wt = w_tilde(s, d, r)
    return TestReport(
        density=d.label,
        source=s.source,
        seed=s.seed,
        n=s.n,
        u=u,
        v=v,
        w=w,
        w_tilde=wt,
    )


def _verdict_lines(report: TestReport) -> list[str]:
    lines = []
    if report.u is not None:
        lines.append(
            f"U = {report.u.statistic:.6g} "
            f"(log10 p-value {report.u.log10_pvalue:.6g}, n = {report.u.n})"
        )
    if report.v is not None:
        lines.append(
            f"V = {report.v.statistic:.6g} "
            f"(log10 p-value {report.v.log10_pvalue:.6g}, n = {report.v.n})"
        )
    if report.w is not None:
        w = report.w
        lines.append(f"W = {w.w:.6g} (draw {w.min_index} attains the minimum)")
        if w.w <= 1.0:
            pct = math.floor(w.confidence_lower_bound * 100.0 * 1e5) / 1e5
            lines.append(
                f"at least {pct:.5f}% confidence that the sample "
                f"was not drawn from {report.density}"
            )
        else:
            lines.append(
                f"W exceeds 1; the minimum-tail statistic carries "
                f"no evidence against {report.density}"
            )
    if report.w_tilde is not None:
        lines.append(f"W~ = {report.w_tilde:.6g}")
    return lines


def _write_curve(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, value in rows:
            writer.writerow([repr(float(x)), repr(float(value))])
    return path


def emit_curves(example, points=DEFAULT_POINTS, out_dir="."):
    """Write pdf, cdf, and level-map curves for an example as CSV files.

    The level-map file covers [0, max p] uniformly; each atom of the
    level map additionally contributes two rows at its level, the left
    limit first, so plotting tools draw the jump vertically.
    """
    if points < 2:
        raise UsageError(f"points must be at least 2, got {points}")
    suite = builtin(example)
    d = suite.p
    P = d.cdf()
    r = build_rearranged(d)
    os.makedirs(out_dir, exist_ok=True)
    grid = np.linspace(d.support.lo, d.support.hi, points)
    paths = [
        _write_curve(
            os.path.join(out_dir, f"{example}_pdf.csv"),
            zip(grid, d.pdf_values(grid)),
        ),
        _write_curve(
            os.path.join(out_dir, f"{example}_cdf.csv"),
            zip(grid, P(grid)),
        ),
    ]
    xs = np.linspace(0.0, r.max_p, points)
    df_rows = list(zip(xs, np.atleast_1d(r.evaluate(xs))))
    for level, _ in r.atoms:
        df_rows.append((level, float(r.left_limit(level))))
        df_rows.append((level, float(r.evaluate(level))))
    df_rows.sort(key=lambda t: (t[0], t[1]))
    paths.append(
        _write_curve(os.path.join(out_dir, f"{example}_df.csv"), df_rows)
    )
    return paths


class _Parser(argparse.ArgumentParser):
    # Usage problems exit with code 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="gof",
        description="Goodness-of-fit tests driven by the density value distribution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="Monte Carlo table for a built-in example")
    t.add_argument("--example", required=True, choices=SUITE_NAMES)
    t.add_argument("--n", default=DEFAULT_N, help="comma-separated sample sizes")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    t.add_argument("--out", default=None, help="CSV path (default: stdout)")
    t.add_argument(
        "--max-work",
        type=float,
        default=None,
        help="allow up to this many draws per row (default 1e9)",
    )

    e = sub.add_parser("test", help="test a sample file against a density")
    e.add_argument("--samples", required=True, help="one draw per line")
    e.add_argument(
        "--density",
        required=True,
        help="built-in name, builtin:<name>, or density spec file",
    )
    e.add_argument("--stats", default="u,v,w", help="subset of u,v,w,wtilde")
    e.add_argument("--out", default=None, help="write key=value report here")

    c = sub.add_parser("df", help="write pdf, cdf, and level-map curves")
    c.add_argument("--example", required=True, choices=SUITE_NAMES)
    c.add_argument("--points", type=int, default=DEFAULT_POINTS)
    c.add_argument("--out", default=".", help="output directory")
    return parser


def _parse_n_list(text) -> list[int]:
    out = []
    for token in str(text).split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(int(token))
        except ValueError:
            raise UsageError(f"bad sample size {token!r} in --n")
    if not out:
        raise UsageError("--n needs at least one sample size")
    return out


def _cmd_table(args) -> int:
    rows = run_table(
        args.example,
        _parse_n_list(args.n),
        seed=args.seed,
        trials=args.trials,
        max_work=args.max_work,
    )
    if args.out is None:
        write_table_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_table_csv(rows, fh)
        print(f"wrote {args.out}")
    return 0


def _cmd_test(args) -> int:
    report = run_test(args.samples, args.density, args.stats)
    for line in _verdict_lines(report):
        print(line)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(report.to_kv_lines()) + "\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_df(args) -> int:
    for path in emit_curves(args.example, points=args.points, out_dir=args.out):
        print(f"wrote {path}")
    return 0


_COMMANDS = {"table": _cmd_table, "test": _cmd_test, "df": _cmd_df}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"gof: error: {e}", file=sys.stderr)
        return 1
    except (ApproxError, ValueError, OSError) as e:
        print(f"gof: failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
