"""Command-line entry point: ``digitcorr <subcommand> [flags]``.

Every subcommand writes a CSV (and a JSON mirror) whose first line echoes the
package version and the resolved configuration. Without ``--out`` the CSV goes
to stdout. Exit status is 0 on success, 2 on invalid input, 3 when a request
exceeds a size budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .charfn import enumerate_type_sum, moments_via_series, weight_bound
from .cltlab import (
    EXACT_MAX_N,
    DegenerateSourceError,
    ExperimentPlan,
    accumulation_sequence,
    cusick_scan,
    run_clt,
)
from .corrmeasure import DigitString, measure_of, moment, variance_closed_form
from .dyadic import BudgetError
from .ergodic import BitStream, SourceError, SourceSpec, asymptotic_variance, s_n_sum
from .oracle import density_scan

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3

# flags that change where or how fast output is produced, never its content
_NOT_ECHOED = {"out", "jobs", "func", "dump"}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def parse_grid(text: str) -> list[int]:
    """``64..16384`` (doubling) or a comma list ``64,128,512``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            if lo < 1 or hi < lo:
                raise ValueError
            grid = []
            n = lo
            while n <= hi:
                grid.append(n)
                n *= 2
            return grid
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use LO..HI (doubling) or a comma list") from None


def parse_lags(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lag list {text!r}; use e.g. 1,2") from None


def _nonneg_int(text: str) -> int:
    v = int(text, 0)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
    return json.loads(json.dumps(cfg, default=str))


def _render_csv(args, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# digitcorr {__version__} {json.dumps(_config(args), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _emit(args, name: str, columns: list[str], rows: list[list], summary: dict | None = None) -> None:
    text = _render_csv(args, columns, rows)
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.csv").write_text(text)
    payload = {
        "version": __version__,
        "config": _config(args),
        "columns": columns,
        "rows": [[_fmt(x) for x in row] for row in rows],
        "summary": summary or {},
    }
    (out / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=_fmt) + "\n")
    print(f"wrote {out / f'{name}.csv'}")


def _digits_from_args(args) -> DigitString:
    """The digit string a, given directly (--a or MSB-first --bits) or drawn as a source prefix of length n."""
    if getattr(args, "bits", None):
        if set(args.bits) - {"0", "1"}:
            raise ValueError("--bits takes a string of 0/1, most significant first")
        return DigitString(tuple(int(c) for c in reversed(args.bits)))
    if getattr(args, "a", None) is not None:
        return DigitString.from_int(args.a)
    if getattr(args, "source", None) and getattr(args, "n", None) is not None:
        return BitStream(SourceSpec.parse(args.source, args.seed)).digits(args.n)
    raise ValueError("give --a, --bits, or --source with --n")


# --------------------------------------------------------------------------
# subcommands

def cmd_measure(args) -> int:
    digits = _digits_from_args(args)
    mu = measure_of(digits)
    rows = [[d, str(v), float(v)] for d, v in sorted(mu.finite_part.items(), reverse=True)]
    summary = {
        "a": digits.value,
        "tail_threshold": mu.tail_threshold,
        "tail_coeff": str(mu.tail_coeff),
        "mass": str(mu.mass()),
        "mean": str(moment(mu, 1)),
        "variance": str(moment(mu, 2)),
    }
    if args.dump:
        sys.stdout.write("\n".join(mu.dump_lines()) + "\n")
    if args.out is not None or not args.dump:
        _emit(args, "measure", ["d", "mu_exact", "mu_float"], rows, summary)
    return EXIT_OK


def cmd_moments(args) -> int:
    digits = _digits_from_args(args)
    series = moments_via_series(digits, args.order)
    exact = None
    if digits.n <= EXACT_MAX_N + 1:
        mu = measure_of(digits)
        exact = [moment(mu, r) for r in range(args.order + 1)]
    rows = []
    for r, m in enumerate(series):
        rows.append([r, float(m), str(exact[r]) if exact else "", float(exact[r]) if exact else ""])
    _emit(args, "moments", ["r", "m_series", "m_exact", "m_exact_float"], rows)
    return EXIT_OK


def cmd_variance(args) -> int:
    digits = _digits_from_args(args)
    var = variance_closed_form(digits)
    # a_X(n) has n + 1 digits; for a plain --a the digit count stands in for n
    n = args.n if args.source and args.n is not None else digits.n
    rows = [[n, str(var), float(var), float(var) / max(n, 1)]]
    cols = ["n", "variance_exact", "variance_float", "variance_over_n"]
    if args.source:
        V = asymptotic_variance(SourceSpec.parse(args.source, args.seed), args.truncation).V
        rows[0] += [V, float(var) / max(n, 1) / V]
        cols += ["vnu", "ratio"]
    _emit(args, "variance", cols, rows)
    return EXIT_OK


def cmd_cusick(args) -> int:
    rep = cusick_scan(args.limit, trajectory_k=args.k)
    rows = [[k, accumulation, c, cf] for (k, c, cf), accumulation in zip(rep.trajectory, map(accumulation_sequence, range(1, args.k + 1)))]
    summary = {
        "limit": rep.limit,
        "minimum": rep.minimum,
        "minimum_float": rep.minimum_float,
        "argmin": rep.argmin,
        "violations": rep.violations,
        "reversal_checked": rep.reversal_checked,
        "reversal_mismatches": rep.reversal_mismatches,
        "trajectory_decreasing": rep.trajectory_decreasing,
    }
    sys.stderr.write(
        f"min c_a = {rep.minimum} ({rep.minimum_float:.17g}) at a = {rep.argmin}; "
        f"{len(rep.violations)} values <= 1/2; {len(rep.reversal_mismatches)} reversal mismatches\n"
    )
    _emit(args, "cusick", ["k", "a_k", "c_exact", "c_float"], rows, summary)
    return EXIT_OK


def cmd_density(args) -> int:
    if args.dmax < args.dmin:
        raise ValueError("--dmax is below --dmin")
    scan = density_scan(args.a, args.N, (args.dmin, args.dmax), jobs=args.jobs)
    exact = measure_of(args.a) if args.a.bit_length() <= 32 else None
    rows = []
    for e in scan.estimates:
        ex = exact(e.d) if exact is not None else None
        rows.append(
            [e.a, e.d, e.N, e.count, e.density, float(ex) if ex is not None else "",
             abs(e.density - float(ex)) if ex is not None else ""]
        )
    summary = {"out_of_window": scan.out_of_window, "kummer_checked": scan.checked, "kummer_mismatches": scan.mismatches}
    _emit(args, "density", ["a", "d", "N", "count", "density", "exact_density_if_available", "abs_error"], rows, summary)
    return EXIT_OK


def cmd_vnu(args) -> int:
    src = SourceSpec.parse(args.source, args.seed)
    table = asymptotic_variance(src, args.truncation, args.mode, args.n)
    rows = [[i, table.F[i]] for i in sorted(table.F)]
    summary = {"V": table.V, "remainder_bound": table.remainder_bound, "degenerate": table.degenerate}
    sys.stderr.write(f"V = {table.V:.17g} (truncation {table.truncation}, remainder <= {table.remainder_bound:.3g})\n")
    _emit(args, "vnu", ["i", "F_i"], rows, summary)
    return EXIT_OK


def cmd_clt(args) -> int:
    src = SourceSpec.parse(args.source, args.seed)
    plan = ExperimentPlan(
        src,
        n_grid=args.ngrid,
        max_moment_order=args.order,
        distribution_mode=args.mode,
        output_dir=args.out,
        jobs=args.jobs,
        truncation=args.truncation,
        svg=args.svg,
    )
    report = run_clt(plan)
    if args.out is None:
        sys.stdout.write(report.to_csv())
    else:
        print(f"wrote {Path(args.out) / 'clt_moments.csv'}")
    return EXIT_OK


def cmd_weights(args) -> int:
    src = SourceSpec.parse(args.source, args.seed)
    X = BitStream(src).prefix(max(args.nrange) + 1)
    rows = []
    for n in args.nrange:
        ts = enumerate_type_sum(X, n, args.p, args.q)
        rows.append([n, args.p, args.q, str(ts.norm_sum), float(ts.norm_sum), weight_bound(n, args.p, args.q),
                     float(ts.norm_sum) / n**args.q, ts.count])
    _emit(args, "weights", ["n", "p", "q", "norm_sum", "norm_sum_float", "bound", "norm_over_n_q", "words"], rows)
    return EXIT_OK


def cmd_sn(args) -> int:
    src = SourceSpec.parse(args.source, args.seed)
    p = args.p
    X = BitStream(src).prefix(args.n + sum(p) + 1)
    value = s_n_sum(X, args.n, p)
    r = len(p)
    normalized = value / math.comb(args.n, r) if args.n >= r else float("nan")
    _emit(args, "sn", ["n", "p", "S_n", "S_n_over_binom"], [[args.n, ",".join(map(str, p)), value, float(normalized)]])
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="digitcorr", description="Binary digit-correlation measures and CLT experiments.")
    parser.add_argument("--version", action="version", version=f"digitcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    jobs_default = os.cpu_count() or 1

    def common(p, source=False, source_required=False):
        p.add_argument("--out", help="output directory (default: CSV to stdout)")
        if source:
            p.add_argument("--source", required=source_required,
                           help="bernoulli:<p> | markov:<p01>,<p10> | periodic:<bits> | file:<path>")
            p.add_argument("--seed", type=_nonneg_int, default=0)

    def digit_args(p):
        p.add_argument("--a", type=_nonneg_int, help="the shift a")
        p.add_argument("--bits", help="digits of a, most significant first (leading zeros kept)")
        p.add_argument("--n", type=_nonneg_int, help="with --source: use a_X(n)")

    p = sub.add_parser("measure", help="exact measure mu_a")
    digit_args(p)
    common(p, source=True)
    p.add_argument("--dump", action="store_true", help="print 'd<TAB>dyadic<TAB>float' lines and the tail")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("moments", help="moments of mu_a (series path, exact when small)")
    digit_args(p)
    common(p, source=True)
    p.add_argument("--order", type=int, default=6)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("variance", help="closed-form variance of mu_a")
    digit_args(p)
    common(p, source=True)
    p.add_argument("--truncation", type=int, default=40)
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("cusick", help="scan c_a over 1 <= a < limit")
    common(p)
    p.add_argument("--limit", type=_nonneg_int, default=1 << 16)
    p.add_argument("--k", type=int, default=12, help="length of the sum-of-4^j trajectory")
    p.set_defaults(func=cmd_cusick)

    p = sub.add_parser("density", help="brute-force densities over [0, N)")
    common(p)
    p.add_argument("--a", type=_nonneg_int, required=True)
    p.add_argument("--N", type=_nonneg_int, default=1 << 20)
    p.add_argument("--dmin", type=int, default=-40)
    p.add_argument("--dmax", type=int, default=40)
    p.add_argument("--jobs", type=int, default=jobs_default)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("vnu", help="asymptotic variance V = sum F_i / 2^i")
    common(p, source=True, source_required=True)
    p.add_argument("--mode", choices=["analytic", "empirical"], default="analytic")
    p.add_argument("--n", type=_nonneg_int, default=10**6, help="bits for empirical mode")
    p.add_argument("--truncation", type=int, default=40)
    p.set_defaults(func=cmd_vnu)

    p = sub.add_parser("clt", help="moment and KS report along a_X(n)")
    common(p, source=True, source_required=True)
    p.add_argument("--ngrid", type=parse_grid, default=parse_grid("64..16384"))
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--mode", choices=["exact", "float"], default="exact")
    p.add_argument("--truncation", type=int, default=40)
    p.add_argument("--jobs", type=int, default=jobs_default)
    p.add_argument("--svg", action="store_true", help="also write clt_histogram.svg")
    p.set_defaults(func=cmd_clt)

    p = sub.add_parser("weights", help="summed norms of type (alpha^p, beta^q) products")
    common(p, source=True)
    p.add_argument("--p", type=_nonneg_int, default=0)
    p.add_argument("--q", type=_nonneg_int, default=1)
    p.add_argument("--nrange", type=parse_grid, default=[4, 6, 8, 10, 12], help="LO..HI (doubling) or list")
    p.set_defaults(func=cmd_weights, source="bernoulli:0.5")

    p = sub.add_parser("sn", help="multi-index sum S_n(X, p)")
    common(p, source=True, source_required=True)
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--p", type=parse_lags, required=True, help="lags, e.g. 1,2")
    p.set_defaults(func=cmd_sn)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    # exact outputs can have numerators with tens of thousands of digits
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SourceError, DegenerateSourceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(dispatch())
