"""Command-line entry point: ``autocov-spectra <subcommand> ...``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import collections
import csv
import io
import json
import sys
from typing import Any, Sequence

from . import __version__
from .autocov import lag_autocov
from .datagen import Dist, PanelSpec, generate_panel, read_panel_csv
from .empirics import lemma_diagnostics, run_experiment
from .factor import FactorModelSpec, estimate_num_factors, simulate_factor_panel
from .linalg import NumericalError
from .lsd import Law, density_csv, density_curve, raw_support_endpoints, solve_stieltjes, support_endpoints

SCHEMA = "autocov-spectra/1"


class UsageError(Exception):
    pass


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _law(text: str) -> Law:
    try:
        return Law(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"law must be A or B, got {text}") from None


def _dist(text: str) -> Dist:
    aliases = {"t": Dist.STUDENT_T, "studentt": Dist.STUDENT_T, "normal": Dist.GAUSSIAN}
    key = text.lower()
    if key in aliases:
        return aliases[key]
    try:
        return Dist(key)
    except ValueError:
        choices = ", ".join(d.value for d in Dist)
        raise argparse.ArgumentTypeError(f"unknown distribution {text!r} (choose from {choices})") from None


def _dump_json(payload: dict[str, Any]) -> str:
    # json writes floats with repr(), the shortest string that round-trips.
    return json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kv_csv(payload: dict[str, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in payload.items():
        if isinstance(value, list):
            for i, item in enumerate(value, start=1):
                if isinstance(item, dict):
                    for sub, v in item.items():
                        writer.writerow([f"{key}_{i}_{sub}", repr(v) if isinstance(v, float) else v])
                else:
                    writer.writerow([f"{key}_{i}", repr(item) if isinstance(item, float) else item])
        else:
            writer.writerow([key, repr(value) if isinstance(value, float) else value])
    return buf.getvalue()


def cmd_density(args: argparse.Namespace) -> int:
    table = density_curve(args.c, args.law, args.points)
    if args.format == "json":
        text = _dump_json(
            {"c": args.c, "law": args.law.value, "u": table[:, 0].tolist(), "density": table[:, 1].tolist()}
        )
    else:
        text = density_csv(table)
    _emit(text, args.out)
    return 0


def cmd_support(args: argparse.Namespace) -> int:
    a, b = support_endpoints(args.c)
    raw_a, _ = raw_support_endpoints(args.c)
    if args.format == "json":
        _emit(_dump_json({"c": args.c, "a": a, "b": b, "raw_a": raw_a}), args.out)
    else:
        _emit(f"a={a:g} b={b:g}\n", args.out)
    return 0


def cmd_stieltjes(args: argparse.Namespace) -> int:
    alpha = complex(args.alpha_re, args.alpha_im)
    if alpha.imag <= 0:
        raise UsageError("--alpha-im must be positive")
    sol = solve_stieltjes(alpha, args.c, args.law)
    payload = {
        "c": args.c,
        "law": args.law.value,
        "alpha_re": alpha.real,
        "alpha_im": alpha.imag,
        "value_re": sol.value.real,
        "value_im": sol.value.imag,
        "residual": sol.residual,
    }
    if args.format == "json":
        _emit(_dump_json(payload), args.out)
    else:
        _emit(_kv_csv(payload), args.out)
    return 0


def _panel_spec(args: argparse.Namespace) -> PanelSpec:
    try:
        return PanelSpec(p=args.p, T=args.t, tau=args.tau, dist=args.dist, seed=args.seed, df=args.df)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _panel_spec(args)
    report = run_experiment(
        spec,
        replicates=args.replicates,
        law=args.law,
        method=args.eig,
        jobs=args.jobs,
        diagnostics=not args.no_diagnostics,
    )
    payload = report.to_dict()
    text = _dump_json(payload) if args.format == "json" else _kv_csv(payload)
    if args.out:
        _emit(text, args.out)
        print(f"ks={report.ks!r}")
    else:
        print(f"ks={report.ks!r}", file=sys.stderr)
        _emit(text, None)
    return 0


def cmd_lemma_check(args: argparse.Namespace) -> int:
    if args.alpha_im == 0:
        raise UsageError("--alpha-im must be nonzero")
    if args.csv:
        panel = read_panel_csv(args.csv, 1, header=args.header)
    else:
        panel = generate_panel(_panel_spec(args))
    aset = lag_autocov(panel)
    ks = list(range(0, args.kmax + 1)) + [aset.T]
    diag = lemma_diagnostics(aset, complex(args.alpha_re, args.alpha_im), ks)
    rows = [
        {"k": k, "xk_re": x.real, "xk_im": x.imag, "abs_xk": abs(x), "abs_yk": abs(y)} for k, x, y in diag
    ]
    if args.format == "json":
        text = _dump_json(
            {
                "p": aset.p,
                "T": aset.T,
                "alpha_re": args.alpha_re,
                "alpha_im": args.alpha_im,
                "diagnostics": rows,
            }
        )
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows({k: repr(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows)
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def cmd_factor_demo(args: argparse.Namespace) -> int:
    if args.m >= args.p:
        raise UsageError("--m must be smaller than --p")
    try:
        specs = [
            FactorModelSpec(
                args.p, args.t, args.m, args.loading, args.ar, seed=args.seed + i, noise=args.dist
            )
            for i in range(args.seeds)
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    estimates = [estimate_num_factors(simulate_factor_panel(s), args.delta, args.eig) for s in specs]
    counts = collections.Counter(estimates)
    modal = min(counts, key=lambda k: (-counts[k], k))
    payload = {
        "p": args.p,
        "T": args.t,
        "m": args.m,
        "loading": args.loading,
        "ar": args.ar,
        "delta": args.delta,
        "seeds": args.seeds,
        "estimates": estimates,
        "modal_estimate": modal,
        "hit_rate": counts[args.m] / len(estimates),
    }
    text = _dump_json(payload) if args.format == "json" else _kv_csv(payload)
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autocov-spectra",
        description="Singular-value spectra of large lag-tau sample autocovariance matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, default_format: str) -> None:
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=default_format)

    def panel_flags(
        p: argparse.ArgumentParser, p_default: int | None = None, t_default: int | None = None
    ) -> None:
        p.add_argument("--p", type=_positive_int, required=p_default is None, default=p_default)
        p.add_argument("--t", type=_positive_int, required=t_default is None, default=t_default)
        p.add_argument("--tau", type=_positive_int, default=1)
        p.add_argument("--dist", type=_dist, default=Dist.GAUSSIAN)
        p.add_argument("--df", type=float, default=6.0, help="student-t degrees of freedom (>= 5)")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("density", help="closed-form limiting density curve")
    p.add_argument("--c", type=_positive_float, required=True)
    p.add_argument("--law", type=_law, default=Law.A)
    p.add_argument("--points", type=_positive_int, default=400)
    common(p, "csv")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("support", help="support edges a, b")
    p.add_argument("--c", type=_positive_float, required=True)
    common(p, "csv")
    p.set_defaults(func=cmd_support)

    p = sub.add_parser("stieltjes", help="Stieltjes transform from the cubic")
    p.add_argument("--c", type=_positive_float, required=True)
    p.add_argument("--alpha-re", type=float, required=True)
    p.add_argument("--alpha-im", type=float, required=True)
    p.add_argument("--law", type=_law, default=Law.B)
    common(p, "json")
    p.set_defaults(func=cmd_stieltjes)

    p = sub.add_parser("simulate", help="Monte Carlo ESD vs limiting law")
    panel_flags(p)
    p.add_argument("--replicates", type=_positive_int, default=1)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--law", type=_law, default=Law.A)
    p.add_argument("--eig", choices=["jacobi", "lapack"], default="jacobi")
    p.add_argument("--no-diagnostics", action="store_true", help="skip the x_k / y_k traces")
    common(p, "json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lemma-check", help="shifted resolvent traces x_k, y_k")
    panel_flags(p, 200, 200)
    p.add_argument("--alpha-re", type=float, default=1.0)
    p.add_argument("--alpha-im", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--csv", help="read the panel from a CSV instead of simulating")
    p.add_argument("--header", action="store_true", help="skip one header line in --csv")
    common(p, "json")
    p.set_defaults(func=cmd_lemma_check)

    p = sub.add_parser("factor-demo", help="factor-count estimator over seeded runs")
    p.add_argument("--p", type=_positive_int, default=200)
    p.add_argument("--t", type=_positive_int, default=400)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--loading", type=float, default=5.0)
    p.add_argument("--ar", type=float, default=0.5)
    p.add_argument("--delta", type=_positive_float, default=0.1)
    p.add_argument("--seeds", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0, help="first seed; run i uses seed + i")
    p.add_argument("--dist", type=_dist, default=Dist.GAUSSIAN)
    p.add_argument("--eig", choices=["jacobi", "lapack"], default="jacobi")
    common(p, "json")
    p.set_defaults(func=cmd_factor_demo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
