"""Command line: ``solve`` one instance or ``sweep`` an axis.

Exit codes: 0 success, 1 invalid arguments, 2 sweep finished with some
infeasible runs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .harness import AXES, ExperimentSpec, run_sweep, solve_instance, summarize, write_summary
from .optimizer import SchemeId
from .params import SimParams

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _defaults_epilog() -> str:
    lines = ["defaults (override any subset with --params FILE.json):"]
    for f in fields(SimParams):
        lines.append(f"  {f.name} = {f.default!r}")
    return "\n".join(lines)


def parse_values(text: str) -> list[int]:
    """``"1..6"`` or ``"2,4,8"`` (ranges and lists may be mixed)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty value list")
    return out


def _load_overrides(path) -> dict:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("params file must hold a JSON object")
    SimParams.from_dict(data)  # validate early
    return data


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="risd2d", description=__doc__, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="optimize one random instance", epilog=_defaults_epilog(), formatter_class=fmt)
    s.add_argument("--cu", type=int, default=5, help="cellular users C (default 5)")
    s.add_argument("--d2d", type=int, default=10, help="D2D pairs D (default 10)")
    s.add_argument("--n", type=int, default=None, help="RIS elements per side (default from params, 4)")
    s.add_argument("--e", type=int, default=None, help="phase quantization bits (default from params, 3)")
    s.add_argument("--scheme", default="PA", help="PA, MP, RP, NonRIS, NonCG or Fmm (default PA)")
    s.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    s.add_argument("--params", help="JSON file overriding SimParams fields")
    s.add_argument("--out", help="write the result JSON here instead of stdout")
    s.add_argument("--trace", help="write the per-iteration trace as JSON lines")

    w = sub.add_parser("sweep", help="Monte-Carlo sweep over one axis", epilog=_defaults_epilog(), formatter_class=fmt)
    w.add_argument("--axis", required=True, choices=list(AXES))
    w.add_argument("--values", required=True, help='axis values, e.g. "1..10" or "2,4,8"')
    w.add_argument("--schemes", default=",".join(s.value for s in SchemeId), help="comma list (default all six)")
    w.add_argument("--seeds", type=int, default=20, help="repetitions per point (default 20)")
    w.add_argument("--master-seed", type=int, default=0, help="master seed (default 0)")
    w.add_argument("--cu", type=int, default=5, help="fixed C when not swept (default 5)")
    w.add_argument("--d2d", type=int, default=10, help="fixed D when not swept (default 10)")
    w.add_argument("--n", type=int, default=4, help="fixed N when not swept (default 4)")
    w.add_argument("--e", type=int, default=3, help="fixed e when not swept (default 3)")
    w.add_argument("--params", help="JSON file overriding SimParams fields")
    w.add_argument("--out", required=True, help="CSV of per-run records")
    w.add_argument("--summary", help="CSV of per-point means (default: <out stem>_summary.csv)")
    w.add_argument("--trace-dir", help="directory for per-run result JSON and traces")
    w.add_argument("--quiet", action="store_true")
    return parser


def cmd_solve(args) -> int:
    overrides = _load_overrides(args.params)
    if args.n is not None:
        overrides["N"] = args.n
    if args.e is not None:
        overrides["e"] = args.e
    params = SimParams.from_dict(overrides)
    scheme = SchemeId.parse(args.scheme)
    res = solve_instance(params, args.cu, args.d2d, scheme, args.seed)
    text = res.to_json(indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w") as fh:
            res.write_trace(fh)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = ExperimentSpec(
        sweep_axis=args.axis,
        axis_values=tuple(parse_values(args.values)),
        schemes=tuple(s for s in args.schemes.split(",") if s),
        seeds=args.seeds,
        master_seed=args.master_seed,
        C=args.cu,
        D=args.d2d,
        N=args.n,
        e=args.e,
        params_override=_load_overrides(args.params),
    )
    for value in spec.axis_values:
        spec.point(value)  # reject bad values before any run starts

    def progress(rec):
        if not args.quiet:
            print(f"{spec.sweep_axis}={rec.axis_value} {rec.scheme} seed={rec.seed} "
                  f"rate={rec.sum_rate:.4g} feasible={rec.feasible}", file=sys.stderr)

    records = run_sweep(spec, args.out, args.trace_dir, progress)
    summary = Path(args.summary) if args.summary else Path(args.out).with_name(Path(args.out).stem + "_summary.csv")
    with open(summary, "w", newline="") as fh:
        write_summary(summarize(records), fh)
    return EXIT_OK if all(r.feasible for r in records) else EXIT_INFEASIBLE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return cmd_solve(args) if args.command == "solve" else cmd_sweep(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"risd2d {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
