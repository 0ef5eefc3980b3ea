"""Command-line entry point: ``relmd {generate,run,plot,verify}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .battery import ACCEPTANCE, GROUPS, BatterySize, run_battery, select_groups
from .experiments import ExperimentSpec, generate_instances, read_summary, run_sweep
from .plotting import plot_summary

PRECEDENCE = (
    "Settings are resolved as: built-in defaults, then the --config JSON file "
    "(keys mirror the experiment fields: n, m, T_list, epsilon_rule, algorithms, "
    "seeds, output_dir, jobs, oracle, mu), then command-line flags. A flag always "
    "overrides the file."
)


def _int_list(values):
    if values is None:
        return None
    return [int(v) for chunk in values for v in str(chunk).split(",") if v.strip()]


def _str_list(values):
    if values is None:
        return None
    return [v.strip() for chunk in values for v in chunk.split(",") if v.strip()]


def _spec_parent():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="JSON file with experiment fields")
    p.add_argument("--n", type=int, help="dimension (default 100)")
    p.add_argument("--m", type=int, help="number of constraint terms (default 10)")
    p.add_argument("--T", action="append", metavar="T[,T...]",
                   help="productive-step targets; repeat or comma-separate (default 50,100,200,400)")
    p.add_argument("--seed", action="append", metavar="S[,S...]", help="instance seeds (default 0)")
    p.add_argument("--out", help="output directory (default results)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relmd", description="Online mirror descent with switching steps.",
                                     epilog=PRECEDENCE)
    sub = parser.add_subparsers(dest="command", required=True)
    spec = _spec_parent()

    sub.add_parser("generate", parents=[spec], help="write instance JSON files", epilog=PRECEDENCE)

    r = sub.add_parser("run", parents=[spec], help="run a sweep: traces, reports, summary.csv", epilog=PRECEDENCE)
    r.add_argument("--eps-rule", dest="epsilon_rule",
                   help="inv_sqrt_t (default), thm1, cor2_case2[:alpha], cor2_case3:alpha or fixed:value")
    r.add_argument("--alg", action="append", metavar="A[,A...]",
                   help="alg1..alg5 or baseline; repeat or comma-separate (default alg4,baseline)")
    r.add_argument("--jobs", type=int, help="worker processes (default 1)")
    r.add_argument("--no-oracle", action="store_true", help="skip the offline comparator and bound checks")

    pl = sub.add_parser("plot", help="render SVG panels from a summary CSV")
    pl.add_argument("--out", default="results", help="sweep directory holding summary.csv (default results)")
    pl.add_argument("--summary", type=Path, help="summary CSV (default OUT/summary.csv)")

    v = sub.add_parser("verify", help="run the bound-check battery; nonzero exit on any failure")
    v.add_argument("--filter", action="append", metavar="GROUP",
                   help=f"run only groups whose name contains GROUP; groups: {', '.join(GROUPS)}")
    v.add_argument("--full", action="store_true", help="acceptance-sized battery (slow)")
    v.add_argument("--seed", type=int, default=0, help="base seed of the battery instances")
    v.add_argument("--verbose", action="store_true", help="print every check, not only failures")
    return parser


def resolve_spec(args) -> ExperimentSpec:
    """Defaults, then the config file, then explicit flags."""
    values = asdict(ExperimentSpec())
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        ExperimentSpec.from_dict(data)  # rejects unknown keys
        values.update(data)
    flags = {
        "n": args.n,
        "m": args.m,
        "T_list": _int_list(args.T),
        "seeds": _int_list(args.seed),
        "output_dir": args.out,
        "epsilon_rule": getattr(args, "epsilon_rule", None),
        "algorithms": _str_list(getattr(args, "alg", None)),
        "jobs": getattr(args, "jobs", None),
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if getattr(args, "no_oracle", False):
        values["oracle"] = False
    return ExperimentSpec(**values).validate()


def cmd_generate(args) -> int:
    paths = generate_instances(resolve_spec(args))
    print(f"wrote {len(paths)} instance files")
    return 0


def cmd_run(args) -> int:
    spec = resolve_spec(args)
    rows = run_sweep(spec)
    failed = [r for r in rows if r.get("error")]
    print(f"{len(rows)} runs, {len(failed)} failed; summary at {Path(spec.output_dir) / 'summary.csv'}")
    for r in failed:
        print(f"  {r['algorithm']} seed={r['seed']} T={r['T']}: {r['error']}")
    return 1 if failed else 0


def cmd_plot(args) -> int:
    path = args.summary or Path(args.out) / "summary.csv"
    rows = read_summary(path)
    for p in plot_summary(rows, Path(args.out) / "plots"):
        print(p)
    return 0


def cmd_verify(args) -> int:
    groups = select_groups(args.filter)
    size = ACCEPTANCE if args.full else BatterySize()
    size = BatterySize(**{**asdict(size), "seed": args.seed})
    results = run_battery(groups, size)
    failed = []
    for res in results:
        print(res.table(verbose=args.verbose))
        failed += [f"{res.group}:{c.name}" for _, c in res.failures]
    if failed:
        print("FAILED: " + ", ".join(sorted(set(failed))))
        return 1
    print("all checks passed")
    return 0


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "plot": cmd_plot, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"relmd {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
