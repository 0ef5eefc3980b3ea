"""Sweep Alg4 against the adaptive baseline and render the four panels.

    python3 scripts/run_experiments.py --out results/sweep
    python3 scripts/run_experiments.py --n 1000 --seeds 0   # full dimension, slow oracle
"""

import argparse
from pathlib import Path

from relmd.experiments import ExperimentSpec, run_sweep
from relmd.plotting import plot_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--T", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--no-oracle", action="store_true")
    ap.add_argument("--out", default="results/sweep")
    args = ap.parse_args()

    spec = ExperimentSpec(n=args.n, m=args.m, T_list=args.T, seeds=args.seeds, jobs=args.jobs,
                          oracle=not args.no_oracle, output_dir=args.out)
    rows = run_sweep(spec)
    for path in plot_summary(rows, Path(args.out) / "plots"):
        print(path)

    print(f"\n{'alg':<9}{'T':>5}{'T_J':>8}{'delta':>10}{'mean f':>10}{'time s':>9}")
    for alg in spec.algorithms:
        for T in spec.T_list:
            sel = [r for r in rows if r["algorithm"] == alg and r["T"] == T and not r["error"]]
            if not sel:
                continue
            mean = lambda key: sum(r[key] for r in sel) / len(sel)
            delta = "-" if sel[0]["delta"] is None else f"{mean('delta'):.3f}"
            print(f"{alg:<9}{T:>5}{mean('T_J'):>8.1f}{delta:>10}{mean('mean_productive_objective'):>10.4f}"
                  f"{mean('wall_time_s'):>9.3f}")


if __name__ == "__main__":
    main()
