"""Measured regret against the logarithmic and intermediate-rate bounds.

Alg4 on constant-mu instances (log rate) and Alg5 with mu_t = t**-alpha and a
single up-front regularization weight (sqrt(T) and T**alpha rates).
"""

import argparse
import math

from relmd.analysis import STEP_RATIO_C, check_theorem_bounds, epsilon_schedule, solve_offline
from relmd.battery import cor2_bound
from relmd.experiments import cor2_config
from relmd.problems import generate_instance
from relmd.solvers import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--m", type=int, default=5)
    ap.add_argument("--T", type=int, nargs="+", default=[100, 300, 1000])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--mu", type=float, default=0.5)
    args = ap.parse_args()

    print(f"{'run':<22}{'T':>6}{'T_J':>6}{'regret':>11}{'bound':>11}{'scaled':>12}")
    for T in args.T:
        p = generate_instance(args.n, args.m, T, args.seed, mu=args.mu)
        M = p.M(T)
        tr = run(p, SolverConfig("alg4", epsilon_schedule("cor1", M=M, mu=args.mu, T=T), T))
        rep = check_theorem_bounds(tr, p, solve_offline(p, range(T)), schedule="cor1")
        log_term = 1 + math.log((STEP_RATIO_C + 1) * T)
        print(f"{'alg4 constant mu':<22}{T:>6}{tr.T_J:>6}{rep.regret:>11.3f}{M * M / args.mu * log_term:>11.1f}"
              f"{rep.regret / log_term:>12.3f}")

    for case, alpha in (("cor2_case2", 0.75), ("cor2_case3", 0.25)):
        for T in args.T:
            p = generate_instance(args.n, args.m, T, args.seed, mu=1.0)
            tr = run(p, cor2_config(p, T, case, alpha))
            rep = check_theorem_bounds(tr, p, solve_offline(p, range(T)), schedule=case, alpha=alpha)
            bound = cor2_bound(tr, case, alpha)
            print(f"{'alg5 ' + case + f' a={alpha}':<22}{T:>6}{tr.T_J:>6}{rep.regret:>11.3f}{bound:>11.1f}"
                  f"{rep.regret / math.sqrt(T):>12.3f}")


if __name__ == "__main__":
    main()
