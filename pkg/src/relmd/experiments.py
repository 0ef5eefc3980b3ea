"""Experiment sweeps: instance generation, runs, analysis and the summary table."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import STEP_RATIO_C, check_theorem_bounds, delta_certificate, epsilon_schedule, solve_offline
from .files import write_json, write_trace_csv
from .problems import OnlineProblem, Regularizer, generate_instance, load_instance, save_instance
from .solvers import REGULARIZED, Algorithm, SolverConfig, run

SUMMARY_COLUMNS = (
    "algorithm", "seed", "T", "T_J", "epsilon", "terminated", "wall_time_s", "delta",
    "mean_productive_objective", "regret", "bounds_passed", "error",
)
EPSILON_RULES = ("inv_sqrt_t", "thm1", "cor2_case2", "cor2_case3", "fixed")


def parse_epsilon_rule(rule: str) -> tuple[str, Optional[float]]:
    """``"inv_sqrt_t"``, ``"thm1"``, ``"cor2_case2[:ALPHA]"``, ``"cor2_case3:ALPHA"`` or ``"fixed:VALUE"``."""
    name, _, arg = rule.replace("-", "_").partition(":")
    if name not in EPSILON_RULES:
        raise ValueError(f"unknown epsilon rule {rule!r}; choose from {', '.join(EPSILON_RULES)}")
    if name == "cor2_case2":
        return name, float(arg) if arg else 0.75
    if name in ("cor2_case3", "fixed"):
        if not arg:
            raise ValueError(f"epsilon rule {name} needs a parameter, e.g. {name}:0.25")
        return name, float(arg)
    return name, None


@dataclass
class ExperimentSpec:
    n: int = 100
    m: int = 10
    T_list: list = field(default_factory=lambda: [50, 100, 200, 400])
    epsilon_rule: str = "inv_sqrt_t"
    algorithms: list = field(default_factory=lambda: ["alg4", "baseline"])
    seeds: list = field(default_factory=lambda: [0])
    output_dir: str = "results"
    jobs: int = 1
    oracle: bool = True
    mu: Optional[float] = None  # fixes every strong-convexity parameter when set

    def validate(self) -> "ExperimentSpec":
        if not self.T_list or not self.seeds or not self.algorithms:
            raise ValueError("T_list, seeds and algorithms must be non-empty")
        if self.n < 1 or self.m < 1 or min(self.T_list) < 1:
            raise ValueError("n, m and every T must be positive")
        for a in self.algorithms:
            Algorithm(a)
        parse_epsilon_rule(self.epsilon_rule)
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment fields {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def instance_path(spec: ExperimentSpec, seed: int, T: int) -> Path:
    return Path(spec.output_dir) / "instances" / f"instance_n{spec.n}_m{spec.m}_T{T}_seed{seed}.json"


def generate_instances(spec: ExperimentSpec) -> list:
    spec.validate()
    paths = []
    for seed in spec.seeds:
        for T in spec.T_list:
            path = instance_path(spec, seed, T)
            path.parent.mkdir(parents=True, exist_ok=True)
            save_instance(generate_instance(spec.n, spec.m, T, seed, mu=spec.mu), path)
            paths.append(path)
    return paths


def _load_or_generate(spec, seed, T) -> OnlineProblem:
    path = instance_path(spec, seed, T)
    if path.exists():
        return load_instance(path)
    return generate_instance(spec.n, spec.m, T, seed, mu=spec.mu)


def strong_convexity_floor(problem: OnlineProblem, T: int) -> float:
    """Smallest parameter among the first ``T`` losses and the constraint terms."""
    return float(min(problem.mu[:T].min(), problem.mu_hat.min()))


def make_config(problem: OnlineProblem, algorithm: str, T: int, rule: str) -> tuple[SolverConfig, str, Optional[float]]:
    """Solver config, bound schedule label and alpha for one sweep cell."""
    alg = Algorithm(algorithm)
    name, arg = parse_epsilon_rule(rule)
    if alg is Algorithm.ALG5 and name.startswith("cor2"):
        # the cor2 rates assume mu_t >= t**-alpha, so instances need mu >= 1
        return cor2_config(problem, T, name, arg), name, arg
    reg = Regularizer.squared_norm(problem.setup.radius) if alg in REGULARIZED else None
    reg_for_eps = reg or Regularizer.squared_norm(problem.setup.radius)
    M = problem.M(T)
    mu = strong_convexity_floor(problem, T)
    if name == "inv_sqrt_t":
        eps = 1.0 / math.sqrt(T)
    elif name == "fixed":
        eps = arg
    elif name == "thm1":
        eps = epsilon_schedule("thm1", M=M, mu=mu, T=T)
    elif name == "cor2_case2":
        eps = epsilon_schedule("cor2_case2", M=M, A2=reg_for_eps.A2, M_d=reg_for_eps.M_d, T=T)
    else:
        eps = epsilon_schedule("cor2_case3", M=M, A2=reg_for_eps.A2, M_d=reg_for_eps.M_d, T=T, alpha=arg)
    schedule = "custom"
    if name == "thm1":
        schedule = {Algorithm.ALG1: "thm1", Algorithm.ALG4: "cor1"}.get(alg, "custom")
    cfg = SolverConfig(alg, eps, T, mu_global=mu if alg is Algorithm.ALG1 else None, regularizer=reg)
    return cfg, schedule, None


def cor2_config(problem: OnlineProblem, T: int, case: str, alpha: float) -> SolverConfig:
    """Alg5 with ``mu_t = t**-alpha`` and a single up-front regularization weight.

    The weight uses the step budget ``(C + 1) T`` in place of the unknown
    total step count, which bounds it whenever ``T_J <= C T``.
    """
    reg = Regularizer.squared_norm(problem.setup.radius)
    M = problem.M(T)
    budget = (STEP_RATIO_C + 1) * T
    if case == "cor2_case2":
        eps = epsilon_schedule(case, M=M, A2=reg.A2, M_d=reg.M_d, T=T)
        first = math.sqrt(budget)
    elif case == "cor2_case3":
        eps = epsilon_schedule(case, M=M, A2=reg.A2, M_d=reg.M_d, T=T, alpha=alpha)
        first = budget ** alpha
    else:
        raise ValueError(f"unknown case {case!r}")
    return SolverConfig(Algorithm.ALG5, eps, T, regularizer=reg, M=M, mu_power=alpha, lambda_first=first)


def run_cell(spec: ExperimentSpec, seed: int, T: int) -> list:
    """All algorithms of the spec on one (seed, T) instance; the offline
    comparator is solved once per constrained/unconstrained variant."""
    out = Path(spec.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    rows = []
    oracles = {}
    try:
        base = _load_or_generate(spec, seed, T)
    except Exception as exc:  # isolate the cell
        return [_failed_row(a, seed, T, exc) for a in spec.algorithms]
    for algorithm in spec.algorithms:
        try:
            alg = Algorithm(algorithm)
            problem = base.without_constraint() if alg in (Algorithm.ALG2, Algorithm.ALG3) else base
            cfg, schedule, alpha = make_config(problem, algorithm, T, spec.epsilon_rule)
            start = time.perf_counter()
            trace = run(problem, cfg)
            wall = time.perf_counter() - start
            stem = f"{alg.value}_n{spec.n}_m{spec.m}_T{T}_seed{seed}"
            write_trace_csv(trace, out / "traces" / f"{stem}.csv")
            row = {
                "algorithm": alg.value, "seed": seed, "T": T, "T_J": trace.T_J, "epsilon": cfg.epsilon,
                "terminated": trace.terminated.value, "wall_time_s": wall,
                "mean_productive_objective": trace.productive_objective() / trace.T if trace.T else math.nan,
                "delta": None, "regret": None, "bounds_passed": "", "error": "",
            }
            if alg in (Algorithm.ALG4, Algorithm.ALG5) and trace.T:
                row["delta"] = delta_certificate(trace, problem)
            if spec.oracle and trace.T:
                key = problem.is_unconstrained
                if key not in oracles:
                    oracles[key] = solve_offline(problem, range(T))
                report = check_theorem_bounds(trace, problem, oracles[key], schedule=schedule, alpha=alpha)
                write_json(report.to_json(), out / "reports" / f"{stem}.json")
                passed, evaluated = report.counts()
                row.update(regret=report.regret, bounds_passed=f"{passed}/{evaluated}")
            rows.append(row)
        except Exception as exc:
            rows.append(_failed_row(algorithm, seed, T, exc))
    return rows


def _failed_row(algorithm, seed, T, exc):
    row = {c: None for c in SUMMARY_COLUMNS}
    row.update(algorithm=str(algorithm), seed=seed, T=T, error=f"{type(exc).__name__}: {exc}")
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(spec: ExperimentSpec) -> list:
    """Run every (algorithm, seed, T); rows are sorted by (algorithm, seed, T)."""
    spec.validate()
    cells = [(spec, seed, T) for seed in spec.seeds for T in spec.T_list]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(_run_cell_args, cells))
    else:
        chunks = [run_cell(*c) for c in cells]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["algorithm"], r["seed"], r["T"]))
    write_summary(rows, Path(spec.output_dir) / "summary.csv")
    return rows


def _fmt(col, v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if col == "wall_time_s":
        return f"{v:.3f}"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def summary_to_csv(rows, exclude=()) -> str:
    cols = [c for c in SUMMARY_COLUMNS if c not in exclude]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(c, r.get(c)) for c in cols])
    return buf.getvalue()


def write_summary(rows, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(summary_to_csv(rows))


def read_summary(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append(r)
    return rows
