"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary.  Offline comparators are memoised across tests.
"""

import math
import time
from collections import Counter

import numpy as np
import pytest

from conftest import record
from relmd.battery import ACCEPTANCE, cor1_group, cor2_group, geometry_group, lambda_group, lemma1_group, run_battery
from relmd.experiments import ExperimentSpec, run_sweep, summary_to_csv
from relmd.plotting import PANELS, plot_summary
from relmd.problems import Regularizer, generate_instance
from relmd.solvers import SolverConfig, run


def _tally(results):
    fails = [f"{r.group}:{label}:{c.name}" for r in results for label, c in r.failures]
    counts = Counter()
    for r in results:
        counts.update(r.counts())
    return fails, counts


def _status(counts):
    return f"{counts['pass']} pass, {counts['fail']} fail, {counts['skipped']} skipped, {counts['info']} info"


def test_criterion_01_geometry_identities():
    start = time.perf_counter()
    res = geometry_group(ACCEPTANCE)
    elapsed = time.perf_counter() - start
    worst = {c.name: c.lhs for _, c in res.rows}
    ok = res.passed and elapsed < 1.0
    record(1, ok, f"mirror-step err {worst['euclidean_mirror_step']:.1e}, three-point {worst['three_point_identity']:.1e}, "
                  f"pythagorean {worst['pythagorean_inequality']:.1e} over 1000 trials in {elapsed:.2f}s")
    assert ok


def test_criterion_02_lambda_root_residual():
    start = time.perf_counter()
    res = lambda_group(ACCEPTANCE)
    reg = Regularizer.squared_norm(1.0)
    p = generate_instance(20, 5, 500, seed=0)
    worst_run = 0.0
    for alg, prob in (("alg3", p.without_constraint()), ("alg5", p)):
        tr = run(prob, SolverConfig(alg, 0.05, 500, regularizer=reg))
        lam, M = tr.column("lam"), tr.column("M")
        # substitute into K lam_t = 2 M_t^2 / (mu_{1:t} + lam_{1:t-1} + lam_t)
        resid = np.abs(reg.K * lam - 2 * M ** 2 / (tr.mu_prefix + tr.lambda_prefix))
        worst_run = max(worst_run, float(resid.max()))
        assert len(tr.steps) >= 500
    elapsed = time.perf_counter() - start
    worst_tuples = res.rows[0][1].lhs
    ok = res.passed and worst_run < 1e-9 and elapsed < 1.0
    record(2, ok, f"max residual {worst_tuples:.1e} on 1e4 tuples, {worst_run:.1e} on 500-step runs, {elapsed:.2f}s")
    assert ok


def test_criterion_03_alg2_regret():
    fails, counts = _tally(run_battery(["thm2"], ACCEPTANCE))
    record(3, not fails, f"50 instances n=20 T=200: {_status(counts)}")
    assert not fails, fails


def test_criterion_04_switching_bounds():
    results = run_battery(["thm1", "thm4"], ACCEPTANCE)
    fails, counts = _tally(results)
    names = Counter(c.name for r in results for _, c in r.rows if c.status == "pass")
    evaluated = names["thm1_step_count"]
    record(4, not fails, f"50 instances n=20 m=5 T=100: {_status(counts)}; "
                         f"T_J<=3T evaluated {evaluated}x, g<=eps checked {names['productive_feasibility']}x")
    assert not fails, fails


def test_criterion_05_regularized_bounds():
    fails, counts = _tally(run_battery(["thm3", "thm5"], ACCEPTANCE))
    record(5, not fails, f"default regularizer A2=0.5 M_d=1: {_status(counts)}")
    assert not fails, fails


def test_criterion_06_harmonic_vs_inf():
    start = time.perf_counter()
    res = lemma1_group(ACCEPTANCE)
    elapsed = time.perf_counter() - start
    ratios = [c.lhs / (c.rhs / 2) for _, c in res.rows if c.rhs > 0]
    ok = res.passed and elapsed < 30 and len(res.rows) == 200 and max(ratios) <= 2 + 1e-6
    record(6, ok, f"200 inputs T in 1..3: max H/inf = {max(ratios):.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_07_log_scaling():
    res = cor1_group(ACCEPTANCE)
    scaled = {label: c for label, c in res.rows if c.name == "cor1_log_scaling"}
    ok = res.passed and len(scaled) == 3
    detail = ", ".join(f"{k.split()[-1]}: {c.lhs:.3g} <= {c.rhs:.3g}" for k, c in scaled.items())
    record(7, ok, f"regret/(1+ln 4T) vs M^2/mu: {detail}")
    assert ok, res.failures


def test_criterion_08_intermediate_rates():
    res = cor2_group(ACCEPTANCE)
    rate = {}
    for label, c in res.rows:
        if c.name.startswith(("cor2_case2", "cor2_case3")) and c.status in ("pass", "fail"):
            rate[label] = c
    ok = res.passed and len(rate) == 4
    detail = "; ".join(f"{k.split(' ', 1)[1]}: {c.lhs:.3g} <= {c.rhs:.3g}" for k, c in rate.items())
    record(8, ok, detail)
    assert ok, res.failures


@pytest.fixture(scope="module")
def trend(tmp_path_factory):
    root = tmp_path_factory.mktemp("trend")
    spec = dict(n=100, m=10, T_list=[50, 100, 200, 400], epsilon_rule="inv_sqrt_t",
                algorithms=["alg4", "baseline"], seeds=[0, 1, 2, 3, 4])
    first = run_sweep(ExperimentSpec(**spec, output_dir=str(root / "first")))
    return root, spec, first


def test_criterion_09_trend(trend):
    root, spec, rows = trend
    assert not any(r["error"] for r in rows)
    monotone = 0
    for seed in spec["seeds"]:
        deltas = [r["delta"] for r in rows if r["algorithm"] == "alg4" and r["seed"] == seed]
        monotone += all(b <= a for a, b in zip(deltas, deltas[1:]))
    ratio = max(r["T_J"] / r["T"] for r in rows)
    panels = plot_summary(rows, root / "first" / "plots")
    ok = monotone >= 4 and ratio <= 3 and len(panels) == len(PANELS) and all(p.exists() for p in panels)
    record(9, ok, f"delta nonincreasing in {monotone}/5 seeds, max T_J/T = {ratio:.2f}, {len(panels)} panels")
    assert ok


def test_criterion_10_determinism(trend):
    root, spec, first = trend
    second = run_sweep(ExperimentSpec(**spec, output_dir=str(root / "second")))
    same_summary = summary_to_csv(first, exclude=("wall_time_s",)) == summary_to_csv(second, exclude=("wall_time_s",))
    traces = sorted((root / "first" / "traces").iterdir())
    same_traces = all(p.read_bytes() == (root / "second" / "traces" / p.name).read_bytes() for p in traces)
    reports = sorted((root / "first" / "reports").iterdir())
    same_reports = all(p.read_bytes() == (root / "second" / "reports" / p.name).read_bytes() for p in reports)
    ok = same_summary and same_traces and same_reports and len(traces) == 40
    record(10, ok, f"{len(traces)} traces, {len(reports)} reports and the summary byte-identical on rerun")
    assert ok
