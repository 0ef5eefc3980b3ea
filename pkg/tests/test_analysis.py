import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relmd.analysis import (
    CertificateError,
    OfflineSolution,
    check_lemma1,
    check_theorem_bounds,
    delta_certificate,
    epsilon_schedule,
    make_feasible,
    per_step_descent_excess,
    recomputed_regret,
    regret,
    solve_offline,
)
from relmd.problems import LossTerm, OnlineProblem, Regularizer, constraint_value, generate_instance
from relmd.solvers import SolverConfig, run

REG = Regularizer.squared_norm(1.0)


# offline comparator


def test_oracle_single_quadratic():
    p = OnlineProblem([LossTerm([0.0, 0.0, 0.0], 0.0, 2.0)], [])
    sol = solve_offline(p)
    assert sol.objective_sum == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(sol.x_star, 0, atol=1e-4)


def test_oracle_two_losses_matches_disk_grid():
    p = OnlineProblem([LossTerm([1.0, 0.0], 0.0, 1.0), LossTerm([1.0, 0.0], 1.0, 1.0)], [])
    sol = solve_offline(p)
    # independent brute force over the unit disk
    g = np.linspace(-1, 1, 2001)
    X, Y = np.meshgrid(g, g)
    inside = X ** 2 + Y ** 2 <= 1
    F = np.abs(X) + np.abs(X - 1) + (X ** 2 + Y ** 2)
    assert sol.objective_sum == pytest.approx(F[inside].min(), abs=1e-4)
    assert sol.objective_sum == pytest.approx(1.0, abs=1e-6)  # |x1| + |x1 - 1| >= 1, attained at 0


def test_oracle_backends_agree_on_n10():
    for seed in range(3):
        p = generate_instance(10, 4, 60, seed)
        sol = solve_offline(p, range(60))
        assert sol.residual_estimate <= 1e-5
        assert constraint_value(p, sol.x_star)[0] <= 0 and np.linalg.norm(sol.x_star) <= 1 + 1e-12


def test_subgradient_and_grid_oracles_agree_with_conic():
    p = generate_instance(2, 2, 30, seed=4)
    conic = solve_offline(p, range(30), grid_check=False)
    grid = solve_offline(p, range(30), method="grid")
    sub = solve_offline(p, range(30), method="subgradient", budget=5000)
    assert grid.objective_sum == pytest.approx(conic.objective_sum, abs=1e-6)
    assert sub.objective_sum == pytest.approx(conic.objective_sum, abs=1e-3)
    assert sub.objective_sum >= conic.objective_sum - 1e-6


def test_make_feasible_repairs_violations():
    p = generate_instance(5, 3, 4, seed=1)
    x = make_feasible(p, np.full(5, 3.0))
    assert constraint_value(p, x)[0] <= 0 and np.linalg.norm(x) <= 1 + 1e-12


# regret and certificates


def test_regret_arithmetic():
    # f(x) = |x + 3| + x^2 at x1 = 1 is 5; an offline value of 3 gives regret 2
    p = OnlineProblem([LossTerm([1.0], -3.0, 2.0)], [])
    tr = run(p, SolverConfig("alg2", 1.0, 1, x1=np.array([1.0])))
    assert tr.steps[0].objective_value == 5.0
    off = OfflineSolution(np.zeros(1), 3.0, "manual", 0.0, (0,))
    assert regret(tr, p, off) == 2.0
    with pytest.raises(ValueError):
        regret(tr, p, OfflineSolution(np.zeros(1), 3.0, "manual", 0.0, (1,)))


def test_regret_zero_when_iterates_are_optimal():
    p = OnlineProblem([LossTerm([0.0, 0.0], 0.0, 1.0)] * 3, [])
    tr = run(p, SolverConfig("alg2", 1.0, 3, x1=np.zeros(2)))
    assert regret(tr, p, solve_offline(p, range(3))) == pytest.approx(0.0, abs=1e-8)


def test_alg2_equal_mu_regret_below_harmonic_bound():
    mu, T = 0.5, 100
    p = generate_instance(8, 1, T, seed=3, mu=mu).without_constraint()
    tr = run(p, SolverConfig("alg2", 1.0, T))
    M = p.M(T)
    harmonic = sum(1 / t for t in range(1, T + 1))
    R = regret(tr, p, solve_offline(p, range(T)))
    assert R <= M * M / mu * harmonic
    assert M * M / mu * harmonic <= M * M / mu * (1 + math.log(T))


def test_delta_examples():
    mu, T = 0.4, 30
    p = generate_instance(6, 1, T, seed=2, mu=mu).without_constraint()
    tr = run(p, SolverConfig("alg4", 1e6, T))
    assert tr.T_J == 0
    M = p.M(T)
    assert delta_certificate(tr, p) == pytest.approx(M * M / (mu * T) * sum(1 / t for t in range(1, T + 1)), rel=1e-13)

    q = generate_instance(6, 3, T, seed=2)
    tr = run(q, SolverConfig("alg4", 0.05, T))
    assert tr.T_J > 0
    lhs = delta_certificate(tr, q) * tr.T + tr.epsilon * tr.T_J
    assert lhs == pytest.approx(float(np.sum(q.M(T) ** 2 / tr.mu_prefix)), rel=1e-13)

    with pytest.raises(CertificateError):
        delta_certificate(run(q, SolverConfig("baseline", 0.05, T)), q)


def test_alg5_delta_matches_formula():
    p = generate_instance(6, 3, 40, seed=5)
    tr = run(p, SolverConfig("alg5", 0.1, 40, regularizer=REG))
    M, lam = p.M(40), tr.column("lam")
    total = tr.lambda_prefix[-1] * REG.A2 + np.sum((M + lam * REG.M_d) ** 2 / (tr.mu_prefix + tr.lambda_prefix))
    assert delta_certificate(tr, p) == pytest.approx((total - 0.1 * tr.T_J) / tr.T, rel=1e-13)


def test_regret_identity_from_raw_iterates():
    p = generate_instance(6, 3, 50, seed=8)
    tr = run(p, SolverConfig("alg4", 0.1, 50))
    off = solve_offline(p, range(50))
    assert recomputed_regret(tr, p, off) == pytest.approx(regret(tr, p, off), abs=1e-12)


# bound checks


def test_alg2_checks_on_constant_mu_run():
    p = generate_instance(6, 1, 100, seed=1, mu=0.5).without_constraint()
    tr = run(p, SolverConfig("alg2", 1.0, 100))
    rep = check_theorem_bounds(tr, p, solve_offline(p, range(100)))
    names = {c.name: c for c in rep.bound_checks}
    assert names["thm2_regret"].status == "pass" and names["per_step_descent"].status == "pass"
    assert rep.passed


def test_negative_regret_skips_conditional_checks():
    p = generate_instance(6, 3, 20, seed=0)
    tr = run(p, SolverConfig("alg1", 0.5, 20, mu_global=0.1))
    fake = OfflineSolution(np.zeros(6), tr.productive_objective() + 1.0, "manual", 0.0, tuple(range(20)))
    rep = check_theorem_bounds(tr, p, fake, schedule="thm1")
    status = {c.name: (c.status, c.reason) for c in rep.bound_checks}
    assert status["thm1_regret"] == ("skipped", "skipped: regret negative")
    assert status["thm1_step_count"][0] == "skipped"
    assert status["thm1_aux"][0] == "pass"


def test_cor2_case2_check():
    from relmd.experiments import cor2_config

    T = 100
    p = generate_instance(10, 3, T, seed=3, mu=1.0)
    tr = run(p, cor2_config(p, T, "cor2_case2", 0.75))
    rep = check_theorem_bounds(tr, p, solve_offline(p, range(T)), schedule="cor2_case2", alpha=0.75)
    M = p.M(T)
    c = next(c for c in rep.bound_checks if c.name == "cor2_case2_regret")
    if c.status != "skipped":
        assert c.rhs == pytest.approx((REG.A2 + 2 * (REG.M_d ** 2 + M * M)) * math.sqrt(4 * T))
    assert rep.passed


def test_report_json_and_table():
    p = generate_instance(6, 3, 20, seed=0)
    tr = run(p, SolverConfig("alg5", 0.1, 20, regularizer=REG))
    rep = check_theorem_bounds(tr, p, solve_offline(p, range(20)))
    data = json.loads(rep.to_json())
    assert data["algorithm"] == "alg5" and data["T"] == 20
    assert {"name", "lhs", "rhs", "status", "margin"} <= set(data["bound_checks"][0])
    assert "thm5_regret" in rep.table()


def test_per_step_descent_inequality_alg2():
    p = generate_instance(5, 1, 60, seed=6).without_constraint()
    tr = run(p, SolverConfig("alg2", 1.0, 60))
    off = solve_offline(p, range(60))
    assert per_step_descent_excess(tr, p, off.x_star).max() <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_alg4_regret_inequality(seed):
    T = 40
    p = generate_instance(5, 3, T, seed)
    tr = run(p, SolverConfig("alg4", 1 / math.sqrt(T), T))
    off = solve_offline(p, range(T))
    R = regret(tr, p, off)
    if R >= 0 and tr.T == T:
        assert R <= np.sum(p.M(T) ** 2 / tr.mu_prefix) - tr.epsilon * tr.T_J + off.residual_estimate + 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_alg1_step_count(seed):
    T = 40
    p = generate_instance(5, 3, T, seed)
    mu = float(min(p.mu.min(), p.mu_hat.min()))
    eps = epsilon_schedule("thm1", M=p.M(T), mu=mu, T=T)
    tr = run(p, SolverConfig("alg1", eps, T, mu_global=mu))
    assert all(s.g_value <= eps for s in tr.steps if s.productive)
    if regret(tr, p, solve_offline(p, range(T))) >= 0:
        assert tr.T_J <= 3 * T


# harmonic bound and epsilon schedules


def test_lemma1_examples():
    assert check_lemma1([0.0], [1.0]) == (0.0, 0.0, True)
    lhs, rhs, ok = check_lemma1([2.0], [1e-9])
    assert ok
    assert lhs == pytest.approx(2 * math.sqrt(2), rel=1e-6)
    assert rhs / 2 == pytest.approx(2 * math.sqrt(2), rel=1e-6)  # inf of L + 2/L is 2 sqrt 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 5), st.floats(1e-3, 2)), min_size=2, max_size=2))
def test_lemma1_ratio_t2(pairs):
    C, mu = zip(*pairs)
    lhs, rhs, ok = check_lemma1(C, mu)
    assert ok and lhs <= rhs + 1e-6


def test_lemma1_rejects_bad_inputs():
    with pytest.raises(ValueError):
        check_lemma1([-1.0], [1.0])


def test_epsilon_schedule_examples():
    assert epsilon_schedule("thm1", M=1, mu=1, T=1) == 1.0
    assert epsilon_schedule("cor2_case2", A2=0.5, M_d=1, M=1, T=100) == pytest.approx(0.45)
    assert epsilon_schedule("cor2_case3", A2=0.5, M_d=1, M=1, T=37, alpha=1.0) == pytest.approx(0.5 + 2 + 4)
    assert epsilon_schedule("inv_sqrt_t", T=400) == 0.05
    with pytest.raises(ValueError):
        epsilon_schedule("thm1", M=1, T=3)
    with pytest.raises(ValueError):
        epsilon_schedule("nope", T=3)
