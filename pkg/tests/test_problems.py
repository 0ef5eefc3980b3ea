import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relmd.geometry import bregman
from relmd.problems import (
    ConstraintTerm,
    LossTerm,
    OnlineProblem,
    Regularizer,
    constraint_subgrad,
    constraint_value,
    default_start,
    generate_instance,
    load_instance,
    loss_subgrad,
    loss_value,
    save_instance,
    trivial_constraint,
)


def test_loss_value_examples():
    assert loss_value(LossTerm([1, 0], 0, 2), np.array([3.0, 0.0])) == 12.0
    assert loss_value(LossTerm([0.3, 0.9], 0.5, 1.7), np.zeros(2)) == 0.5
    assert loss_value(LossTerm([1, 1], 2, 0), np.array([1.0, 1.0])) == 0.0


def test_loss_subgrad_examples():
    np.testing.assert_array_equal(loss_subgrad(LossTerm([1, 0], 0, 2), np.array([3.0, 0.0])), [7.0, 0.0])
    np.testing.assert_array_equal(loss_subgrad(LossTerm([1, 1], 2, 0), np.array([1.0, 1.0])), [0.0, 0.0])
    np.testing.assert_array_equal(loss_subgrad(LossTerm([0, 1], 5, 1), np.array([0.0, 1.0])), [0.0, 0.0])


def _problem(cons, n=2):
    return OnlineProblem([LossTerm(np.zeros(n), 0.0, 1.0)], cons)


def test_constraint_value_examples():
    assert constraint_value(_problem([ConstraintTerm([1, 0], 1, 0)]), np.zeros(2)) == (-1.0, 0)
    twins = _problem([ConstraintTerm([1, 0], 0.5, 0), ConstraintTerm([1, 0], 0.5, 0)])
    assert constraint_value(twins, np.array([1.0, 0.0]))[1] == 0
    pair = _problem([ConstraintTerm([0, 0], -0.2, 0), ConstraintTerm([0, 0], -0.7, 0)])
    assert constraint_value(pair, np.zeros(2)) == pytest.approx((0.7, 1))


def test_violation_mode_picks_first_violated_term():
    p = _problem([ConstraintTerm([0, 0], -0.2, 0), ConstraintTerm([0, 0], -0.7, 0)])
    # both exceed 0.1: the first one is reported even though the second is larger
    g, j = constraint_value(p, np.zeros(2), epsilon=0.1)
    assert (g, j) == (pytest.approx(0.7), 0)
    assert constraint_value(p, np.zeros(2), epsilon=0.5)[1] == 1


def test_constraint_subgrad_examples():
    p = _problem([ConstraintTerm([1, 0], 0, 1), ConstraintTerm([1, 0], 0, 0)])
    np.testing.assert_array_equal(constraint_subgrad(p, np.array([0.0, 1.0]), 0), [1.0, 1.0])
    np.testing.assert_array_equal(constraint_subgrad(p, np.array([0.0, 1.0]), 1), [1.0, 0.0])
    np.testing.assert_array_equal(constraint_subgrad(p, np.zeros(2), 0), [1.0, 0.0])
    with pytest.raises(IndexError):
        constraint_subgrad(p, np.zeros(2), 2)


def test_generator_is_deterministic_and_zero_is_feasible():
    a, b = generate_instance(7, 3, 20, seed=11), generate_instance(7, 3, 20, seed=11)
    assert a.to_dict() == b.to_dict()
    assert generate_instance(7, 3, 20, seed=12).to_dict() != a.to_dict()
    for seed in range(20):
        p = generate_instance(5, 4, 3, seed)
        assert constraint_value(p, np.zeros(5))[0] <= 0


def test_generator_ranges_and_lipschitz_constants():
    p = generate_instance(30, 10, 200, seed=2)
    for arr in (p.A, p.b, p.Alpha, p.beta):
        assert arr.min() >= 0 and arr.max() < 1
    for arr in (p.mu, p.mu_hat):
        assert arr.min() > 0 and arr.max() < 1
    np.testing.assert_allclose(p.M_f, np.linalg.norm(p.A, axis=1) + p.mu)
    assert p.M_g == pytest.approx(np.max(np.linalg.norm(p.Alpha, axis=1) + p.mu_hat))
    assert p.M() == max(p.M_f.max(), p.M_g)


def test_n1000_instance():
    p = generate_instance(1000, 10, 5, seed=0)
    assert (p.n, p.m, p.capacity) == (1000, 10, 5)


def test_generator_is_prefix_stable():
    small, large = generate_instance(6, 3, 10, seed=4), generate_instance(6, 3, 50, seed=4)
    np.testing.assert_array_equal(small.A, large.A[:10])
    np.testing.assert_array_equal(small.mu, large.mu[:10])
    np.testing.assert_array_equal(small.Alpha, large.Alpha)


def test_instance_json_round_trip(tmp_path):
    p = generate_instance(4, 2, 6, seed=9)
    path = tmp_path / "inst.json"
    save_instance(p, path)
    data = json.loads(path.read_text())
    assert {"n", "m", "seed", "losses", "constraints"} <= set(data)
    q = load_instance(path)
    np.testing.assert_array_equal(q.A, p.A)
    np.testing.assert_array_equal(q.mu_hat, p.mu_hat)
    assert q.seed == 9 and q.setup == p.setup


def test_validation():
    with pytest.raises(ValueError):
        LossTerm([1.0, np.inf], 0, 1)
    with pytest.raises(ValueError):
        LossTerm([1.0], 0, -1)
    with pytest.raises(ValueError):
        OnlineProblem([], [])
    with pytest.raises(ValueError):
        OnlineProblem([LossTerm([1.0], 0, 1)], [ConstraintTerm([1.0, 2.0], 0, 0)])
    with pytest.raises(ValueError):
        generate_instance(0, 1, 1, 0)


def test_unconstrained_surrogate():
    p = generate_instance(3, 2, 4, seed=0).without_constraint()
    assert p.is_unconstrained and p.m == 1
    assert constraint_value(p, np.ones(3) / 2)[0] == -1.0
    assert trivial_constraint(3).beta == 1.0


def test_default_regularizer_and_start():
    reg = Regularizer.squared_norm(2.0)
    assert (reg.M_d, reg.A2, reg.K) == (2.0, 2.0, 10.0)
    p = generate_instance(4, 1, 2, seed=0)
    np.testing.assert_allclose(default_start(p), np.full(4, 0.5))


# invariants on generated terms

points = st.integers(0, 2**32 - 1)


def _random_ball_pair(seed, n):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n))
    r = rng.random(2)
    return x / np.linalg.norm(x) * r[0], y / np.linalg.norm(y) * r[1]


@settings(max_examples=100, deadline=None)
@given(points, st.integers(0, 50))
def test_losses_are_strongly_convex_and_lipschitz(seed, inst_seed):
    p = generate_instance(5, 3, 8, inst_seed)
    x, y = _random_ball_pair(seed, 5)
    for term, M in zip(p.losses, p.M_f):
        gap = loss_value(term, x) - loss_value(term, y) - loss_subgrad(term, y) @ (x - y)
        assert gap >= 0.5 * term.mu * float((x - y) @ (x - y)) - 1e-10
        assert np.linalg.norm(loss_subgrad(term, x)) <= M + 1e-12
        # relative Lipschitz continuity with the Euclidean prox-function
        assert loss_subgrad(term, x) @ (y - x) + M * math.sqrt(2 * bregman(p.setup, y, x)) >= -1e-10
    for k in range(p.m):
        gk = constraint_subgrad(p, x, k)
        assert np.linalg.norm(gk) <= p.M_g + 1e-12
