"""Online problem family: absolute-deviation losses with a quadratic term,
max-type quadratic constraints, and a seeded random instance generator.

Loss term ``f(x) = |<a, x> - b| + (mu / 2) ||x||^2``.
Constraint ``g(x) = max_i <alpha_i, x> - beta_i + (mu_hat_i / 2) ||x||^2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import EntropySimplex, EuclideanBall, ProxSetup, setup_from_dict, setup_to_dict


@dataclass(frozen=True)
class LossTerm:
    a: np.ndarray
    b: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        if not np.all(np.isfinite(self.a)):
            raise ValueError("loss vector has non-finite entries")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")


@dataclass(frozen=True)
class ConstraintTerm:
    alpha: np.ndarray
    beta: float
    mu_hat: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        if self.mu_hat < 0:
            raise ValueError("mu_hat must be nonnegative")


@dataclass(frozen=True)
class Regularizer:
    """Regularizer ``d(x) = 0.5 * ||x||^2``, 1-strongly convex w.r.t. the
    Euclidean prox-function and nonnegative on the ball.

    ``A2`` is ``sup_Q d`` and ``M_d`` the Lipschitz bound of ``d`` on Q.
    """

    M_d: float
    A2: float

    @classmethod
    def squared_norm(cls, radius=1.0):
        return cls(M_d=radius, A2=0.5 * radius**2)

    def value(self, x):
        return 0.5 * float(x @ x)

    def grad(self, x):
        return x

    @property
    def K(self):
        """``A^2 + 2 M_d^2``, the denominator of the regularization root."""
        return self.A2 + 2.0 * self.M_d**2


def loss_value(term: LossTerm, x) -> float:
    return abs(float(term.a @ x) - term.b) + 0.5 * term.mu * float(x @ x)


def loss_subgrad(term: LossTerm, x):
    # sign(0) == 0: the midpoint of the subdifferential of |.| at the kink
    s = np.sign(float(term.a @ x) - term.b)
    return s * term.a + term.mu * np.asarray(x, dtype=float)


def _sup_norm(setup: ProxSetup) -> tuple[float, str]:
    """Radius of Q and the dual norm used for Lipschitz bounds."""
    if isinstance(setup, EuclideanBall):
        return setup.radius, "l2"
    # on the simplex relative Lipschitz w.r.t. entropy uses ||.||_inf (Pinsker)
    return 1.0, "linf"


def _dual_norm(rows, kind):
    return np.linalg.norm(rows, ord=2 if kind == "l2" else np.inf, axis=-1)


@dataclass(frozen=True)
class OnlineProblem:
    """A finite loss stream, a max-type constraint and the prox setup.

    ``losses`` is consumed in order by the solvers, one term per productive
    step.  ``constraints`` always holds at least one term; an unconstrained
    problem carries the single trivial term ``g == -1``.
    """

    losses: tuple
    constraints: tuple
    setup: ProxSetup = field(default_factory=EuclideanBall)
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "losses", tuple(self.losses))
        if not self.losses:
            raise ValueError("problem needs at least one loss term")
        object.__setattr__(self, "constraints", tuple(self.constraints) or (trivial_constraint(self.n),))
        dims = {t.a.size for t in self.losses} | {c.alpha.size for c in self.constraints}
        if len(dims) != 1:
            raise ValueError(f"inconsistent dimensions {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.losses[0].a.size

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def capacity(self) -> int:
        return len(self.losses)

    @cached_property
    def A(self):
        return np.stack([t.a for t in self.losses])

    @cached_property
    def b(self):
        return np.array([t.b for t in self.losses])

    @cached_property
    def mu(self):
        return np.array([t.mu for t in self.losses])

    @cached_property
    def Alpha(self):
        return np.stack([c.alpha for c in self.constraints])

    @cached_property
    def beta(self):
        return np.array([c.beta for c in self.constraints])

    @cached_property
    def mu_hat(self):
        return np.array([c.mu_hat for c in self.constraints])

    @cached_property
    def M_f(self):
        """Per-term Lipschitz bounds ``sup_Q ||grad f_t||``."""
        r, kind = _sup_norm(self.setup)
        return _dual_norm(self.A, kind) + self.mu * r

    @cached_property
    def M_g(self) -> float:
        r, kind = _sup_norm(self.setup)
        return float(np.max(_dual_norm(self.Alpha, kind) + self.mu_hat * r))

    @property
    def mu_g(self) -> float:
        return float(self.mu_hat.min())

    @property
    def is_unconstrained(self) -> bool:
        return bool(np.all(self.Alpha == 0) and np.all(self.mu_hat == 0) and np.all(self.beta >= 0))

    def M(self, T: Optional[int] = None) -> float:
        """``max(M_t, M_g)`` over the first ``T`` losses (all when ``None``)."""
        M_f = self.M_f if T is None else self.M_f[:T]
        return float(max(M_f.max(), self.M_g))

    def without_constraint(self) -> "OnlineProblem":
        return OnlineProblem(self.losses, (trivial_constraint(self.n),), self.setup, self.seed)

    def objective(self, x, T: Optional[int] = None) -> float:
        """``sum_{t<=T} f_t(x)``."""
        A, b, mu = self.A[:T], self.b[:T], self.mu[:T]
        return float(np.abs(A @ x - b).sum() + 0.5 * mu.sum() * float(x @ x))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "setup": setup_to_dict(self.setup),
            "losses": [{"a": t.a.tolist(), "b": float(t.b), "mu": float(t.mu)} for t in self.losses],
            "constraints": [
                {"alpha": c.alpha.tolist(), "beta": float(c.beta), "mu_hat": float(c.mu_hat)}
                for c in self.constraints
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OnlineProblem":
        losses = [LossTerm(np.array(d["a"], dtype=float), float(d["b"]), float(d["mu"])) for d in data["losses"]]
        cons = [
            ConstraintTerm(np.array(d["alpha"], dtype=float), float(d["beta"]), float(d["mu_hat"]))
            for d in data["constraints"]
        ]
        return cls(losses, cons, setup_from_dict(data.get("setup", {})), data.get("seed"))


def trivial_constraint(n: int) -> ConstraintTerm:
    """The constant constraint ``g == -1``."""
    return ConstraintTerm(np.zeros(n), 1.0, 0.0)


def constraint_values(problem: OnlineProblem, x):
    """All constraint term values ``g_i(x)``."""
    return problem.Alpha @ x - problem.beta + 0.5 * problem.mu_hat * float(x @ x)


def constraint_value(problem: OnlineProblem, x, epsilon: Optional[float] = None) -> tuple[float, int]:
    """Return ``(g(x), index)``.

    With ``epsilon`` given and ``g(x) > epsilon`` the index is the first term
    whose value exceeds ``epsilon``; otherwise it is the first argmax.
    """
    vals = constraint_values(problem, x)
    gmax = float(vals.max())
    if epsilon is not None and gmax > epsilon:
        return gmax, int(np.argmax(vals > epsilon))
    return gmax, int(np.argmax(vals))


def constraint_subgrad(problem: OnlineProblem, x, index: int):
    if not 0 <= index < problem.m:
        raise IndexError(f"constraint index {index} out of range for m={problem.m}")
    return problem.Alpha[index] + problem.mu_hat[index] * np.asarray(x, dtype=float)


def _open_unit(rng, size):
    # uniform on the open interval (0, 1)
    u = rng.random(size)
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return u


def generate_instance(n: int, m: int, T_capacity: int, seed: int, *, radius: float = 1.0,
                      mu: Optional[float] = None) -> OnlineProblem:
    """Random instance on the Euclidean ball.

    ``a_t, alpha_i`` entrywise and ``b_t, beta_i`` are uniform on [0, 1);
    ``mu_t, mu_hat_i`` are uniform on (0, 1) unless ``mu`` fixes them all.

    Each coefficient family draws from its own PCG64 child stream of
    ``SeedSequence(seed)``, so an instance with a larger ``T_capacity``
    extends a smaller one with the same seed: its first losses coincide.
    """
    if min(n, m, T_capacity) < 1:
        raise ValueError("n, m and T_capacity must be positive")
    streams = [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(6)]
    alpha = streams[0].random((m, n))
    beta = streams[1].random(m)
    mu_hat = _open_unit(streams[2], m) if mu is None else np.full(m, float(mu))
    a = streams[3].random((T_capacity, n))
    b = streams[4].random(T_capacity)
    mus = _open_unit(streams[5], T_capacity) if mu is None else np.full(T_capacity, float(mu))
    losses = [LossTerm(a[t], float(b[t]), float(mus[t])) for t in range(T_capacity)]
    cons = [ConstraintTerm(alpha[i], float(beta[i]), float(mu_hat[i])) for i in range(m)]
    return OnlineProblem(losses, cons, EuclideanBall(radius), seed)


def save_instance(problem: OnlineProblem, path) -> None:
    Path(path).write_text(json.dumps(problem.to_dict()) + "\n")


def load_instance(path) -> OnlineProblem:
    return OnlineProblem.from_dict(json.loads(Path(path).read_text()))


def default_start(problem: OnlineProblem):
    """``(1/sqrt(n), ..., 1/sqrt(n))`` scaled to the ball; uniform on the simplex."""
    n = problem.n
    if isinstance(problem.setup, EntropySimplex):
        return np.full(n, 1.0 / n)
    return np.full(n, problem.setup.radius / np.sqrt(n))
