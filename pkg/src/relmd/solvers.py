"""Online mirror descent with switching over productive and non-productive
steps, with and without adaptive regularization.

Every algorithm runs through :func:`run`, a single loop whose per-algorithm
parts are the step-size rule (:func:`step_size`) and the regularization
weight (:func:`regularization_weight`).  A step at global counter ``t`` is
productive when ``g(x_t) <= epsilon``; it then consumes the next loss of the
stream.  Otherwise it moves along the subgradient of the first violated
constraint term and uses that term's strong-convexity parameter.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .problems import OnlineProblem, Regularizer, constraint_value, default_start


class Algorithm(str, Enum):
    ALG1 = "alg1"
    ALG2 = "alg2"
    ALG3 = "alg3"
    ALG4 = "alg4"
    ALG5 = "alg5"
    BASELINE = "baseline"


SWITCHING = {Algorithm.ALG1, Algorithm.ALG4, Algorithm.ALG5, Algorithm.BASELINE}
REGULARIZED = {Algorithm.ALG3, Algorithm.ALG5}


class StepKind(str, Enum):
    PRODUCTIVE = "productive"
    NON_PRODUCTIVE = "nonproductive"


class Termination(str, Enum):
    REACHED_T = "reached_T"
    STEP_CAP = "step_cap_exceeded"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``mu_global`` is the common strong-convexity bound of ``alg1``.
    ``mu_power`` replaces the per-term parameters by ``mu_t = t**-mu_power``
    on the global counter, and ``lambda_first`` replaces the regularization
    root by the schedule ``lambda_1 = lambda_first, lambda_t = 0`` otherwise.
    ``M`` overrides the Lipschitz bound ``max(M_t, M_g)`` used by ``alg5``.
    """

    algorithm: Algorithm
    epsilon: float
    target_T: int
    mu_global: Optional[float] = None
    regularizer: Optional[Regularizer] = None
    step_cap: Optional[int] = None
    x1: Optional[np.ndarray] = field(default=None, compare=False)
    M: Optional[float] = None
    mu_power: Optional[float] = None
    lambda_first: Optional[float] = None
    eta_max: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))

    @property
    def cap(self) -> int:
        return self.step_cap if self.step_cap is not None else 20 * self.target_T

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithm"] = self.algorithm.value
        d["step_cap"] = self.cap
        d["x1"] = None if self.x1 is None else np.asarray(self.x1).tolist()
        return d


@dataclass
class StepRecord:
    t: int
    kind: StepKind
    eta: float
    lam: float
    g_value: float
    loss_index: int
    constraint_index: int
    mu: float
    M: float
    objective_value: float
    x: np.ndarray = field(repr=False)

    @property
    def productive(self) -> bool:
        return self.kind is StepKind.PRODUCTIVE


@dataclass
class RunTrace:
    config: SolverConfig
    steps: list
    terminated: Termination
    x_final: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    @property
    def algorithm(self) -> Algorithm:
        return self.config.algorithm

    @property
    def epsilon(self) -> float:
        return self.config.epsilon

    @property
    def T(self) -> int:
        return sum(s.productive for s in self.steps)

    @property
    def T_J(self) -> int:
        return len(self.steps) - self.T

    def column(self, name):
        return np.array([getattr(s, name) for s in self.steps], dtype=float)

    @property
    def productive_mask(self):
        return np.array([s.productive for s in self.steps], dtype=bool)

    @property
    def mu_prefix(self):
        """``mu_{1:t}`` for ``t = 1..T+T_J``."""
        return np.cumsum(self.column("mu"))

    @property
    def lambda_prefix(self):
        return np.cumsum(self.column("lam"))

    @property
    def loss_indices(self) -> list:
        return [s.loss_index for s in self.steps if s.productive]

    def productive_objective(self) -> float:
        return float(sum(s.objective_value for s in self.steps if s.productive))


def regularization_weight(s: float, M: float, K: float) -> float:
    """Nonnegative root ``lam`` of ``K * lam = 2 M^2 / (s + lam)``.

    Equal to ``0.5 * (sqrt(s^2 + 8 M^2 / K) - s)``, evaluated in the
    cancellation-free form ``2c / (sqrt(s^2 + 4c) + s)`` with ``c = 2 M^2 / K``.
    """
    if not K > 0:
        raise ConfigError("A^2 + 2 M_d^2 must be positive")
    c = 2.0 * M * M / K
    if c == 0.0:
        return 0.0
    return 2.0 * c / (math.sqrt(s * s + 4.0 * c) + s)


def step_size(algorithm: Algorithm, t: int, mu_prefix: float, lambda_prefix: float,
              config: SolverConfig, grad_norm_sq: float) -> float:
    if algorithm is Algorithm.ALG1:
        return 1.0 / (config.mu_global * t)
    if algorithm in (Algorithm.ALG2, Algorithm.ALG4):
        return 1.0 / mu_prefix
    if algorithm in REGULARIZED:
        return 1.0 / (mu_prefix + lambda_prefix)
    if grad_norm_sq == 0.0:
        return config.eta_max
    return min(config.epsilon / grad_norm_sq, config.eta_max)


def _validate(problem: OnlineProblem, config: SolverConfig):
    alg = config.algorithm
    if not config.epsilon > 0:
        raise ConfigError("epsilon must be positive")
    if config.target_T < 1:
        raise ConfigError("target_T must be at least 1")
    if config.target_T > problem.capacity:
        raise ConfigError(f"target_T={config.target_T} exceeds the loss stream capacity {problem.capacity}")
    if config.cap < config.target_T:
        raise ConfigError("step_cap must be at least target_T")
    if alg is Algorithm.ALG1 and not (config.mu_global and config.mu_global > 0):
        raise ConfigError("alg1 needs a positive mu_global")
    if alg in REGULARIZED:
        if config.regularizer is None:
            raise ConfigError(f"{alg.value} needs a regularizer")
        if not config.regularizer.K > 0:
            raise ConfigError("A^2 + 2 M_d^2 must be positive")
    x1 = default_start(problem) if config.x1 is None else np.asarray(config.x1, dtype=float)
    if x1.shape != (problem.n,):
        raise ConfigError(f"x1 has shape {x1.shape}, expected ({problem.n},)")
    if not problem.setup.contains(x1):
        raise ConfigError("x1 is not in Q")
    return x1


def run(problem: OnlineProblem, config: SolverConfig) -> RunTrace:
    """Run ``config.algorithm`` until ``target_T`` productive steps or the cap."""
    x = _validate(problem, config)
    alg = config.algorithm
    switching = alg in SWITCHING
    reg = config.regularizer
    M_alg5 = config.M if config.M is not None else problem.M(config.target_T)
    setup = problem.setup
    eps = config.epsilon

    steps = []
    mu_sum = lam_sum = 0.0
    i = 0
    t = 0
    while i < config.target_T and t < config.cap:
        t += 1
        if switching:
            g, j = constraint_value(problem, x, eps)
        else:
            g, j = -math.inf, -1
        if g <= eps:
            a, b = problem.A[i], problem.b[i]
            r = float(a @ x) - b
            grad = np.sign(r) * a + problem.mu[i] * x
            mu_t, M_t = problem.mu[i], problem.M_f[i]
            fval = abs(r) + 0.5 * problem.mu[i] * float(x @ x)
            kind, loss_index = StepKind.PRODUCTIVE, i
            i += 1
        else:
            grad = problem.Alpha[j] + problem.mu_hat[j] * x
            mu_t, M_t = problem.mu_hat[j], problem.M_g
            fval = math.nan
            kind, loss_index = StepKind.NON_PRODUCTIVE, -1
        if alg is Algorithm.ALG1:
            mu_t = config.mu_global
        elif config.mu_power is not None:
            mu_t = t ** (-config.mu_power)
        if alg is Algorithm.ALG5:
            M_t = M_alg5
        mu_sum += mu_t

        lam = 0.0
        if alg in REGULARIZED:
            if config.lambda_first is not None:
                lam = config.lambda_first if t == 1 else 0.0
            else:
                lam = regularization_weight(mu_sum + lam_sum, M_t, reg.K)
            lam_sum += lam
            direction = grad + lam * reg.grad(x) if lam else grad
        else:
            direction = grad

        if alg is not Algorithm.BASELINE and alg is not Algorithm.ALG1 and not mu_sum + lam_sum > 0:
            raise ConfigError(f"step {t}: mu_1:t + lambda_1:t is zero, the step size is undefined")
        eta = step_size(alg, t, mu_sum, lam_sum, config, float(grad @ grad))
        steps.append(StepRecord(t, kind, eta, lam, g, loss_index, j, float(mu_t), float(M_t), fval, x))
        x = setup.mirror_step(x, direction, eta)

    status = Termination.REACHED_T if i == config.target_T else Termination.STEP_CAP
    return RunTrace(config, steps, status, x, problem.seed)


def _run_as(algorithm, problem, config):
    return run(problem, replace(config, algorithm=algorithm))


def run_alg1(problem, config):
    """Switching mirror descent with ``eta_t = 1 / (mu t)``."""
    return _run_as(Algorithm.ALG1, problem, config)


def run_alg2(problem, config):
    """Unconstrained online mirror descent with ``eta_{t+1} = 1 / mu_{1:t}``."""
    return _run_as(Algorithm.ALG2, problem, config)


def run_alg3(problem, config):
    """Unconstrained online mirror descent with adaptive regularization."""
    return _run_as(Algorithm.ALG3, problem, config)


def run_alg4(problem, config):
    """Switching mirror descent with ``eta_t = 1 / mu_{1:t}``."""
    return _run_as(Algorithm.ALG4, problem, config)


def run_alg5(problem, config):
    """Switching mirror descent with adaptive regularization."""
    return _run_as(Algorithm.ALG5, problem, config)


def run_adaptive_baseline(problem, config):
    """Norm-adaptive switching baseline, ``eta_t = epsilon / ||grad||^2``.

    Not one of the certified methods: it only serves as a comparison run.
    """
    return _run_as(Algorithm.BASELINE, problem, config)
