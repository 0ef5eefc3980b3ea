"""Proximal setups: distance-generating functions, Bregman divergences and
mirror steps over the feasible sets the library supports.

Two setups are provided:

* :class:`EuclideanBall` -- ``h(x) = 0.5 * ||x||^2`` on ``{||x|| <= R}``;
* :class:`EntropySimplex` -- ``h(x) = sum x_i log x_i`` on the probability
  simplex.

All functions are pure; inputs are never modified in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ENTROPY_FLOOR = 1e-300


class DomainError(ValueError):
    """A point lies outside the domain of the distance-generating function."""


class StepFailure(ArithmeticError):
    """A mirror step produced non-finite values."""

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


def _as_point(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} has non-finite entries")
    return x


def _same_dim(*points):
    sizes = {p.size for p in points}
    if len(sizes) != 1:
        raise DomainError(f"dimension mismatch: {sorted(sizes)}")


@dataclass(frozen=True)
class EuclideanBall:
    """Euclidean prox-setup on the ball of radius ``radius`` centred at 0."""

    radius: float = 1.0
    kind: str = "euclidean_ball"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def h(self, x):
        return 0.5 * float(x @ x)

    def grad_h(self, x):
        return np.array(x, dtype=float)

    def check_domain(self, x):
        return x

    def project(self, y):
        norm = np.linalg.norm(y)
        if norm <= self.radius:
            return np.array(y, dtype=float)
        return y * (self.radius / norm)

    def mirror_step(self, x, direction, eta):
        return self.project(x - eta * direction)

    def contains(self, x, tol=1e-12):
        return bool(np.linalg.norm(x) <= self.radius + tol)

    def center(self, n):
        return np.zeros(n)


@dataclass(frozen=True)
class EntropySimplex:
    """Negative-entropy prox-setup on the probability simplex.

    Entries are clamped to ``floor`` before taking logarithms so that the
    gradient of ``h`` stays finite when multiplicative updates underflow.
    """

    floor: float = ENTROPY_FLOOR
    kind: str = "entropy_simplex"

    def check_domain(self, x):
        if np.any(x < 0):
            raise DomainError("entropy setup requires nonnegative entries")
        return x

    def h(self, x):
        x = self.check_domain(x)
        pos = x > 0
        return float(np.sum(x[pos] * np.log(x[pos])))

    def grad_h(self, x):
        x = self.check_domain(x)
        return 1.0 + np.log(np.maximum(x, self.floor))

    def project(self, y):
        y = self.check_domain(y)
        total = y.sum()
        if not total > 0:
            raise DomainError("cannot project the zero vector onto the simplex")
        return y / total

    def mirror_step(self, x, direction, eta):
        x = self.check_domain(x)
        with np.errstate(over="ignore", invalid="ignore"):
            logits = np.log(np.maximum(x, self.floor)) - eta * direction
            bad = float(np.max(np.abs(eta * direction)))
        if not np.all(np.isfinite(logits)):
            raise StepFailure(f"exponent magnitude {bad:g} is not finite", bad)
        # log-sum-exp shift: the normaliser absorbs the constant
        w = np.exp(logits - logits.max())
        return w / w.sum()

    def contains(self, x, tol=1e-12):
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol * max(1, x.size))

    def center(self, n):
        return np.full(n, 1.0 / n)


ProxSetup = Union[EuclideanBall, EntropySimplex]


def bregman(setup: ProxSetup, y, x) -> float:
    """Bregman divergence ``V(y, x) = h(y) - h(x) - <grad h(x), y - x>``."""
    y = setup.check_domain(_as_point(y, "y"))
    x = setup.check_domain(_as_point(x, "x"))
    _same_dim(x, y)
    if isinstance(setup, EuclideanBall):
        d = y - x
        return 0.5 * float(d @ d)
    return setup.h(y) - setup.h(x) - float(setup.grad_h(x) @ (y - x))


def grad_h(setup: ProxSetup, x):
    return setup.grad_h(setup.check_domain(_as_point(x)))


def bregman_project(setup: ProxSetup, y):
    """``argmin_{z in Q} V(z, y)``."""
    return setup.project(setup.check_domain(_as_point(y, "y")))


def mirror_step(setup: ProxSetup, x, direction, eta: float):
    """Solve ``grad h(y) = grad h(x) - eta * direction`` and project ``y`` onto Q."""
    x = _as_point(x)
    direction = _as_point(direction, "direction")
    _same_dim(x, direction)
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return setup.mirror_step(x, direction, eta)


def setup_to_dict(setup: ProxSetup) -> dict:
    if isinstance(setup, EuclideanBall):
        return {"kind": setup.kind, "radius": setup.radius}
    return {"kind": setup.kind}


def setup_from_dict(data: dict) -> ProxSetup:
    kind = data.get("kind", "euclidean_ball")
    if kind == "euclidean_ball":
        return EuclideanBall(float(data.get("radius", 1.0)))
    if kind == "entropy_simplex":
        return EntropySimplex()
    raise ValueError(f"unknown prox setup {kind!r}")
