"""Experts for online convex optimization: the ball domain and constant-step OGD."""

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

__all__ = [
    "BallDomain",
    "LossRecord",
    "Expert",
    "OGD",
    "project",
    "ogd_step",
    "ogd_step_size",
    "thm4_regret_bound",
    "thm5_dynamic_bound",
]

_GRAD_TOL = 1e-9


@dataclass(frozen=True)
class BallDomain:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=np.float64))
        if c.ndim != 1:
            raise ValueError("center must be a vector")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, dim: int, radius: float = 1.0) -> "BallDomain":
        return cls(np.zeros(dim), radius)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, w, tol: float = 1e-12) -> bool:
        return float(np.linalg.norm(np.asarray(w) - self.center)) <= self.radius + tol


def project(dom: BallDomain, w) -> np.ndarray:
    """Euclidean projection onto the ball."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != dom.center.shape:
        raise ValueError(f"dimension mismatch: point {w.shape} vs domain {dom.center.shape}")
    off = w - dom.center
    dist = float(np.linalg.norm(off))
    if dist <= dom.radius:
        return w.copy()
    return dom.center + (dom.radius / dist) * off


@dataclass(frozen=True)
class LossRecord:
    """One round's convex loss.

    ``min_value`` is the minimum of the raw loss over the domain; subtracting
    it puts values in ``[0, G*D]``.
    """

    value_at: Callable[[np.ndarray], float]
    gradient_at: Callable[[np.ndarray], np.ndarray]
    min_value: float = 0.0

    def normalized(self, w) -> float:
        return self.value_at(w) - self.min_value


class Expert(Protocol):
    """Anything that plays a point and then learns from the round's loss."""

    @property
    def point(self) -> np.ndarray: ...

    def feed(self, loss: LossRecord) -> None: ...


def ogd_step_size(D: float, G: float, lam: float, n: float) -> float:
    if D <= 0 or G <= 0 or n <= 0:
        raise ValueError("D, G and n must be positive")
    return (D / G) * math.sqrt(1.0 / ((1.0 + 2.0 * lam) * n))


@dataclass
class OGD:
    """Projected online gradient descent with a constant step size."""

    domain: BallDomain
    eta: float
    G: float
    w: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"step size must be positive, got {self.eta!r}")
        if self.w is None:
            self.w = self.domain.center.copy()
        else:
            self.w = np.array(self.w, dtype=np.float64)
            if not self.domain.contains(self.w):
                raise ValueError("initial point lies outside the domain")

    @property
    def point(self) -> np.ndarray:
        return self.w

    def step(self, grad) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        gnorm = float(np.linalg.norm(grad))
        if gnorm > self.G + _GRAD_TOL:
            raise ValueError(f"gradient norm {gnorm!r} exceeds G={self.G!r}")
        self.w = project(self.domain, self.w - self.eta * grad)
        return self.w

    def feed(self, loss: LossRecord) -> None:
        self.step(loss.gradient_at(self.w))


def ogd_step(s: OGD, grad) -> OGD:
    """Functional spelling of :meth:`OGD.step`; mutates and returns ``s``."""
    s.step(grad)
    return s


def thm4_regret_bound(D: float, G: float, lam: float, eta: float, length: int) -> float:
    """Regret with switching cost of OGD over any interval of ``length`` rounds."""
    if length < 1:
        raise ValueError("interval length must be >= 1")
    return D * D / (2.0 * eta) + (1.0 + 2.0 * lam) * eta * length * G * G / 2.0


def thm5_dynamic_bound(D: float, G: float, lam: float, eta: float, length: int, path: float) -> float:
    if path < 0:
        raise ValueError("path length must be nonnegative")
    return thm4_regret_bound(D, G, lam, eta, length) + (D / eta) * path
