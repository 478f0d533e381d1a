"""Smoothed OGD: K constant-step OGD experts chained through Combiners.

Level ``i`` (1-based) runs OGD with effective horizon ``n_i = T 2^(1-i)`` and
step size ``(D/G) sqrt(1 / ((1+2 lambda) n_i))``. ``B^1`` is the first OGD;
``B^i`` combines ``B^(i-1)`` with OGD ``i`` using a DNP tuned to ``n_i``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .combiner import Combiner
from .dnp_core import make_params
from .oco import OGD, BallDomain, LossRecord, ogd_step_size

__all__ = [
    "StackSchedule",
    "ScheduleError",
    "SmoothedOGD",
    "make_schedule",
    "build_stack",
    "stack_round",
    "min_horizon",
    "thm2_bound",
    "thm3_bound",
]


class ScheduleError(ValueError):
    """The horizon is too short to host even one level."""

    def __init__(self, msg: str, min_T: int):
        super().__init__(msg)
        self.min_T = min_T


@dataclass(frozen=True)
class StackSchedule:
    T: int
    lam: float
    zeta: float
    G: float
    D: float
    K: int
    levels: tuple  # ((n_i, eta_i), ...)
    M: float = 2.0


def _level_count(T: int, lam: float, zeta: float) -> int:
    ratio = T / (32.0 * max(lam, 1.0) * math.log(1.0 / zeta))
    if ratio < 1.0:
        return 0
    return int(math.floor(math.log2(ratio))) + 1


def min_horizon(lam: float, zeta: float | None = None) -> int:
    """Smallest T with at least one level (``zeta`` defaults to ``1/T``)."""
    def ok(T):
        z = 1.0 / T if zeta is None else zeta
        return z <= math.exp(-1.0) and _level_count(T, lam, z) >= 1

    # ok() is monotone in T for T >= 3
    hi = 3
    while not ok(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def make_schedule(T: int, lam: float = 1.0, zeta: float | None = None, G: float = 1.0, D: float = 2.0, M: float = 2.0) -> StackSchedule:
    T = int(T)
    if T < 1:
        raise ValueError(f"horizon must be positive, got {T}")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam!r}")
    if G <= 0 or D <= 0:
        raise ValueError("G and D must be positive")
    zeta = 1.0 / T if zeta is None else float(zeta)
    if not 0.0 < zeta <= math.exp(-1.0):
        raise ValueError(f"requires 0 < zeta <= 1/e, got {zeta!r}")
    K = _level_count(T, lam, zeta)
    if K < 1:
        need = min_horizon(lam, None if zeta == 1.0 / T else zeta)
        raise ScheduleError(
            f"T={T} too short for lambda={lam!r}, zeta={zeta!r}: K={K} < 1 (minimum admissible T is {need})",
            need,
        )
    if T < max(math.sqrt(lam) * math.log2(T), math.e):
        warnings.warn(f"T={T} violates T >= max(sqrt(lambda) log2 T, e); movement guarantees may not hold", stacklevel=2)
    levels = []
    for i in range(1, K + 1):
        n_i = T * 2.0 ** (1 - i)
        levels.append((n_i, ogd_step_size(D, G, lam, n_i)))
    return StackSchedule(T=T, lam=float(lam), zeta=zeta, G=float(G), D=float(D), K=K, levels=tuple(levels), M=float(M))


class SmoothedOGD:
    """The played algorithm. ``point`` is the top level's output."""

    def __init__(self, sched: StackSchedule, domain: BallDomain, init=None, record: bool = False):
        if not math.isclose(domain.diameter, sched.D, rel_tol=1e-12):
            raise ValueError(f"schedule D={sched.D!r} differs from domain diameter {domain.diameter!r}")
        init = domain.center.copy() if init is None else np.asarray(init, dtype=np.float64)
        if not domain.contains(init):
            raise ValueError("initial point lies outside the domain")
        self.schedule = sched
        self.domain = domain
        self.t = 0
        self.experts = [OGD(domain, eta, sched.G, init) for _, eta in sched.levels]
        self.levels = [self.experts[0]]
        for i in range(1, sched.K):
            p = make_params(sched.levels[i][0], sched.zeta)
            self.levels.append(
                Combiner(self.levels[-1], self.experts[i], p, sched.lam, sched.G, sched.D, sched.M, record=record)
            )
        self.record = record
        self.expert_paths = [[e.point.copy()] for e in self.experts] if record else None
        self.level_paths = [[b.point.copy()] for b in self.levels] if record else None

    @property
    def top(self):
        return self.levels[-1]

    @property
    def combiners(self):
        return self.levels[1:]

    @property
    def point(self) -> np.ndarray:
        return self.top.point

    def feed(self, loss: LossRecord) -> None:
        if self.t >= self.schedule.T:
            raise RuntimeError(f"horizon T={self.schedule.T} exhausted")
        # feeding the top level advances every level exactly once, bottom-up
        self.top.feed(loss)
        self.t += 1
        if self.record:
            for path, e in zip(self.expert_paths, self.experts):
                path.append(e.point.copy())
            for path, b in zip(self.level_paths, self.levels):
                path.append(b.point.copy())

    def run(self, losses) -> np.ndarray:
        """Play every loss in order; returns the ``(T'+1, d)`` prediction path."""
        out = [self.point.copy()]
        for loss in losses:
            self.feed(loss)
            out.append(self.point.copy())
        return np.array(out)


def build_stack(sched: StackSchedule, domain: BallDomain, init=None, record: bool = False) -> SmoothedOGD:
    return SmoothedOGD(sched, domain, init, record)


def stack_round(s: SmoothedOGD, loss: LossRecord):
    w = s.point.copy()
    s.feed(loss)
    return w, s


def thm2_bound(tau: int, lam: float, G: float, D: float, T: int) -> float:
    """Adaptive regret with switching cost over any interval of length ``tau``."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if T < math.e:
        raise ValueError("T must be >= e")
    gd = G * D
    return 2.0 * gd * math.sqrt((1.0 + lam) * tau) + 113.0 * gd * max(math.sqrt(lam), 1.0) * math.sqrt(tau * math.log(T))


def thm3_bound(tau: int, lam: float, G: float, D: float, T: int, path: float) -> float:
    """Dynamic regret with switching cost against a comparator of given path length."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if path < 0:
        raise ValueError("path length must be nonnegative")
    gd = G * D
    stretch = 1.0 + 2.0 * path / D
    return (
        2.0 * gd * math.sqrt((1.0 + lam) * tau * stretch)
        + 120.0 * gd * max(math.sqrt(lam), 1.0) * math.sqrt(tau * stretch * math.log(T))
    )
