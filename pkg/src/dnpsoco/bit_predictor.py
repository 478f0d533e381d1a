"""Bit prediction with the Discounted-Normal-Predictor.

Two update rules share one state machine:

* ``Mode.PLAIN``: ``x <- rho*x + b`` every round.
* ``Mode.CONSERVATIVE``: the bit is used only while the predictor is unsure
  (``0 <= x <= U``) or wrong (``x < 0, b > 0`` or ``x > U, b < 0``);
  otherwise ``x <- rho*x``.

The reward of a round is ``g(x_t) b_t - c |g(x_t) - g(x_{t+1})|`` with the
forward difference, so evaluating round ``t`` needs the post-update state.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dnp_core import DnpParams, confidence

__all__ = [
    "Mode",
    "DnpState",
    "StreamRun",
    "dnp_new",
    "dnp_predict",
    "dnp_update",
    "run_stream",
    "thm1_reward_bound",
    "cor1_reward_bound",
    "per_step_change_bound",
    "cor1_scale",
    "cor1_scaled_state",
]

# slack on |b| <= mu for bits produced by floating-point division
_BIT_TOL = 1e-12


class Mode(enum.Enum):
    PLAIN = "plain"
    CONSERVATIVE = "conservative"


@dataclass
class DnpState:
    params: DnpParams
    mode: Mode
    mu: float
    x: float = 0.0
    # True when the last update took the discount-only branch
    shrunk: bool = False

    def predict(self) -> float:
        return confidence(self.x, self.params)

    def update(self, b: float) -> "DnpState":
        b = float(b)
        if abs(b) > self.mu + _BIT_TOL:
            raise ValueError(f"bit {b!r} exceeds declared magnitude mu={self.mu!r}")
        x, rho, u = self.x, self.params.rho, self.params.u
        if self.mode is Mode.PLAIN or (0.0 <= x <= u) or (x < 0.0 and b > 0.0) or (x > u and b < 0.0):
            self.x = rho * x + b
            self.shrunk = False
        else:
            self.x = rho * x
            self.shrunk = True
        return self


def dnp_new(p: DnpParams, mode: Mode = Mode.CONSERVATIVE, mu: float = 1.0) -> DnpState:
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu!r}")
    return DnpState(params=p, mode=Mode(mode), mu=float(mu))


def dnp_predict(s: DnpState) -> float:
    return s.predict()


def dnp_update(s: DnpState, b: float) -> DnpState:
    """Advance ``s`` by one bit in place and return it."""
    return s.update(b)


@dataclass(frozen=True)
class StreamRun:
    """Trajectory of one machine over a bit stream of length T.

    ``xs`` and ``g`` hold T+1 entries (the last is the lookahead state);
    ``shrunk`` and ``bits`` hold T.
    """

    params: DnpParams
    mode: Mode
    mu: float
    bits: np.ndarray
    xs: np.ndarray
    g: np.ndarray
    shrunk: np.ndarray

    def rewards(self, switch_weight: float | None = None) -> np.ndarray:
        """Per-round reward; the switching weight defaults to ``1/mu``."""
        c = 1.0 / self.mu if switch_weight is None else switch_weight
        return self.g[:-1] * self.bits - c * np.abs(np.diff(self.g))

    def interval_reward(self, r: int, s: int, switch_weight: float | None = None) -> float:
        """Reward summed over rounds ``r..s`` (1-indexed, inclusive)."""
        return float(self.rewards(switch_weight)[r - 1:s].sum())


def run_stream(p: DnpParams, bits, mode: Mode = Mode.CONSERVATIVE, mu: float = 1.0) -> StreamRun:
    """Run a fresh machine over ``bits`` with the compiled kernel."""
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu!r}")
    bits = np.ascontiguousarray(bits, dtype=np.float64)
    if bits.ndim != 1:
        raise ValueError("bits must be one-dimensional")
    if bits.size and float(np.max(np.abs(bits))) > mu + _BIT_TOL:
        raise ValueError(f"bit stream exceeds declared magnitude mu={mu!r}")
    mode = Mode(mode)
    xs, shrunk = kernels.run_dnp(bits, p.n, p.zeta, p.u, mode is Mode.CONSERVATIVE, 0.0)
    g = kernels.confidence_array(xs, p.n, p.zeta, p.u)
    return StreamRun(params=p, mode=mode, mu=float(mu), bits=bits, xs=xs, g=g, shrunk=shrunk)


def thm1_reward_bound(p: DnpParams, mu: float, tau: int, sum_b: float, from_start: bool = False) -> float:
    """Lower bound on the reward of the conservative machine over ``tau`` rounds."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    u, n, z = p.u, p.n, p.zeta
    if from_start:
        return max(0.0, sum_b - tau * (u + 2.0 * mu) / n - u) - z * tau
    return max(0.0, sum_b - (tau / n) * (u + 2.0 * mu) - u - mu) - u - mu - z * tau


def cor1_scale(lam: float) -> float:
    """``max(sqrt(lambda), 1)``."""
    return max(math.sqrt(lam), 1.0)


def cor1_reward_bound(p: DnpParams, lam: float, tau: int, sum_b: float) -> float:
    """Lower bound on ``sum(g_t b_t - lambda |g_t - g_{t+1}|)`` for unscaled bits
    when the machine is fed ``b_t / max(sqrt(lambda), 1)``."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    m = cor1_scale(lam)
    u, n, z = p.u, p.n, p.zeta
    head = sum_b - m * u * (tau + n) / n - (2.0 * tau + n) / n
    return max(0.0, head) - m * u - 1.0 - m * z * tau


def per_step_change_bound(p: DnpParams, mu: float) -> float:
    return mu * math.sqrt(p.log_inv_zeta / p.n) + p.zeta * mu / 4.0


def cor1_scaled_state(p: DnpParams, lam: float) -> DnpState:
    """Conservative machine declared for bits pre-divided by ``max(sqrt(lambda), 1)``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam!r}")
    return dnp_new(p, Mode.CONSERVATIVE, 1.0 / cor1_scale(lam))
