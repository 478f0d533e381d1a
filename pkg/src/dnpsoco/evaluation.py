"""Regret with switching cost: interval, adaptive and dynamic.

Indices are 1-based and inclusive, matching how the guarantees are stated.
The switching cost of round ``t`` is the forward move ``||w_t - w_{t+1}||``, so
a trace of T rounds carries T+1 predictions.

All losses are distance-to-target, ``f_t(w) = G ||w - c_t||``, whose minimum
over the domain is 0, so stored loss values are already normalized.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .oco import BallDomain, project
from .smoothed_ogd import thm2_bound, thm3_bound

__all__ = [
    "RunTrace",
    "BestFixedOracle",
    "AdaptiveRow",
    "DynamicRow",
    "switching_cost",
    "best_fixed_oracle",
    "oracle_slack",
    "interval_regret",
    "adaptive_profile",
    "dynamic_regret",
    "dynamic_profile",
    "strided_starts",
]

EXHAUSTIVE_MAX_T = 512


@dataclass
class RunTrace:
    predictions: np.ndarray  # (T+1, d)
    loss_values: np.ndarray  # (T,)
    targets: np.ndarray  # (T, d)
    lam: float
    G: float
    D: float
    domain: BallDomain = None
    _cum: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.predictions = np.atleast_2d(np.asarray(self.predictions, dtype=np.float64))
        self.loss_values = np.asarray(self.loss_values, dtype=np.float64)
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=np.float64))
        T = self.loss_values.shape[0]
        if self.predictions.shape[0] != T + 1:
            raise ValueError(f"need T+1={T + 1} predictions for T={T} losses, got {self.predictions.shape[0]}")
        if self.targets.shape != (T, self.predictions.shape[1]):
            raise ValueError(f"targets shape {self.targets.shape} does not match ({T}, {self.predictions.shape[1]})")
        if self.domain is None:
            self.domain = BallDomain.unit(self.predictions.shape[1], self.D / 2.0)
        self.switch_norms = np.linalg.norm(np.diff(self.predictions, axis=0), axis=1)
        self._cum = {
            "loss": np.concatenate(([0.0], np.cumsum(self.loss_values))),
            "switch": np.concatenate(([0.0], np.cumsum(self.switch_norms))),
        }

    @classmethod
    def from_targets(cls, predictions, targets, lam: float, G: float, D: float, domain: BallDomain = None) -> "RunTrace":
        predictions = np.atleast_2d(np.asarray(predictions, dtype=np.float64))
        targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
        T = targets.shape[0]
        losses = G * np.linalg.norm(predictions[:T] - targets, axis=1)
        return cls(predictions, losses, targets, lam, G, D, domain)

    @property
    def T(self) -> int:
        return self.loss_values.shape[0]

    @property
    def dim(self) -> int:
        return self.predictions.shape[1]

    def _check(self, r: int, s: int):
        if not 1 <= r <= s <= self.T:
            raise IndexError(f"need 1 <= r <= s <= T={self.T}, got r={r}, s={s}")

    def hitting_cost(self, r: int, s: int) -> float:
        self._check(r, s)
        c = self._cum["loss"]
        return float(c[s] - c[r - 1])


def switching_cost(trace: RunTrace, r: int, s: int) -> float:
    """``lambda G sum_{t=r}^{s} ||w_t - w_{t+1}||``."""
    trace._check(r, s)
    c = trace._cum["switch"]
    return trace.lam * trace.G * float(c[s] - c[r - 1])


def oracle_slack(G: float, tau: int, resolution: float, dim: int) -> float:
    """Worst gap between the grid oracle's value and the true minimum.

    Every point of the ball is within ``resolution sqrt(d) / 2`` of a coarse
    grid point and the cumulative loss is ``G tau``-Lipschitz.
    """
    return G * tau * resolution * math.sqrt(dim) / 2.0


def _lattice(lo, hi, step, dim):
    axes = [np.arange(lo[c], hi[c] + 0.5 * step, step) for c in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _project_rows(dom: BallDomain, pts: np.ndarray) -> np.ndarray:
    off = pts - dom.center
    nrm = np.linalg.norm(off, axis=1)
    scale = np.where(nrm > dom.radius, dom.radius / np.where(nrm > 0, nrm, 1.0), 1.0)
    return dom.center + off * scale[:, None]


def _compress(targets: np.ndarray):
    """Merge runs of identical consecutive targets into (point, count)."""
    if targets.shape[0] <= 1:
        return targets, np.ones(targets.shape[0])
    change = np.any(targets[1:] != targets[:-1], axis=1)
    starts = np.concatenate(([0], np.nonzero(change)[0] + 1))
    counts = np.diff(np.concatenate((starts, [targets.shape[0]])))
    return targets[starts], counts.astype(np.float64)


class BestFixedOracle:
    """Grid-search minimizer of ``sum_{t=r}^{s} G ||w - c_t||`` over the ball.

    A coarse lattice of the given resolution (points outside the ball are
    projected onto it) is searched, then a lattice ten times finer spanning
    one coarse cell around the incumbent. Results are cached per interval.
    """

    def __init__(self, targets, domain: BallDomain, G: float = 1.0, resolution: float = 1e-3):
        self.targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
        self.domain = domain
        self.G = float(G)
        self.resolution = float(resolution)
        if domain.dim > 2:
            raise ValueError(f"grid oracle supports dimension <= 2, got {domain.dim}")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        step = self.resolution
        pad = domain.radius + step
        coarse = _lattice(domain.center - pad, domain.center + pad, step, domain.dim)
        self.grid = np.unique(_project_rows(domain, coarse), axis=0)
        self._cache = {}

    def __call__(self, r: int, s: int):
        key = (r, s)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        T = self.targets.shape[0]
        if not 1 <= r <= s <= T:
            raise IndexError(f"need 1 <= r <= s <= T={T}, got r={r}, s={s}")
        pts, wts = _compress(self.targets[r - 1:s])
        vals = kernels.grid_distance_sums(self.grid, pts, self.G, wts)
        i = int(np.argmin(vals))
        best, best_val = self.grid[i], float(vals[i])
        step = self.resolution
        fine = _lattice(best - step, best + step, step / 10.0, self.domain.dim)
        fine = _project_rows(self.domain, fine)
        fvals = kernels.grid_distance_sums(fine, pts, self.G, wts)
        j = int(np.argmin(fvals))
        if fvals[j] < best_val:
            best, best_val = fine[j], float(fvals[j])
        out = (best.copy(), best_val)
        self._cache[key] = out
        return out

    def slack(self, tau: int) -> float:
        return oracle_slack(self.G, tau, self.resolution, self.domain.dim)


def best_fixed_oracle(targets, r: int, s: int, domain: BallDomain, resolution: float = 1e-3, G: float = 1.0):
    """Returns ``(point, value)`` for the best fixed point over rounds ``r..s``."""
    return BestFixedOracle(targets, domain, G, resolution)(r, s)


def _oracle_for(trace: RunTrace, resolution: float, oracle: BestFixedOracle | None) -> BestFixedOracle:
    if oracle is not None:
        return oracle
    return BestFixedOracle(trace.targets, trace.domain, trace.G, resolution)


def interval_regret(trace: RunTrace, r: int, s: int, oracle_resolution: float = 1e-3, oracle: BestFixedOracle | None = None) -> float:
    oracle = _oracle_for(trace, oracle_resolution, oracle)
    _, best = oracle(r, s)
    return trace.hitting_cost(r, s) + switching_cost(trace, r, s) - best


def strided_starts(T: int, tau: int, stride_divisor: int = 2) -> range:
    step = max(1, tau // stride_divisor)
    return range(1, T - tau + 2, step)


@dataclass(frozen=True)
class AdaptiveRow:
    tau: int
    r_star: int
    measured: float
    bound: float
    slack: float

    @property
    def margin(self) -> float:
        return self.bound - self.measured


@dataclass(frozen=True)
class DynamicRow:
    tau: int
    r_star: int
    path: float
    measured: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.measured


def adaptive_profile(
    trace: RunTrace,
    windows,
    stride_divisor: int = 2,
    oracle_resolution: float = 1e-3,
    bound=None,
    exhaustive: bool = False,
    oracle: BestFixedOracle | None = None,
) -> list[AdaptiveRow]:
    """Worst interval regret per window length.

    ``bound`` maps ``tau`` to the guarantee; by default the Smoothed OGD
    adaptive bound for the trace's ``(lambda, G, D, T)``.
    """
    if exhaustive and trace.T > EXHAUSTIVE_MAX_T:
        raise ValueError(f"exhaustive mode is limited to T <= {EXHAUSTIVE_MAX_T}, got T={trace.T}")
    if bound is None:
        def bound(tau):
            return thm2_bound(tau, trace.lam, trace.G, trace.D, trace.T)
    oracle = _oracle_for(trace, oracle_resolution, oracle)
    rows = []
    for tau in windows:
        tau = int(tau)
        if not 1 <= tau <= trace.T:
            raise ValueError(f"window {tau} outside [1, T={trace.T}]")
        starts = range(1, trace.T - tau + 2) if exhaustive else strided_starts(trace.T, tau, stride_divisor)
        best_r, best_v = None, -math.inf
        for r in starts:
            v = interval_regret(trace, r, r + tau - 1, oracle=oracle)
            if v > best_v:
                best_r, best_v = r, v
        rows.append(AdaptiveRow(tau, best_r, best_v, float(bound(tau)), oracle.slack(tau)))
    return rows


def _comparator_array(comparators, trace: RunTrace) -> np.ndarray:
    u = getattr(comparators, "targets", comparators)
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    if u.shape != trace.targets.shape:
        raise ValueError(f"comparator shape {u.shape} does not match {trace.targets.shape}")
    if np.any(np.linalg.norm(u - trace.domain.center, axis=1) > trace.domain.radius + 1e-9):
        raise ValueError("comparator leaves the domain")
    return u


def dynamic_regret(trace: RunTrace, comparators, r: int, s: int):
    """Returns ``(regret, path)`` against a comparator sequence ``u_1..u_T``.

    The comparator path over ``[r, s]`` is ``sum_{t=r}^{s-1} ||u_t - u_{t+1}||``;
    the edge to ``u_{s+1}`` is treated as zero.
    """
    trace._check(r, s)
    u = _comparator_array(comparators, trace)
    seg = slice(r - 1, s)
    comp_loss = trace.G * float(np.linalg.norm(u[seg] - trace.targets[seg], axis=1).sum())
    path = float(np.linalg.norm(np.diff(u[seg], axis=0), axis=1).sum())
    return trace.hitting_cost(r, s) + switching_cost(trace, r, s) - comp_loss, path


def dynamic_profile(trace: RunTrace, comparators, windows, stride_divisor: int = 2, bound=None) -> list[DynamicRow]:
    """Per window length, the start with the smallest margin to ``bound(tau, path)``."""
    if bound is None:
        def bound(tau, path):
            return thm3_bound(tau, trace.lam, trace.G, trace.D, trace.T, path)
    u = _comparator_array(comparators, trace)
    G = trace.G
    cum_comp = np.concatenate(([0.0], np.cumsum(G * np.linalg.norm(u - trace.targets, axis=1))))
    cum_path = np.concatenate(([0.0], np.cumsum(np.linalg.norm(np.diff(u, axis=0), axis=1))))
    rows = []
    for tau in windows:
        tau = int(tau)
        if not 1 <= tau <= trace.T:
            raise ValueError(f"window {tau} outside [1, T={trace.T}]")
        worst = None
        for r in strided_starts(trace.T, tau, stride_divisor):
            s = r + tau - 1
            comp = float(cum_comp[s] - cum_comp[r - 1])
            path = float(cum_path[s - 1] - cum_path[r - 1])
            measured = trace.hitting_cost(r, s) + switching_cost(trace, r, s) - comp
            row = DynamicRow(tau, r, path, measured, float(bound(tau, path)))
            if worst is None or row.margin < worst.margin:
                worst = row
        rows.append(worst)
    return rows
