"""Seeded synthetic adversaries.

Randomness comes from SplitMix64, which is fully specified by:

    state_k = seed + k * 0x9E3779B97F4A7C15          (mod 2^64, k = 1, 2, ...)
    z = state_k
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9          (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB          (mod 2^64)
    out_k = z ^ (z >> 31)

A uniform double in [0, 1) is ``(out_k >> 11) * 2^-53``. ``split()`` seeds a
child generator with the parent's next output. Any language can reproduce
these streams bit for bit.

Uniform points in a ball are drawn by rejection from the bounding cube, one
coordinate per draw. Unit directions are rejection samples from the unit ball
(norm >= 1e-6) rescaled to length 1; in one dimension a single draw picks the
sign (``u < 0.5`` is negative).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .csvio import CsvFormatError, read_table, write_rows
from .oco import BallDomain, LossRecord

__all__ = [
    "SplitMix64",
    "TargetSchedule",
    "BitStream",
    "distance_loss",
    "piecewise_targets",
    "drift_targets",
    "adversarial_bits",
]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) & _MASK)
        self._count = 0

    def next_u64(self, count: int) -> np.ndarray:
        k = np.arange(self._count + 1, self._count + count + 1, dtype=np.uint64)
        self._count += count
        with np.errstate(over="ignore"):
            z = self._seed + k * _GAMMA
            z = (z ^ (z >> np.uint64(30))) * _M1
            z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))

    def uniform(self, count: int | None = None):
        u = (self.next_u64(1 if count is None else count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return float(u[0]) if count is None else u

    def split(self) -> "SplitMix64":
        return SplitMix64(int(self.next_u64(1)[0]))

    def in_ball(self, dom: BallDomain) -> np.ndarray:
        while True:
            v = 2.0 * self.uniform(dom.dim) - 1.0
            if float(v @ v) <= 1.0:
                return dom.center + dom.radius * v

    def direction(self, dim: int) -> np.ndarray:
        if dim == 1:
            return np.array([-1.0 if self.uniform() < 0.5 else 1.0])
        while True:
            v = 2.0 * self.uniform(dim) - 1.0
            nrm = math.sqrt(float(v @ v))
            if 1e-6 <= nrm <= 1.0:
                return v / nrm


def distance_loss(target, G: float = 1.0) -> LossRecord:
    """``f(w) = G ||w - target||``; the subgradient at the kink is zero."""
    c = np.array(target, dtype=np.float64)

    def value_at(w):
        return G * float(np.linalg.norm(np.asarray(w) - c))

    def gradient_at(w):
        off = np.asarray(w, dtype=np.float64) - c
        nrm = float(np.linalg.norm(off))
        if nrm == 0.0:
            return np.zeros_like(off)
        return (G / nrm) * off

    return LossRecord(value_at=value_at, gradient_at=gradient_at, min_value=0.0)


@dataclass(frozen=True)
class TargetSchedule:
    targets: np.ndarray  # (T, d)
    kind: str  # "piecewise" | "drift" | "replay"
    param: float  # segment count or path budget
    seed: int
    domain: BallDomain = field(compare=False)

    @property
    def T(self) -> int:
        return self.targets.shape[0]

    @property
    def dim(self) -> int:
        return self.targets.shape[1]

    def losses(self, G: float = 1.0):
        return [distance_loss(c, G) for c in self.targets]

    def path_length(self, r: int = 1, s: int | None = None) -> float:
        """``sum_{t=r}^{s-1} ||c_t - c_{t+1}||`` (1-indexed)."""
        s = self.T if s is None else s
        seg = self.targets[r - 1:s]
        return float(np.linalg.norm(np.diff(seg, axis=0), axis=1).sum())

    def to_csv(self, path):
        d = self.dim
        header = ["t"] + [f"c_{i + 1}" for i in range(d)]
        return write_rows(path, header, ([t + 1, *row] for t, row in enumerate(self.targets)))

    @classmethod
    def from_csv(cls, path, domain: BallDomain) -> "TargetSchedule":
        header, rows = read_table(path, required=["t"])
        cols = [h for h in header if h.startswith("c_")]
        if not cols or header != ["t"] + [f"c_{i + 1}" for i in range(len(cols))]:
            raise CsvFormatError(path, 1, "expected columns t, c_1..c_d")
        if len(cols) != domain.dim:
            raise CsvFormatError(path, 1, f"dimension {len(cols)} does not match domain dimension {domain.dim}")
        out = []
        for i, row in enumerate(rows):
            if None in row:
                raise CsvFormatError(path, i + 2, "empty cell")
            if int(row[0]) != i + 1:
                raise CsvFormatError(path, i + 2, f"expected t={i + 1}, got {row[0]!r}")
            c = np.array(row[1:])
            if not domain.contains(c, tol=1e-9):
                raise CsvFormatError(path, i + 2, "target outside the domain")
            out.append(c)
        if not out:
            raise CsvFormatError(path, 2, "no data rows")
        return cls(np.array(out), "replay", float("nan"), 0, domain)


def piecewise_targets(T: int, segments: int, domain: BallDomain, seed: int) -> TargetSchedule:
    """Targets constant on ``segments`` contiguous blocks ending at ``ceil(j T / segments)``."""
    if not 1 <= segments <= T:
        raise ValueError(f"need 1 <= segments <= T, got segments={segments}, T={T}")
    rng = SplitMix64(seed)
    targets = np.empty((T, domain.dim))
    start = 0
    for j in range(1, segments + 1):
        end = -(-j * T // segments)
        targets[start:end] = rng.in_ball(domain)
        start = end
    return TargetSchedule(targets, "piecewise", float(segments), int(seed), domain)


def _reflect(dom: BallDomain, p: np.ndarray) -> np.ndarray:
    off = p - dom.center
    r = float(np.linalg.norm(off))
    if r <= dom.radius:
        return p
    q = dom.center + off * ((2.0 * dom.radius - r) / r)
    if not dom.contains(q, tol=0.0):
        # step longer than the diameter; fall back to the nearest point
        qo = q - dom.center
        q = dom.center + qo * (dom.radius / float(np.linalg.norm(qo)))
    return q


def drift_targets(T: int, path_budget: float, domain: BallDomain, seed: int) -> TargetSchedule:
    """Random walk with fixed step ``path_budget/(T-1)``, reflected into the ball.

    Reflection never lengthens a step, so the realized path length is at most
    the budget.
    """
    if path_budget < 0:
        raise ValueError("path budget must be nonnegative")
    if T < 1:
        raise ValueError("T must be positive")
    rng = SplitMix64(seed)
    targets = np.empty((T, domain.dim))
    targets[0] = rng.in_ball(domain)
    step = path_budget / (T - 1) if T > 1 else 0.0
    for t in range(1, T):
        if step == 0.0:
            targets[t] = targets[t - 1]
            continue
        targets[t] = _reflect(domain, targets[t - 1] + step * rng.direction(domain.dim))
    return TargetSchedule(targets, "drift", float(path_budget), int(seed), domain)


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    kind: str  # "alternating" | "biased" | "blocks"
    param: float
    mu: float
    seed: int

    @property
    def T(self) -> int:
        return self.bits.shape[0]


def adversarial_bits(kind: str, T: int, mu: float = 1.0, seed: int = 0, param: float | None = None) -> BitStream:
    """Bit streams of magnitude ``mu``.

    ``alternating``: +mu, -mu, ...; ``biased``: +mu with probability ``param``;
    ``blocks``: sign flips every ``param`` rounds, starting positive.
    """
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu!r}")
    if T < 1:
        raise ValueError("stream length must be positive")
    t = np.arange(T)
    if kind == "alternating":
        bits = np.where(t % 2 == 0, mu, -mu)
        param = float("nan")
    elif kind == "biased":
        p = 0.5 if param is None else float(param)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"bias must lie in [0, 1], got {p!r}")
        bits = np.where(SplitMix64(seed).uniform(T) < p, mu, -mu)
        param = p
    elif kind == "blocks":
        length = int(T if param is None else param)
        if length < 1:
            raise ValueError("block length must be >= 1")
        bits = np.where((t // length) % 2 == 0, mu, -mu)
        param = float(length)
    else:
        raise ValueError(f"unknown bit stream kind {kind!r}")
    return BitStream(bits.astype(np.float64), kind, param, float(mu), int(seed))
