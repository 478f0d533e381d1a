"""Pairwise expert aggregation driven by a conservative DNP.

A round has two phases. ``point`` emits the convex combination of the two
experts' current points under the current weight. ``feed`` then advances both
experts, prices each one by hitting cost plus its own switching cost,
and turns the normalized cost gap into the meta machine's bit. The new
weight is the meta machine's next prediction.
"""

from dataclasses import dataclass, field

import numpy as np

from .bit_predictor import DnpState, cor1_scale, cor1_scaled_state
from .dnp_core import DnpParams
from .oco import Expert, LossRecord

__all__ = [
    "Combiner",
    "combine_point",
    "relative_loss_bit",
    "expert_cost",
    "combiner_round",
]

_RANGE_TOL = 1e-9


def combine_point(w1, w2, weight: float) -> np.ndarray:
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight!r}")
    return (1.0 - weight) * np.asarray(w1, dtype=np.float64) + weight * np.asarray(w2, dtype=np.float64)


def expert_cost(f_value: float, move_norm: float, lam: float, G: float) -> float:
    return f_value + lam * G * move_norm


def relative_loss_bit(l1: float, l2: float, M: float, G: float, D: float) -> float:
    """Cost gap scaled into ``[-1, 1]``.

    Both costs must lie in ``[0, (1+M) G D]``; a violation means an expert
    moved faster than the movement constant allows.
    """
    scale = (1.0 + M) * G * D
    for name, v in (("l1", l1), ("l2", l2)):
        if v < -_RANGE_TOL or v > scale + _RANGE_TOL:
            raise ValueError(f"{name}={v!r} outside [0, {scale!r}]; movement bound broken")
    return min(1.0, max(-1.0, (l1 - l2) / scale))


@dataclass
class Combiner:
    left: Expert
    right: Expert
    params: DnpParams
    lam: float
    G: float
    D: float
    M: float = 2.0
    record: bool = False
    meta: DnpState = field(init=False)
    weight: float = field(init=False)
    history: dict = field(init=False)

    def __post_init__(self):
        self.meta = cor1_scaled_state(self.params, self.lam)
        self.weight = self.meta.predict()
        self._scale = cor1_scale(self.lam)
        self.history = {"weight": [self.weight], "ell": [], "ell1": [], "ell2": [], "f1": [], "f2": []}

    @property
    def point(self) -> np.ndarray:
        return combine_point(self.left.point, self.right.point, self.weight)

    def feed(self, loss: LossRecord) -> None:
        p1 = np.array(self.left.point, copy=True)
        p2 = np.array(self.right.point, copy=True)
        f1 = loss.normalized(p1)
        f2 = loss.normalized(p2)
        self.left.feed(loss)
        self.right.feed(loss)
        l1 = expert_cost(f1, float(np.linalg.norm(p1 - self.left.point)), self.lam, self.G)
        l2 = expert_cost(f2, float(np.linalg.norm(p2 - self.right.point)), self.lam, self.G)
        ell = relative_loss_bit(l1, l2, self.M, self.G, self.D)
        self.meta.update(ell / self._scale)
        self.weight = self.meta.predict()
        if self.record:
            h = self.history
            h["weight"].append(self.weight)
            h["ell"].append(ell)
            h["ell1"].append(l1)
            h["ell2"].append(l2)
            h["f1"].append(f1)
            h["f2"].append(f2)


def combiner_round(c: Combiner, loss: LossRecord):
    """Play one round; returns the emitted point and the advanced combiner."""
    w = c.point
    c.feed(loss)
    return w, c
