"""Confidence function of the Discounted-Normal-Predictor.

The deviation-to-confidence map is

    g~(x) = sqrt(n/8) * Z * erf(x / sqrt(8 n)) * exp(x^2 / (16 n))
    g(x)  = clip(g~(x), 0, 1)

and ``U(n)`` is the point where ``g~`` reaches 1. Logarithms are natural.
"""

import math
from dataclasses import dataclass

from . import kernels

__all__ = [
    "DnpParams",
    "erf",
    "g_tilde",
    "confidence",
    "make_params",
    "threshold_upper_bound",
    "max_slope",
]

_INV_E = math.exp(-1.0)


def erf(x: float) -> float:
    """Standard error function ``2/sqrt(pi) * int_0^x exp(-s^2) ds``."""
    return math.erf(x)


@dataclass(frozen=True)
class DnpParams:
    """Configuration of one confidence function.

    Attributes
    ----------
    n : float
        Effective horizon. Real valued.
    zeta : float
        The small-loss parameter ``Z`` in ``(0, 1/e]``.
    rho : float
        Discount ``1 - 1/n``.
    u : float
        Threshold ``U(n)`` with ``g~(u) = 1``.
    """

    n: float
    zeta: float
    rho: float
    u: float

    @property
    def log_inv_zeta(self) -> float:
        return math.log(1.0 / self.zeta)


def g_tilde(x: float, p: DnpParams) -> float:
    """Unclipped confidence. Odd, increasing, saturates past a guard point."""
    return kernels.g_tilde(float(x), p.n, p.zeta)


def confidence(x: float, p: DnpParams) -> float:
    """``g~(x)`` clipped to ``[0, 1]``."""
    return kernels.confidence(float(x), p.n, p.zeta, p.u)


def threshold_upper_bound(n: float, zeta: float) -> float:
    """``sqrt(16 n ln(1/Z))``, the guaranteed upper end of ``U(n)``."""
    return math.sqrt(16.0 * n * math.log(1.0 / zeta))


def _check_params(n: float, zeta: float) -> None:
    if not (math.isfinite(n) and math.isfinite(zeta)):
        raise ValueError(f"n and zeta must be finite, got n={n!r}, zeta={zeta!r}")
    if not 0.0 < zeta:
        raise ValueError(f"zeta must be positive, got {zeta!r}")
    if zeta > _INV_E:
        raise ValueError(f"requires zeta <= 1/e, got zeta={zeta!r} > {_INV_E!r}")
    need_e = 8.0 * math.e
    need_z = 16.0 * math.log(1.0 / zeta)
    if n < need_e:
        raise ValueError(f"requires n >= 8e ({need_e:.6g}), got n={n!r}")
    if n < need_z:
        raise ValueError(f"requires n >= 16 ln(1/zeta) ({need_z:.6g}), got n={n!r}")


def make_params(n: float, zeta: float, xtol: float = 1e-12) -> DnpParams:
    """Validate ``(n, zeta)`` and solve ``g~(u) = 1`` by bisection.

    The bracket is ``[0, sqrt(16 n ln(1/Z))]``; bisection stops once the
    bracket is narrower than ``xtol`` or stops shrinking in floating point.
    """
    n = float(n)
    zeta = float(zeta)
    _check_params(n, zeta)
    lo = 0.0
    hi = threshold_upper_bound(n, zeta)
    if kernels.g_tilde(hi, n, zeta) < 1.0:
        raise ArithmeticError(f"g_tilde does not reach 1 on [0, {hi!r}] for n={n!r}, zeta={zeta!r}")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if kernels.g_tilde(mid, n, zeta) < 1.0:
            lo = mid
        else:
            hi = mid
    return DnpParams(n=n, zeta=zeta, rho=1.0 - 1.0 / n, u=hi)


def max_slope(p: DnpParams) -> float:
    """Largest derivative of the clipped confidence function.

    ``g'`` is nondecreasing on ``[0, U]`` and zero outside, so the maximum is
    the left derivative at ``U``:

        U g(U) / (8 n) + Z / (4 sqrt(pi)) * exp(-U^2 / (16 n))

    The second coefficient is ``Z/8`` times ``2/sqrt(pi)``, the normalization
    of the standard ``erf``.
    """
    u, n = p.u, p.n
    return u / (8.0 * n) + p.zeta / (4.0 * math.sqrt(math.pi)) * math.exp(-u * u / (16.0 * n))
