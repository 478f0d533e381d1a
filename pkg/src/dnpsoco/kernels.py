"""Hot numeric loops.

Every kernel here is written in the numba-compatible subset of Python and is
compiled with ``@njit`` unless the accelerator is disabled (see ``_accel``).
The grid oracle additionally has a vectorized numpy path, because its
uncompiled loop form is far too slow to be useful.

Scalar kernels take the DNP configuration unpacked as ``(n, zeta, u)`` so
they can be called from compiled code.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, jit

__all__ = [
    "g_tilde",
    "confidence",
    "confidence_array",
    "run_dnp",
    "grid_distance_sums",
]


@jit
def g_tilde(x, n, zeta):
    guard = 8.0 * math.sqrt(n * math.log(1.0 / zeta))
    # beyond the guard the value is already >= 1 and gets clipped downstream
    if x > guard:
        x = guard
    elif x < -guard:
        x = -guard
    q = x * x / (16.0 * n)
    if q > 700.0:
        # exp(q) alone would overflow; fold Z into the exponent
        return math.sqrt(n / 8.0) * math.erf(x / math.sqrt(8.0 * n)) * math.exp(min(q - math.log(1.0 / zeta), 700.0))
    return math.sqrt(n / 8.0) * zeta * math.erf(x / math.sqrt(8.0 * n)) * math.exp(q)


@jit
def confidence(x, n, zeta, u):
    if x <= 0.0:
        return 0.0
    if x >= u:
        return 1.0
    v = g_tilde(x, n, zeta)
    if v > 1.0:
        return 1.0
    if v < 0.0:
        return 0.0
    return v


@jit
def confidence_array(xs, n, zeta, u):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = confidence(xs[i], n, zeta, u)
    return out


@jit
def run_dnp(bits, n, zeta, u, conservative, x0):
    """Drive one DNP machine over ``bits``.

    Returns ``(xs, shrunk)``: ``xs`` has ``len(bits) + 1`` deviations starting
    at ``x0``; ``shrunk[t]`` is True where the conservative rule ignored the
    bit and only discounted.
    """
    rho = 1.0 - 1.0 / n
    T = bits.shape[0]
    xs = np.empty(T + 1)
    shrunk = np.zeros(T, dtype=np.bool_)
    x = x0
    xs[0] = x
    for t in range(T):
        b = bits[t]
        if not conservative:
            x = rho * x + b
        elif (0.0 <= x <= u) or (x < 0.0 and b > 0.0) or (x > u and b < 0.0):
            x = rho * x + b
        else:
            x = rho * x
            shrunk[t] = True
        xs[t + 1] = x
    return xs, shrunk


@jit
def _grid_distance_sums_loop(grid, targets, weights, G):
    m, d = grid.shape
    k = targets.shape[0]
    out = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for j in range(k):
            sq = 0.0
            for c in range(d):
                diff = grid[i, c] - targets[j, c]
                sq += diff * diff
            acc += weights[j] * math.sqrt(sq)
        out[i] = G * acc
    return out


def _grid_distance_sums_numpy(grid, targets, weights, G, chunk=1 << 22):
    m = grid.shape[0]
    k = targets.shape[0]
    out = np.empty(m)
    rows = max(1, chunk // max(k, 1))
    for start in range(0, m, rows):
        block = grid[start:start + rows]
        dist = np.sqrt(((block[:, None, :] - targets[None, :, :]) ** 2).sum(axis=2))
        out[start:start + rows] = G * (dist @ weights)
    return out


def grid_distance_sums(grid, targets, G, weights=None):
    """``G * sum_j weights[j] ||grid[i] - targets[j]||`` for every grid row ``i``."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if weights is None:
        weights = np.ones(targets.shape[0])
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if USE_NUMBA:
        return _grid_distance_sums_loop(grid, targets, weights, float(G))
    return _grid_distance_sums_numpy(grid, targets, weights, float(G))
