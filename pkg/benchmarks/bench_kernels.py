"""Time the hot kernels under both backends.

Each backend runs in its own interpreter because the selection flag is read at
import time. JIT compilation is excluded by a warm-up call.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from dnpsoco import _accel, kernels
from dnpsoco.dnp_core import make_params
from dnpsoco.environments import SplitMix64, adversarial_bits

repeat = int(sys.argv[1])
p = make_params(4096, 1 / 4096)
bits = adversarial_bits("blocks", 100_000, 0.5, param=3000).bits
probe = np.linspace(-10.0, p.u + 10.0, 100_000)
rng = SplitMix64(1)
grid = 2 * rng.uniform(2 * 7850).reshape(-1, 2) - 1
targets = 2 * rng.uniform(2 * 64).reshape(-1, 2) - 1

cases = {
    "run_dnp (T=1e5)": lambda: kernels.run_dnp(bits, p.n, p.zeta, p.u, True, 0.0),
    "confidence_array (1e5)": lambda: kernels.confidence_array(probe, p.n, p.zeta, p.u),
    "grid_distance_sums (7850x64)": lambda: kernels.grid_distance_sums(grid, targets, 1.0),
}
out = {"backend": _accel.BACKEND, "times": {}}
for name, fn in cases.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out["times"][name] = best
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("DNPSOCO_DISABLE_NUMBA", None)
    if disable:
        env["DNPSOCO_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of count per kernel")
    args = ap.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'kernel':<30} {fast['backend']:>12} {slow['backend']:>12} {'speedup':>9}")
    for name, t_fast in fast["times"].items():
        t_slow = slow["times"][name]
        print(f"{name:<30} {t_fast * 1e3:10.2f}ms {t_slow * 1e3:10.2f}ms {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
