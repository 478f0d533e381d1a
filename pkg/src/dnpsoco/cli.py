"""Command-line experiment driver.

    dnpsoco bitpred --env blocks --horizon 100000 --dnp-n 4096 --mu 0.5 --out runs/bits
    dnpsoco soco    --env piecewise --segments 4 --horizon 4096 --lambda 1 --out runs/soco
    dnpsoco eval    --horizon 4096 --lambda 1 --out runs/soco

Exit status: 0 when every proved bound holds, 1 on a bound violation,
2 on a configuration or input error.
"""

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bit_predictor import Mode, per_step_change_bound, run_stream, thm1_reward_bound
from .csvio import CsvFormatError, read_table, write_rows
from .dnp_core import make_params
from .environments import SplitMix64, TargetSchedule, adversarial_bits, drift_targets, piecewise_targets
from .evaluation import BestFixedOracle, RunTrace, adaptive_profile, dynamic_profile
from .oco import BallDomain
from .smoothed_ogd import ScheduleError, SmoothedOGD, make_schedule

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

BIT_ENVS = ("alternating", "biased", "blocks")
SOCO_ENVS = ("piecewise", "drift")

RANGE_TOL = 1e-12
REWARD_TOL = 1e-9
CHANGE_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    horizon: int
    lam: float = 1.0
    zeta: float | None = None
    G: float = 1.0
    D: float = 2.0
    dim: int = 1
    env: str = "piecewise"
    segments: int = 4
    path_budget: float = 1.0
    mu: float = 1.0
    bias: float = 0.5
    block_len: int | None = None
    dnp_n: float | None = None
    intervals: int = 1000
    seed: int = 0
    windows: str = "dyadic"
    grid_res: float | None = None
    stride_divisor: int = 2
    out: Path = Path("out")
    inp: Path | None = None

    @property
    def domain(self) -> BallDomain:
        return BallDomain.unit(self.dim, self.D / 2.0)

    @property
    def resolution(self) -> float:
        if self.grid_res is not None:
            return self.grid_res
        return 1e-3 if self.dim == 1 else 2e-2

    def window_list(self, T: int) -> list[int]:
        if self.windows == "dyadic":
            ws = [1 << k for k in range(3, 64) if (1 << k) <= T]
            return ws or [T]
        try:
            ws = [int(w) for w in self.windows.split(",") if w.strip()]
        except ValueError:
            raise ConfigError(f"--windows must be 'dyadic' or a comma list of integers, got {self.windows!r}") from None
        bad = [w for w in ws if not 1 <= w <= T]
        if bad or not ws:
            raise ConfigError(f"windows {bad or ws} outside [1, T={T}]")
        return ws

    def validate(self, command: str) -> None:
        if self.horizon < 1:
            raise ConfigError(f"--horizon must be positive, got {self.horizon}")
        if self.lam < 0:
            raise ConfigError(f"--lambda must be nonnegative, got {self.lam}")
        if self.G <= 0 or self.D <= 0:
            raise ConfigError("--G and --diameter must be positive")
        if self.stride_divisor < 1:
            raise ConfigError("--stride-divisor must be >= 1")
        if command == "bitpred":
            if self.env not in BIT_ENVS:
                raise ConfigError(f"bitpred needs --env in {BIT_ENVS}, got {self.env!r}")
            if not 0 < self.mu <= 1:
                raise ConfigError(f"--mu must lie in (0, 1], got {self.mu}")
            if self.intervals < 1:
                raise ConfigError("--intervals must be >= 1")
        else:
            if self.dim not in (1, 2):
                raise ConfigError(f"--dim must be 1 or 2 (grid oracle limit), got {self.dim}")
            if command == "soco" and self.env not in SOCO_ENVS:
                raise ConfigError(f"soco needs --env in {SOCO_ENVS}, got {self.env!r}")
            if self.resolution <= 0:
                raise ConfigError("--grid-res must be positive")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--horizon", type=int, required=True, help="number of rounds T")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0, help="switching-cost weight")
    common.add_argument("--zeta", type=float, default=None, help="DNP parameter Z (default 1/T, or 1/n for bitpred)")
    common.add_argument("--G", dest="G", type=float, default=1.0, help="gradient bound")
    common.add_argument("--diameter", dest="D", type=float, default=2.0, help="domain diameter")
    common.add_argument("--dim", type=int, default=1)
    common.add_argument("--env", default=None)
    common.add_argument("--segments", type=int, default=4)
    common.add_argument("--path-budget", type=float, default=1.0)
    common.add_argument("--mu", type=float, default=1.0)
    common.add_argument("--bias", type=float, default=0.5, help="P(+mu) for --env biased")
    common.add_argument("--block-len", type=int, default=None, help="run length for --env blocks (default T)")
    common.add_argument("--dnp-n", type=float, default=None, help="DNP horizon n for bitpred (default T)")
    common.add_argument("--intervals", type=int, default=1000, help="random intervals checked by bitpred")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--windows", default="dyadic")
    common.add_argument("--grid-res", type=float, default=None)
    common.add_argument("--stride-divisor", type=int, default=2)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--in", dest="inp", type=Path, default=None, help="eval input directory (default --out)")

    p = argparse.ArgumentParser(prog="dnpsoco", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("bitpred", parents=[common], help="run DNP-cu on a bit stream and check the reward bound")
    sub.add_parser("soco", parents=[common], help="run Smoothed OGD on a synthetic environment")
    sub.add_parser("eval", parents=[common], help="evaluate a saved trace against the regret bounds")
    return p


def _config(ns) -> ExperimentConfig:
    fields = {k: v for k, v in vars(ns).items() if k != "command"}
    if fields["env"] is None:
        fields["env"] = "blocks" if ns.command == "bitpred" else "piecewise"
    return ExperimentConfig(**fields)


def cmd_bitpred(cfg: ExperimentConfig) -> int:
    T = cfg.horizon
    n = float(cfg.dnp_n if cfg.dnp_n is not None else T)
    zeta = cfg.zeta if cfg.zeta is not None else 1.0 / n
    try:
        p = make_params(n, zeta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    param = {"biased": cfg.bias, "blocks": cfg.block_len}.get(cfg.env)
    stream = adversarial_bits(cfg.env, T, cfg.mu, cfg.seed, param)
    run = run_stream(p, stream.bits, Mode.CONSERVATIVE, cfg.mu)
    rewards = run.rewards()
    dg = np.abs(np.diff(run.g))

    out = Path(cfg.out)
    write_rows(
        out / "rounds.csv",
        ["t", "b_t", "x_t", "g_t", "dg_t", "reward_t"],
        ((t + 1, stream.bits[t], run.xs[t], run.g[t], dg[t], rewards[t]) for t in range(T)),
    )

    cum_r = np.concatenate(([0.0], np.cumsum(rewards)))
    cum_b = np.concatenate(([0.0], np.cumsum(stream.bits)))
    rng = SplitMix64(cfg.seed).split()
    rs = 1 + (rng.uniform(cfg.intervals) * T).astype(np.int64)
    us = rng.uniform(cfg.intervals)
    rows, worst = [], math.inf
    for r, u in zip(rs.tolist(), us.tolist()):
        s = r + int(u * (T - r + 1))
        tau = s - r + 1
        measured = float(cum_r[s] - cum_r[r - 1])
        bound = thm1_reward_bound(p, cfg.mu, tau, float(cum_b[s] - cum_b[r - 1]), from_start=(r == 1))
        rows.append((r, s, tau, measured, bound, measured - bound))
        worst = min(worst, measured - bound)
    write_rows(out / "intervals.csv", ["r", "s", "tau", "reward", "bound", "margin"], rows)

    change_cap = per_step_change_bound(p, cfg.mu)
    range_ok = bool(np.all(run.xs >= -cfg.mu - RANGE_TOL) and np.all(run.xs <= p.u + cfg.mu + RANGE_TOL))
    change_ok = float(dg.max()) <= change_cap + CHANGE_TOL
    reward_ok = worst >= -REWARD_TOL
    print(f"n={p.n:g} zeta={p.zeta:.6g} U={p.u:.10g} mu={cfg.mu:g} T={T}")
    print(f"range    [{run.xs.min():.6g}, {run.xs.max():.6g}] within [-mu, U+mu]: {'ok' if range_ok else 'VIOLATED'}")
    print(f"change   max {dg.max():.6g} <= {change_cap:.6g}: {'ok' if change_ok else 'VIOLATED'}")
    print(f"reward   min margin {worst:.6g} over {cfg.intervals} intervals: {'ok' if reward_ok else 'VIOLATED'}")
    return EXIT_OK if (range_ok and change_ok and reward_ok) else EXIT_VIOLATION


def _targets(cfg: ExperimentConfig) -> TargetSchedule:
    if cfg.env == "piecewise":
        if not 1 <= cfg.segments <= cfg.horizon:
            raise ConfigError(f"--segments must lie in [1, T], got {cfg.segments}")
        return piecewise_targets(cfg.horizon, cfg.segments, cfg.domain, cfg.seed)
    if cfg.path_budget < 0:
        raise ConfigError("--path-budget must be nonnegative")
    return drift_targets(cfg.horizon, cfg.path_budget, cfg.domain, cfg.seed)


def cmd_soco(cfg: ExperimentConfig) -> int:
    try:
        sched = make_schedule(cfg.horizon, cfg.lam, cfg.zeta, cfg.G, cfg.D)
    except ScheduleError as exc:
        raise ConfigError(f"{exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    env = _targets(cfg)
    stack = SmoothedOGD(sched, cfg.domain)
    preds = stack.run(env.losses(cfg.G))
    trace = RunTrace.from_targets(preds, env.targets, cfg.lam, cfg.G, cfg.D, cfg.domain)

    out = Path(cfg.out)
    d = cfg.dim
    rows = []
    for t in range(cfg.horizon + 1):
        last = t == cfg.horizon
        rows.append([t + 1, *preds[t], None if last else trace.loss_values[t], None if last else trace.switch_norms[t]])
    write_rows(out / "trace.csv", ["t", *[f"w_{i + 1}" for i in range(d)], "loss", "switch"], rows)
    env.to_csv(out / "targets.csv")
    write_rows(out / "schedule.csv", ["i", "n_i", "eta_i"], ((i + 1, n, eta) for i, (n, eta) in enumerate(sched.levels)))
    print(f"T={sched.T} lambda={sched.lam:g} zeta={sched.zeta:.6g} K={sched.K}")
    print(f"total hitting {trace.loss_values.sum():.6g}  total switch {cfg.lam * cfg.G * trace.switch_norms.sum():.6g}")
    return EXIT_OK


def _read_trace(path: Path, dim: int):
    header, rows = read_table(path, required=["t", "loss", "switch"])
    expect = ["t", *[f"w_{i + 1}" for i in range(dim)], "loss", "switch"]
    if header != expect:
        raise CsvFormatError(path, 1, f"expected columns {expect}, got {header}")
    if len(rows) < 2:
        raise CsvFormatError(path, len(rows) + 1, "need at least two rows")
    preds, losses = [], []
    for i, row in enumerate(rows):
        lineno = i + 2
        if row[0] is None or int(row[0]) != i + 1:
            raise CsvFormatError(path, lineno, f"expected t={i + 1}")
        w = row[1:1 + dim]
        if None in w:
            raise CsvFormatError(path, lineno, "empty coordinate")
        preds.append(w)
        last = i == len(rows) - 1
        if not last:
            if row[-2] is None or row[-1] is None:
                raise CsvFormatError(path, lineno, "empty loss or switch cell")
            losses.append(row[-2])
    return np.array(preds), np.array(losses)


def cmd_eval(cfg: ExperimentConfig) -> int:
    src = Path(cfg.inp if cfg.inp is not None else cfg.out)
    domain = cfg.domain
    preds, losses = _read_trace(src / "trace.csv", cfg.dim)
    env = TargetSchedule.from_csv(src / "targets.csv", domain)
    T = env.T
    if losses.shape[0] != T:
        raise CsvFormatError(src / "trace.csv", losses.shape[0] + 2, f"trace has {losses.shape[0]} rounds, targets have {T}")
    if T < 3:
        raise ConfigError("evaluation needs T >= 3")
    trace = RunTrace(preds, losses, env.targets, cfg.lam, cfg.G, cfg.D, domain)
    windows = cfg.window_list(T)
    oracle = BestFixedOracle(env.targets, domain, cfg.G, cfg.resolution)

    adaptive = adaptive_profile(trace, windows, cfg.stride_divisor, oracle=oracle)
    dyn_windows = windows if T in windows else [*windows, T]
    dynamic = dynamic_profile(trace, env, dyn_windows, cfg.stride_divisor)

    out = Path(cfg.out)
    write_rows(
        out / "report_adaptive.csv",
        ["tau", "r_star", "measured", "bound", "margin"],
        ((r.tau, r.r_star, r.measured, r.bound, r.margin) for r in adaptive),
    )
    write_rows(
        out / "report_dynamic.csv",
        ["tau", "r_star", "path", "measured", "bound", "margin"],
        ((r.tau, r.r_star, r.path, r.measured, r.bound, r.margin) for r in dynamic),
    )
    ok = True
    for r in adaptive:
        flag = "ok" if r.margin >= 0 else "VIOLATED"
        ok &= r.margin >= 0
        print(f"adaptive tau={r.tau:<6d} r*={r.r_star:<6d} regret={r.measured:12.6g} bound={r.bound:12.6g} {flag}")
    for r in dynamic:
        flag = "ok" if r.margin >= 0 else "VIOLATED"
        ok &= r.margin >= 0
        print(f"dynamic  tau={r.tau:<6d} r*={r.r_star:<6d} path={r.path:10.4g} regret={r.measured:12.6g} bound={r.bound:12.6g} {flag}")
    return EXIT_OK if ok else EXIT_VIOLATION


COMMANDS = {"bitpred": cmd_bitpred, "soco": cmd_soco, "eval": cmd_eval}


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    cfg = _config(ns)
    try:
        cfg.validate(ns.command)
        return COMMANDS[ns.command](cfg)
    except (ConfigError, CsvFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
