import math

import numpy as np
import pytest

from dnpsoco.environments import drift_targets, piecewise_targets
from dnpsoco.evaluation import (
    BestFixedOracle,
    RunTrace,
    adaptive_profile,
    best_fixed_oracle,
    dynamic_profile,
    dynamic_regret,
    interval_regret,
    oracle_slack,
    strided_starts,
    switching_cost,
)
from dnpsoco.oco import BallDomain
from dnpsoco.smoothed_ogd import build_stack, make_schedule, thm2_bound, thm3_bound


def trace_1d(preds, targets, lam=1.0, G=1.0, D=2.0):
    return RunTrace.from_targets(np.array(preds, float)[:, None], np.array(targets, float)[:, None], lam, G, D)


class TestRunTrace:
    def test_lengths(self):
        with pytest.raises(ValueError, match="T\\+1"):
            RunTrace(np.zeros((3, 1)), np.zeros(3), np.zeros((3, 1)), 1.0, 1.0, 2.0)
        with pytest.raises(ValueError, match="targets"):
            RunTrace(np.zeros((4, 1)), np.zeros(3), np.zeros((2, 1)), 1.0, 1.0, 2.0)

    def test_index_bounds(self):
        t = trace_1d([0, 0, 0], [0, 0])
        for r, s in [(0, 1), (2, 1), (1, 3)]:
            with pytest.raises(IndexError):
                t.hitting_cost(r, s)


class TestSwitchingCost:
    def test_constant(self):
        assert switching_cost(trace_1d([0.3] * 5, [0.0] * 4, lam=3.0), 1, 4) == 0.0

    def test_lambda_zero(self):
        assert switching_cost(trace_1d([0, 1, 0, 1], [0, 0, 0], lam=0.0), 1, 3) == 0.0

    def test_forward_example(self):
        assert switching_cost(trace_1d([0, 1, 0], [0, 0]), 1, 2) == 2.0
        assert switching_cost(trace_1d([0, 1, 0], [0, 0]), 2, 2) == 1.0

    def test_weights(self):
        t = trace_1d([0, 0.5, 0.5], [0, 0], lam=2.0, G=3.0, D=2.0)
        assert switching_cost(t, 1, 2) == pytest.approx(3.0)


class TestOracle:
    def test_identical_targets(self):
        dom = BallDomain.unit(2)
        c = np.array([0.31, -0.42])
        pt, val = best_fixed_oracle(np.tile(c, (20, 1)), 1, 20, dom, 1e-2)
        assert np.linalg.norm(pt - c) <= 1e-3 * math.sqrt(2)
        assert val <= oracle_slack(1.0, 20, 1e-2, 2)

    def test_symmetric_pair(self):
        a = 0.37
        cs = np.array([[-a], [a]] * 6)
        pt, val = best_fixed_oracle(cs, 1, 12, BallDomain.unit(1), 1e-3)
        assert -a <= pt[0] <= a
        assert val == pytest.approx(2 * a * 6, abs=1e-12)

    def test_one_dimensional_median(self):
        dom = BallDomain.unit(1)
        cs = piecewise_targets(300, 30, dom, seed=4).targets
        o = BestFixedOracle(cs, dom, 1.0, 1e-3)
        for r, s in [(1, 300), (17, 130), (250, 251)]:
            _, val = o(r, s)
            exact = float(np.abs(cs[r - 1:s, 0] - np.median(cs[r - 1:s, 0])).sum())
            assert exact - 1e-12 <= val <= exact + o.slack(s - r + 1)

    def test_triangle_against_fine_grid(self):
        dom = BallDomain.unit(2)
        tri = np.array([[0.5, 0.1], [-0.4, 0.6], [0.0, -0.7]])
        res = 0.05
        _, val = best_fixed_oracle(tri, 1, 3, dom, res)
        fine = 0.0005
        ax = np.arange(-1, 1 + fine / 2, fine)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        inside = X ** 2 + Y ** 2 <= 1
        P = np.stack([X[inside], Y[inside]], axis=1)
        ref = np.linalg.norm(P[:, None, :] - tri[None], axis=2).sum(axis=1).min()
        slack = oracle_slack(1.0, 3, res, 2)
        assert abs(val - ref) <= slack
        assert val >= ref - oracle_slack(1.0, 3, fine, 2)

    def test_weighted_gradient_scale(self):
        dom = BallDomain.unit(1)
        cs = np.array([[0.2], [0.9], [-0.5]])
        _, v1 = best_fixed_oracle(cs, 1, 3, dom, 1e-3, G=1.0)
        _, v3 = best_fixed_oracle(cs, 1, 3, dom, 1e-3, G=3.0)
        assert v3 == pytest.approx(3 * v1, rel=1e-12)

    def test_dimension_limit(self):
        with pytest.raises(ValueError, match="dimension"):
            BestFixedOracle(np.zeros((2, 3)), BallDomain.unit(3))

    def test_cache(self):
        dom = BallDomain.unit(1)
        o = BestFixedOracle(np.array([[0.1], [0.2]]), dom)
        assert o(1, 2) is o(1, 2)

    def test_sandwich(self):
        dom = BallDomain.unit(2)
        cs = drift_targets(200, 4.0, dom, seed=6).targets
        preds = np.vstack([np.zeros((1, 2)), cs])
        tr = RunTrace.from_targets(preds, cs, 1.0, 1.0, 2.0)
        eps = 0.04
        coarse = BestFixedOracle(cs, dom, 1.0, eps)
        finer = BestFixedOracle(cs, dom, 1.0, eps / 10)
        for r, s in [(1, 200), (30, 90), (150, 151)]:
            a = interval_regret(tr, r, s, oracle=coarse)
            b = interval_regret(tr, r, s, oracle=finer)
            assert abs(a - b) <= coarse.slack(s - r + 1)


class TestIntervalRegret:
    def test_stationary_optimal_play(self):
        tr = trace_1d([0.4] * 11, [0.4] * 10)
        assert interval_regret(tr, 1, 10, 1e-3) <= oracle_slack(1.0, 10, 1e-3, 1)

    def test_hand_trace(self):
        # targets 1, 1, -1; plays 0, 0.5, 1, then w_4 = 0.5; lambda = 2
        tr = trace_1d([0.0, 0.5, 1.0, 0.5], [1.0, 1.0, -1.0], lam=2.0)
        # hitting 1 + 0.5 + 2 = 3.5; switching 2 (0.5+0.5+0.5) = 3; best fixed point value 2
        assert tr.hitting_cost(1, 3) == 3.5
        assert switching_cost(tr, 1, 3) == 3.0
        assert interval_regret(tr, 1, 3, 1e-3) == pytest.approx(4.5, abs=1e-12)
        assert interval_regret(tr, 2, 3, 1e-3) == pytest.approx(0.5 + 2 + 2 * 1.0 - 2.0, abs=1e-12)

    def test_lambda_zero_is_plain_regret(self):
        tr = trace_1d([0.0, 0.5, 1.0, 0.5], [1.0, 1.0, -1.0], lam=0.0)
        assert interval_regret(tr, 1, 3, 1e-3) == pytest.approx(1.5, abs=1e-12)


@pytest.fixture(scope="module")
def small_run():
    T = 512
    dom = BallDomain.unit(1)
    sched = piecewise_targets(T, 6, dom, seed=3)
    st = build_stack(make_schedule(T, lam=1.0), dom)
    preds = st.run(sched.losses())
    return RunTrace.from_targets(preds, sched.targets, 1.0, 1.0, 2.0), sched


class TestAdaptiveProfile:
    def test_strided_starts(self):
        assert list(strided_starts(10, 4, 1)) == [1, 5]
        assert list(strided_starts(10, 4, 2)) == [1, 3, 5, 7]
        assert list(strided_starts(10, 10, 2)) == [1]
        assert list(strided_starts(10, 1, 2)) == list(range(1, 11))

    def test_full_window_is_single_interval(self, small_run):
        tr, _ = small_run
        (row,) = adaptive_profile(tr, [tr.T], oracle_resolution=1e-3)
        assert row.r_star == 1
        assert row.measured == pytest.approx(interval_regret(tr, 1, tr.T, 1e-3), abs=1e-12)
        assert row.bound == thm2_bound(tr.T, 1.0, 1.0, 2.0, tr.T)
        assert row.margin == row.bound - row.measured

    def test_strided_below_exhaustive(self, small_run):
        tr, _ = small_run
        oracle = BestFixedOracle(tr.targets, tr.domain, 1.0, 1e-3)
        windows = [8, 16, 32, 64, 128]
        strided = adaptive_profile(tr, windows, oracle=oracle)
        full = adaptive_profile(tr, windows, exhaustive=True, oracle=oracle)
        for a, b in zip(strided, full):
            assert a.measured <= b.measured
            # neighbouring starts differ by at most tau/2 rounds of cost each way
            assert b.measured - a.measured <= (a.tau // 2) * 2 * (1 + 1.0) * 2.0 + 1e-9
            assert b.margin >= 0

    def test_exhaustive_limit(self):
        tr = trace_1d(np.zeros(600), np.zeros(599))
        with pytest.raises(ValueError, match="512"):
            adaptive_profile(tr, [8], exhaustive=True)

    def test_window_range(self, small_run):
        with pytest.raises(ValueError):
            adaptive_profile(small_run[0], [0])


class TestDynamic:
    def test_comparator_equals_predictions(self, small_run):
        tr, _ = small_run
        reg, _ = dynamic_regret(tr, tr.predictions[:-1], 1, tr.T)
        assert reg == pytest.approx(switching_cost(tr, 1, tr.T), abs=1e-9)

    def test_constant_comparator(self, small_run):
        tr, _ = small_run
        o = BestFixedOracle(tr.targets, tr.domain, 1.0, 1e-3)
        pt, _ = o(40, 200)
        reg, path = dynamic_regret(tr, np.tile(pt, (tr.T, 1)), 40, 200)
        assert path == 0.0
        assert reg == pytest.approx(interval_regret(tr, 40, 200, oracle=o), abs=1e-9)

    def test_targets_as_comparators(self, small_run):
        tr, sched = small_run
        reg, path = dynamic_regret(tr, sched, 1, tr.T)
        assert reg == pytest.approx(tr.hitting_cost(1, tr.T) + switching_cost(tr, 1, tr.T), abs=1e-12)
        assert path == pytest.approx(sched.path_length(), abs=1e-12)

    def test_edge_convention(self):
        tr = trace_1d([0, 0, 0, 0], [0.0, 0.5, -0.5])
        _, p12 = dynamic_regret(tr, tr.targets, 1, 2)
        _, p33 = dynamic_regret(tr, tr.targets, 3, 3)
        assert p12 == 0.5 and p33 == 0.0

    def test_comparator_must_stay_inside(self, small_run):
        tr, _ = small_run
        with pytest.raises(ValueError, match="domain"):
            dynamic_regret(tr, np.full((tr.T, 1), 1.5), 1, 2)

    def test_profile(self, small_run):
        tr, sched = small_run
        rows = dynamic_profile(tr, sched, [16, 512])
        assert [r.tau for r in rows] == [16, 512]
        last = rows[-1]
        assert last.r_star == 1 and last.path == pytest.approx(sched.path_length(), abs=1e-12)
        assert last.bound == thm3_bound(512, 1.0, 1.0, 2.0, 512, last.path)
        for r in rows:
            reg, path = dynamic_regret(tr, sched, r.r_star, r.r_star + r.tau - 1)
            assert r.measured == pytest.approx(reg, abs=1e-9) and r.path == pytest.approx(path, abs=1e-12)
            assert r.margin >= 0
