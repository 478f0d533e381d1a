import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnpsoco.dnp_core import (
    DnpParams,
    confidence,
    erf,
    g_tilde,
    make_params,
    max_slope,
    threshold_upper_bound,
)


def erf_series(x, terms=50):
    """Maclaurin series of erf, summed with math.fsum."""
    return 2.0 / math.sqrt(math.pi) * math.fsum(
        (-1) ** k * x ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1)) for k in range(terms)
    )


def raw_params(n, zeta):
    # bypasses validation; g_tilde does not read u
    return DnpParams(n=n, zeta=zeta, rho=1 - 1 / n, u=math.nan)


class TestErf:
    def test_zero(self):
        assert erf(0.0) == 0.0

    def test_odd(self):
        assert erf(-0.7) == -erf(0.7)

    def test_one_against_series(self):
        assert abs(erf(1.0) - erf_series(1.0)) <= 1e-12

    @pytest.mark.parametrize("x", np.linspace(-3, 3, 61))
    def test_series_agreement_on_core_range(self, x):
        assert abs(erf(x) - erf_series(x)) <= 1e-12

    def test_tail_against_mpmath(self):
        mpmath = pytest.importorskip("mpmath")
        for x in (3.5, 4.0, 5.5, 8.0, 27.0):
            assert abs(erf(x) - float(mpmath.erf(x))) <= 1e-12

    def test_monotone_and_bounded(self):
        xs = np.linspace(-6, 6, 2001)
        ys = np.array([erf(x) for x in xs])
        assert np.all(np.diff(ys) >= 0)
        assert np.all(np.abs(ys) <= 1)


class TestGTilde:
    def test_zero(self):
        assert g_tilde(0.0, raw_params(100, 0.1)) == 0.0

    def test_direct_formula_with_series_erf(self):
        n, z, x = 64.0, 0.01, 10.0
        direct = math.sqrt(n / 8) * z * erf_series(x / math.sqrt(8 * n)) * math.exp(x * x / (16 * n))
        assert abs(g_tilde(x, raw_params(n, z)) - direct) <= 1e-10
        # 40-digit evaluation of the same expression
        assert abs(g_tilde(x, raw_params(n, z)) - 0.014595846041552630728) <= 1e-15

    def test_equals_one_at_threshold(self):
        p = make_params(1024, 1 / 1024)
        assert abs(g_tilde(p.u, p) - 1.0) <= 1e-9

    @given(st.floats(0, 500), st.floats(1e-6, 1 / math.e))
    def test_odd(self, x, z):
        p = raw_params(512.0, z)
        assert g_tilde(-x, p) == -g_tilde(x, p)

    def test_strictly_increasing_below_guard(self):
        p = raw_params(256.0, 0.01)
        guard = 8 * math.sqrt(256 * math.log(100))
        xs = np.linspace(0, guard, 5000)
        ys = np.array([g_tilde(x, p) for x in xs])
        assert np.all(np.diff(ys) > 0)

    def test_overflow_guard(self):
        p = raw_params(100.0, 1e-200)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            big = g_tilde(1e6, p)
            small = g_tilde(-1e6, p)
        assert math.isfinite(big) and big >= 1.0
        assert small == -big


class TestConfidence:
    @pytest.fixture
    def p(self):
        return make_params(256, 0.01)

    def test_examples(self, p):
        assert confidence(0.0, p) == 0.0
        assert confidence(-5.0, p) == 0.0
        assert confidence(p.u + 1, p) == 1.0

    def test_saturation_probes(self, p):
        rng = random.Random(1)
        for _ in range(10_000):
            assert confidence(-rng.expovariate(0.01), p) == 0.0
            assert confidence(p.u + rng.expovariate(0.01), p) == 1.0

    @given(st.floats(-50, 400), st.floats(-50, 400))
    def test_monotone(self, x1, x2):
        p = make_params(256, 0.01)
        lo, hi = min(x1, x2), max(x1, x2)
        assert confidence(lo, p) <= confidence(hi, p)

    @pytest.mark.parametrize("n,z", [(256, 1 / math.e), (256, 1 / 256), (4096, 1 / math.e), (4096, 1 / 4096), (100, 0.01)])
    def test_slope_bound(self, n, z):
        p = make_params(n, z)
        h = 1e-6
        xs = np.linspace(-2.0, p.u + 2.0, 20_001)
        slopes = np.array([(confidence(x + h, p) - confidence(x - h, p)) / (2 * h) for x in xs])
        assert slopes.max() <= max_slope(p) + 1e-6
        # the maximum sits just below U
        just_below = (confidence(p.u - 1e-4, p) - confidence(p.u - 1e-4 - 2 * h, p)) / (2 * h)
        assert just_below == pytest.approx(max_slope(p), rel=1e-4)

    def test_slope_bound_matches_zeta_over_8_form_for_small_zeta(self):
        # with Z = 1/n the exp(-U^2/16n) factor absorbs the 2/sqrt(pi) constant
        for n in (256, 1024, 4096):
            p = make_params(n, 1 / n)
            assert max_slope(p) <= p.u / (8 * n) + p.zeta / 8


class TestMakeParams:
    def test_threshold_value(self):
        p = make_params(1024, 1 / math.e)
        assert p.u <= threshold_upper_bound(1024, 1 / math.e) == 128.0
        assert abs(g_tilde(p.u, p) - 1.0) <= 1e-9
        # 40-digit root of g_tilde(x) = 1
        assert p.u == pytest.approx(19.127506627742622752, abs=1e-11)

    def test_discount(self):
        assert make_params(100, 1 / math.e).rho == pytest.approx(0.99, abs=1e-15)

    def test_real_valued_n(self):
        p = make_params(300.5, 0.01)
        assert p.n == 300.5
        assert abs(g_tilde(p.u, p) - 1.0) <= 1e-9

    @pytest.mark.parametrize(
        "n,z,needle",
        [(1024, 0.5, "1/e"), (20, 0.3, "8e"), (100, 1e-3, "16 ln(1/zeta)"), (100, 0.0, "positive"), (100, -0.1, "positive")],
    )
    def test_rejections_name_the_inequality(self, n, z, needle):
        with pytest.raises(ValueError, match=needle.replace("(", r"\(").replace(")", r"\)")):
            make_params(n, z)

    def test_deterministic(self):
        a = make_params(777.0, 0.003)
        b = make_params(777.0, 0.003)
        assert a.u.hex() == b.u.hex()

    def test_random_valid_pairs(self):
        rng = random.Random(9)
        for _ in range(100):
            z = math.exp(-rng.uniform(1, 20))
            n = max(8 * math.e, 16 * math.log(1 / z)) * rng.uniform(1, 500)
            p = make_params(n, z)
            assert abs(g_tilde(p.u, p) - 1.0) <= 1e-9
            assert p.u <= threshold_upper_bound(n, z)
