import math

import numpy as np
import pytest

from gaussheat import (
    Ball,
    BiFractionalBM,
    BrownianMotion,
    Interval,
    OrnsteinUhlenbeck,
    PolySum,
    PowerLog,
    TimeChangedBM,
    borell_tis_tail,
    mu_closed_form,
    moment_condition_diag,
    predict_rhc,
    predict_shc_1d,
    predict_shc_multid,
    quasi_helix_mu_bounds,
    rhc_error_1d,
    scaled_covariance_diag,
    shc_upper_bound_multid,
    variance,
)
from gaussheat.errors import RangeError, UnsupportedTimeChange, ValidityError

UNIT = Interval(0.0, 1.0)
DISC = Ball.centered(2, 1.0)


class TestPredictRHC:
    def test_interval(self):
        p = predict_rhc(BrownianMotion(1.0), UNIT, 0.01)
        assert p.deficit_prediction == pytest.approx(2 * 0.1 / math.sqrt(2 * math.pi))
        assert p.deficit_prediction == pytest.approx(0.0797885, abs=5e-8)
        assert p.error_bound == pytest.approx(2 * 0.001 / math.sqrt(2 * math.pi) * math.exp(-50))
        assert p.error_bound == pytest.approx(1.54e-25, rel=0.005)

    def test_disc(self):
        p = predict_rhc(BrownianMotion(1.0), DISC, 1e-4)
        assert p.deficit_prediction == pytest.approx(0.0250663, abs=5e-8)
        assert p.error_bound is None

    def test_vanishing(self):
        p = [predict_rhc(BrownianMotion(), UNIT, t).deficit_prediction for t in (1e-2, 1e-6, 1e-10)]
        assert p[0] > p[1] > p[2] and p[2] < 1e-4

    @pytest.mark.parametrize("spec", [BrownianMotion(2.0), BiFractionalBM(0.75, 1.0),
                                      BiFractionalBM(0.3, 0.7), OrnsteinUhlenbeck(1.0),
                                      TimeChangedBM(PowerLog(1.5, 2.0))])
    def test_identity_error_bound(self, spec):
        for t in np.geomspace(1e-5, 1.0, 12):
            if variance(spec, t) > 0.25:
                continue
            err, log_err = rhc_error_1d(spec, UNIT, t)
            assert err >= 0 and math.isfinite(log_err)
            assert log_err <= predict_rhc(spec, UNIT, t).log_error_bound + 1e-12


class TestPredictSHC1D:
    def test_bound_formula(self):
        # sigma_t = 0.1 via BM(v=1) at t = 0.01
        p = predict_shc_1d(BrownianMotion(1.0), UNIT, 0.01, mu_t=0.05)
        first = 4 * 0.01 / 0.95 * math.exp(-0.5 * (0.95 / 0.1) ** 2)
        second = 4 * 0.01 / 0.45 * math.exp(-0.5 * (0.45 / 0.1) ** 2)
        assert p.deficit_prediction == pytest.approx(0.1)
        assert p.error_bound == pytest.approx(first + second, rel=1e-12)
        assert math.exp(-10.125) == pytest.approx(3.99e-5, rel=0.01)

    def test_bm(self):
        p = predict_shc_1d(BrownianMotion(2.0), UNIT, 1e-3)
        assert p.deficit_prediction == pytest.approx(0.0713650, abs=5e-8)
        assert p.validity["mu_below_half_length"]

    def test_boundary(self):
        p = predict_shc_1d(BrownianMotion(1.0), UNIT, 0.01, mu_t=0.5)
        assert not p.validity["mu_below_half_length"] and p.error_bound is None
        with pytest.raises(ValidityError):
            predict_shc_1d(BrownianMotion(1.0), UNIT, 0.01, mu_t=0.5, strict=True)

    def test_needs_mu(self):
        with pytest.raises(RangeError):
            predict_shc_1d(BiFractionalBM(0.75, 1.0), UNIT, 0.01)


class TestMultiD:
    def test_upper_bound(self):
        b = shc_upper_bound_multid(BrownianMotion(), DISC, 0.0, 0.25, 0.01, sigma_t_sq=1e-4)
        first = 2 ** 1.5 * 4 * 2 * math.pi * 0.01
        second = 8 * math.pi * 0.75 ** 2 * math.exp(-((0.25 / math.sqrt(2) - 0.01) ** 2) / 2e-4)
        assert b == pytest.approx(first + second, rel=1e-12)
        assert second < 1e-50

    def test_upper_bound_near_validity_edge(self):
        a = 0.25
        mu = a / math.sqrt(2) * (1 - 1e-9)
        b = shc_upper_bound_multid(BrownianMotion(), DISC, 0.0, a, mu, sigma_t_sq=1e-4)
        first = 2 ** 1.5 * 4 * 2 * math.pi * mu
        assert b - first == pytest.approx(8 * math.pi * 0.75 ** 2, rel=1e-6)

    @pytest.mark.parametrize("a,mu", [(0.6, 0.01), (0.25, 0.2)])
    def test_validity(self, a, mu):
        with pytest.raises(ValidityError):
            shc_upper_bound_multid(BrownianMotion(), DISC, 0.01, a, mu)

    def test_predict(self):
        p = predict_shc_multid(DISC, 0.01, 1.0)
        assert p.deficit_prediction == pytest.approx(0.0628319, abs=5e-8)
        assert p.limit_constant == pytest.approx(2 * math.pi)

    def test_consistent_with_1d(self):
        mu = mu_closed_form(BrownianMotion(2.0), 1e-3)
        assert predict_shc_multid(UNIT, mu, 1.0).deficit_prediction == pytest.approx(
            predict_shc_1d(BrownianMotion(2.0), UNIT, 1e-3).deficit_prediction)

    def test_classical_constant(self):
        t = 1e-4
        mu = mu_closed_form(BrownianMotion(2.0), t)
        p = predict_shc_multid(DISC, mu, 1.0)
        assert p.deficit_prediction == pytest.approx(4 * math.sqrt(math.pi * t))
        assert p.deficit_prediction == pytest.approx(0.0708982, abs=5e-8)
        assert p.deficit_prediction / math.sqrt(t) == pytest.approx(
            2 * 2 * math.pi / math.sqrt(math.pi))

    @pytest.mark.parametrize("sup_Y", [0.0, 1.01, -1.0])
    def test_sup_Y_range(self, sup_Y):
        with pytest.raises(RangeError):
            predict_shc_multid(DISC, 0.01, sup_Y)


class TestBorellTIS:
    def test_values(self):
        assert borell_tis_tail(1.0, 0.0, 1.0) == 1.0
        assert borell_tis_tail(3.0, 0.0, 1.0) == pytest.approx(0.022218, abs=5e-7)

    def test_errors(self):
        with pytest.raises(RangeError):
            borell_tis_tail(0.0, 0.0, 1.0)
        with pytest.raises(RangeError):
            borell_tis_tail(1.0, 0.0, 0.0)

    def test_exact_bm_tail_is_below(self):
        from oracles import bm_sup_tail

        mu = math.sqrt(2 / math.pi)
        for k in (1.0, 2.0, 3.0, 5.0):
            assert bm_sup_tail(mu + k, 1.0) <= borell_tis_tail(mu + k, mu, 1.0)


class TestWeakConvergence:
    def test_exact_self_similar(self):
        spec = TimeChangedBM(PolySum((1.0,), (2.0,)))
        for t in (0.5, 1e-3):
            m, lim = scaled_covariance_diag(spec, t, 0.3, 0.7)
            assert m == pytest.approx(lim, rel=1e-12)
            assert lim == pytest.approx(0.3 ** 2 * math.pi / 2)

    def test_power_log_improves(self):
        spec = TimeChangedBM(PowerLog(1.5, 2.0))
        gaps = []
        for t in (1e-3, 1e-5):
            m, lim = scaled_covariance_diag(spec, t, 0.5, 0.8)
            assert lim == pytest.approx(0.5 ** 1.5 * math.pi / 2)
            gaps.append(abs(m - lim))
        assert gaps[1] < gaps[0]

    def test_zero_argument(self):
        _, lim = scaled_covariance_diag(TimeChangedBM(PowerLog(1.5, 2.0)), 0.1, 0.0, 0.5)
        assert lim == 0.0

    def test_moment_linear(self):
        spec = TimeChangedBM(PolySum((1.0,), (1.0,)))
        lhs, rhs = moment_condition_diag(spec, 0.5, 0.1, 0.4, 0.9)
        assert lhs == pytest.approx(0.15 * math.pi ** 2 / 4)
        assert rhs == pytest.approx(0.64 * math.pi ** 2 / 4)

    def test_moment_degenerate(self):
        lhs, rhs = moment_condition_diag(TimeChangedBM(PowerLog(1.5, 2.0)), 0.1, 0.3, 0.3, 0.8)
        assert lhs == 0.0 and rhs > 0

    def test_moment_sweep_polysum(self):
        spec = TimeChangedBM(PolySum((1.0, 2.0), (0.5, 1.5)))
        rng = np.random.default_rng(3)
        for t in (1e-1, 1e-3):
            for _ in range(100):
                r, s, u = np.sort(rng.random(3))
                lhs, rhs = moment_condition_diag(spec, t, r, s, u)
                assert lhs <= rhs

    def test_needs_time_change(self):
        with pytest.raises(UnsupportedTimeChange):
            moment_condition_diag(BrownianMotion(), 0.1, 0.1, 0.2, 0.3)
        with pytest.raises(UnsupportedTimeChange):
            scaled_covariance_diag(BrownianMotion(), 0.1, 0.1, 0.2)


class TestQuasiHelix:
    def test_values(self):
        lo, hi = quasi_helix_mu_bounds(1, 1, 0.5, 0.5, 0.01)
        assert lo == pytest.approx(0.0282843, abs=5e-8)
        assert hi == pytest.approx(2.30517, abs=5e-6)

    def test_bm_inside(self):
        for t in (1e-4, 1e-2, 1.0):
            lo, hi = quasi_helix_mu_bounds(1, 1, 0.5, 0.5, t)
            assert lo <= math.sqrt(2 * t / math.pi) <= hi

    def test_ordering(self):
        for H in (0.1, 0.5, 0.9):
            lo, hi = quasi_helix_mu_bounds(0.5, 2.0, H, H, 0.3)
            assert lo <= hi

    def test_errors(self):
        with pytest.raises(RangeError):
            quasi_helix_mu_bounds(1, 1, 1.0, 0.5, 0.1)
