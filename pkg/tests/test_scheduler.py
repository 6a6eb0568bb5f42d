import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fdhetnet.errors import CoefficientUndefinedError, ParameterError
from fdhetnet.network import table_one
from fdhetnet.region import RateCurve, branch_point
from fdhetnet.scheduler import (ArrivalSpec, Mode, Policy, QueuePairState, ServiceRates, drift_estimate,
                                lyapunov, lyapunov_coefficients, mann_kendall, simulate, stability_verdict,
                                step, sum_rate_experiment)

RATES = ServiceRates(1.2, 0.3, 1.5, 0.35)


@pytest.fixture(scope="module")
def curve():
    return RateCurve(table_one(10.0))


class TestStep:
    @given(st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=40, deadline=None)
    def test_modes_match_oracle(self, q_dl, q_ul):
        rng = np.random.default_rng(0)
        s = QueuePairState(q_dl, q_ul)
        _, m = step(s, Policy.DOWNLINK_OPPORTUNISTIC, RATES, ArrivalSpec(0.0, 0.0), rng)
        assert m.name == oracles.downlink_policy_mode(q_dl, q_ul)
        _, m = step(s, Policy.UPLINK_OPPORTUNISTIC, RATES, ArrivalSpec(0.0, 0.0), rng)
        assert m.name == oracles.uplink_policy_mode(q_dl, q_ul)

    def test_fd_slot_ends_at_first_completion(self):
        s = QueuePairState(2, 2)
        new, m = step(s, Policy.DOWNLINK_OPPORTUNISTIC, RATES, ArrivalSpec(0.0, 0.0), np.random.default_rng(0))
        assert m is Mode.FD
        assert new.time == pytest.approx(1 / 1.2)
        assert (new.q_dl, new.q_ul) == (1, 2)
        assert new.res_ul == pytest.approx(1 - 0.3 / 1.2)

    def test_pure_fd_single_direction(self):
        _, m = step(QueuePairState(0, 1), Policy.PURE_FD, RATES, ArrivalSpec(0.0, 0.0), np.random.default_rng(0))
        assert m is Mode.FD_UL_ONLY

    def test_pure_hd_share(self):
        rng = np.random.default_rng(1)
        modes = [step(QueuePairState(3, 3), Policy.PURE_HD, RATES, ArrivalSpec(0, 0), rng, theta=0.75)[1]
                 for _ in range(4000)]
        assert np.mean([m is Mode.HD_DL for m in modes]) == pytest.approx(0.75, abs=0.025)

    def test_negative_queue(self):
        with pytest.raises(ParameterError):
            QueuePairState(-1, 0)


class TestRates:
    def test_validation(self):
        with pytest.raises(ParameterError):
            ServiceRates(2.0, 0.3, 1.5, 0.35)
        with pytest.raises(ParameterError):
            ServiceRates(0.0, 0.3, 1.5, 0.35)
        with pytest.raises(ParameterError):
            ArrivalSpec(-0.1, 0.0)

    def test_lyapunov(self):
        v_dl, v_ul = lyapunov_coefficients(RATES)
        assert v_dl == pytest.approx(1.2 / 0.3) and v_ul == pytest.approx(0.3 / 0.05)
        assert lyapunov(QueuePairState(2, 3), RATES) == pytest.approx(v_dl * 4 + v_ul * 9 + 12)

    def test_lyapunov_undefined(self):
        with pytest.raises(CoefficientUndefinedError):
            lyapunov_coefficients(ServiceRates(1.0, 0.3, 1.0, 0.35))


class TestSimulate:
    def test_deterministic(self):
        a = simulate(ArrivalSpec(0.5, 0.1), Policy.DOWNLINK_OPPORTUNISTIC, RATES, 5000, 4)
        b = simulate(ArrivalSpec(0.5, 0.1), Policy.DOWNLINK_OPPORTUNISTIC, RATES, 5000, 4)
        np.testing.assert_array_equal(a.q_dl, b.q_dl)
        assert a.to_csv(100) == b.to_csv(100)

    def test_saturated_throughput_is_frontier(self, curve):
        # saturated downlink, uplink arrivals at nu C_ul: throughput is D(nu)
        nu = 0.5
        dl, ul = curve(nu)
        r = ServiceRates(dl, ul, curve.hd_dl, curve.hd_ul)
        tr = simulate(ArrivalSpec(0.0, nu * ul), Policy.DOWNLINK_OPPORTUNISTIC, r, 200_000, 1,
                      initial=(10 ** 6, 0))
        pu, pd = branch_point(curve, nu)
        assert tr.throughput[0] == pytest.approx(pd, rel=0.01)
        assert tr.throughput[1] == pytest.approx(pu, rel=0.03)

    def test_bad_horizon(self):
        with pytest.raises(ParameterError):
            simulate(ArrivalSpec(0.1, 0.1), 0, RATES, 0, 0)

    def test_csv(self):
        tr = simulate(ArrivalSpec(0.5, 0.1), 0, RATES, 100, 0)
        lines = tr.to_csv(10).split("\n")
        assert lines[0].startswith("slot,time [slot units],q_dl [packets]")
        assert len(lines) == 12  # header, 10 rows, trailing newline


class TestTrend:
    def test_mann_kendall_increasing(self):
        S, z, p = mann_kendall(np.arange(30.0))
        assert S == 435 and p < 1e-6

    def test_mann_kendall_calibrated(self):
        # one-sided test: about 5% of trendless series fall below p = 0.05
        rng = np.random.default_rng(0)
        ps = np.array([mann_kendall(rng.normal(size=50))[2] for _ in range(2000)])
        assert np.mean(ps < 0.05) == pytest.approx(0.05, abs=0.015)

    def test_mann_kendall_ties(self):
        S, z, p = mann_kendall(np.ones(10))
        assert S == 0 and p == 1.0

    def test_too_short(self):
        with pytest.raises(ParameterError):
            mann_kendall([1.0, 2.0])

    def test_verdicts(self, curve):
        dl, ul = curve(0.5)
        r = ServiceRates(dl, ul, curve.hd_dl, curve.hd_ul)
        pu, pd = branch_point(curve, 0.5)
        stable = simulate(ArrivalSpec(0.8 * pd, 0.8 * pu), 0, r, 200_000, 0)
        unstable = simulate(ArrivalSpec(1.2 * pd, 1.2 * pu), 0, r, 200_000, 0)
        assert stability_verdict(stable).stable
        assert not stability_verdict(unstable).stable


class TestDrift:
    @pytest.mark.parametrize("case", [1, 2])
    def test_negative_inside_region(self, curve, case):
        nu = 0.5
        dl, ul = curve(nu)
        r = ServiceRates(dl, ul, curve.hd_dl, curve.hd_ul)
        pu, pd = branch_point(curve, nu)
        mean, ci = drift_estimate(r, ArrivalSpec(0.9 * pd, 0.9 * pu), case)
        assert mean + ci < 0

    def test_bad_case(self):
        with pytest.raises(ParameterError):
            drift_estimate(RATES, ArrivalSpec(0.1, 0.1), 4)


class TestSumRates:
    def test_rows(self, curve):
        rows = sum_rate_experiment(curve, "downlink", [0.0, 1.0])
        d = {(p, nu): v for p, nu, v in rows}
        assert d[("opportunistic", 0.0)] == pytest.approx(curve.hd_dl)
        assert d[("opportunistic", 1.0)] == pytest.approx(d[("pure_FD", 1.0)])
        assert d[("pure_HD", 0.0)] == pytest.approx(0.75 * curve.hd_dl + 0.25 * curve.hd_ul)

    def test_bad_mix(self, curve):
        with pytest.raises(ParameterError):
            sum_rate_experiment(curve, "both")
