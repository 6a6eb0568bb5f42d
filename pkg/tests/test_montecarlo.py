import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fdhetnet.association import AssociationScheme, Direction
from fdhetnet.errors import ParameterError
from fdhetnet.montecarlo import (OperatingPoint, SimPlan, default_workers, estimate_rates,
                                 expected_log1p_exp, run_drops, validate_bound)
from fdhetnet.network import link_stats, table_one


@pytest.fixture(scope="module")
def small_run():
    plan = SimPlan(table_one(10.0), trials=600, seed=11,
                   points=(OperatingPoint(0.0, 1e-8, 1e-5), OperatingPoint(1.0, 1e-8, 1e-5)))
    return plan, run_drops(plan)


class TestConditionalMean:
    @pytest.mark.parametrize("a", [1e-6, 1e-2, 0.7, 5.0, 80.0, 1e4])
    def test_matches_quadrature(self, a):
        assert float(expected_log1p_exp(np.array([a]))[0]) == pytest.approx(oracles.expected_log1p_exp_quad(a), rel=1e-10)

    def test_unit(self):
        assert float(expected_log1p_exp(np.array([1.0]))[0]) == pytest.approx(0.596347362323194, rel=1e-12)

    @given(st.floats(1e-8, 1e6))
    @settings(max_examples=100, deadline=None)
    def test_below_jensen(self, a):
        # E[log(1 + aH)] <= log(1 + a)
        assert float(expected_log1p_exp(np.array([a]))[0]) <= np.log1p(a) * (1 + 1e-12)


class TestRuns:
    def test_shapes(self, small_run):
        plan, out = small_run
        assert out.dl.shape == (600, 2) and out.ul.shape == (600, 2)
        assert np.all(out.dl >= 0) and np.all(out.ul >= 0)

    def test_deterministic(self, small_run):
        plan, out = small_run
        again = run_drops(SimPlan(plan.config, trials=250, seed=11, points=plan.points))
        np.testing.assert_array_equal(again.dl, out.dl[:250])

    def test_worker_count_irrelevant(self):
        plan = SimPlan(table_one(10.0), trials=120, seed=3, chunk=40)
        a, b = run_drops(plan, workers=1), run_drops(plan, workers=2)
        np.testing.assert_array_equal(a.dl, b.dl)
        np.testing.assert_array_equal(a.ul, b.ul)

    def test_nu_lowers_rates(self, small_run):
        _, out = small_run
        # common random numbers: the nu = 1 column is pathwise no larger
        assert np.all(out.dl[:, 1] <= out.dl[:, 0] + 1e-12)
        assert np.all(out.ul[:, 1] <= out.ul[:, 0] + 1e-12)

    def test_bound_domination(self, small_run):
        plan, out = small_run
        for r in validate_bound(plan, output=out):
            assert r["estimate"] >= r["bound"] - r["ci"]

    def test_negative_control(self, small_run):
        plan, out = small_run
        # nu = 1 estimates against nu = 0 bounds must not pass on the downlink
        rows = validate_bound(plan, output=out, bound_nu=0.0)
        assert any(r["verdict"] == "FAIL" for r in rows if r["nu"] == 1.0 and r["direction"] == "downlink")

    def test_association_statistics(self, small_run):
        plan, out = small_run
        st_ = link_stats(plan.config)
        assert out.assoc_dl_tier[0] == pytest.approx(st_.dl[0].theta, abs=0.06)
        assert out.nonvoid_dl[1] == pytest.approx(st_.dl[1].rho, abs=0.03)

    def test_result_ci(self, small_run):
        _, out = small_run
        r = out.result(Direction.UPLINK, 0)
        assert r.method == "monte_carlo" and r.ci_halfwidth > 0

    def test_droa_runs(self):
        plan = SimPlan(table_one(10.0, scheme=AssociationScheme("droa", "droa")), trials=60, seed=2)
        dl, ul = estimate_rates(plan)
        assert dl.value > 0 and ul.value > 0


class TestValidation:
    def test_bad_trials(self):
        with pytest.raises(ParameterError):
            SimPlan(table_one(10.0), trials=0)

    def test_bad_user_mode(self):
        with pytest.raises(ParameterError):
            SimPlan(table_one(10.0), user_interference="grid")

    def test_point_range(self):
        with pytest.raises(ParameterError):
            OperatingPoint(1.5, 0.0, 0.0)

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("FDHETNET_THREADS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("FDHETNET_THREADS", "many")
        with pytest.raises(ParameterError):
            default_workers()
