import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fdhetnet.association import (AssociationScheme, Candidates, Direction, Scheme, TierParams, associate,
                                  association_values, bias_law, effective_intensity, gain_ratio_law,
                                  max_assoc_cdf, tier_stats)
from fdhetnet.errors import NoCandidateError, ParameterError
from fdhetnet.marks import constant, exponential

TIERS = (TierParams(40.0, 1.0), TierParams(1.0, 10.0))


class TestBias:
    def test_mdroa(self):
        assert bias_law(TIERS[0], Scheme.MDROA, Direction.DOWNLINK).value == pytest.approx(40.0)
        assert bias_law(TIERS[0], Scheme.MDROA, Direction.UPLINK).value == pytest.approx(1.0)

    def test_nba(self):
        assert bias_law(TIERS[0], Scheme.NBA, Direction.DOWNLINK).value == 1.0

    def test_droa_is_instantaneous(self):
        b = bias_law(TIERS[0], Scheme.DROA, Direction.DOWNLINK)
        assert b.kind == "exponential" and b.mean == pytest.approx(40.0)

    def test_gua_needs_biases(self):
        with pytest.raises(ParameterError):
            bias_law(TIERS[0], Scheme.GUA, Direction.DOWNLINK)

    def test_droa_gain_ratio_is_deterministic(self):
        h = gain_ratio_law(TIERS[0], Scheme.DROA, Direction.DOWNLINK)
        assert h.kind == "constant" and h.value == pytest.approx(1 / 40.0)


class TestStatistics:
    def test_table_one_theta(self):
        st_ = tier_stats(TIERS, 500.0, 4.0, Direction.DOWNLINK)
        th1 = np.sqrt(40.0) / (np.sqrt(40.0) + 10.0)
        assert st_[0].theta == pytest.approx(th1, rel=1e-12)
        assert sum(s.theta for s in st_) == pytest.approx(1.0)

    def test_theta_lambda2_five(self):
        tiers = (TierParams(40.0, 1.0), TierParams(1.0, 5.0))
        assert tier_stats(tiers, 500.0, 4.0, "downlink")[0].theta == pytest.approx(0.558481559887747, rel=1e-12)

    def test_rho_unit_load(self):
        # L = 1 with zeta = 3.5: 1 - (1 + 1/3.5)^-3.5
        tiers = (TierParams(1.0, 2.0),)
        s = tier_stats(tiers, 2.0, 4.0, "downlink", Scheme.NBA)[0]
        assert s.load == pytest.approx(1.0)
        assert s.rho == pytest.approx(0.5850513490191336, rel=1e-12)

    def test_full_load(self):
        s = tier_stats(TIERS, np.inf, 4.0, "uplink")
        assert all(x.rho == 1.0 for x in s)

    def test_matches_oracle_formula(self):
        for d in ("downlink", "uplink"):
            s = tier_stats(TIERS, 500.0, 4.0, d)
            np.testing.assert_allclose([x.theta for x in s], oracles.theta_formula([40, 1], [1, 10], 4.0, "mdroa", d))
            np.testing.assert_allclose([x.rho for x in s], oracles.rho_formula([40, 1], [1, 10], 4.0, 500.0, "mdroa", d))

    @given(st.floats(0.0, 1e4), st.floats(0.1, 50.0))
    @settings(max_examples=80, deadline=None)
    def test_rho_monotone_in_users(self, mu, lam2):
        tiers = (TierParams(40.0, 1.0), TierParams(1.0, lam2))
        a = tier_stats(tiers, mu, 4.0, "downlink")
        b = tier_stats(tiers, 2 * mu + 1, 4.0, "downlink")
        for x, y in zip(a, b):
            assert 0.0 <= x.rho <= y.rho <= 1.0

    def test_cdf_is_cdf(self):
        x = np.logspace(-2, 6, 50)
        F = max_assoc_cdf(x, TIERS, 4.0, "downlink")
        assert np.all(np.diff(F) >= 0) and F[0] < 1e-3 and F[-1] > 0.9

    def test_cdf_empirical(self):
        _, best = oracles.association_drops([40, 1], [1, 10], 4.0, 4000, seed=5)
        x = np.sort(best)
        F = max_assoc_cdf(x, TIERS, 4.0, "downlink")
        ks = np.max(np.maximum(np.arange(1, x.size + 1) / x.size - F, F - np.arange(x.size) / x.size))
        assert ks < 1.63 / np.sqrt(x.size)  # 1% Kolmogorov critical value

    def test_effective_intensity(self):
        np.testing.assert_allclose(effective_intensity(TIERS, 4.0, "downlink", Scheme.MDROA),
                                   [np.sqrt(40.0), 10.0])

    def test_negative_mu(self):
        with pytest.raises(ParameterError):
            tier_stats(TIERS, -1.0, 4.0, "downlink")


class TestRealizationRules:
    def cands(self):
        return Candidates(tier=[0, 1, 1], dist=[2.0, 0.8, 1.5], gain_dl=[1.0, 0.1, 3.0], gain_ul=[0.2, 0.1, 3.0])

    def test_nba_picks_nearest(self):
        assert associate(self.cands(), TIERS, 4.0, Scheme.NBA, "downlink") == 1

    def test_mdroa_downlink_prefers_power(self):
        # 40 * 2^-4 = 2.5 > 1 * 0.8^-4 = 2.44
        assert associate(self.cands(), TIERS, 4.0, Scheme.MDROA, "downlink") == 0

    def test_droa_uses_gains(self):
        c = self.cands()
        # 40 * 1 * 2^-4 = 2.5 beats 3 * 1.5^-4 = 0.59 on the downlink
        assert associate(c, TIERS, 4.0, Scheme.DROA, "downlink") == 0
        assert associate(c, TIERS, 4.0, Scheme.DROA, "uplink") == 2

    def test_values(self):
        v = association_values(self.cands(), TIERS, 4.0, Scheme.MDROA, "uplink")
        np.testing.assert_allclose(v, np.array([2.0, 0.8, 1.5]) ** -4.0)

    def test_empty(self):
        with pytest.raises(NoCandidateError):
            associate(Candidates([], [], []), TIERS, 4.0, Scheme.NBA, "downlink")

    def test_ties_go_to_nearer(self):
        c = Candidates(tier=[0, 1], dist=[2.0, 1.0], gain_dl=[1.0, 1.0])
        tiers = (TierParams(16.0, 1.0), TierParams(1.0, 1.0))
        assert associate(c, tiers, 4.0, Scheme.MDROA, "downlink") == 1

    @given(st.integers(1, 8), st.integers(0, 10_000))
    @settings(max_examples=200, deadline=None)
    def test_droa_equals_rate_argmax(self, n, seed):
        rng = np.random.default_rng(seed)
        tier = rng.integers(0, 2, n)
        d = rng.uniform(0.05, 3.0, n)
        H, Hb = rng.exponential(1.0, n), rng.exponential(1.0, n)
        P = np.array([40.0, 1.0])[tier]
        want_dl, want_ul = oracles.droa_bruteforce(P, d, H, Hb, 4.0, rng=rng)
        c = Candidates(tier=tier, dist=d, gain_dl=H, gain_ul=Hb)
        assert associate(c, TIERS, 4.0, Scheme.DROA, "downlink") == want_dl
        assert associate(c, TIERS, 4.0, Scheme.DROA, "uplink") == want_ul


class TestSchemeContainer:
    def test_coupled_flag(self):
        assert AssociationScheme(Scheme.COUPLED_MROA, Scheme.COUPLED_MROA).coupled
        assert not AssociationScheme().coupled

    def test_string_schemes(self):
        s = AssociationScheme("nba", "droa")
        assert s.for_direction("uplink") is Scheme.DROA

    def test_tier_validation(self):
        with pytest.raises(ParameterError):
            TierParams(0.0, 1.0)
        with pytest.raises(ParameterError):
            TierParams(1.0, 1.0, fading=constant(0.0))

    def test_exponential_default(self):
        assert TierParams(1.0, 1.0).fading == exponential()
