import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from fgmcrm import (Exponential, FrequencyDistribution, Gamma, GridSeverity, Lognormal, MixedErlang, MomentError,
                    Pareto, quantile, tvar)
from fgmcrm.distributions import OrderStatisticLaw, mixed_erlang_order_masses


def brute_order_pmf(pmf, j):
    k = len(pmf)
    out = np.zeros(k)
    for a in range(k):
        for b in range(k):
            out[min(a, b) if j == 1 else max(a, b)] += pmf[a] * pmf[b]
    return out


class TestFrequency:
    def test_poisson_truncation_records_tail(self):
        f = FrequencyDistribution.poisson(3.0)
        assert f.pmf.sum() + f.tail_mass == pytest.approx(1.0, abs=1e-14)
        assert f.tail_mass <= 1e-12
        assert f.mean == pytest.approx(3.0)
        assert f.variance == pytest.approx(3.0)

    def test_negative_binomial_mean(self):
        f = FrequencyDistribution.negative_binomial(4, 0.1)
        assert f.mean == pytest.approx(36.0)
        assert f.quantile(0.5) == 33

    def test_geometric_parametrisation(self):
        f = FrequencyDistribution.geometric(10 / 11)
        assert f.pmf[0] == pytest.approx(10 / 11)
        assert f.mean == pytest.approx(0.1)

    def test_geometric_min_is_geometric(self):
        p = 0.3
        f = FrequencyDistribution.geometric(p)
        pair = f.order_stats()
        assert pair.min_law.name == "geometric"
        assert pair.min_law.params["p"] == pytest.approx(p * (2 - p))
        n = 40
        np.testing.assert_allclose(pair.min_law.pmf[:n], f.order_pmf(1)[:n], rtol=1e-12)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            FrequencyDistribution.poisson(-1.0)
        with pytest.raises(ValueError):
            FrequencyDistribution.negative_binomial(2, 1.5)
        with pytest.raises(ValueError):
            FrequencyDistribution.from_pmf([0.5, 0.6])

    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_order_pmf_matches_enumeration(self, w):
        pmf = np.asarray(w) / np.sum(w)
        f = FrequencyDistribution.from_pmf(pmf)
        for j in (1, 2):
            np.testing.assert_allclose(f.order_pmf(j), brute_order_pmf(pmf, j), atol=1e-14)
            n = np.arange(len(pmf))
            for m in (1, 2, 3):
                assert f.order_moment(j, m) == pytest.approx(n**m @ brute_order_pmf(pmf, j), abs=1e-12)

    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_ratio_matches_definition(self, w):
        pmf = np.asarray(w) / np.sum(w)
        f = FrequencyDistribution.from_pmf(pmf)
        n = np.arange(len(pmf))
        expected = (f.order_pmf(2) - f.order_pmf(1)) / pmf
        np.testing.assert_allclose(f.ratio(n), expected, atol=1e-10)
        assert np.all(f.ratio(n) >= -2 - 1e-12) and np.all(f.ratio(n) <= 2 + 1e-12)

    def test_pgf_and_moments(self):
        f = FrequencyDistribution.binomial(5, 0.3)
        assert f.pgf(1.0) == pytest.approx(1.0)
        assert f.pgf(0.5) == pytest.approx((0.7 + 0.3 * 0.5) ** 5)
        assert f.moment(3) == pytest.approx(stats.binom(5, 0.3).moment(3))

    def test_sampling_matches_law(self):
        f = FrequencyDistribution.poisson(2.0)
        x = f.sample(np.random.default_rng(0), 200_000)
        assert abs(x.mean() - 2.0) < 4 * math.sqrt(2.0 / 200_000)

    def test_tvar_discrete(self):
        f = FrequencyDistribution.from_pmf([0.5, 0.3, 0.2])
        assert f.quantile(0.6) == 1
        # tail above kappa = 0.9 sits entirely on 2
        assert f.tvar(0.9) == pytest.approx(2.0)


class TestSeverityOrderStatistics:
    @pytest.mark.parametrize("sev", [Exponential(20.0), Gamma(2.0, 0.001), Gamma(2.5, 0.1), Pareto(2.1, 2200.0),
                                     Pareto.from_mean(1.5, 20.0), Lognormal(20.0, 100.0)])
    def test_min_mean_by_quadrature(self, sev):
        direct = integrate.quad(lambda x: sev.sf(x) ** 2, 0, np.inf, limit=400)[0]
        assert sev.min_moment(1) == pytest.approx(direct, rel=1e-7)
        assert sev.min_moment(1) + sev.max_moment(1) == pytest.approx(2 * sev.moment(1), rel=1e-12)

    def test_exponential_closed_forms(self):
        x = Exponential(20.0)
        assert x.min_moment(1) == pytest.approx(10.0)
        assert x.max_moment(1) == pytest.approx(30.0)

    def test_pareto_spacing(self):
        p = Pareto.from_mean(1.5, 20.0)
        assert p.min_moment(1) == pytest.approx(5.0)
        assert p.max_moment(1) == pytest.approx(35.0)
        alpha, mu = 1.5, 20.0
        assert p.max_moment(1) - p.min_moment(1) == pytest.approx(mu * 2 * alpha / (2 * alpha - 1))

    def test_pareto_missing_moment(self):
        p = Pareto(2.1, 2200.0)
        p.moment(2)
        with pytest.raises(MomentError, match="does not exist"):
            p.moment(3)
        with pytest.raises(MomentError):
            Pareto(0.9, 1.0).stop_loss(1.0)

    def test_order_law_cdfs(self):
        sev = Gamma(2.5, 0.1)
        lo, hi = OrderStatisticLaw(sev, 1), OrderStatisticLaw(sev, 2)
        x = np.linspace(0, 80, 9)
        np.testing.assert_allclose(lo.sf(x), sev.sf(x) ** 2, rtol=1e-12)
        np.testing.assert_allclose(hi.cdf(x), sev.cdf(x) ** 2, rtol=1e-12)
        u = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(hi.cdf(hi._ppf(u)), u, rtol=1e-9)

    def test_lst_consistency(self):
        sev = Lognormal(20.0, 100.0)
        t = np.array([0.0, 0.01, 0.1])
        assert np.allclose(sev.min_lst(t) + sev.max_lst(t), 2 * sev.lst(t))
        assert sev.lst(0.05) == pytest.approx(integrate.quad(lambda x: np.exp(-0.05 * x) * sev.pdf(x), 0, np.inf)[0],
                                              rel=1e-8)


class TestMixedErlang:
    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), st.floats(0.05, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_order_masses_reproduce_sf_squared(self, w, rate):
        q = np.asarray(w) / np.sum(w)
        me = MixedErlang(rate, q)
        q1, q2 = mixed_erlang_order_masses(q)
        lo, hi = MixedErlang(2 * rate, q1), MixedErlang(2 * rate, q2)
        x = np.linspace(0, 20 / rate, 11)
        np.testing.assert_allclose(lo.sf(x), me.sf(x) ** 2, atol=1e-12)
        np.testing.assert_allclose(hi.cdf(x), me.cdf(x) ** 2, atol=1e-12)
        assert lo.moment(1) + hi.moment(1) == pytest.approx(2 * me.moment(1), rel=1e-10)

    def test_gamma_integer_shape_is_erlang(self):
        g = Gamma(4.0, 0.01)
        x = np.array([50.0, 400.0, 1000.0])
        np.testing.assert_allclose(g.as_mixed_erlang().cdf(x), g.cdf(x), rtol=1e-12)
        with pytest.raises(ValueError):
            Gamma(2.5, 1.0).as_mixed_erlang()

    def test_quantile_tvar(self):
        me = MixedErlang(0.5, [0.2, 0.3, 0.5])
        q = me.quantile(0.99)
        assert me.cdf(q) == pytest.approx(0.99, abs=1e-12)
        assert tvar(me, 0.99) > q


class TestGridSeverity:
    def test_basic(self):
        g = GridSeverity(2.0, [0.1, 0.2, 0.3, 0.4])
        assert g.moment(1) == pytest.approx(2 * (0.2 + 0.6 + 1.2))
        assert g.cdf(3.9) == pytest.approx(0.3)
        assert quantile(g, 0.35) == pytest.approx(4.0)

    def test_order_masses_match_enumeration(self):
        q = np.array([0.1, 0.2, 0.3, 0.4])
        g = GridSeverity(1.0, q)
        for j in (1, 2):
            np.testing.assert_allclose(g.order_masses(j), brute_order_pmf(q, j), atol=1e-15)
        assert g.min_moment(2) == pytest.approx(np.arange(4) ** 2 @ brute_order_pmf(q, 1))

    def test_tvar_definition(self):
        g = GridSeverity(1.0, [0.5, 0.3, 0.2])
        # integral of VaR_u over (0.7, 1): 0.1 at 1 and 0.2 at 2
        assert g.tvar(0.7) == pytest.approx((0.1 * 1 + 0.2 * 2) / 0.3)
