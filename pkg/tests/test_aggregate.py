import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from _oracle import DiscreteOracle, continuous_s_moments
from fgmcrm import (AliasingError, AlphaMixture, CollectiveRiskModel, Comonotone, CounterFreq, ExplicitSmallD,
                    Exponential, FrequencyDistribution, Gamma, GridSeverity, Independent, IndepFreqComonotoneSev,
                    Lognormal, MixedErlang, Pareto, SupportError, ThetaSet, aggregate_distribution,
                    closed_form_exp_geometric, discrete_aggregate_fft, discretize_severity, expected_s,
                    extremal_counterpart, lst_s, mixed_erlang_aggregate, moments_special, risk_measures, variance_s)
from fgmcrm.aggregate import MomentOnlyAggregate


class TestMoments:
    @given(st.integers(0, 100_000))
    @settings(max_examples=40, deadline=None)
    def test_against_enumeration(self, seed):
        o = DiscreteOracle.random(np.random.default_rng(seed))
        m = o.model()
        e, v = o.s_moments()
        assert expected_s(m).total == pytest.approx(e, abs=1e-12)
        rep = variance_s(m)
        assert rep.total == pytest.approx(v, abs=1e-11)
        assert rep.check()

    @pytest.mark.parametrize("thetas", [(-1, 1, 0), (1, 1, 0), (0, -1, 0), (0, 0, -1), (0.3, 0.2, -0.1)])
    def test_continuous_against_copula(self, thetas):
        g = (0.05, 0.05, 0.9)
        sev = Gamma(4.0, 0.01)
        m = CollectiveRiskModel(FrequencyDistribution.from_pmf(g), sev, ExplicitSmallD(ThetaSet.trivariate(*thetas)))
        e, v = continuous_s_moments(g, sev, thetas)
        assert expected_s(m).total == pytest.approx(e, rel=1e-9)
        assert variance_s(m).total == pytest.approx(v, rel=1e-8)

    @pytest.mark.parametrize("sev", [Exponential(2000.0), Gamma(2.0, 0.001), Pareto(2.1, 2200.0)])
    @pytest.mark.parametrize("freq", [FrequencyDistribution.geometric(10 / 11), FrequencyDistribution.poisson(2.0),
                                      FrequencyDistribution.negative_binomial(2, 0.5)])
    def test_two_point_mixtures(self, sev, freq):
        for sym, fam in (("△△", Comonotone()), ("▽△", CounterFreq())):
            e, v = moments_special(freq, sev, sym)
            m = CollectiveRiskModel(freq, sev, fam)
            assert expected_s(m).total == pytest.approx(e, rel=1e-10)
            assert variance_s(m).total == pytest.approx(v, rel=1e-8)

    def test_wald_when_frequency_independent(self):
        freq, sev = FrequencyDistribution.poisson(3.0), Gamma(2.0, 0.5)
        for dep in (Independent(), IndepFreqComonotoneSev()):
            m = CollectiveRiskModel(freq, sev, dep)
            assert expected_s(m).total == pytest.approx(freq.mean * sev.moment(1))
            assert expected_s(m).dependence == 0.0

    def test_decomposition_components(self):
        m = CollectiveRiskModel(FrequencyDistribution.from_pmf([1 / 16, 3 / 8, 9 / 16]), Gamma(5.0, 3 / 8),
                                ExplicitSmallD(ThetaSet.trivariate(0.0, 1.0, 0.0)))
        v = variance_s(m)
        assert v.c_evar == pytest.approx(160 / 3, abs=1e-10)
        assert v.c_vare == pytest.approx(200 / 3, abs=1e-10)
        assert v.c_evar + v.c_ecov + v.c_vare == pytest.approx(v.total)
        assert v.baseline + v.c_dep == pytest.approx(v.total)

    def test_pareto_variance_needs_second_moment(self):
        m = CollectiveRiskModel(FrequencyDistribution.poisson(1.0), Pareto(1.8, 1.0), Independent())
        expected_s(m)
        with pytest.raises(ValueError, match="does not exist"):
            variance_s(m)


class TestTransforms:
    def test_closed_forms_match_general_transform(self):
        t = np.linspace(0.0, 0.01, 50)
        for sym, fam in (("△△", Comonotone()), ("▽△", CounterFreq())):
            m = CollectiveRiskModel(FrequencyDistribution.geometric(10 / 11), Exponential(2000.0), fam)
            np.testing.assert_allclose(lst_s(m, t), closed_form_exp_geometric(10 / 11, 1 / 2000, sym, t), atol=1e-12)

    def test_closed_form_derivative_gives_mean(self):
        h = 1e-9
        for sym, fam in (("△△", Comonotone()), ("▽△", CounterFreq())):
            d = (1 - closed_form_exp_geometric(10 / 11, 1 / 2000, sym, h)) / h
            m = CollectiveRiskModel(FrequencyDistribution.geometric(10 / 11), Exponential(2000.0), fam)
            assert d == pytest.approx(expected_s(m).total, rel=1e-5)

    def test_lst_by_quadrature_for_single_claim(self):
        # N = 1 always: S = X[1 + I_1], so E[exp(-tS)] is a half-half mixture
        m = CollectiveRiskModel(FrequencyDistribution.degenerate(1), Lognormal(20.0, 100.0), AlphaMixture(0.7))
        t = 0.05
        sev = m.sev
        direct = integrate.quad(lambda x: np.exp(-t * x) * sev.pdf(x), 0, np.inf)[0]
        assert lst_s(m, t) == pytest.approx(direct, rel=1e-8)

    def test_negative_argument(self):
        m = CollectiveRiskModel(FrequencyDistribution.poisson(1.0), Exponential(1.0), Independent())
        with pytest.raises(ValueError):
            lst_s(m, -1.0)


class TestMixedErlangAggregate:
    @pytest.mark.parametrize("dep", [Independent(), Comonotone(), CounterFreq(), AlphaMixture(0.2),
                                     ExplicitSmallD(ThetaSet.trivariate(-1 / 3, -1 / 3))])
    def test_lst_and_moments(self, dep):
        freq = FrequencyDistribution.from_pmf([0.05, 0.05, 0.9])
        m = CollectiveRiskModel(freq, Gamma(4.0, 0.01), dep)
        a = mixed_erlang_aggregate(m)
        t = np.array([0.0, 1e-3, 1e-2, 0.1])
        np.testing.assert_allclose(a.lst(t), lst_s(m, t), atol=1e-13)
        assert a.mean == pytest.approx(expected_s(m).total, rel=1e-12)
        assert a.variance == pytest.approx(variance_s(m).total, rel=1e-10)

    def test_unbounded_frequency(self):
        m = CollectiveRiskModel(FrequencyDistribution.geometric(10 / 11), Exponential(2000.0), Comonotone())
        a = mixed_erlang_aggregate(m)
        assert a.masses.sum() + a.truncation == pytest.approx(1.0, abs=1e-12)
        assert a.mean == pytest.approx(expected_s(m).total, rel=1e-9)
        assert a.atom == pytest.approx(lst_s(m, 1e9), abs=1e-6)

    def test_risk_measures(self):
        m = CollectiveRiskModel(FrequencyDistribution.poisson(3.0), MixedErlang(0.1, [0.3, 0.7]), CounterFreq())
        a = mixed_erlang_aggregate(m)
        for k, q, tv in risk_measures(a, [0.9, 0.99]):
            assert a.cdf(q) == pytest.approx(k, abs=1e-10)
            assert tv == pytest.approx(q + a.stop_loss(q) / (1 - k), rel=1e-10)
        assert a.stop_loss(0.0) == pytest.approx(a.mean)

    def test_requires_erlang_severity(self):
        m = CollectiveRiskModel(FrequencyDistribution.poisson(1.0), Lognormal(1.0, 1.0), Independent())
        with pytest.raises(TypeError):
            mixed_erlang_aggregate(m)
        assert isinstance(aggregate_distribution(m), MomentOnlyAggregate)
        with pytest.raises(ValueError):
            aggregate_distribution(m).quantile(0.9)


class TestDiscreteRoute:
    @given(st.integers(0, 100_000))
    @settings(max_examples=40, deadline=None)
    def test_fft_pmf_against_enumeration(self, seed):
        o = DiscreteOracle.random(np.random.default_rng(seed))
        a = discrete_aggregate_fft(o.model(), 16)
        ref = o.s_pmf()
        np.testing.assert_allclose(a.pmf[: len(ref)], ref, atol=1e-13)
        assert np.all(a.pmf[len(ref):] < 1e-13)

    def test_discretisation_preserves_mean(self):
        sev = Lognormal(20.0, 100.0)
        g = discretize_severity(sev, 1.0)
        assert g.moment(1) == pytest.approx(20.0, rel=1e-9)
        assert np.all(g.masses >= 0)
        half = discretize_severity(sev, 0.5)
        assert abs(half.variance - sev.variance) < abs(g.variance - sev.variance)

    def test_discretisation_span_too_small(self):
        with pytest.raises(SupportError, match="span too small"):
            discretize_severity(Exponential(10.0), 1.0, span=20)

    def test_aliasing_detected(self):
        m = CollectiveRiskModel(FrequencyDistribution.negative_binomial(10, 2 / 3),
                                discretize_severity(Lognormal(20.0, 100.0), 1.0), Comonotone())
        with pytest.raises(AliasingError, match="aliasing exceeds tolerance"):
            discrete_aggregate_fft(m, 256)
        with pytest.raises(ValueError):
            discrete_aggregate_fft(m, 1000)

    def test_grid_moments_exact(self):
        m = CollectiveRiskModel(FrequencyDistribution.negative_binomial(10, 2 / 3),
                                discretize_severity(Lognormal(20.0, 100.0), 1.0), CounterFreq())
        a = discrete_aggregate_fft(m, 4096)
        assert a.mean == pytest.approx(expected_s(m).total, rel=1e-10)
        assert a.variance == pytest.approx(variance_s(m).total, rel=1e-9)
        t = np.array([0.001, 0.01])
        np.testing.assert_allclose(a.lst(t), lst_s(m, t), rtol=1e-10)

    def test_grid_against_erlang_route(self):
        # an Erlang severity on a fine grid approaches the exact mixed-Erlang law
        m = CollectiveRiskModel(FrequencyDistribution.poisson(2.0), Gamma(2.0, 0.5), Comonotone())
        exact = mixed_erlang_aggregate(m)
        grid = aggregate_distribution(m.with_dependence(Comonotone()), step=0.01, length=1 << 13)
        approx_cdf = grid.cdf(10.0)
        assert approx_cdf == pytest.approx(exact.cdf(10.0), abs=2e-3)

    def test_extremal_counterpart(self):
        m = CollectiveRiskModel(FrequencyDistribution.poisson(2.0), Gamma(2.0, 0.5), Independent())
        assert isinstance(extremal_counterpart(m).dep, Comonotone)
        assert isinstance(extremal_counterpart(m, "counter").dep, CounterFreq)
