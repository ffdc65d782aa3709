import numpy as np
import pytest
from scipy import stats

from _oracle import DiscreteOracle
from fgmcrm import (AlphaMixture, CollectiveRiskModel, Comonotone, CounterFreq, ExplicitSmallD, Exponential,
                    FrequencyDistribution, Gamma, Independent, Lognormal, ThetaSet, expected_s, mc_estimate,
                    sample_method1, sample_method2, variance_s)
from fgmcrm.simulate import BLOCK, empirical_var_tvar

SAMPLERS = [sample_method1, sample_method2]


def model(dep):
    return CollectiveRiskModel(FrequencyDistribution.poisson(2.0), Gamma(2.0, 0.1), dep)


class TestBatch:
    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_reproducible(self, sampler):
        m = model(CounterFreq())
        a, b = sampler(m, 5000, 7), sampler(m, 5000, 7)
        np.testing.assert_array_equal(a.s, b.s)
        np.testing.assert_array_equal(a.n, b.n)
        assert not np.array_equal(a.s, sampler(m, 5000, 8).s)

    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_blocks_are_prefix_stable(self, sampler):
        m = model(Comonotone())
        long, short = sampler(m, BLOCK + 100, 3), sampler(m, BLOCK, 3)
        np.testing.assert_array_equal(long.n[:BLOCK], short.n)
        if sampler is sample_method2:
            np.testing.assert_array_equal(long.s[:BLOCK], short.s)

    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_records_have_length_n(self, sampler):
        batch = sampler(model(AlphaMixture(0.3)), 2000, 1)
        assert len(batch.claims) == batch.n.sum()
        for i in range(0, 2000, 97):
            r = batch.record(i)
            assert len(r) == batch.n[i]
            assert r.sum() == pytest.approx(batch.s[i])
        assert np.all(batch.s[batch.n == 0] == 0)

    def test_bad_count(self):
        with pytest.raises(ValueError):
            sample_method2(model(Independent()), 0, 1)


class TestAgainstExact:
    @pytest.mark.parametrize("sampler", SAMPLERS)
    @pytest.mark.parametrize("dep", [Independent(), Comonotone(), CounterFreq(), AlphaMixture(0.8),
                                     ExplicitSmallD(ThetaSet.trivariate(-1 / 3, -1 / 3))])
    def test_mean_and_variance(self, sampler, dep):
        freq = FrequencyDistribution.from_pmf([0.05, 0.05, 0.9]) if isinstance(dep, ExplicitSmallD) \
            else FrequencyDistribution.negative_binomial(3, 0.4)
        m = CollectiveRiskModel(freq, Lognormal(10.0, 40.0), dep)
        est = mc_estimate(sampler(m, 200_000, 11), n_boot=0)
        assert abs(est.mean - expected_s(m).total) < 4.5 * est.se_mean
        assert abs(est.variance - variance_s(m).total) < 4.5 * est.se_variance

    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_pmf_against_enumeration(self, sampler):
        o = DiscreteOracle.random(np.random.default_rng(5))
        n = 300_000
        s = sampler(o.model(), n, 2).s
        ref = o.s_pmf()
        counts = np.bincount(np.rint(s).astype(int), minlength=len(ref))
        keep = ref * n > 5
        lumped = np.append(counts[keep], counts[~keep].sum())
        expected = np.append(ref[keep], ref[~keep].sum()) * n
        nz = expected > 0
        chi2 = np.sum((lumped[nz] - expected[nz]) ** 2 / expected[nz])
        assert stats.chi2.sf(chi2, nz.sum() - 1) > 1e-4

    def test_two_algorithms_agree_in_law(self):
        m = model(AlphaMixture(0.2))
        a = sample_method1(m, 100_000, 21).s
        b = sample_method2(m, 100_000, 22).s
        assert stats.ks_2samp(a, b).pvalue > 1e-4

    def test_frequency_marginal_preserved(self):
        m = CollectiveRiskModel(FrequencyDistribution.poisson(2.0), Exponential(1.0), Comonotone())
        n = sample_method1(m, 200_000, 4).n
        assert abs(n.mean() - 2.0) < 5 * np.sqrt(2.0 / 200_000)


class TestEstimators:
    def test_empirical_quantile_and_tvar(self):
        s = np.arange(1, 101, dtype=float)
        q, tv = empirical_var_tvar(s, 0.95)
        assert q == 95.0
        assert tv == pytest.approx(np.mean(s[95:]))

    def test_ties_at_quantile(self):
        s = np.array([0.0] * 7 + [5.0] * 3)
        q, tv = empirical_var_tvar(s, 0.75)
        assert q == 5.0
        assert tv == pytest.approx(5.0)
        q, tv = empirical_var_tvar(s, 0.6)
        assert q == 0.0
        assert tv == pytest.approx((0.1 * 0 + 0.3 * 5) / 0.4)

    def test_bootstrap_errors_reproducible(self):
        batch = sample_method2(model(Comonotone()), 20_000, 9)
        a, b = mc_estimate(batch, 0.95, n_boot=50), mc_estimate(batch, 0.95, n_boot=50)
        assert a.se_var_kappa == b.se_var_kappa > 0
        assert np.isnan(mc_estimate(batch, n_boot=0).se_tvar_kappa)
