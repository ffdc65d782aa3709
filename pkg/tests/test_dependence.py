import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fgmcrm import (AlphaMixture, AsymmetricMarginals, BernoulliPmf, Comonotone, CounterFreq, ExplicitSmallD,
                    FamilyDimensionError, InadmissibleTheta, Independent, IndepFreqComonotoneSev,
                    IndepFreqCounterSev, ThetaSet, check_admissible, kn_law, make_family, pmf_to_theta,
                    theta_to_pmf)
from fgmcrm.dependence import family_names


def naive_pmf(theta: ThetaSet):
    """Probability of each outcome by direct summation over subsets."""
    d = theta.d
    out = {}
    for bits in itertools.product((0, 1), repeat=d):
        total = 1.0
        for r in range(2, d + 1):
            for J in itertools.combinations(range(d), r):
                total += theta[J] * (-1) ** sum(bits[j] for j in J)
        out[bits] = total / 2**d
    return out


@st.composite
def admissible_thetas(draw, d_max=5):
    d = draw(st.integers(2, d_max))
    subsets = [J for r in range(2, d + 1) for J in itertools.combinations(range(d), r)]
    raw = draw(st.lists(st.floats(-1, 1), min_size=len(subsets), max_size=len(subsets)))
    # shrinking towards zero keeps the draw admissible often enough
    scale = draw(st.floats(0.0, 1.0))
    th = ThetaSet(d, {J: v * scale for J, v in zip(subsets, raw)})
    assume(check_admissible(th).ok)
    return th


class TestCorrespondence:
    @given(admissible_thetas())
    @settings(max_examples=80, deadline=None)
    def test_round_trip(self, th):
        f = theta_to_pmf(th)
        assert f.is_symmetric()
        back = pmf_to_theta(f)
        subsets = set(th.values) | set(back.values)
        for J in subsets:
            assert back[J] == pytest.approx(th[J], abs=1e-12)

    @given(admissible_thetas(d_max=4))
    @settings(max_examples=40, deadline=None)
    def test_transform_matches_naive_sum(self, th):
        f = theta_to_pmf(th)
        for bits, p in naive_pmf(th).items():
            assert f(bits) == pytest.approx(p, abs=1e-14)

    def test_comonotone_pair(self):
        f = theta_to_pmf(ThetaSet(2, {(0, 1): 1.0}))
        assert f(1, 1) == pytest.approx(0.5)
        assert f(0, 1) == pytest.approx(0.0)

    def test_inadmissible_names_sign_vector(self):
        th = ThetaSet.trivariate(1.0, 1.0, 1.0)
        rep = check_admissible(th)
        assert not rep.ok
        with pytest.raises(InadmissibleTheta, match="sign vector"):
            theta_to_pmf(th)

    def test_asymmetric_marginals(self):
        f = BernoulliPmf(2, [0.4, 0.1, 0.1, 0.4])
        assert pmf_to_theta(f)[(0, 1)] == pytest.approx(0.6)
        g = BernoulliPmf(2, [0.3, 0.2, 0.2, 0.3])
        assert g.is_symmetric()
        h = BernoulliPmf(2, [0.5, 0.2, 0.1, 0.2])
        with pytest.raises(AsymmetricMarginals):
            pmf_to_theta(h)

    def test_theta_range_checked(self):
        with pytest.raises(ValueError):
            ThetaSet(2, {(0, 1): 1.5})
        with pytest.raises(ValueError):
            ThetaSet(2, {(0,): 0.1})


class TestBernoulliPmf:
    def test_marginalise_and_permute(self):
        f = theta_to_pmf(ThetaSet(3, {(0, 1): 0.5, (1, 2): -0.3, (0, 1, 2): 0.2}))
        g = f.marginalize_last()
        assert pmf_to_theta(g)[(0, 1)] == pytest.approx(0.5)
        p = f.permute([2, 1, 0])
        assert pmf_to_theta(p)[(0, 1)] == pytest.approx(-0.3)
        assert f.pair_prob(0, 1) == pytest.approx(0.25 * 1.5)

    def test_from_table(self):
        f = BernoulliPmf.from_table({(0, 0): 0.5, (1, 1): 0.5})
        assert f(1, 1) == 0.5
        with pytest.raises(ValueError):
            BernoulliPmf(2, [0.5, 0.5, 0.1, -0.1])


FAMILY_PAIRS = [  # family, theta01, theta12, theta012
    (Independent(), 0.0, 0.0, 0.0),
    (Comonotone(), 1.0, 1.0, 0.0),
    (CounterFreq(), -1.0, 1.0, 0.0),
    (IndepFreqComonotoneSev(), 0.0, 1.0, 0.0),
    (IndepFreqCounterSev(), 0.0, -1.0, 0.0),
]


class TestFamilies:
    @pytest.mark.parametrize("fam,t01,t12,t012", FAMILY_PAIRS)
    def test_trivariate_parameters(self, fam, t01, t12, t012):
        th = fam.theta()
        assert th[(0, 1)] == pytest.approx(t01)
        assert th[(0, 2)] == pytest.approx(t01)
        assert th[(1, 2)] == pytest.approx(t12)
        assert th[(0, 1, 2)] == pytest.approx(t012, abs=1e-14)

    @pytest.mark.parametrize("fam", [Independent(), Comonotone(), CounterFreq(), IndepFreqComonotoneSev(),
                                     AlphaMixture(0.3)])
    def test_consistency_across_k(self, fam):
        for k in range(1, 6):
            f = fam.joint_pmf(k + 1)
            assert f.is_symmetric()
            np.testing.assert_allclose(f.marginalize_last().probs, fam.joint_pmf(k).probs, atol=1e-15)

    @pytest.mark.parametrize("fam", [Comonotone(), CounterFreq(), AlphaMixture(0.8), IndepFreqCounterSev()])
    def test_kn_law_matches_joint_pmf(self, fam):
        n = 2 if fam.max_k == 2 else 5
        f = fam.joint_pmf(n)
        bits = f.outcomes()
        for i0 in (0, 1):
            sel = bits[:, 0] == i0
            expected = np.bincount(bits[sel, 1:].sum(axis=1), weights=2 * f.probs[sel], minlength=n + 1)
            np.testing.assert_allclose(fam.kn_pmf(i0, n), expected, atol=1e-14)
            assert kn_law(fam, i0, n).pmf.sum() == pytest.approx(1.0)

    def test_comonotone_kn(self):
        np.testing.assert_allclose(Comonotone().kn_pmf(1, 4), [0, 0, 0, 0, 1])
        np.testing.assert_allclose(CounterFreq().kn_pmf(1, 4), [1, 0, 0, 0, 0])

    def test_dimension_limit(self):
        with pytest.raises(FamilyDimensionError, match="exceeds family definition"):
            IndepFreqCounterSev().joint_pmf(3)
        with pytest.raises(FamilyDimensionError):
            ExplicitSmallD(ThetaSet.trivariate(0.1, 0.1)).kn_pmf(0, 3)

    def test_alpha_mixture_endpoints(self):
        np.testing.assert_allclose(AlphaMixture(1 - 1e-12).joint_pmf(3).probs, Comonotone().joint_pmf(3).probs,
                                   atol=1e-11)
        np.testing.assert_allclose(AlphaMixture(0.5).joint_pmf(3).probs, Independent().joint_pmf(3).probs)
        with pytest.raises(ValueError):
            AlphaMixture(1.0)

    def test_make_family(self):
        assert isinstance(make_family("△△"), Comonotone)
        assert isinstance(make_family("counter_freq"), CounterFreq)
        assert isinstance(make_family("alpha-mixture", 0.2), AlphaMixture)
        assert "independent" in family_names()
        with pytest.raises(ValueError):
            make_family("nope")

    def test_explicit_non_exchangeable_flagged(self):
        th = ThetaSet(3, {(0, 1): 0.5, (0, 2): -0.5})
        assert not ExplicitSmallD(th).exchangeable


class TestSampling:
    @pytest.mark.parametrize("fam", [Comonotone(), CounterFreq(), IndepFreqComonotoneSev(), IndepFreqCounterSev(),
                                     ExplicitSmallD(ThetaSet.trivariate(-1 / 3, -1 / 3))])
    def test_joint_frequencies(self, fam):
        rng = np.random.default_rng(3)
        n = 200_000
        i0, ind = fam.sample_joint(rng, np.full(n, 2))
        ind = ind.reshape(n, 2)
        codes = i0 + 2 * ind[:, 0] + 4 * ind[:, 1]
        emp = np.bincount(codes, minlength=8) / n
        expected = fam.joint_pmf(2).probs
        assert np.max(np.abs(emp - expected)) < 5 * np.sqrt(0.25 / n)
