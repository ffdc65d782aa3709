"""Collective risk models with FGM dependence between claim counts and claim sizes."""
from .aggregate import (GridAggregate, MixedErlangAggregate, MomentOnlyAggregate, aggregate_distribution,
                        closed_form_exp_geometric, discrete_aggregate_fft, discretize_severity, expected_s,
                        extremal_counterpart, lst_s, mixed_erlang_aggregate, moments_special, risk_measures,
                        variance_s)
from .components import (CollectiveRiskModel, conditional_cov, conditional_mean, conditional_sev_cdf,
                         conditional_sev_density, conditional_sev_pmf, conditional_variance, cov_freq_sev,
                         cov_sev_sev, delta, triple_expectation)
from .dependence import (AlphaMixture, BernoulliPmf, Comonotone, CounterFreq, ExplicitSmallD, Independent,
                         IndepFreqComonotoneSev, IndepFreqCounterSev, ThetaSet, check_admissible, family_names,
                         kn_law, make_family, pmf_to_theta, theta_to_pmf)
from .distributions import (Exponential, FrequencyDistribution, Gamma, GridSeverity, Lognormal, MixedErlang, Pareto,
                            quantile, tvar)
from .errors import (AliasingError, AsymmetricMarginals, ConfigError, FamilyDimensionError, InadmissibleTheta,
                     MomentError, SupportError, TruncationError)
from .ordering import cx_spacing_check, icx_compare, sm_compare_symmetric_bernoulli_pairwise, stop_loss
from .simulate import mc_estimate, sample_method1, sample_method2

__version__ = "0.1.0"
