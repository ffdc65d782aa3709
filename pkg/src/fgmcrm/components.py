"""Collective risk models with FGM frequency-severity dependence and their components.

Everything here assumes the claim indicators are exchangeable, so the whole
model is summarised, for pairwise and triple quantities, by ``theta01``,
``theta12`` and ``theta012`` read off the joint law of ``(I_0, I_1, I_2)``.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .dependence import BernoulliDependence, pmf_to_theta
from .distributions import FrequencyDistribution, Severity
from .errors import FamilyDimensionError, MomentError, SupportError

Phi = Union[Callable, int]


@dataclass(frozen=True)
class CollectiveRiskModel:
    freq: FrequencyDistribution
    sev: Severity
    dep: BernoulliDependence
    theta01: float = field(init=False)
    theta12: float = field(init=False)
    theta012: float = field(init=False)

    def __post_init__(self):
        if not self.dep.exchangeable:
            raise ValueError("claim indicators must be exchangeable (coordinates 1..k)")
        if self.dep.max_k is not None and self.freq.n_max > self.dep.max_k:
            raise FamilyDimensionError(
                f"frequency support reaches {self.freq.n_max} but {self.dep!r} is defined only up to k = {self.dep.max_k}")
        if self.dep.max_k is not None and self.dep.max_k < 2:
            th = pmf_to_theta(self.dep.joint_pmf(1))
            t01, t12, t012 = th[(0, 1)], 0.0, 0.0
        else:
            th = pmf_to_theta(self.dep.joint_pmf(2))
            t01, t12, t012 = th[(0, 1)], th[(1, 2)], th[(0, 1, 2)]
            if abs(th[(0, 2)] - t01) > 1e-10:
                raise ValueError("theta02 differs from theta01; claim indicators are not exchangeable")
        object.__setattr__(self, "theta01", float(t01))
        object.__setattr__(self, "theta12", float(t12))
        object.__setattr__(self, "theta012", float(t012))

    def with_dependence(self, dep: BernoulliDependence) -> "CollectiveRiskModel":
        return CollectiveRiskModel(self.freq, self.sev, dep)

    def _require_support(self, n: int) -> float:
        g = self.freq.pmf_at(n)
        if g <= 0.0:
            raise SupportError(f"n = {n} is outside the support of N")
        return g

    def ratio(self, n):
        return self.freq.ratio(n)


# ---------------------------------------------------------------------------
# Delta functionals
# ---------------------------------------------------------------------------


def _finite(v: float, what: str) -> float:
    if not np.isfinite(v):
        raise MomentError(f"nonfinite expectation: {what}")
    return float(v)


def _freq_terms(freq: FrequencyDistribution, phi: Phi):
    """``(E[phi(N)], Delta(F_N; phi))``."""
    if isinstance(phi, numbers.Integral):
        if phi == 0:
            return 1.0, 0.0
        return freq.moment(phi), freq.order_moment(2, phi) - freq.order_moment(1, phi)
    vals = np.asarray(phi(freq.support), dtype=float)
    e = _finite(vals @ freq.pmf, "E[phi0(N)]")
    return e, _finite(vals @ (freq.order_pmf(2) - freq.order_pmf(1)), "Delta(F_N; phi0)")


def _sev_terms(sev: Severity, phi: Phi):
    """``(E[phi(X)], Delta(F_X; phi))``."""
    if isinstance(phi, numbers.Integral):
        if phi == 0:
            return 1.0, 0.0
        m = int(phi)
        e = sev.moment(m)
        return e, 2.0 * (e - sev.min_moment(m))
    e = _finite(sev.expect(phi), "E[phi(X)]")
    return e, 2.0 * (e - _finite(sev.min_expect(phi), "E[phi(X[1])]"))


def delta(law, phi: Phi) -> float:
    """``Delta(F; phi) = E[phi(Z[2])] - E[phi(Z[1])]``; ``phi`` may be an integer power."""
    if isinstance(law, FrequencyDistribution):
        return _freq_terms(law, phi)[1]
    return _sev_terms(law, phi)[1]


def triple_expectation(m: CollectiveRiskModel, phi0: Phi, phi1: Phi, phi2: Phi) -> float:
    """``E[phi0(N) phi1(X_1) phi2(X_2)]``.

    Each ``phi`` is a callable (vectorised over the frequency support for
    ``phi0``) or an integer ``k`` standing for ``z -> z**k``.
    """
    e0, d0 = _freq_terms(m.freq, phi0)
    e1, d1 = _sev_terms(m.sev, phi1)
    e2, d2 = _sev_terms(m.sev, phi2)
    return (
        e0 * e1 * e2
        + m.theta01 / 4.0 * d0 * (d1 * e2 + e1 * d2)
        + m.theta12 / 4.0 * e0 * d1 * d2
        - m.theta012 / 8.0 * d0 * d1 * d2
    )


# ---------------------------------------------------------------------------
# Conditional laws of X given N = n
# ---------------------------------------------------------------------------


def conditional_sev_cdf(m: CollectiveRiskModel, n: int, x):
    m._require_support(n)
    F = np.asarray(m.sev.cdf(x), dtype=float)
    out = F + m.theta01 / 4.0 * m.ratio(n) * 2.0 * F * (F - 1.0)
    return out if out.ndim else float(out)


def conditional_sev_density(m: CollectiveRiskModel, n: int, x):
    """Density of ``X | N = n``; the derivative of :func:`conditional_sev_cdf`."""
    if m.sev.discrete:
        raise ValueError("severity is discrete; use conditional_sev_pmf")
    m._require_support(n)
    F = np.asarray(m.sev.cdf(x), dtype=float)
    f = np.asarray(m.sev.pdf(x), dtype=float)
    # f[2] - f[1] = 2 f (2F - 1)
    out = f + m.theta01 / 4.0 * m.ratio(n) * 2.0 * f * (2.0 * F - 1.0)
    return out if out.ndim else float(out)


def conditional_sev_pmf(m: CollectiveRiskModel, n: int, x):
    if not m.sev.discrete:
        raise ValueError("severity is continuous; use conditional_sev_density")
    m._require_support(n)
    x = np.asarray(x, dtype=float)
    f = np.asarray(m.sev.pmf(x), dtype=float)
    F_prev = np.asarray(m.sev.cdf(x - m.sev.step), dtype=float)
    out = f + m.theta01 / 2.0 * m.ratio(n) * f * (2.0 * F_prev + f - 1.0)
    return out if out.ndim else float(out)


def conditional_mean(m: CollectiveRiskModel, n: int) -> float:
    m._require_support(n)
    sev = m.sev
    return sev.moment(1) + m.theta01 / 4.0 * float(m.ratio(n)) * (sev.max_moment(1) - sev.min_moment(1))


def conditional_second_moment(m: CollectiveRiskModel, n: int) -> float:
    m._require_support(n)
    sev = m.sev
    return sev.moment(2) + m.theta01 / 4.0 * float(m.ratio(n)) * (sev.max_moment(2) - sev.min_moment(2))


def conditional_variance(m: CollectiveRiskModel, n: int) -> float:
    return conditional_second_moment(m, n) - conditional_mean(m, n) ** 2


def cov_freq_sev(m: CollectiveRiskModel) -> float:
    dn = m.freq.order_moment(2, 1) - m.freq.order_moment(1, 1)
    return m.theta01 / 4.0 * dn * (m.sev.max_moment(1) - m.sev.min_moment(1))


def cov_sev_sev(m: CollectiveRiskModel) -> float:
    return m.theta12 / 4.0 * (m.sev.max_moment(1) - m.sev.min_moment(1)) ** 2


def conditional_cov(m: CollectiveRiskModel, n: int) -> float:
    """``Cov(X_1, X_2 | N = n)``."""
    m._require_support(n)
    m.sev.moment(2)
    r = float(m.ratio(n))
    sp2 = (m.sev.max_moment(1) - m.sev.min_moment(1)) ** 2
    return (m.theta12 / 4.0 - m.theta012 / 8.0 * r - m.theta01**2 / 16.0 * r * r) * sp2
