"""Moments, transforms, distributions and risk measures of the aggregate claim amount."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, signal, special

from .components import CollectiveRiskModel
from .dependence import BernoulliDependence, Comonotone, CounterFreq
from .distributions import (
    Exponential,
    FrequencyDistribution,
    Gamma,
    GridSeverity,
    MixedErlang,
    Severity,
    _check_kappa,
    _left_inverse,
)
from .errors import AliasingError, MomentError, SupportError, TruncationError

log = logging.getLogger(__name__)

ALIAS_EPS = 1e-8
NEG_ROUNDOFF = 1e-10


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpectationReport:
    total: float
    baseline: float
    dependence: float

    def __float__(self) -> float:
        return self.total


@dataclass(frozen=True)
class VarianceReport:
    c_evar: float
    c_ecov: float
    c_vare: float
    c_dep: float
    baseline: float
    total: float
    series_tail_bound: float = 0.0

    def check(self, rtol: float = 1e-8) -> bool:
        scale = max(abs(self.total), 1.0)
        a = abs(self.c_evar + self.c_ecov + self.c_vare - self.total) <= rtol * scale
        b = abs(self.baseline + self.c_dep - self.total) <= rtol * scale
        return a and b


def _spacings(m: CollectiveRiskModel):
    """Order-statistic moment summaries used by the closed-form moment expressions."""
    f, x = m.freq, m.sev
    mn1, mn2 = f.order_moment(1, 1), f.order_moment(2, 1)
    mx1, mx2 = x.min_moment(1), x.max_moment(1)
    return f, x, mn1, mn2, mx1, mx2


def expected_s(m: CollectiveRiskModel) -> ExpectationReport:
    f, x, mn1, mn2, mx1, mx2 = _spacings(m)
    base = f.mean * x.moment(1)
    dep = m.theta01 / 4.0 * (mn2 - mn1) * (mx2 - mx1)
    return ExpectationReport(base + dep, base, dep)


def _ratio_series(freq: FrequencyDistribution):
    n = freq.support.astype(float)
    r = freq.ratio(freq.support)
    g = freq.pmf
    return float(g @ (n * r * r)), float(g @ (n * n * r * r))


def variance_s(m: CollectiveRiskModel) -> VarianceReport:
    f, x, mn1, mn2, mx1, mx2 = _spacings(m)
    x.moment(2)
    t01, t12, t012 = m.theta01, m.theta12, m.theta012
    mu_x, var_x = x.moment(1), x.variance
    dx = mx2 - mx1
    dxsq = mx2**2 - mx1**2
    var_x1 = x.min_moment(2) - mx1**2
    var_x2 = x.max_moment(2) - mx2**2
    n2_1, n2_2 = f.order_moment(1, 2), f.order_moment(2, 2)
    var_n1, var_n2 = n2_1 - mn1**2, n2_2 - mn2**2
    s1, s2 = _ratio_series(f)

    c_evar = f.mean * var_x + t01 / 4.0 * (mn2 - mn1) * (var_x2 - var_x1) - t01**2 / 16.0 * dx**2 * s1
    c_ecov = (
        t12 / 4.0 * (f.second_moment - f.mean) * dx**2
        - t012 / 8.0 * ((n2_2 - mn2) - (n2_1 - mn1)) * dx**2
        - t01**2 / 16.0 * dx**2 * (s2 - s1)
    )
    c_vare = (
        f.variance * mu_x**2
        + t01 / 4.0 * (var_n2 - var_n1) * dxsq
        + t01 / 8.0 * (mn2**2 - mn1**2) * dxsq
        + t01**2 / 16.0 * dx**2 * s2
        - t01**2 / 16.0 * (mn2 - mn1) ** 2 * dx**2
    )
    baseline = f.mean * var_x + f.variance * mu_x**2
    c_dep = (
        t01 / 4.0 * ((mn2 - mn1) * (var_x2 - var_x1) + (var_n2 - var_n1) * dxsq + 0.5 * (mn2**2 - mn1**2) * dxsq)
        - t01**2 / 16.0 * (mn2 - mn1) ** 2 * dx**2
        + t12 / 4.0 * (f.second_moment - f.mean) * dx**2
        - t012 / 8.0 * ((n2_2 - mn2) - (n2_1 - mn1)) * dx**2
    )
    total = c_evar + c_ecov + c_vare
    # ratio(n)^2 <= 4, so the omitted series terms are at most this times E[N^2 1{N > n_max}]
    tail = t01**2 / 16.0 * dx**2 * 4.0 * f.tail_mass
    return VarianceReport(c_evar, c_ecov, c_vare, c_dep, baseline, total, tail)


def moments_special(freq: FrequencyDistribution, sev: Severity, family: str):
    """Mean and variance of the aggregate under the two extreme two-point families.

    ``"comonotone"`` mixes ``(N[1], X[1])`` and ``(N[2], X[2])`` compound sums with
    weight 1/2 each; ``"counter-freq"`` pairs ``N[1]`` with ``X[2]`` and vice versa.
    """
    key = {"△△": "comonotone", "▽△": "counter-freq"}.get(family, family)
    if key not in ("comonotone", "counter-freq"):
        raise ValueError("family must be 'comonotone' or 'counter-freq'")
    pairs = [(1, 1), (2, 2)] if key == "comonotone" else [(1, 2), (2, 1)]
    e, e2 = 0.0, 0.0
    for j, l in pairs:
        mn, mn2 = freq.order_moment(j, 1), freq.order_moment(j, 2)
        if l == 1:
            mx, mx2 = sev.min_moment(1), sev.min_moment(2)
        else:
            mx, mx2 = sev.max_moment(1), sev.max_moment(2)
        e += 0.5 * mn * mx
        # E[S_j^2] = E[N] Var(X) + E[N^2] E[X]^2 for a compound sum with iid claims
        e2 += 0.5 * (mn * (mx2 - mx * mx) + mn2 * mx * mx)
    return e, e2 - e * e


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def _mixed_count_transform(m: CollectiveRiskModel, a, b):
    """``sum_i 1/2 sum_n gamma_{N[1+i]}(n) E[a^(n-K_n) b^(K_n) | I_0 = i]``.

    ``a`` and ``b`` are arrays of transform values of ``X[1]`` and ``X[2]`` at the
    same arguments.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    freq, dep = m.freq, m.dep
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.result_type(a, b, float))
    for i0 in (0, 1):
        g = freq.order_pmf(1 + i0)
        mix = dep.iid_mixture(i0)
        if mix is not None:
            for w, pi in mix:
                z = (1.0 - pi) * a + pi * b
                out = out + 0.5 * w * _horner(g, z)
            continue
        acc = np.zeros_like(out)
        for n in range(len(g)):
            if g[n] == 0.0:
                continue
            kn = dep.kn_pmf(i0, n)
            term = sum(kn[k] * a ** (n - k) * b**k for k in range(n + 1) if kn[k] != 0.0)
            acc = acc + g[n] * term
        out = out + 0.5 * acc
    return out


def _horner(coef, z):
    acc = np.zeros(np.shape(z), dtype=np.result_type(z, float))
    for c in coef[::-1]:
        acc = acc * z + c
    return acc


def lst_s(m: CollectiveRiskModel, t):
    """Laplace-Stieltjes transform ``E[exp(-t S)]``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    a = np.asarray(m.sev.min_lst(t), dtype=float)
    b = np.asarray(m.sev.max_lst(t), dtype=float)
    out = _mixed_count_transform(m, a, b)
    return out if out.ndim else float(out)


def closed_form_exp_geometric(p: float, beta: float, family: str, t):
    """Closed-form transform for geometric counts and exponential claims with rate ``beta``."""
    if not 0 < p < 1 or beta <= 0:
        raise ValueError("need 0 < p < 1 and beta > 0")
    key = {"△△": "comonotone", "▽△": "counter-freq"}.get(family, family)
    t = np.asarray(t, dtype=float)
    b1 = 2 * beta * p
    b2 = 2 * beta * p * (2 - p)
    r34 = math.sqrt(9 - 8 * p)
    b3, b4 = beta / 2 * (3 - r34), beta / 2 * (3 + r34)
    r56 = math.sqrt(1 + 8 * (1 - p) ** 2)
    b5, b6 = beta / 2 * (3 - r56), beta / 2 * (3 + r56)

    def L(bj):
        return bj / (bj + t)

    h = (1 - p) / 2
    tail56 = h * b6 / (b6 - b5) * L(b5) + h * b5 / (b5 - b6) * L(b6)
    if key == "comonotone":
        inner = h * L(b2) + b4 / (b4 - b3) * L(b3) + b3 / (b3 - b4) * L(b4) - tail56
    elif key == "counter-freq":
        inner = L(b1) - h * L(b2) + tail56
    else:
        raise ValueError("family must be 'comonotone' or 'counter-freq'")
    out = p + (1 - p) * inner
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Aggregate distributions
# ---------------------------------------------------------------------------


class AggregateDistribution:
    kind = "abstract"
    truncation = 0.0

    def risk_measures(self, kappas: Sequence[float]):
        return [(float(k), self.quantile(k), self.tvar(k)) for k in kappas]


class MomentOnlyAggregate(AggregateDistribution):
    kind = "moment-only"

    def __init__(self, mean: float, variance: float):
        self.mean = float(mean)
        self.variance = float(variance)

    def _no_law(self, *_):
        raise ValueError("only moments are available for this aggregate; discretise the severity for its distribution")

    cdf = quantile = tvar = stop_loss = _no_law


class MixedErlangAggregate(AggregateDistribution):
    """``S`` with an atom ``masses[0]`` at zero and Erlang(j, rate) components."""

    kind = "mixed-erlang"

    def __init__(self, rate: float, masses, truncation: float = 0.0):
        self.rate = float(rate)
        masses = np.asarray(masses, dtype=float)
        masses.setflags(write=False)
        self.masses = masses
        self.truncation = float(truncation)
        self._j = np.arange(1, len(masses))

    @property
    def atom(self) -> float:
        return float(self.masses[0])

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        g = special.gammainc(self._j, self.rate * x[..., None])
        out = self.atom + g @ self.masses[1:]
        return out if out.ndim else float(out)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        g = special.gammaincc(self._j, self.rate * x[..., None])
        out = g @ self.masses[1:] + self.truncation
        return out if out.ndim else float(out)

    @property
    def mean(self) -> float:
        return float(self._j @ self.masses[1:] / self.rate)

    @property
    def second_moment(self) -> float:
        return float((self._j * (self._j + 1.0)) @ self.masses[1:] / self.rate**2)

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    def lst(self, t):
        t = np.asarray(t, dtype=float)
        z = self.rate / (self.rate + t)
        out = self.atom + np.power.outer(z, self._j) @ self.masses[1:]
        return out if out.ndim else float(out)

    def quantile(self, kappa: float) -> float:
        _check_kappa(kappa)
        if kappa <= self.atom:
            return 0.0
        hi = max(self.mean, 1.0 / self.rate)
        while self.cdf(hi) < kappa:
            hi *= 2.0
            if hi > 1e300:
                raise TruncationError("quantile lies beyond the retained mass")
        return float(optimize.brentq(lambda x: self.cdf(x) - kappa, 0.0, hi, xtol=1e-12 * hi, rtol=1e-15, maxiter=500))

    def tail_expectation(self, q: float) -> float:
        """``E[S 1{S > q}]``."""
        j = self._j
        return float((j / self.rate * special.gammaincc(j + 1, self.rate * max(q, 0.0))) @ self.masses[1:])

    def tvar(self, kappa: float) -> float:
        q = self.quantile(kappa)
        F = self.cdf(q)
        return (self.tail_expectation(q) + q * (F - kappa)) / (1.0 - kappa)

    def stop_loss(self, d):
        d = np.maximum(np.asarray(d, dtype=float), 0.0)[..., None]
        j = self._j
        bd = self.rate * d
        vals = j / self.rate * special.gammaincc(j + 1, bd) - d * special.gammaincc(j, bd)
        out = vals @ self.masses[1:]
        return out if out.ndim else float(out)


class GridAggregate(AggregateDistribution):
    """``S`` on ``{0, h, 2h, ...}``."""

    kind = "discrete-grid"

    def __init__(self, step: float, pmf, truncation: float = 0.0):
        self.step = float(step)
        pmf = np.asarray(pmf, dtype=float)
        pmf.setflags(write=False)
        self.pmf = pmf
        self.points = np.arange(len(pmf)) * self.step
        self.cdf_values = np.cumsum(pmf)
        self.truncation = float(truncation)

    @property
    def atom(self) -> float:
        return float(self.pmf[0])

    def cdf(self, x):
        i = np.floor(np.asarray(x, dtype=float) / self.step + 1e-9).astype(int)
        out = np.where(i < 0, 0.0, self.cdf_values[np.clip(i, 0, len(self.pmf) - 1)])
        return out if out.ndim else float(out)

    @property
    def mean(self) -> float:
        return float(self.points @ self.pmf)

    @property
    def second_moment(self) -> float:
        return float(self.points**2 @ self.pmf)

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    def quantile(self, kappa: float) -> float:
        _check_kappa(kappa)
        return float(self.points[_left_inverse(self.cdf_values, kappa)])

    def tvar(self, kappa: float) -> float:
        q = self.quantile(kappa)
        above = self.points > q
        tail = float(self.points[above] @ self.pmf[above])
        return (tail + q * (self.cdf(q) - kappa)) / (1.0 - kappa)

    def stop_loss(self, d):
        d = np.asarray(d, dtype=float)
        out = np.maximum(self.points - d[..., None], 0.0) @ self.pmf
        return out if out.ndim else float(out)

    def lst(self, t):
        t = np.asarray(t, dtype=float)
        out = np.exp(-np.multiply.outer(t, self.points)) @ self.pmf
        return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Mixed Erlang route
# ---------------------------------------------------------------------------


def _as_mixed_erlang(sev: Severity) -> MixedErlang:
    if isinstance(sev, MixedErlang):
        return sev
    if isinstance(sev, Exponential):
        return MixedErlang(sev.rate, [1.0])
    if isinstance(sev, Gamma) and sev.shape == int(sev.shape):
        return sev.as_mixed_erlang()
    raise TypeError("severity not mixed-Erlang")


def _conv(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    if min(len(a), len(b)) > 64:
        out = signal.fftconvolve(a, b)[:length]
    else:
        out = np.convolve(a, b)[:length]
    return out


def _series_compose(g: np.ndarray, z: np.ndarray, length: int) -> np.ndarray:
    """Coefficients of ``sum_n g[n] z(u)^n`` truncated to ``length`` terms."""
    acc = np.zeros(1)
    for c in g[::-1]:
        acc = _conv(acc, z, length)
        if len(acc) == 0:
            acc = np.zeros(1)
        acc = acc.copy()
        acc[0] += c
    out = np.zeros(length)
    out[: len(acc)] = acc[:length]
    return out


def mixed_erlang_aggregate(m: CollectiveRiskModel, max_len: int = 1 << 15, eps: float = 1e-10) -> MixedErlangAggregate:
    """Exact law of ``S`` when the severity is mixed Erlang.

    Returns masses of the count ``M`` such that ``S`` is mixed Erlang with rate
    ``2 beta`` and Erlang-order law ``M`` (order 0 is the atom at zero).
    """
    me = _as_mixed_erlang(m.sev)
    pair = me.order_stats()
    q1 = np.concatenate([[0.0], pair.min_law.masses])
    q2 = np.concatenate([[0.0], pair.max_law.masses])
    n_max = m.freq.n_max
    length = min(max_len, n_max * (max(len(q1), len(q2)) - 1) + 1)
    total = np.zeros(length)
    for i0 in (0, 1):
        g = m.freq.order_pmf(1 + i0)
        mix = m.dep.iid_mixture(i0)
        if mix is not None:
            for w, pi in mix:
                z = np.zeros(max(len(q1), len(q2)))
                z[: len(q1)] += (1.0 - pi) * q1
                z[: len(q2)] += pi * q2
                total += 0.5 * w * _series_compose(g, z, length)
            continue
        p1 = [np.ones(1)]
        p2 = [np.ones(1)]
        for _ in range(n_max):
            p1.append(_conv(p1[-1], q1, length))
            p2.append(_conv(p2[-1], q2, length))
        for n in range(n_max + 1):
            if g[n] == 0.0:
                continue
            kn = m.dep.kn_pmf(i0, n)
            for k in range(n + 1):
                if kn[k] == 0.0:
                    continue
                term = _conv(p1[n - k], p2[k], length)
                total[: len(term)] += 0.5 * g[n] * kn[k] * term
    lo = total.min(initial=0.0)
    if lo < -NEG_ROUNDOFF:
        raise ArithmeticError(f"negative mass {lo:.3g} in count mixture")
    total = np.clip(total, 0.0, None)
    lost = max(0.0, 1.0 - total.sum())
    if lost > eps + m.freq.tail_mass:
        raise TruncationError(f"mass truncation {lost:.3g} exceeds {eps:.1g}; raise max_len")
    return MixedErlangAggregate(2.0 * me.rate, total, truncation=lost)


# ---------------------------------------------------------------------------
# Discrete route
# ---------------------------------------------------------------------------


def discretize_severity(sev: Severity, step: float, span: Optional[int] = None, eps: float = 1e-12) -> GridSeverity:
    """Mean-preserving local moment matching on ``{0, h, ..., (span-1) h}``.

    Mass beyond the last point is folded onto it; ``span`` defaults to the
    smallest grid leaving tail probability below ``eps``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    sev.moment(1)
    if span is None:
        span = int(math.ceil(sev.quantile(1.0 - eps) / step)) + 2
    if span < 2:
        raise ValueError("span must be at least 2 points")
    tail = float(sev.sf((span - 1) * step))
    if tail > eps:
        raise SupportError(f"span too small: tail probability {tail:.3g} beyond the grid exceeds {eps:.1g}")
    lev = np.asarray(sev.limited_mean(np.arange(span + 1) * step), dtype=float)
    f = np.empty(span)
    f[0] = 1.0 - lev[1] / step
    f[1:-1] = (2.0 * lev[1:-2] - lev[:-3] - lev[2:-1]) / step
    f[-1] = (lev[span - 1] - lev[span - 2]) / step
    f = np.clip(f, 0.0, None)
    return GridSeverity(step, f / f.sum(), tol=1e-8)


def discrete_aggregate_fft(m: CollectiveRiskModel, length: int = 4096, eps_alias: float = ALIAS_EPS) -> GridAggregate:
    """Law of ``S`` for a grid severity by evaluating its pgf at roots of unity."""
    sev = m.sev
    if not isinstance(sev, GridSeverity):
        raise TypeError("severity must be a discrete grid; see discretize_severity")
    if length < 2 or length & (length - 1):
        raise ValueError("grid length must be a power of two")
    if len(sev.masses) > length:
        raise AliasingError("aliasing exceeds tolerance — increase L (severity grid longer than L)")
    f1 = np.zeros(length)
    f2 = np.zeros(length)
    f1[: len(sev.masses)] = sev.order_masses(1)
    f2[: len(sev.masses)] = sev.order_masses(2)
    phi = _mixed_count_transform(m, np.fft.fft(f1), np.fft.fft(f2))
    pmf = np.real(np.fft.ifft(phi))
    lo = pmf.min()
    if lo < -NEG_ROUNDOFF:
        raise ArithmeticError(f"negative probability {lo:.3g} after inversion")
    clipped = float(-pmf[pmf < 0].sum())
    pmf = np.clip(pmf, 0.0, None)
    if clipped > 0:
        log.debug("clipped %.3g of negative round-off mass", clipped)
    pmf /= pmf.sum()

    # every unit of wrapped probability lowers the computed mean by at least L h
    try:
        e_exact = expected_s(m).total
    except MomentError:
        e_exact = None
    points = np.arange(length) * sev.step
    e_fft = float(points @ pmf)
    if e_exact is not None:
        wrapped = max(0.0, e_exact - e_fft) / (length * sev.step)
    else:
        wrapped = float(pmf[-max(1, length // 64):].sum())
    if wrapped > eps_alias:
        raise AliasingError(f"aliasing exceeds tolerance — increase L (estimated wrapped mass {wrapped:.3g})")
    return GridAggregate(sev.step, pmf, truncation=wrapped + m.freq.tail_mass)


def aggregate_distribution(m: CollectiveRiskModel, *, step: Optional[float] = None, length: int = 4096):
    """Pick the exact representation the severity allows."""
    sev = m.sev
    if isinstance(sev, GridSeverity):
        return discrete_aggregate_fft(m, length)
    try:
        _as_mixed_erlang(sev)
        return mixed_erlang_aggregate(m)
    except TypeError:
        pass
    if step is not None:
        grid = discretize_severity(sev, step, span=None)
        if len(grid.masses) > length:
            raise AliasingError("aliasing exceeds tolerance — increase L (severity grid longer than L)")
        return discrete_aggregate_fft(CollectiveRiskModel(m.freq, grid, m.dep), length)
    return MomentOnlyAggregate(expected_s(m).total, variance_s(m).total)


def risk_measures(agg: AggregateDistribution, kappas: Sequence[float]):
    """Rows ``(kappa, VaR, TVaR)``."""
    return agg.risk_measures(kappas)


def extremal_counterpart(m: CollectiveRiskModel, family: str = "comonotone") -> CollectiveRiskModel:
    dep: BernoulliDependence = Comonotone() if family == "comonotone" else CounterFreq()
    return m.with_dependence(dep)
