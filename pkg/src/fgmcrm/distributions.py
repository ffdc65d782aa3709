"""Marginal claim-count and claim-size laws and their two-draw order statistics.

Every law here exposes the order statistics of two iid copies, ``Z[1] = min``
and ``Z[2] = max``.  The identity ``E[phi(Z[1])] + E[phi(Z[2])] = 2 E[phi(Z)]``
is used throughout, so a law only has to know how to integrate against the
minimum; the maximum follows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import MomentError

DEFAULT_EPS_N = 1e-12
QUAD_RTOL = 1e-10
_CDF_TOL = 1e-13


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _left_inverse(cdf: np.ndarray, kappa: float) -> int:
    """Index of the first cdf value >= kappa."""
    idx = int(np.searchsorted(cdf, kappa - _CDF_TOL, side="left"))
    return min(idx, len(cdf) - 1)


def _scalar_or_array(a):
    a = np.asarray(a, dtype=float)
    return a if a.ndim else float(a)


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")


def _quad(fn: Callable[[float], float], a: float, b: float) -> float:
    val, _ = integrate.quad(fn, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=400)
    return float(val)


def _quad_halfline(fn: Callable[[float], float], scale: float) -> float:
    # splitting at a few multiples of the scale keeps quad away from the
    # flat far tail where it otherwise samples nothing useful
    cuts = [0.0] + [scale * c for c in (0.5, 1.0, 2.0, 5.0, 20.0, 100.0)]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += _quad(fn, a, b)
    return total + _quad(fn, cuts[-1], np.inf)


# ---------------------------------------------------------------------------
# Frequency
# ---------------------------------------------------------------------------


class FrequencyDistribution:
    """A claim-count law on ``0..n_max`` with the tail mass beyond it recorded.

    Truncated laws are never renormalised: ``tail_mass`` is the exact
    probability ``Pr(N > n_max)`` and callers propagate it as an error bound.
    """

    def __init__(
        self,
        pmf,
        *,
        tail_mass: float = 0.0,
        sf=None,
        mean: Optional[float] = None,
        second_moment: Optional[float] = None,
        name: str = "pmf",
        params: Optional[dict] = None,
    ):
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 1 or len(pmf) == 0:
            raise ValueError("pmf must be a non-empty 1-D sequence")
        if np.any(pmf < -1e-15) or np.any(pmf > 1 + 1e-15):
            raise ValueError("pmf values must lie in [0, 1]")
        pmf = np.clip(pmf, 0.0, 1.0)
        if sf is None:
            sf = tail_mass + np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
        sf = np.clip(np.asarray(sf, dtype=float), 0.0, 1.0)
        total = pmf.sum() + tail_mass
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"pmf plus tail mass sums to {total}, not 1")
        self.pmf = _readonly(pmf)
        self.sf = _readonly(sf)
        self.cdf = _readonly(1.0 - sf)
        self.tail_mass = float(tail_mass)
        self.name = name
        self.params = dict(params or {})
        n = np.arange(len(pmf), dtype=float)
        self._mean = float(mean) if mean is not None else float(n @ pmf)
        self._m2 = float(second_moment) if second_moment is not None else float((n * n) @ pmf)

    # constructors ---------------------------------------------------------

    @classmethod
    def _from_scipy(cls, dist, name, params, eps, mean=None, m2=None):
        n_max = int(dist.isf(eps / 2.0))
        while dist.sf(n_max) > eps / 2.0:
            n_max += 1
        n = np.arange(n_max + 1)
        if mean is None:
            mean = float(dist.mean())
        if m2 is None:
            m2 = float(dist.var()) + mean * mean
        return cls(
            dist.pmf(n),
            tail_mass=float(dist.sf(n_max)),
            sf=dist.sf(n),
            mean=mean,
            second_moment=m2,
            name=name,
            params=params,
        )

    @classmethod
    def poisson(cls, rate: float, eps: float = DEFAULT_EPS_N) -> "FrequencyDistribution":
        if rate <= 0:
            raise ValueError("Poisson rate must be positive")
        return cls._from_scipy(stats.poisson(rate), "poisson", {"rate": rate}, eps)

    @classmethod
    def negative_binomial(cls, r: float, p: float, eps: float = DEFAULT_EPS_N) -> "FrequencyDistribution":
        """Failures before the ``r``-th success; mean ``r(1-p)/p``."""
        if r <= 0 or not 0 < p < 1:
            raise ValueError("negative binomial needs r > 0 and 0 < p < 1")
        return cls._from_scipy(stats.nbinom(r, p), "negative_binomial", {"r": r, "p": p}, eps)

    @classmethod
    def geometric(cls, p: float, eps: float = DEFAULT_EPS_N) -> "FrequencyDistribution":
        """pmf ``p (1-p)^k`` on ``k = 0, 1, ...``."""
        if not 0 < p <= 1:
            raise ValueError("geometric needs 0 < p <= 1")
        if p == 1:
            return cls.degenerate(0)
        return cls._from_scipy(stats.nbinom(1, p), "geometric", {"p": p}, eps)

    @classmethod
    def binomial(cls, n: int, p: float) -> "FrequencyDistribution":
        if n < 0 or not 0 <= p <= 1:
            raise ValueError("binomial needs n >= 0 and 0 <= p <= 1")
        k = np.arange(n + 1)
        d = stats.binom(n, p)
        return cls(d.pmf(k), sf=d.sf(k), name="binomial", params={"n": n, "p": p})

    @classmethod
    def degenerate(cls, value: int) -> "FrequencyDistribution":
        if value < 0 or int(value) != value:
            raise ValueError("degenerate count must be a non-negative integer")
        pmf = np.zeros(int(value) + 1)
        pmf[-1] = 1.0
        return cls(pmf, name="degenerate", params={"value": int(value)})

    @classmethod
    def from_pmf(cls, values) -> "FrequencyDistribution":
        return cls(values, name="pmf", params={"values": list(map(float, values))})

    # accessors ------------------------------------------------------------

    @property
    def n_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(len(self.pmf))

    def pmf_at(self, n):
        n = np.asarray(n)
        inside = (n >= 0) & (n <= self.n_max)
        out = np.where(inside, self.pmf[np.clip(n, 0, self.n_max)], 0.0)
        return out if out.ndim else float(out)

    def cdf_at(self, n):
        n = np.asarray(n)
        out = np.where(n < 0, 0.0, np.where(n > self.n_max, 1.0 - self.tail_mass, self.cdf[np.clip(n, 0, self.n_max)]))
        return out if out.ndim else float(out)

    def pgf(self, z):
        """Probability generating function on the truncated support (Horner)."""
        z = np.asarray(z)
        acc = np.zeros(z.shape, dtype=np.result_type(z, float))
        for c in self.pmf[::-1]:
            acc = acc * z + c
        return acc if acc.ndim else acc[()]

    @property
    def mean(self) -> float:
        return self._mean

    @property
    def second_moment(self) -> float:
        return self._m2

    @property
    def variance(self) -> float:
        return self._m2 - self._mean**2

    def moment(self, m: int) -> float:
        if m == 1:
            return self._mean
        if m == 2:
            return self._m2
        return float(np.arange(len(self.pmf), dtype=float) ** m @ self.pmf)

    # order statistics -----------------------------------------------------

    def order_pmf(self, j: int) -> np.ndarray:
        """pmf of the min (``j=1``) or max (``j=2``) of two iid draws on ``0..n_max``."""
        sf_prev = np.concatenate([[1.0], self.sf[:-1]])
        cdf_prev = np.concatenate([[0.0], self.cdf[:-1]])
        if j == 1:
            return sf_prev**2 - self.sf**2
        if j == 2:
            return self.cdf**2 - cdf_prev**2
        raise ValueError("order statistic index must be 1 or 2")

    def order_moment(self, j: int, m: int = 1) -> float:
        n = np.arange(len(self.pmf), dtype=float)
        # E[N[1]^m] = sum_n ((n+1)^m - n^m) Pr(N[1] > n)
        min_m = float(((n + 1) ** m - n**m) @ (self.sf**2))
        if j == 1:
            return min_m
        if j == 2:
            return 2.0 * self.moment(m) - min_m
        raise ValueError("order statistic index must be 1 or 2")

    def order_variance(self, j: int) -> float:
        return self.order_moment(j, 2) - self.order_moment(j, 1) ** 2

    def order_stats(self) -> "OrderStatisticPair":
        if self.name == "geometric":
            p = self.params["p"]
            lo = FrequencyDistribution.geometric(p * (2 - p), eps=max(self.tail_mass, 1e-300))
        else:
            g1 = self.order_pmf(1)
            lo = FrequencyDistribution(g1, tail_mass=max(0.0, 1.0 - g1.sum()), sf=self.sf**2,
                                       mean=self.order_moment(1, 1),
                                       second_moment=self.order_moment(1, 2), name="min")
        g2 = self.order_pmf(2)
        hi = FrequencyDistribution(g2, tail_mass=max(0.0, 1.0 - g2.sum()), sf=1.0 - self.cdf**2,
                                   mean=self.order_moment(2, 1),
                                   second_moment=self.order_moment(2, 2), name="max")
        return OrderStatisticPair(lo, hi)

    def ratio(self, n):
        """``(Pr(N[2]=n) - Pr(N[1]=n)) / Pr(N=n)`` in its cdf-average form."""
        n = np.asarray(n)
        return 2.0 * (self.cdf_at(n - 1) + self.cdf_at(n)) - 2.0

    def expect(self, phi: Callable) -> float:
        return float(np.asarray(phi(self.support), dtype=float) @ self.pmf)

    def order_expect(self, j: int, phi: Callable) -> float:
        return float(np.asarray(phi(self.support), dtype=float) @ self.order_pmf(j))

    # risk measures --------------------------------------------------------

    def quantile(self, kappa: float) -> int:
        _check_kappa(kappa)
        return _left_inverse(self.cdf, kappa)

    def tvar(self, kappa: float) -> float:
        _check_kappa(kappa)
        q = self.quantile(kappa)
        n = self.support.astype(float)
        excess = float(np.maximum(n - q, 0.0) @ self.pmf)
        return q + excess / (1.0 - kappa)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.inverse_cdf(rng.random(size))

    def inverse_cdf(self, u) -> np.ndarray:
        idx = np.searchsorted(self.cdf, np.asarray(u), side="left")
        return np.minimum(idx, self.n_max)

    def __repr__(self) -> str:
        return f"FrequencyDistribution({self.name}, {self.params})"


# ---------------------------------------------------------------------------
# Severity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderStatisticPair:
    min_law: object
    max_law: object

    def spacing(self, m: int = 1) -> float:
        """``E[Z[2]^m] - E[Z[1]^m]``."""
        return self.max_law.moment(m) - self.min_law.moment(m)


class Severity:
    """Base class for a non-negative claim-size law.

    Subclasses provide ``cdf``, ``sf``, ``moment``, ``min_moment``, ``lst``,
    ``min_lst`` and ``limited_mean``; the rest is generic.
    """

    discrete = False
    scale = 1.0

    def _require_moment(self, m: int) -> None:
        pass

    def mean_value(self) -> float:
        return self.moment(1)

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    def max_moment(self, m: int) -> float:
        return 2.0 * self.moment(m) - self.min_moment(m)

    def max_lst(self, t):
        return 2.0 * np.asarray(self.lst(t)) - np.asarray(self.min_lst(t))

    def min_moment(self, m: int) -> float:
        self._require_moment(m)
        return _quad_halfline(lambda x: m * x ** (m - 1) * self.sf(x) ** 2, self.scale)

    def min_lst(self, t):
        def one(tt):
            if tt == 0:
                return 1.0
            return _quad_halfline(lambda x: math.exp(-tt * x) * 2.0 * self.pdf(x) * self.sf(x), self.scale)

        return np.vectorize(one, otypes=[float])(np.asarray(t, dtype=float))

    def lst(self, t):
        def one(tt):
            if tt == 0:
                return 1.0
            return _quad_halfline(lambda x: math.exp(-tt * x) * self.pdf(x), self.scale)

        return np.vectorize(one, otypes=[float])(np.asarray(t, dtype=float))

    def limited_mean(self, d):
        """``E[min(X, d)]``, vectorised over ``d``."""
        def one(dd):
            return 0.0 if dd <= 0 else _quad(lambda x: float(self.sf(x)), 0.0, dd)
        return _scalar_or_array(np.vectorize(one, otypes=[float])(np.asarray(d, dtype=float)))

    def stop_loss(self, d: float) -> float:
        return self.mean - self.limited_mean(d)

    def expect(self, phi: Callable) -> float:
        return _quad_halfline(lambda x: float(phi(x)) * self.pdf(x), self.scale)

    def min_expect(self, phi: Callable) -> float:
        return _quad_halfline(lambda x: float(phi(x)) * 2.0 * self.pdf(x) * self.sf(x), self.scale)

    def max_expect(self, phi: Callable) -> float:
        return 2.0 * self.expect(phi) - self.min_expect(phi)

    def order_stats(self) -> OrderStatisticPair:
        return OrderStatisticPair(OrderStatisticLaw(self, 1), OrderStatisticLaw(self, 2))

    def quantile(self, kappa: float) -> float:
        _check_kappa(kappa)
        return float(self._ppf(kappa))

    def tvar(self, kappa: float) -> float:
        _check_kappa(kappa)
        self._require_moment(1)
        q = self.quantile(kappa)
        return q + self.stop_loss(q) / (1.0 - kappa)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.asarray(self._ppf(rng.random(size)), dtype=float)

    def _ppf(self, u):
        raise NotImplementedError


class _ScipyContinuous(Severity):
    """Severity backed by a frozen scipy continuous distribution."""

    _dist = None

    def cdf(self, x):
        return self._dist.cdf(x)

    def sf(self, x):
        return self._dist.sf(x)

    def pdf(self, x):
        return self._dist.pdf(x)

    def _ppf(self, u):
        return self._dist.ppf(u)


class Exponential(_ScipyContinuous):
    def __init__(self, mean: float):
        if mean <= 0:
            raise ValueError("exponential mean must be positive")
        self.mean_ = float(mean)
        self.rate = 1.0 / self.mean_
        self.scale = self.mean_
        self._dist = stats.expon(scale=self.mean_)

    def moment(self, m: int) -> float:
        return math.factorial(m) * self.mean_**m

    def min_moment(self, m: int) -> float:
        return math.factorial(m) * (self.mean_ / 2.0) ** m

    def lst(self, t):
        t = np.asarray(t, dtype=float)
        return self.rate / (self.rate + t)

    def min_lst(self, t):
        t = np.asarray(t, dtype=float)
        return 2 * self.rate / (2 * self.rate + t)

    def limited_mean(self, d):
        d = np.maximum(np.asarray(d, dtype=float), 0.0)
        return _scalar_or_array(-self.mean_ * np.expm1(-d / self.mean_))

    def order_stats(self) -> OrderStatisticPair:
        return OrderStatisticPair(Exponential(self.mean_ / 2.0), OrderStatisticLaw(self, 2))

    def __repr__(self):
        return f"Exponential(mean={self.mean_})"


class Gamma(_ScipyContinuous):
    """Gamma with shape and *rate*; integer shapes use the exact Erlang route."""

    def __init__(self, shape: float, rate: float):
        if shape <= 0 or rate <= 0:
            raise ValueError("gamma shape and rate must be positive")
        self.shape = float(shape)
        self.rate = float(rate)
        self.scale = self.shape / self.rate
        self._dist = stats.gamma(a=self.shape, scale=1.0 / self.rate)
        self._erlang = None
        if self.shape == int(self.shape):
            q = np.zeros(int(self.shape))
            q[-1] = 1.0
            self._erlang = MixedErlang(self.rate, q)

    def moment(self, m: int) -> float:
        return float(np.exp(special.gammaln(self.shape + m) - special.gammaln(self.shape)) / self.rate**m)

    def min_moment(self, m: int) -> float:
        if self._erlang is not None:
            return self._erlang.min_moment(m)
        return super().min_moment(m)

    def lst(self, t):
        t = np.asarray(t, dtype=float)
        return (self.rate / (self.rate + t)) ** self.shape

    def min_lst(self, t):
        if self._erlang is not None:
            return self._erlang.min_lst(t)
        return super().min_lst(t)

    def limited_mean(self, d):
        d = np.maximum(np.asarray(d, dtype=float), 0.0)
        a, b = self.shape, self.rate
        return _scalar_or_array(a / b * special.gammainc(a + 1, b * d) + d * special.gammaincc(a, b * d))

    def order_stats(self) -> OrderStatisticPair:
        if self._erlang is not None:
            return self._erlang.order_stats()
        return super().order_stats()

    def as_mixed_erlang(self) -> "MixedErlang":
        if self._erlang is None:
            raise ValueError("only integer-shape gamma laws are Erlang")
        return self._erlang

    def __repr__(self):
        return f"Gamma(shape={self.shape}, rate={self.rate})"


class Pareto(_ScipyContinuous):
    """Pareto (Lomax) law with survival ``lam^alpha / (lam + x)^alpha``."""

    def __init__(self, alpha: float, lam: float):
        if alpha <= 0 or lam <= 0:
            raise ValueError("Pareto alpha and lambda must be positive")
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.scale = self.lam
        self._dist = stats.lomax(c=self.alpha, scale=self.lam)

    @classmethod
    def from_mean(cls, alpha: float, mean: float) -> "Pareto":
        return cls(alpha, mean * (alpha - 1.0))

    @staticmethod
    def _lomax_moment(alpha: float, lam: float, m: int) -> float:
        if alpha <= m:
            raise MomentError(f"moment of order {m} does not exist for Pareto alpha={alpha}")
        return lam**m * math.factorial(m) / math.prod(alpha - i for i in range(1, m + 1))

    def _require_moment(self, m: int) -> None:
        if self.alpha <= m:
            raise MomentError(f"moment of order {m} does not exist for Pareto alpha={self.alpha}")

    def moment(self, m: int) -> float:
        return self._lomax_moment(self.alpha, self.lam, m)

    def min_moment(self, m: int) -> float:
        return self._lomax_moment(2.0 * self.alpha, self.lam, m)

    def max_moment(self, m: int) -> float:
        self._require_moment(m)
        return super().max_moment(m)

    def limited_mean(self, d):
        d = np.maximum(np.asarray(d, dtype=float), 0.0)
        a, lam = self.alpha, self.lam
        if a == 1.0:
            return _scalar_or_array(lam * np.log1p(d / lam))
        return _scalar_or_array(-lam / (a - 1.0) * np.expm1(-(a - 1.0) * np.log1p(d / lam)))

    def stop_loss(self, d: float) -> float:
        self._require_moment(1)
        return super().stop_loss(d)

    def order_stats(self) -> OrderStatisticPair:
        return OrderStatisticPair(Pareto(2.0 * self.alpha, self.lam), OrderStatisticLaw(self, 2))

    def __repr__(self):
        return f"Pareto(alpha={self.alpha}, lam={self.lam})"


class Lognormal(_ScipyContinuous):
    """Lognormal parameterised by its mean and variance."""

    def __init__(self, mean: float, variance: float):
        if mean <= 0 or variance <= 0:
            raise ValueError("lognormal mean and variance must be positive")
        self.mean_ = float(mean)
        self.var_ = float(variance)
        self.sigma2 = math.log1p(self.var_ / self.mean_**2)
        self.mu = math.log(self.mean_) - self.sigma2 / 2.0
        self.sigma = math.sqrt(self.sigma2)
        self.scale = self.mean_
        self._dist = stats.lognorm(s=self.sigma, scale=math.exp(self.mu))

    def moment(self, m: int) -> float:
        return math.exp(m * self.mu + m * m * self.sigma2 / 2.0)

    def limited_mean(self, d):
        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(d, 0.0)) - self.mu) / self.sigma
        out = self.mean_ * stats.norm.cdf(z - self.sigma) + np.maximum(d, 0.0) * stats.norm.sf(z)
        return _scalar_or_array(np.where(d > 0, out, 0.0))

    def __repr__(self):
        return f"Lognormal(mean={self.mean_}, variance={self.var_})"


class MixedErlang(Severity):
    """Mixture of Erlang(k, rate) laws, ``masses[k-1]`` on order ``k``."""

    def __init__(self, rate: float, masses, tol: float = 1e-10):
        masses = np.asarray(masses, dtype=float)
        if rate <= 0:
            raise ValueError("mixed Erlang rate must be positive")
        if masses.ndim != 1 or len(masses) == 0 or np.any(masses < -1e-15):
            raise ValueError("mixed Erlang masses must be a non-negative 1-D sequence")
        if abs(masses.sum() - 1.0) > tol:
            raise ValueError(f"mixed Erlang masses sum to {masses.sum()}, not 1")
        self.rate = float(rate)
        self.masses = _readonly(np.clip(masses, 0.0, None))
        self.orders = np.arange(1, len(masses) + 1)
        self.scale = self.moment(1)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        g = special.gammainc(self.orders, self.rate * np.maximum(x, 0.0)[..., None])
        return g @ self.masses

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        g = special.gammaincc(self.orders, self.rate * np.maximum(x, 0.0)[..., None])
        return g @ self.masses

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        g = stats.gamma.pdf(x[..., None], a=self.orders, scale=1.0 / self.rate)
        return g @ self.masses

    def moment(self, m: int) -> float:
        k = self.orders
        return float(np.exp(special.gammaln(k + m) - special.gammaln(k)) @ self.masses / self.rate**m)

    def min_moment(self, m: int) -> float:
        return self.order_stats().min_law.moment(m)

    def lst(self, t):
        t = np.asarray(t, dtype=float)
        z = self.rate / (self.rate + t)
        return np.power.outer(z, self.orders) @ self.masses

    def min_lst(self, t):
        return self.order_stats().min_law.lst(t)

    def limited_mean(self, d):
        d = np.maximum(np.asarray(d, dtype=float), 0.0)[..., None]
        k = self.orders
        bd = self.rate * d
        part = k / self.rate * special.gammainc(k + 1, bd) + d * special.gammaincc(k, bd)
        return _scalar_or_array(part @ self.masses)

    def _ppf(self, u):
        u = np.asarray(u, dtype=float)
        hi = self.scale * 10.0
        while self.cdf(hi) < np.max(u, initial=0.0):
            hi *= 2.0
        def one(v):
            if v <= 0:
                return 0.0
            return optimize.brentq(lambda x: float(self.cdf(x)) - v, 0.0, hi, xtol=1e-12, rtol=1e-14)
        out = np.vectorize(one, otypes=[float])(u)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        k = rng.choice(self.orders, size=size, p=self.masses / self.masses.sum())
        return rng.gamma(k, 1.0 / self.rate)

    _os_cache = None

    def order_stats(self, eps: float = 1e-14) -> OrderStatisticPair:
        if self._os_cache is None:
            q1, q2 = mixed_erlang_order_masses(self.masses, eps)
            object.__setattr__(self, "_os_cache", OrderStatisticPair(
                MixedErlang(2 * self.rate, q1, tol=1e-9), MixedErlang(2 * self.rate, q2, tol=1e-9)))
        return self._os_cache

    def __repr__(self):
        return f"MixedErlang(rate={self.rate}, orders<={len(self.masses)})"


def mixed_erlang_order_masses(q, eps: float = 1e-14):
    """Erlang masses (rate doubled) of the min and max of two iid mixed Erlangs.

    ``q[k-1]`` is the mass on order ``k``.  The max has unbounded order
    support in general; it is cut once the remaining mass is below ``eps``.
    """
    q = np.asarray(q, dtype=float)
    K = len(q)
    k_out = 2 * K + 64
    while True:
        Q = np.concatenate([[0.0], np.cumsum(q), np.ones(k_out)])  # Q[j] = sum_{m<=j} q_m
        q_pad = np.concatenate([q, np.zeros(k_out)])
        q1 = np.zeros(k_out)
        q2 = np.zeros(k_out)
        for k in range(1, k_out + 1):
            m = np.arange(0, min(k, K))
            w = stats.binom.pmf(m, k - 1, 0.5) * q_pad[m]
            Qk = Q[k - 1 - m]
            q1[k - 1] = w @ (1.0 - Qk)
            q2[k - 1] = w @ Qk
        if 1.0 - q2.sum() <= eps and 1.0 - q1.sum() <= eps:
            break
        k_out *= 2
    last = max(np.flatnonzero(q1 > 0).max(initial=0), np.flatnonzero(q2 > eps * 1e-3).max(initial=0)) + 1
    q1, q2 = q1[:last], q2[:last]
    return q1, q2


class GridSeverity(Severity):
    """Claim-size law on the lattice ``{0, h, 2h, ...}``."""

    discrete = True

    def __init__(self, step: float, masses, tol: float = 1e-9):
        masses = np.asarray(masses, dtype=float)
        if step <= 0:
            raise ValueError("grid step must be positive")
        if masses.ndim != 1 or len(masses) == 0 or np.any(masses < -1e-15):
            raise ValueError("grid masses must be a non-negative 1-D sequence")
        if abs(masses.sum() - 1.0) > tol:
            raise ValueError(f"grid masses sum to {masses.sum()}, not 1")
        self.step = float(step)
        self.masses = _readonly(np.clip(masses, 0.0, None))
        self.points = _readonly(np.arange(len(masses)) * self.step)
        self.cdf_values = _readonly(np.cumsum(self.masses))
        self.scale = max(float(self.points @ self.masses), self.step)

    @classmethod
    def degenerate(cls, value: float) -> "GridSeverity":
        return cls(value, [0.0, 1.0])

    def _index(self, x):
        return np.floor(np.asarray(x, dtype=float) / self.step + 1e-9).astype(int)

    def cdf(self, x):
        i = self._index(x)
        out = np.where(i < 0, 0.0, self.cdf_values[np.clip(i, 0, len(self.masses) - 1)])
        return out if out.ndim else float(out)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def pmf(self, x):
        x = np.asarray(x, dtype=float)
        i = np.rint(x / self.step).astype(int)
        on = np.isclose(i * self.step, x) & (i >= 0) & (i < len(self.masses))
        out = np.where(on, self.masses[np.clip(i, 0, len(self.masses) - 1)], 0.0)
        return out if out.ndim else float(out)

    def moment(self, m: int) -> float:
        return float(self.points**m @ self.masses)

    def min_moment(self, m: int) -> float:
        return float(self.points**m @ self.order_masses(1))

    def lst(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.multiply.outer(t, self.points)) @ self.masses

    def min_lst(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.multiply.outer(t, self.points)) @ self.order_masses(1)

    def limited_mean(self, d):
        d = np.asarray(d, dtype=float)
        return _scalar_or_array(np.minimum(self.points, d[..., None]) @ self.masses)

    def expect(self, phi: Callable) -> float:
        return float(np.asarray(phi(self.points), dtype=float) @ self.masses)

    def min_expect(self, phi: Callable) -> float:
        return float(np.asarray(phi(self.points), dtype=float) @ self.order_masses(1))

    def order_masses(self, j: int) -> np.ndarray:
        F = self.cdf_values
        F_prev = np.concatenate([[0.0], F[:-1]])
        if j == 1:
            return (1.0 - F_prev) ** 2 - (1.0 - F) ** 2
        if j == 2:
            return F**2 - F_prev**2
        raise ValueError("order statistic index must be 1 or 2")

    def order_stats(self) -> OrderStatisticPair:
        return OrderStatisticPair(GridSeverity(self.step, self.order_masses(1)),
                                  GridSeverity(self.step, self.order_masses(2)))

    def quantile(self, kappa: float) -> float:
        _check_kappa(kappa)
        return float(self.points[_left_inverse(self.cdf_values, kappa)])

    def tvar(self, kappa: float) -> float:
        _check_kappa(kappa)
        q = self.quantile(kappa)
        return q + float(np.maximum(self.points - q, 0.0) @ self.masses) / (1.0 - kappa)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = np.searchsorted(self.cdf_values, rng.random(size), side="left")
        return np.minimum(idx, len(self.masses) - 1) * self.step

    def __repr__(self):
        return f"GridSeverity(step={self.step}, atoms={len(self.masses)})"


class OrderStatisticLaw(Severity):
    """Min (``which=1``) or max (``which=2``) of two iid draws of ``parent``."""

    def __init__(self, parent: Severity, which: int):
        if which not in (1, 2):
            raise ValueError("order statistic index must be 1 or 2")
        self.parent = parent
        self.which = which
        self.scale = parent.scale

    def _require_moment(self, m: int) -> None:
        self.parent._require_moment(m)

    def cdf(self, x):
        if self.which == 1:
            return 1.0 - self.parent.sf(x) ** 2
        return self.parent.cdf(x) ** 2

    def sf(self, x):
        if self.which == 1:
            return self.parent.sf(x) ** 2
        return 1.0 - self.parent.cdf(x) ** 2

    def pdf(self, x):
        other = self.parent.sf(x) if self.which == 1 else self.parent.cdf(x)
        return 2.0 * self.parent.pdf(x) * other

    def moment(self, m: int) -> float:
        if self.which == 1:
            return self.parent.min_moment(m)
        return self.parent.max_moment(m)

    def lst(self, t):
        if self.which == 1:
            return self.parent.min_lst(t)
        return self.parent.max_lst(t)

    def expect(self, phi: Callable) -> float:
        if self.which == 1:
            return self.parent.min_expect(phi)
        return self.parent.max_expect(phi)

    def _ppf(self, u):
        u = np.asarray(u, dtype=float)
        v = 1.0 - np.sqrt(1.0 - u) if self.which == 1 else np.sqrt(u)
        return self.parent._ppf(v)

    def __repr__(self):
        return f"OrderStatisticLaw({self.parent!r}, {self.which})"


# ---------------------------------------------------------------------------
# Generic accessors
# ---------------------------------------------------------------------------


def freq_order_pmf(freq: FrequencyDistribution, j: int, n: int) -> float:
    """Probability that the min (j=1) or max (j=2) of two iid counts equals ``n``."""
    if n < 0 or n > freq.n_max:
        return 0.0
    return float(freq.order_pmf(j)[n])


def sev_order_stats(sev: Severity) -> OrderStatisticPair:
    return sev.order_stats()


def quantile(law, kappa: float):
    """Left-inverse quantile ``inf{x : F(x) >= kappa}``."""
    return law.quantile(kappa)


def tvar(law, kappa: float) -> float:
    return law.tvar(kappa)
