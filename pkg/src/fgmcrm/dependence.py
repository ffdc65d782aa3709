"""FGM dependence as consistent families of symmetric Bernoulli vectors.

Coordinate 0 is the frequency indicator ``I_0``; coordinates ``1..k`` belong to
the claims.  A pmf on ``{0,1}^d`` is stored densely, with outcome ``i`` at
index ``sum_j i_j 2^j`` (bit ``j`` is coordinate ``j``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy import stats

from .errors import AsymmetricMarginals, FamilyDimensionError, InadmissibleTheta

MAX_DIM = 20
_TOL = 1e-12




def _fwht(v: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, ``out[J] = sum_i v[i] (-1)^|i & J|``."""
    out = np.array(v, dtype=float)
    h = 1
    n = len(out)
    while h < n:
        out = out.reshape(-1, 2, h)
        a = out[:, 0, :].copy()
        b = out[:, 1, :]
        out[:, 0, :] = a + b
        out[:, 1, :] = a - b
        out = out.reshape(n)
        h *= 2
    return out


def _check_dim(d: int) -> None:
    if d < 1 or d > MAX_DIM:
        raise ValueError(f"dimension must lie in 1..{MAX_DIM}, got {d}")


def _mask(subset) -> int:
    return sum(1 << j for j in subset)


def _subset(mask: int):
    return tuple(j for j in range(mask.bit_length()) if mask >> j & 1)


# ---------------------------------------------------------------------------
# ThetaSet and BernoulliPmf
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaSet:
    """FGM parameters ``theta_J`` for subsets ``J`` of ``{0..d-1}`` with ``|J| >= 2``."""

    d: int
    values: Mapping[tuple, float] = field(default_factory=dict)

    def __post_init__(self):
        _check_dim(self.d)
        clean = {}
        for key, val in dict(self.values).items():
            J = tuple(sorted(set(key)))
            if len(J) < 2:
                raise ValueError(f"theta index {key} must name at least two coordinates")
            if J[0] < 0 or J[-1] >= self.d:
                raise ValueError(f"theta index {key} is outside dimension {self.d}")
            if not -1.0 - _TOL <= val <= 1.0 + _TOL:
                raise ValueError(f"theta{J} = {val} is outside [-1, 1]")
            if val != 0.0:
                clean[J] = float(val)
        object.__setattr__(self, "values", clean)

    def __getitem__(self, J) -> float:
        return self.values.get(tuple(sorted(J)), 0.0)

    def coefficients(self) -> np.ndarray:
        """Character coefficients indexed by subset mask (mask 0 carries 1)."""
        c = np.zeros(2**self.d)
        c[0] = 1.0
        for J, val in self.values.items():
            c[_mask(J)] = val
        return c

    @classmethod
    def trivariate(cls, theta01: float, theta12: float, theta012: float = 0.0) -> "ThetaSet":
        """Exchangeable ``(I_0, I_1, I_2)`` with ``theta02 = theta01``."""
        return cls(3, {(0, 1): theta01, (0, 2): theta01, (1, 2): theta12, (0, 1, 2): theta012})


@dataclass(frozen=True)
class BernoulliPmf:
    d: int
    probs: np.ndarray

    def __post_init__(self):
        _check_dim(self.d)
        p = np.array(self.probs, dtype=float)
        if p.shape != (2**self.d,):
            raise ValueError(f"expected {2**self.d} probabilities, got shape {p.shape}")
        if np.any(p < -1e-12):
            raise ValueError("Bernoulli pmf has negative entries")
        if abs(p.sum() - 1.0) > 1e-12 * max(1, self.d):
            raise ValueError(f"Bernoulli pmf sums to {p.sum()}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_table(cls, table: Mapping[tuple, float]) -> "BernoulliPmf":
        d = len(next(iter(table)))
        p = np.zeros(2**d)
        for outcome, val in table.items():
            if len(outcome) != d or any(b not in (0, 1) for b in outcome):
                raise ValueError(f"bad outcome {outcome}")
            p[_mask(j for j, b in enumerate(outcome) if b)] += val
        return cls(d, p)

    def __call__(self, *outcome) -> float:
        if len(outcome) == 1 and not np.isscalar(outcome[0]):
            outcome = tuple(outcome[0])
        if len(outcome) != self.d:
            raise ValueError(f"outcome must have {self.d} coordinates")
        return float(self.probs[_mask(j for j, b in enumerate(outcome) if b)])

    def outcomes(self):
        idx = np.arange(2**self.d)
        return (idx[:, None] >> np.arange(self.d)) & 1

    def marginal_one(self, j: int) -> float:
        idx = np.arange(2**self.d)
        return float(self.probs[(idx >> j) & 1 == 1].sum())

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return all(abs(self.marginal_one(j) - 0.5) <= tol for j in range(self.d))

    def marginalize_last(self) -> "BernoulliPmf":
        if self.d == 1:
            raise ValueError("cannot marginalise a one-dimensional pmf")
        h = 2 ** (self.d - 1)
        return BernoulliPmf(self.d - 1, self.probs[:h] + self.probs[h:])

    def restrict(self, d: int) -> "BernoulliPmf":
        f = self
        while f.d > d:
            f = f.marginalize_last()
        return f

    def permute(self, perm) -> "BernoulliPmf":
        """Law of ``(I_perm[0], ..., I_perm[d-1])``."""
        perm = list(perm)
        out = self.outcomes()
        new_idx = (out[:, perm] << np.arange(self.d)).sum(axis=1)
        p = np.zeros_like(self.probs)
        np.add.at(p, new_idx, self.probs)
        return BernoulliPmf(self.d, p)

    def pair_prob(self, j: int, l: int) -> float:
        """``Pr(I_j = 1, I_l = 1)``."""
        idx = np.arange(2**self.d)
        both = ((idx >> j) & 1) & ((idx >> l) & 1)
        return float(self.probs[both == 1].sum())


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    min_value: float
    sign_vector: tuple

    def __bool__(self) -> bool:
        return self.ok


def check_admissible(theta: ThetaSet, tol: float = _TOL) -> AdmissibilityReport:
    """Evaluate ``1 + sum_J theta_J prod_{j in J} eps_j`` over every sign vector."""
    vals = _fwht(theta.coefficients())
    i = int(np.argmin(vals))
    eps = tuple(int(1 - 2 * ((i >> j) & 1)) for j in range(theta.d))
    return AdmissibilityReport(bool(vals[i] >= -tol), float(vals[i]), eps)


def theta_to_pmf(theta: ThetaSet) -> BernoulliPmf:
    rep = check_admissible(theta)
    if not rep.ok:
        raise InadmissibleTheta(f"inadmissible theta: sign vector {rep.sign_vector} gives {rep.min_value:.6g} < 0")
    vals = _fwht(theta.coefficients())
    return BernoulliPmf(theta.d, np.clip(vals, 0.0, None) / 2**theta.d)


def pmf_to_theta(f: BernoulliPmf, tol: float = 1e-12) -> ThetaSet:
    if not f.is_symmetric(tol=max(tol, 1e-12)):
        raise AsymmetricMarginals("asymmetric marginals: every Pr(I_j = 1) must be 1/2")
    c = _fwht(f.probs)
    values = {}
    for mask in range(2**f.d):
        J = _subset(mask)
        if len(J) >= 2 and abs(c[mask]) > 1e-15:
            values[J] = float(np.clip(c[mask], -1.0, 1.0))
    return ThetaSet(f.d, values)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnLaw:
    """Conditional pmf of ``K_n = I_1 + ... + I_n`` given ``I_0 = i0``."""

    n: int
    i0: int
    pmf: np.ndarray

    def mean(self) -> float:
        return float(np.arange(self.n + 1) @ self.pmf)


class BernoulliDependence:
    """A consistent family of joint laws of ``(I_0, I_1, ..., I_k)``."""

    tag = "abstract"
    symbol = ""
    max_k: Optional[int] = None
    exchangeable = True

    def _check_k(self, k: int) -> None:
        if k < 1:
            raise ValueError("k must be at least 1")
        if self.max_k is not None and k > self.max_k:
            raise FamilyDimensionError(f"k = {k} exceeds family definition ({self.tag} stops at k = {self.max_k})")

    def iid_mixture(self, i0: int):
        """Given ``I_0 = i0``, a list of ``(weight, pi)`` such that the claim
        indicators are iid Bernoulli(pi) within each component; ``None`` when
        the family has no such form."""
        return None

    def joint_pmf(self, k: int) -> BernoulliPmf:
        self._check_k(k)
        if k + 1 > MAX_DIM:
            raise ValueError(f"dense pmf limited to {MAX_DIM} coordinates")
        idx = np.arange(2 ** (k + 1))
        bits = (idx[:, None] >> np.arange(k + 1)) & 1
        ones = bits[:, 1:].sum(axis=1)
        p = np.zeros(len(idx))
        for i0 in (0, 1):
            sel = bits[:, 0] == i0
            for w, pi in self.iid_mixture(i0):
                p[sel] += 0.5 * w * pi ** ones[sel] * (1 - pi) ** (k - ones[sel])
        return BernoulliPmf(k + 1, p)

    def kn_pmf(self, i0: int, n: int) -> np.ndarray:
        if i0 not in (0, 1):
            raise ValueError("i0 must be 0 or 1")
        if n == 0:
            return np.ones(1)
        self._check_k(n)
        mix = self.iid_mixture(i0)
        kk = np.arange(n + 1)
        if mix is not None:
            return sum(w * stats.binom.pmf(kk, n, pi) for w, pi in mix)
        f = self.joint_pmf(n)
        bits = f.outcomes()
        sel = bits[:, 0] == i0
        return np.bincount(bits[sel, 1:].sum(axis=1), weights=2.0 * f.probs[sel], minlength=n + 1)

    def theta(self) -> ThetaSet:
        return pmf_to_theta(self.joint_pmf(2))

    # sampling -------------------------------------------------------------

    def sample_conditional(self, rng: np.random.Generator, i0: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        """Claim indicators given ``I_0``, flattened record by record."""
        i0 = np.asarray(i0, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        total = int(lengths.sum())
        if total == 0:
            return np.zeros(0, dtype=np.int8)
        pis = np.zeros(len(i0))
        for v in (0, 1):
            mix = self.iid_mixture(v)
            sel = i0 == v
            if not np.any(sel):
                continue
            w = np.array([m[0] for m in mix])
            pv = np.array([m[1] for m in mix])
            comp = rng.choice(len(w), size=int(sel.sum()), p=w / w.sum()) if len(w) > 1 else np.zeros(int(sel.sum()), int)
            pis[sel] = pv[comp]
        per_claim = np.repeat(pis, lengths)
        return (rng.random(total) < per_claim).astype(np.int8)

    def sample_joint(self, rng: np.random.Generator, lengths: np.ndarray):
        """``(I_0, claim indicators)`` drawn jointly for vectors of given lengths."""
        lengths = np.asarray(lengths, dtype=np.int64)
        i0 = (rng.random(len(lengths)) < 0.5).astype(np.int8)
        return i0, self.sample_conditional(rng, i0, lengths)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Independent(BernoulliDependence):
    tag = "independent"
    symbol = "⊥⊥"

    def iid_mixture(self, i0):
        return [(1.0, 0.5)]


class Comonotone(BernoulliDependence):
    tag = "comonotone"
    symbol = "△△"

    def iid_mixture(self, i0):
        return [(1.0, float(i0))]


class CounterFreq(BernoulliDependence):
    """Counter-monotone frequency indicator, comonotone claim indicators."""

    tag = "counter-freq"
    symbol = "▽△"

    def iid_mixture(self, i0):
        return [(1.0, float(1 - i0))]


class IndepFreqComonotoneSev(BernoulliDependence):
    tag = "indep-freq-comonotone-sev"
    symbol = "⊥△"

    def iid_mixture(self, i0):
        return [(0.5, 0.0), (0.5, 1.0)]


class AlphaMixture(BernoulliDependence):
    """``I_0`` a fair coin, claims iid Bernoulli(alpha) if ``I_0 = 1`` else Bernoulli(1 - alpha)."""

    tag = "alpha-mixture"

    def __init__(self, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        self.alpha = float(alpha)

    def iid_mixture(self, i0):
        return [(1.0, self.alpha if i0 == 1 else 1.0 - self.alpha)]

    def __repr__(self):
        return f"AlphaMixture(alpha={self.alpha})"


class _ExplicitBase(BernoulliDependence):
    _full: BernoulliPmf

    def joint_pmf(self, k: int) -> BernoulliPmf:
        self._check_k(k)
        return self._full.restrict(k + 1)

    def _cond_tables(self, k: int):
        f = self.joint_pmf(k)
        bits = f.outcomes()
        tables = {}
        for v in (0, 1):
            sel = np.flatnonzero(bits[:, 0] == v)
            p = 2.0 * f.probs[sel]
            tables[v] = (bits[sel, 1:], p / p.sum())
        return tables

    def sample_conditional(self, rng, i0, lengths):
        i0 = np.asarray(i0, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        out = np.zeros(int(lengths.sum()), dtype=np.int8)
        for k in np.unique(lengths):
            if k == 0:
                continue
            tables = self._cond_tables(int(k))
            for v in (0, 1):
                rec = np.flatnonzero((lengths == k) & (i0 == v))
                if len(rec) == 0:
                    continue
                rows, p = tables[v]
                pick = rows[rng.choice(len(p), size=len(rec), p=p)]
                pos = starts[rec][:, None] + np.arange(k)
                out[pos.ravel()] = pick.ravel()
        return out

    def sample_joint(self, rng, lengths):
        # draw the whole vector (I_0, ..., I_k) in one go, as a joint outcome
        lengths = np.asarray(lengths, dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        i0 = np.zeros(len(lengths), dtype=np.int8)
        out = np.zeros(int(lengths.sum()), dtype=np.int8)
        for k in np.unique(lengths):
            rec = np.flatnonzero(lengths == k)
            f = self.joint_pmf(max(int(k), 1))
            bits = f.outcomes()
            pick = bits[rng.choice(len(f.probs), size=len(rec), p=f.probs)]
            i0[rec] = pick[:, 0]
            if k > 0:
                pos = starts[rec][:, None] + np.arange(k)
                out[pos.ravel()] = pick[:, 1:].ravel()
        return i0, out


class IndepFreqCounterSev(_ExplicitBase):
    """``I_0`` independent of a countermonotone pair ``(I_1, I_2)``; defined for k <= 2."""

    tag = "indep-freq-counter-sev"
    symbol = "⊥▽"
    max_k = 2

    def __init__(self):
        self._full = BernoulliPmf.from_table({(0, 0, 1): 0.25, (0, 1, 0): 0.25, (1, 0, 1): 0.25, (1, 1, 0): 0.25})


class ExplicitSmallD(_ExplicitBase):
    """Dependence given by one explicit pmf of ``(I_0, ..., I_{d-1})``."""

    tag = "explicit"

    def __init__(self, pmf: BernoulliPmf | ThetaSet):
        if isinstance(pmf, ThetaSet):
            pmf = theta_to_pmf(pmf)
        if not pmf.is_symmetric(tol=1e-10):
            raise AsymmetricMarginals("asymmetric marginals: every Pr(I_j = 1) must be 1/2")
        if pmf.d < 2:
            raise ValueError("explicit dependence needs at least (I_0, I_1)")
        self._full = pmf
        self.max_k = pmf.d - 1
        self.exchangeable = self._check_exchangeable()

    @classmethod
    def from_theta(cls, theta: ThetaSet) -> "ExplicitSmallD":
        return cls(theta_to_pmf(theta))

    @property
    def pmf(self) -> BernoulliPmf:
        return self._full

    def _check_exchangeable(self, tol: float = 1e-12) -> bool:
        for k in range(2, min(self.max_k, 3) + 1):
            f = self.joint_pmf(k)
            for perm in itertools.permutations(range(1, k + 1)):
                g = f.permute((0,) + perm)
                if np.max(np.abs(g.probs - f.probs)) > tol:
                    return False
        return True

    def __repr__(self):
        return f"ExplicitSmallD(d={self._full.d})"


_FAMILIES = {
    "independent": Independent,
    "comonotone": Comonotone,
    "counter-freq": CounterFreq,
    "indep-freq-comonotone-sev": IndepFreqComonotoneSev,
    "indep-freq-counter-sev": IndepFreqCounterSev,
}
_ALIASES = {
    "⊥⊥": "independent", "indep": "independent",
    "△△": "comonotone", "como": "comonotone",
    "▽△": "counter-freq", "counter": "counter-freq",
    "⊥△": "indep-freq-comonotone-sev",
    "⊥▽": "indep-freq-counter-sev",
}


def family_names():
    return sorted(_FAMILIES) + ["alpha-mixture"]


def make_family(name: str, alpha: Optional[float] = None) -> BernoulliDependence:
    key = name.strip().lower().replace("_", "-")
    key = _ALIASES.get(name.strip(), _ALIASES.get(key, key))
    if key == "alpha-mixture":
        if alpha is None:
            raise ValueError("alpha-mixture needs alpha")
        return AlphaMixture(alpha)
    if key not in _FAMILIES:
        raise ValueError(f"unknown dependence family {name!r}; choose from {family_names()}")
    return _FAMILIES[key]()


def family_pmf(dep: BernoulliDependence, k: int) -> BernoulliPmf:
    return dep.joint_pmf(k)


def kn_law(dep: BernoulliDependence, i0: int, n: int) -> KnLaw:
    if n < 1:
        raise ValueError("n must be at least 1")
    return KnLaw(n, i0, dep.kn_pmf(i0, n))
