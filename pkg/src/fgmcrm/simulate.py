"""Exact sampling of ``(N, X_1, ..., X_N)`` through the min/max representation.

Replications are generated in fixed blocks of ``BLOCK`` records.  Block ``b``
draws from a Philox stream keyed by ``(seed, b)``, so a batch is reproducible
bit for bit and blocks could be farmed out to workers without changing it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .components import CollectiveRiskModel

BLOCK = 1 << 16
BUFFER_CAP = 100_000


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


@dataclass(frozen=True)
class SampleBatch:
    seed: int
    count: int
    algorithm: int
    n: np.ndarray
    claims: np.ndarray
    i0: np.ndarray
    s: np.ndarray = field(init=False)
    offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        if len(self.n) != self.count or len(self.claims) != int(self.n.sum()):
            raise ValueError("claim list lengths do not match the claim counts")
        offsets = np.concatenate([[0], np.cumsum(self.n)]).astype(np.int64)
        s = np.bincount(np.repeat(np.arange(self.count), self.n), weights=self.claims, minlength=self.count)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "s", s)

    def record(self, i: int):
        return self.claims[self.offsets[i]: self.offsets[i + 1]]


class _HalfBuffer:
    """FIFO store of unused order-statistic halves, oldest dropped beyond the cap."""

    def __init__(self, cap: int = BUFFER_CAP):
        self.cap = cap
        self.chunks: deque = deque()
        self.size = 0

    def put(self, values: np.ndarray) -> None:
        if len(values) == 0:
            return
        self.chunks.append(values)
        self.size += len(values)
        while self.size > self.cap:
            drop = self.size - self.cap
            head = self.chunks[0]
            if len(head) <= drop:
                self.chunks.popleft()
                self.size -= len(head)
            else:
                self.chunks[0] = head[drop:]
                self.size -= drop

    def take(self, k: int) -> np.ndarray:
        out = []
        while k > 0 and self.chunks:
            head = self.chunks[0]
            if len(head) <= k:
                out.append(self.chunks.popleft())
                k -= len(head)
                self.size -= len(head)
            else:
                out.append(head[:k])
                self.chunks[0] = head[k:]
                self.size -= k
                k = 0
        return np.concatenate(out) if out else np.zeros(0)


def _claim_positions(lengths: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Flat indices of the first ``keep[i]`` entries of each length-``lengths[i]`` segment."""
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    total = int(keep.sum())
    rec = np.repeat(np.arange(len(keep)), keep)
    within = np.arange(total) - np.repeat(np.cumsum(keep) - keep, keep)
    return starts[rec] + within


def sample_method1(m: CollectiveRiskModel, count: int, seed: int, recycle: bool = True) -> SampleBatch:
    """Pairs of counts and pairs of claims, kept as min or max by the indicators."""
    if count < 1:
        raise ValueError("count must be positive")
    freq, sev, dep = m.freq, m.sev, m.dep
    mins, maxs = _HalfBuffer(), _HalfBuffer()
    ns, i0s, claims = [], [], []
    for b, start in enumerate(range(0, count, BLOCK)):
        size = min(BLOCK, count - start)
        rng = block_rng(seed, b)
        na, nb = freq.sample(rng, size), freq.sample(rng, size)
        n1, n2 = np.minimum(na, nb), np.maximum(na, nb)
        i0, ind_full = dep.sample_joint(rng, n2)
        n = np.where(i0 == 1, n2, n1)
        ind = ind_full[_claim_positions(n2, n)]

        need_min = ind == 0
        k1, k2 = int(need_min.sum()), int((~need_min).sum())
        from_buf1 = mins.take(k1) if recycle else np.zeros(0)
        from_buf2 = maxs.take(k2) if recycle else np.zeros(0)
        r1, r2 = k1 - len(from_buf1), k2 - len(from_buf2)
        # separate fresh pairs for the min and the max roles, so no two claims
        # of this block share a pair; the unused halves serve later blocks
        pa, pb = sev.sample(rng, r1 + r2), sev.sample(rng, r1 + r2)
        lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
        x = np.empty(len(ind))
        x[need_min] = np.concatenate([from_buf1, lo[:r1]])
        x[~need_min] = np.concatenate([from_buf2, hi[r1:]])
        if recycle:
            maxs.put(hi[:r1])
            mins.put(lo[r1:])
        ns.append(n)
        i0s.append(i0)
        claims.append(x)
    return SampleBatch(seed, count, 1, np.concatenate(ns).astype(np.int64), np.concatenate(claims),
                       np.concatenate(i0s).astype(np.int8))


def sample_method2(m: CollectiveRiskModel, count: int, seed: int) -> SampleBatch:
    """``I_0`` first, then ``N ~ N[1+I_0]``, then the claim indicators given ``I_0``."""
    if count < 1:
        raise ValueError("count must be positive")
    freq, dep = m.freq, m.dep
    fpair = freq.order_stats()
    spair = m.sev.order_stats()
    ns, i0s, claims = [], [], []
    for b, start in enumerate(range(0, count, BLOCK)):
        size = min(BLOCK, count - start)
        rng = block_rng(seed, b)
        i0 = (rng.random(size) < 0.5).astype(np.int8)
        u = rng.random(size)
        n = np.where(i0 == 1, fpair.max_law.inverse_cdf(u), fpair.min_law.inverse_cdf(u))
        ind = dep.sample_conditional(rng, i0, n)
        x = np.empty(len(ind))
        lo = ind == 0
        x[lo] = spair.min_law.sample(rng, int(lo.sum()))
        x[~lo] = spair.max_law.sample(rng, int((~lo).sum()))
        ns.append(n)
        i0s.append(i0)
        claims.append(x)
    return SampleBatch(seed, count, 2, np.concatenate(ns).astype(np.int64), np.concatenate(claims),
                       np.concatenate(i0s).astype(np.int8))


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    count: int
    kappa: float
    mean: float
    variance: float
    var_kappa: float
    tvar_kappa: float
    se_mean: float
    se_variance: float
    se_var_kappa: float
    se_tvar_kappa: float


def empirical_var_tvar(s: np.ndarray, kappa: float):
    """Left-inverse empirical quantile and the matching tail value at risk."""
    n = len(s)
    k = int(np.ceil(n * kappa - 1e-9)) - 1
    k = min(max(k, 0), n - 1)
    part = np.partition(s, k)
    q = float(part[k])
    above = part[k + 1:]
    above = above[above > q]
    at_or_below = n - len(above)
    tail = float(above.sum())
    return q, (tail + q * (at_or_below / n - kappa) * n) / (n * (1.0 - kappa))


def mc_estimate(batch: SampleBatch, kappa: float = 0.99, n_boot: int = 500, seed: Optional[int] = None) -> MCEstimate:
    s = np.asarray(batch.s, dtype=float)
    n = len(s)
    if n < 2:
        raise ValueError("need at least two replications")
    mean = float(s.mean())
    c = s - mean
    m2 = float(c @ c / n)
    var = m2 * n / (n - 1)
    m4 = float(np.mean(c**4))
    se_mean = np.sqrt(var / n)
    se_var = np.sqrt(max(m4 - m2 * m2, 0.0) / n)
    q, tv = empirical_var_tvar(s, kappa)
    se_q = se_t = float("nan")
    if n_boot > 0:
        rng = np.random.default_rng(np.random.SeedSequence(batch.seed if seed is None else seed, spawn_key=(2**31,)))
        qs = np.empty(n_boot)
        ts = np.empty(n_boot)
        for i in range(n_boot):
            qs[i], ts[i] = empirical_var_tvar(s[rng.integers(0, n, n)], kappa)
        se_q, se_t = float(qs.std(ddof=1)), float(ts.std(ddof=1))
    return MCEstimate(n, kappa, mean, var, q, tv, float(se_mean), float(se_var), se_q, se_t)
