"""Stop-loss (increasing convex) comparisons and the dependence-order checks behind them."""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .dependence import BernoulliPmf
from .distributions import FrequencyDistribution
from .errors import MomentError

DEFAULT_POINTS = 200


@dataclass(frozen=True)
class StopLossCurve:
    grid: np.ndarray
    values: np.ndarray

    def is_non_increasing(self, tol: float = 1e-10) -> bool:
        return bool(np.all(np.diff(self.values) <= tol))

    def is_convex(self, tol: float = 1e-10) -> bool:
        g, v = self.grid, self.values
        if len(g) < 3:
            return True
        slopes = np.diff(v) / np.diff(g)
        return bool(np.all(np.diff(slopes) >= -tol * max(1.0, np.max(np.abs(slopes)))))


def default_grid(agg_a, agg_b, points: int = DEFAULT_POINTS) -> np.ndarray:
    big = agg_a if agg_a.mean >= agg_b.mean else agg_b
    return np.linspace(0.0, big.quantile(0.9999), points)


def stop_loss(agg, grid) -> StopLossCurve:
    """``d -> E[(S - d)_+]`` evaluated exactly from the aggregate's representation."""
    if not np.isfinite(agg.mean):
        raise MomentError("moment does not exist: the aggregate has no finite mean")
    grid = np.asarray(grid, dtype=float)
    return StopLossCurve(grid, np.asarray(agg.stop_loss(grid), dtype=float))


@dataclass(frozen=True)
class IcxVerdict:
    verdict: str
    grid: np.ndarray
    difference: np.ndarray  # stop-loss of A minus stop-loss of B
    witnesses_a_above: np.ndarray
    witnesses_b_above: np.ndarray

    @property
    def a_le_b(self) -> bool:
        return self.verdict in ("dominated", "equal")

    @property
    def b_le_a(self) -> bool:
        return self.verdict in ("dominates", "equal")


def icx_compare(agg_a, agg_b, grid=None, tol: float = 1e-9) -> IcxVerdict:
    """Compare stop-loss transforms pointwise.

    ``"dominated"`` means A is below B in the increasing convex order on the grid,
    ``"dominates"`` the reverse and ``"equal"`` both; otherwise the retentions
    where each curve lies above the other are returned as witnesses.
    """
    if grid is None:
        grid = default_grid(agg_a, agg_b)
    a = stop_loss(agg_a, grid)
    b = stop_loss(agg_b, grid)
    diff = a.values - b.values
    scale = tol * np.maximum(1.0, np.maximum(np.abs(a.values), np.abs(b.values)))
    a_above = a.grid[diff > scale]
    b_above = a.grid[-diff > scale]
    if len(a_above) == 0 and len(b_above) == 0:
        verdict = "equal"
    elif len(a_above) == 0:
        verdict = "dominated"
    elif len(b_above) == 0:
        verdict = "dominates"
    else:
        verdict = "incomparable-on-grid"
    return IcxVerdict(verdict, a.grid, diff, a_above, b_above)


@dataclass(frozen=True)
class PairwiseReport:
    """Signs of ``Pr_B(I_j = I_l = 1) - Pr_A(I_j = I_l = 1)`` for every pair ``j < l``."""

    signs: np.ndarray
    differences: np.ndarray
    verdict: str
    caveat: str


def sm_compare_symmetric_bernoulli_pairwise(f_a: BernoulliPmf, f_b: BernoulliPmf, tol: float = 1e-12) -> PairwiseReport:
    """Pairwise concordance check, a necessary condition for ``f_a <=_sm f_b``.

    With Bernoulli(1/2) margins every bivariate supermodular comparison reduces to
    the joint probability of ``(1, 1)``; for more than two coordinates agreeing
    pairs do not imply the full supermodular order.
    """
    if f_a.d != f_b.d:
        raise ValueError("pmfs must have the same dimension")
    if f_a.d > 6:
        raise ValueError("dimension too large (at most 6 coordinates)")
    if not (f_a.is_symmetric() and f_b.is_symmetric()):
        raise ValueError("both pmfs must have symmetric Bernoulli margins")
    d = f_a.d
    diffs = np.zeros((d, d))
    for j in range(d):
        for l in range(j + 1, d):
            diffs[j, l] = diffs[l, j] = f_b.pair_prob(j, l) - f_a.pair_prob(j, l)
    signs = np.where(diffs > tol, 1, np.where(diffs < -tol, -1, 0))
    iu = np.triu_indices(d, 1)
    s = signs[iu]
    if np.all(s == 0):
        same = np.max(np.abs(f_a.probs - f_b.probs)) <= tol
        verdict = "equal" if same else "necessary condition uninformative"
    elif np.all(s >= 0):
        verdict = "ordered"
    elif np.all(s <= 0):
        verdict = "reverse-ordered"
    else:
        verdict = "not ordered"
    caveat = "" if d <= 2 else "pairwise concordance is necessary, not sufficient, for the supermodular order when d > 2"
    return PairwiseReport(signs, diffs, verdict, caveat)


@dataclass(frozen=True)
class SpacingReport:
    spacing_a: float  # E[Z[2]] - E[Z[1]]
    spacing_b: float
    upper_a: float  # E[Z[2]] - E[Z]
    upper_b: float
    a_le_b: bool
    implication: str


def _spacing(law):
    if isinstance(law, FrequencyDistribution):
        lo, hi, mu = law.order_moment(1, 1), law.order_moment(2, 1), law.mean
    else:
        mu = law.moment(1)
        lo, hi = law.min_moment(1), law.max_moment(1)
    return hi - lo, hi - mu


def cx_spacing_check(z_a, z_b, tol: float = 1e-10) -> SpacingReport:
    """Compare expected spacings of two marginals of the same kind.

    A larger expected spacing means a larger dependence contribution to ``E[S]``
    for the same positive ``theta01`` (and a more negative one when ``theta01 < 0``).
    """
    sa, ua = _spacing(z_a)
    sb, ub = _spacing(z_b)
    le = ua <= ub + tol * max(1.0, abs(ub))
    if abs(ua - ub) <= tol * max(1.0, abs(ub)):
        imp = "equal dependence contribution to E[S] for matched theta01"
    elif le:
        imp = "theta01 > 0: C_Dep^Exp(A) <= C_Dep^Exp(B); reversed for theta01 < 0"
    else:
        imp = "theta01 > 0: C_Dep^Exp(A) >= C_Dep^Exp(B); reversed for theta01 < 0"
    return SpacingReport(sa, sb, ua, ub, bool(le), imp)
