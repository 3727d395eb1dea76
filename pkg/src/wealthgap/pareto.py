"""Truncated Pareto upper-tail estimation.

The tail model is P(W <= w) = 1 - (w0/w)^alpha above a threshold w0. The
threshold is detected from the linearity of the mean excess function, the
shape from a rank-size regression on the survey tail pooled with a rich
list, and the household counts from the ratio of the empirical to the
theoretical CDF, which stays informative when the survey tail is truncated
at some w1 below the true population maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import RichList, SurveyDataset
from .errors import (
    DegenerateRegression,
    DomainError,
    EmptyExceedanceSet,
    EmptyTail,
    InfiniteMean,
    InsufficientTail,
)

# alpha at or below this is treated as an infinite-mean tail.
ALPHA_MEAN_FLOOR = 1.0 + 1e-6


@dataclass(frozen=True)
class ParetoFit:
    """Fitted tail: threshold, shape and all derived tail totals.

    Wealth totals (`t_w_top`, `t_w_miss`) are only defined for alpha > 1 and
    are None otherwise. `m` and `D` describe the pooled (survey + rich list)
    tail used for the shape regression; the household-count estimates come
    from survey observations alone.
    """

    w0: float
    alpha: float
    intercept: float
    r2: float
    w1: float
    m: int
    D: float
    t_d_top: float
    t_d_miss: float
    t_d_obs: float
    t_w_top: float | None
    t_w_miss: float | None

    def require_finite_mean(self) -> None:
        if self.alpha <= ALPHA_MEAN_FLOOR:
            raise InfiniteMean(self.alpha)


def pareto_cdf(w: float, w0: float, alpha: float) -> float:
    """P(W <= w) = 1 - (w0/w)^alpha for w >= w0 > 0."""
    if w0 <= 0 or alpha <= 0:
        raise DomainError(f"invalid Pareto parameters w0={w0}, alpha={alpha}")
    if w < w0:
        raise DomainError(f"w={w} below threshold w0={w0}")
    return 1.0 - (w0 / w) ** alpha


def pareto_mean(w0: float, alpha: float) -> float:
    """Mean alpha*w0/(alpha-1); requires alpha > 1."""
    if alpha <= ALPHA_MEAN_FLOOR:
        raise InfiniteMean(alpha)
    return alpha * w0 / (alpha - 1.0)


def mean_excess(ds: SurveyDataset, w: float, concept: str | None = None) -> float:
    """Weighted mean of (w_j - w) over households with wealth strictly above w."""
    wealth = ds.wealth(concept)
    mask = wealth > w
    if not mask.any():
        raise EmptyExceedanceSet(f"no household has wealth above {w}")
    d = ds.weights[mask]
    return float(np.sum(d * (wealth[mask] - w)) / np.sum(d))


def _sorted_tail_arrays(ds: SurveyDataset, concept: str | None = None):
    """Wealth and weights sorted descending with deterministic tie-breaks."""
    order = ds.rank_order(concept)
    return ds.wealth(concept)[order], ds.weights[order]


def mean_excess_curve(ds: SurveyDataset, concept: str | None = None):
    """Per observed point: (wealth, mean excess, cumulative richer weight).

    Points with no exceedances (the maximum) carry weight 0 and excess 0.
    Sorted descending by wealth; used by threshold detection and for
    mean-excess diagnostic plots.
    """
    w, d = _sorted_tail_arrays(ds, concept)
    n = len(w)
    if n == 0:
        return w, w, w
    cum_d = np.cumsum(d)
    cum_dw = np.cumsum(d * w)
    # start index of each tie group = number of strictly richer observations
    group_start = np.searchsorted(-w, -w, side="left")
    richer_d = np.where(group_start > 0, cum_d[group_start - 1], 0.0)
    richer_dw = np.where(group_start > 0, cum_dw[group_start - 1], 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        me = np.where(richer_d > 0, (richer_dw - w * richer_d) / np.where(richer_d > 0, richer_d, 1.0), 0.0)
    return w, me, richer_d


def detect_threshold(
    ds: SurveyDataset,
    min_tail: int = 50,
    candidate_fraction: float = 0.2,
    concept: str | None = None,
) -> tuple[float, float]:
    """Pick the threshold maximising the R^2 of mean excess regressed on wealth.

    Every observed wealth value with at least `min_tail` observations strictly
    above it, within the top `candidate_fraction` of positive-wealth
    observations, is a candidate. For each candidate the regression runs over
    the observed points above it, each point weighted by the cumulative survey
    weight of richer observations, which down-weights the noisy, truncation-
    biased region near the sample maximum. Ties in R^2 go to the smaller
    threshold.
    """
    if min_tail < 3:
        raise ValueError("min_tail must be at least 3")
    wealth = ds.wealth(concept)
    positive = ds.subset(wealth > 0)
    if positive.n < min_tail + 1:
        raise InsufficientTail(f"need more than min_tail={min_tail} positive-wealth households")
    w, me, u = mean_excess_curve(positive, concept)
    n = len(w)

    # scale both regression variables once; R^2 is affine-invariant
    x = w / w[0]
    scale_me = float(me.max()) or 1.0
    y = me / scale_me

    s_u = np.cumsum(u)
    s_ux = np.cumsum(u * x)
    s_uy = np.cumsum(u * y)
    s_uxx = np.cumsum(u * x * x)
    s_uyy = np.cumsum(u * y * y)
    s_uxy = np.cumsum(u * x * y)

    group_start = np.searchsorted(-w, -w, side="left")
    max_rank = max(1, int(math.floor(candidate_fraction * n)))
    best_w0, best_r2 = None, -np.inf
    for i in range(n):
        if group_start[i] != i:
            continue  # not the first of its tie group: duplicate candidate value
        if i >= max_rank or i < min_tail:
            continue  # outside the top fraction, or fewer than min_tail above
        k = i - 1  # regression points are the observations strictly above w[i]
        su, sx, sy = s_u[k], s_ux[k], s_uy[k]
        sxx, syy, sxy = s_uxx[k], s_uyy[k], s_uxy[k]
        var_x = su * sxx - sx * sx
        var_y = su * syy - sy * sy
        if su <= 0 or var_x <= 0 or var_y <= 0:
            continue
        cov = su * sxy - sx * sy
        r2 = (cov * cov) / (var_x * var_y)
        if r2 > best_r2 or (r2 == best_r2 and best_w0 is not None and w[i] < best_w0):
            best_r2, best_w0 = r2, float(w[i])
    if best_w0 is None:
        raise InsufficientTail("no candidate threshold with enough observations above it")
    return best_w0, float(best_r2)


@dataclass(frozen=True)
class PooledTail:
    """Survey tail and rich list appended, ranked richest first."""

    wealth: np.ndarray
    weights: np.ndarray
    is_rich: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wealth", np.asarray(self.wealth, dtype=np.float64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "is_rich", np.asarray(self.is_rich, dtype=bool))

    @property
    def m(self) -> int:
        return len(self.wealth)


def pool_with_rich_list(
    ds: SurveyDataset,
    w0: float,
    rich: RichList | None = None,
    concept: str | None = None,
) -> PooledTail:
    """Append rich-list records (weight 1) to the survey tail at or above w0.

    On equal wealth a rich-list entry ranks ahead of a survey household. An
    empty rich list yields survey-only shape estimation.
    """
    sw, sd = _sorted_tail_arrays(ds, concept)
    mask = sw >= w0
    sw, sd = sw[mask], sd[mask]
    if rich is None or rich.n == 0:
        return PooledTail(sw, sd, np.zeros(len(sw), dtype=bool))
    rw = rich.wealth
    records = [(float(w), 1.0, True) for w in rw] + [
        (float(w), float(d), False) for w, d in zip(sw, sd)
    ]
    # descending wealth; rich entries first within a tie (False sorts after True)
    records.sort(key=lambda t: (-t[0], not t[2]))
    arr = np.asarray([(w, d) for w, d, _ in records], dtype=np.float64)
    return PooledTail(arr[:, 0], arr[:, 1], np.asarray([r for _, _, r in records], dtype=bool))


def estimate_alpha(pooled: PooledTail, w0: float) -> tuple[float, float]:
    """Rank-size least squares ln((i-1/2)*Dbar_i/Dbar) = C - alpha*ln(w_i).

    Dbar_i is the mean weight of the i richest points, Dbar the mean weight
    of all m points. Wealth is normalised by w0 inside the regression so the
    slope is unaffected by the scale of the currency; the intercept is
    returned in raw-log convention.
    """
    w, d = pooled.wealth, pooled.weights
    m = len(w)
    if m < 3:
        raise DegenerateRegression(f"need at least 3 pooled points, got {m}")
    if w0 <= 0:
        raise DomainError(f"threshold must be positive, got {w0}")
    ranks = np.arange(1, m + 1, dtype=np.float64)
    dbar_i = np.cumsum(d) / ranks
    dbar = float(np.mean(d))
    y = np.log((ranks - 0.5) * dbar_i / dbar)
    x = np.log(w / w0)
    x_c = x - x.mean()
    sxx = float(np.dot(x_c, x_c))
    if sxx <= 0:
        raise DegenerateRegression("all pooled wealth values are equal")
    slope = float(np.dot(x_c, y - y.mean())) / sxx
    alpha = -slope
    intercept_scaled = float(y.mean() - slope * x.mean())
    return alpha, intercept_scaled + alpha * math.log(w0)


def estimate_tail_households(
    ds: SurveyDataset,
    w0: float,
    alpha: float,
    rank_range: tuple[int, int] | None = None,
    concept: str | None = None,
) -> float:
    """Estimate total households in the tail from survey observations alone.

    Averages (D - D_{i-1}) / (1 - (w0/w_i)^alpha) over tail points, where
    D_{i-1} is the weight of households strictly richer than w_i and D the
    tail weight sum. Points at exactly w0 have a zero denominator and are
    excluded from the average (removable singularity). `rank_range` limits
    the average to a 1-based window of top-tail ranks.
    """
    w, d = _sorted_tail_arrays(ds, concept)
    mask = w >= w0
    w, d = w[mask], d[mask]
    if len(w) == 0:
        raise EmptyTail(f"no survey household at or above w0={w0}")
    D = float(np.sum(d))
    cum_d = np.cumsum(d)
    group_start = np.searchsorted(-w, -w, side="left")
    richer = np.where(group_start > 0, cum_d[group_start - 1], 0.0)
    cdf = 1.0 - (w0 / w) ** alpha
    valid = cdf > 0
    if rank_range is not None:
        lo, hi = rank_range
        ranks = np.arange(1, len(w) + 1)
        valid &= (ranks >= lo) & (ranks <= hi)
    if not valid.any():
        raise EmptyTail("every tail point sits exactly at the threshold")
    return float(np.mean((D - richer[valid]) / cdf[valid]))


def missing_tail(t_d_top: float, w0: float, w1: float, alpha: float) -> tuple[float, float]:
    """Households and wealth above the truncation point w1.

    t_d_miss = t_d_top*(w0/w1)^alpha and t_w_miss = t_d_miss*alpha*w1/(alpha-1),
    the Pareto mean restarted at w1.
    """
    if w0 <= 0 or w1 < w0:
        raise DomainError(f"need w1 >= w0 > 0, got w0={w0}, w1={w1}")
    if alpha <= ALPHA_MEAN_FLOOR:
        raise InfiniteMean(alpha)
    t_d_miss = t_d_top * (w0 / w1) ** alpha
    return t_d_miss, t_d_miss * alpha * w1 / (alpha - 1.0)


def missing_tail_count(t_d_top: float, w0: float, w1: float, alpha: float) -> float:
    """Count part of the missing tail; defined for any alpha > 0."""
    if w0 <= 0 or w1 < w0 or alpha <= 0:
        raise DomainError(f"need w1 >= w0 > 0 and alpha > 0, got w0={w0}, w1={w1}, alpha={alpha}")
    return t_d_top * (w0 / w1) ** alpha


def tail_wealth(t_d_top: float, w0: float, alpha: float) -> float:
    """Total tail wealth: Pareto mean times estimated tail household count."""
    return pareto_mean(w0, alpha) * t_d_top


def fit_pareto(
    ds: SurveyDataset,
    rich: RichList | None = None,
    min_tail: int = 50,
    candidate_fraction: float = 0.2,
    rank_range: tuple[int, int] | None = None,
    concept: str | None = None,
) -> ParetoFit:
    """Full tail fit: threshold, shape from the pooled sample, tail totals."""
    w0, r2 = detect_threshold(ds, min_tail, candidate_fraction, concept)
    pooled = pool_with_rich_list(ds, w0, rich, concept)
    alpha, intercept = estimate_alpha(pooled, w0)
    wealth = ds.wealth(concept)
    tail_mask = wealth >= w0
    w1 = float(wealth[tail_mask].max())
    t_d_top = estimate_tail_households(ds, w0, alpha, rank_range, concept)
    t_d_miss = missing_tail_count(t_d_top, w0, w1, alpha)
    if alpha > ALPHA_MEAN_FLOOR:
        t_w_top = tail_wealth(t_d_top, w0, alpha)
        t_w_miss = t_d_miss * alpha * w1 / (alpha - 1.0)
    else:
        t_w_top = t_w_miss = None
    return ParetoFit(
        w0=w0,
        alpha=alpha,
        intercept=intercept,
        r2=r2,
        w1=w1,
        m=pooled.m,
        D=float(np.sum(pooled.weights)),
        t_d_top=t_d_top,
        t_d_miss=t_d_miss,
        t_d_obs=t_d_top - t_d_miss,
        t_w_top=t_w_top,
        t_w_miss=t_w_miss,
    )
