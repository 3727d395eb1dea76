"""Weighted distributional statistics used to evaluate adjustments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import ITEMS, MacroBenchmarks, SurveyDataset, coverage_ratio
from .errors import ZeroMean

TOP_SHARE_LEVELS = (0.01, 0.05, 0.10, 0.20)


@dataclass(frozen=True)
class IndicatorReport:
    gini: float
    top_shares: dict[float, float]
    bottom50_share: float
    coverage_ratios: dict[str, float] = field(default_factory=dict)
    alpha_final: float | None = None
    household_count_weighted: float = 0.0

    def flat(self) -> dict[str, float]:
        """Scalar view keyed by stable names, for summaries and JSON."""
        out = {
            "gini": self.gini,
            "bottom50_share": self.bottom50_share,
            "household_count_weighted": self.household_count_weighted,
        }
        for p, v in self.top_shares.items():
            out[f"top{round(p * 100):d}_share"] = v
        for item, v in self.coverage_ratios.items():
            out[f"coverage_{item}"] = v
        if self.alpha_final is not None:
            out["alpha_final"] = self.alpha_final
        return out


def weighted_gini(values, weights) -> float:
    """Gini of the weight-expanded distribution via the Lorenz formulation.

    O(n log n); equals the pairwise mean-absolute-difference definition
    exactly. Negative values are included, so the result can exceed 1 for
    extreme negative-net-wealth configurations.
    """
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    total_w = w.sum()
    total_vw = float(np.sum(v * w))
    if total_w <= 0 or total_vw == 0:
        raise ZeroMean("weighted mean is zero or no weight; Gini undefined")
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    cum_w = np.cumsum(w)
    # sum of w_i*v_i*(S_i - w_i/2) telescopes the Lorenz trapezoids
    area = float(np.sum(w * v * (cum_w - 0.5 * w)))
    return 2.0 * area / (total_w * total_vw) - 1.0


def gini(ds: SurveyDataset, variable: str = "net") -> float:
    return weighted_gini(ds.variable(variable), ds.weights)


def top_share(ds: SurveyDataset, p: float, rank_by: str | None = None) -> float:
    """Share of total wealth held by the top fraction p of weighted households.

    The boundary household's weight is split fractionally so the captured
    weight equals p * sum(d) exactly.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    order = ds.rank_order(rank_by)
    wealth = ds.wealth(rank_by)[order]
    weights = ds.weights[order]
    total_wealth = float(np.sum(wealth * weights))
    if total_wealth == 0:
        raise ZeroMean("total wealth is zero; share undefined")
    target = p * float(np.sum(weights))
    cum = np.cumsum(weights)
    k = int(np.searchsorted(cum, target, side="left"))
    captured = float(np.sum(wealth[:k] * weights[:k]))
    if k < len(weights):
        prev = cum[k - 1] if k > 0 else 0.0
        captured += (target - prev) * wealth[k]
    return captured / total_wealth


def bottom_share(ds: SurveyDataset, p: float = 0.5, rank_by: str | None = None) -> float:
    """Share held by the poorest fraction p; complements top_share exactly."""
    return 1.0 - top_share(ds, 1.0 - p, rank_by) if p < 1 else 1.0


def ccdf_points(ds: SurveyDataset, above: float, concept: str | None = None):
    """Empirical survivor points (w_i, P(W >= w_i)) for the tail at or above `above`.

    Survivor shares are relative to the tail weight sum, so a tail drawn from
    a Pareto(w0, alpha) lines up with (w0/w)^alpha on a log-log plot.
    """
    order = ds.rank_order(concept)
    w = ds.wealth(concept)[order]
    d = ds.weights[order]
    mask = w >= above
    w, d = w[mask], d[mask]
    if len(w) == 0:
        return []
    D = float(np.sum(d))
    cum = np.cumsum(d)
    # at tied wealth the survivor includes the whole tie group
    group_end = np.searchsorted(-w, -w, side="right") - 1
    survivor = cum[group_end] / D
    return [(float(wi), float(si)) for wi, si in zip(w, survivor)]


def lorenz_points(ds: SurveyDataset, variable: str = "net"):
    """(cumulative population share, cumulative wealth share) pairs, ascending."""
    v = np.asarray(ds.variable(variable), dtype=np.float64)
    w = ds.weights
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    cw = np.cumsum(w) / np.sum(w)
    cv = np.cumsum(v * w) / np.sum(v * w)
    return [(float(a), float(b)) for a, b in zip(cw, cv)]


def indicator_report(
    ds: SurveyDataset,
    bm: MacroBenchmarks | None = None,
    alpha: float | None = None,
) -> IndicatorReport:
    shares = {p: top_share(ds, p) for p in TOP_SHARE_LEVELS}
    ratios = {}
    if bm is not None:
        for item in ITEMS:
            if bm.item_totals.get(item, 0.0) > 0:
                ratios[item] = coverage_ratio(ds, bm, item)
    return IndicatorReport(
        gini=gini(ds),
        top_shares=shares,
        bottom50_share=bottom_share(ds, 0.5),
        coverage_ratios=ratios,
        alpha_final=alpha,
        household_count_weighted=float(np.sum(ds.weights)),
    )
