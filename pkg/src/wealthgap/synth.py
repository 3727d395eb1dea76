"""Synthetic population and survey generator.

Acts as the ground-truth oracle for tests: the population's exact column
sums become the macro benchmarks, and nonresponse, truncation and
measurement error are injected with known parameters so every adjustment
can be checked against the truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import (
    ASSET_ITEMS,
    ITEMS,
    LIABILITY_ITEM,
    MacroBenchmarks,
    RichList,
    SurveyDataset,
)
from .errors import EmptySample, UserInputError
from .indicators import IndicatorReport, indicator_report


@dataclass(frozen=True)
class PortfolioBand:
    """Asset mix for a wealth band: shares over the eight asset items
    (summing to 1) plus liabilities as a fraction of gross wealth."""

    upper: float  # net wealth upper bound of the band, inf for the last
    asset_shares: dict[str, float]
    liability_rate: float = 0.0

    def __post_init__(self):
        total = math.fsum(self.asset_shares.get(i, 0.0) for i in ASSET_ITEMS)
        if abs(total - 1.0) > 1e-9:
            raise UserInputError(f"asset shares sum to {total}, expected 1")
        if not 0 <= self.liability_rate < 1:
            raise UserInputError("liability rate must lie in [0, 1)")


DEFAULT_BANDS = (
    PortfolioBand(
        upper=3e5,
        asset_shares={
            "deposits": 0.35,
            "bonds": 0.02,
            "shares": 0.03,
            "mutual_funds": 0.03,
            "insurance_pensions": 0.07,
            "money_owed": 0.01,
            "business_wealth": 0.04,
            "housing_wealth": 0.45,
        },
        liability_rate=0.18,
    ),
    PortfolioBand(
        upper=1e6,
        asset_shares={
            "deposits": 0.22,
            "bonds": 0.06,
            "shares": 0.10,
            "mutual_funds": 0.08,
            "insurance_pensions": 0.08,
            "money_owed": 0.01,
            "business_wealth": 0.10,
            "housing_wealth": 0.35,
        },
        liability_rate=0.10,
    ),
    PortfolioBand(
        upper=math.inf,
        asset_shares={
            "deposits": 0.10,
            "bonds": 0.08,
            "shares": 0.25,
            "mutual_funds": 0.12,
            "insurance_pensions": 0.05,
            "money_owed": 0.02,
            "business_wealth": 0.23,
            "housing_wealth": 0.15,
        },
        liability_rate=0.05,
    ),
)

DEFAULT_DEMOGRAPHICS = {
    "region": {"north": 0.45, "centre": 0.25, "south": 0.30},
    "hsize": {"1": 0.30, "2": 0.35, "3plus": 0.35},
}


@dataclass(frozen=True)
class PopulationSpec:
    """Lognormal body below the threshold plus a Pareto tail above it."""

    n: int = 100_000
    body_mu: float = 11.0
    body_sigma: float = 0.7
    tail_fraction: float = 0.05
    tail_w0: float = 1e6
    tail_alpha: float = 1.5
    bands: tuple[PortfolioBand, ...] = DEFAULT_BANDS
    demographics: dict[str, dict[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_DEMOGRAPHICS.items()}
    )
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.tail_fraction < 1:
            raise UserInputError("tail_fraction must lie in [0, 1)")
        if self.tail_fraction > 0 and self.tail_alpha <= 1:
            raise UserInputError("tail alpha must exceed 1")
        for dim, cells in self.demographics.items():
            if abs(math.fsum(cells.values()) - 1.0) > 1e-9:
                raise UserInputError(f"cell probabilities for {dim!r} must sum to 1")


@dataclass(frozen=True)
class LogisticNonresponse:
    """Response propensity declining with the wealth quantile q (1 = richest):
    floor + (1 - floor) * sigmoid(steepness * (midpoint - q))."""

    midpoint: float = 0.99
    steepness: float = 300.0
    floor: float = 0.3

    def propensity(self, q: np.ndarray) -> np.ndarray:
        z = self.steepness * (self.midpoint - q)
        return self.floor + (1.0 - self.floor) / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class SamplingSpec:
    sample_size: int = 5000
    nonresponse: LogisticNonresponse | None = None
    truncation_w1: float | None = None  # inclusion probability 0 above this wealth
    item_error: dict[str, float] = field(default_factory=dict)  # reported = zeta * true
    zero_prob: dict[str, float] = field(default_factory=dict)  # false-zero probability
    rich_list_size: int = 20
    weights_include_propensity: bool = False
    seed: int = 1

    def __post_init__(self):
        for item, z in self.item_error.items():
            if not 0 < z <= 1:
                raise UserInputError(f"item error factor for {item!r} must be in (0, 1]")
        for item, p in self.zero_prob.items():
            if not 0 <= p < 1:
                raise UserInputError(f"zero-report probability for {item!r} must be in [0, 1)")


@dataclass(frozen=True)
class SynthOutput:
    population: SurveyDataset  # unit weights: the full truth
    benchmarks: MacroBenchmarks
    oracle: IndicatorReport


def _portfolio_from_net(net: np.ndarray, bands: tuple[PortfolioBand, ...]) -> np.ndarray:
    """Decompose net wealth into the nine items using band-specific shares."""
    amounts = np.zeros((len(net), len(ITEMS)))
    uppers = np.asarray([b.upper for b in bands])
    band_idx = np.searchsorted(uppers, net, side="left")
    band_idx = np.clip(band_idx, 0, len(bands) - 1)
    for bi, band in enumerate(bands):
        mask = band_idx == bi
        if not mask.any():
            continue
        gross = net[mask] / (1.0 - band.liability_rate)
        for j, item in enumerate(ITEMS):
            if item == LIABILITY_ITEM:
                amounts[mask, j] = gross * band.liability_rate
            else:
                amounts[mask, j] = gross * band.asset_shares.get(item, 0.0)
    return amounts


def generate_population(spec: PopulationSpec) -> SynthOutput:
    """Draw the true population and its exact benchmark totals."""
    rng = np.random.default_rng(spec.seed)
    n_tail = int(round(spec.n * spec.tail_fraction))
    n_body = spec.n - n_tail
    body = rng.lognormal(spec.body_mu, spec.body_sigma, size=n_body)
    # keep the body strictly below the tail threshold so the mixture switch is clean
    for _ in range(100):
        over = body >= spec.tail_w0
        if not over.any():
            break
        body[over] = rng.lognormal(spec.body_mu, spec.body_sigma, size=int(over.sum()))
    body = np.minimum(body, spec.tail_w0 * (1 - 1e-12))
    tail = spec.tail_w0 * (1.0 + rng.pareto(spec.tail_alpha, size=n_tail))
    net = np.concatenate([body, tail])
    rng.shuffle(net)
    amounts = _portfolio_from_net(net, spec.bands)
    demographics = {
        dim: tuple(rng.choice(list(cells), p=list(cells.values()), size=spec.n))
        for dim, cells in spec.demographics.items()
    }
    population = SurveyDataset(
        ids=tuple(f"P{i:06d}" for i in range(spec.n)),
        weights=np.ones(spec.n),
        amounts=amounts,
        demographics=demographics,
    )
    item_totals = {item: float(amounts[:, j].sum()) for j, item in enumerate(ITEMS)}
    counts = {
        dim: {cell: float(np.sum(np.asarray(labels) == cell)) for cell in spec.demographics[dim]}
        for dim, labels in demographics.items()
    }
    benchmarks = MacroBenchmarks(item_totals=item_totals, demographic_counts=counts)
    oracle = indicator_report(population, benchmarks)
    return SynthOutput(population=population, benchmarks=benchmarks, oracle=oracle)


def draw_survey(
    population: SurveyDataset, spec: SamplingSpec
) -> tuple[SurveyDataset, RichList]:
    """Sample respondents with wealth-dependent propensity and report with error.

    Households above the truncation point have zero inclusion probability.
    Design weights reflect the intended equal-probability design unless
    `weights_include_propensity` is set, so differential nonresponse biases
    the weights exactly as in a survey that cannot observe response behaviour.
    The rich list is the top of the *true* population, free of measurement
    error. Weights are ratio-adjusted so they sum to the population size.
    """
    rng = np.random.default_rng([spec.seed, 7])
    n = population.n
    true_net = population.net_wealth
    eligible = np.ones(n, dtype=bool)
    if spec.truncation_w1 is not None:
        eligible &= true_net <= spec.truncation_w1
    # ascending wealth quantile: 1 = richest
    ranks = np.empty(n)
    ranks[np.argsort(true_net, kind="stable")] = np.arange(1, n + 1)
    q = ranks / n
    propensity = (
        spec.nonresponse.propensity(q) if spec.nonresponse is not None else np.ones(n)
    )
    p = propensity * eligible
    if p.sum() <= 0:
        raise EmptySample("no household has positive inclusion probability")
    pi = np.minimum(spec.sample_size * p / p.sum(), 1.0)
    drawn = rng.random(n) < pi
    if not drawn.any():
        raise EmptySample("sampling produced no respondents")
    idx = np.flatnonzero(drawn)

    if spec.weights_include_propensity:
        weights = 1.0 / pi[idx]
    else:
        weights = np.full(len(idx), n / spec.sample_size)
    weights *= n / weights.sum()

    amounts = population.amounts[idx].copy()
    for item, zeta in spec.item_error.items():
        amounts[:, ITEMS.index(item)] *= zeta
    for item, p0 in spec.zero_prob.items():
        zeroed = rng.random(len(idx)) < p0
        amounts[zeroed, ITEMS.index(item)] = 0.0

    survey = SurveyDataset(
        ids=tuple(population.ids[i] for i in idx),
        weights=weights,
        amounts=amounts,
        demographics={k: tuple(v[i] for i in idx) for k, v in population.demographics.items()},
        currency=population.currency,
        wealth_concept=population.wealth_concept,
    )
    top = np.argsort(-true_net, kind="stable")[: spec.rich_list_size]
    rich = RichList(wealth=true_net[top]) if len(top) else RichList.empty()
    return survey, rich
