"""Adjustment pipelines combining the Pareto tail model with calibration.

Reweighting (Pareto-calibration) fixes differential nonresponse by moving
weights only; reverse-calibration imputation fixes measurement error by
moving amounts only; the simultaneous driver alternates the two until the
tail shape stabilises, then appends a single synthetic record representing
the households above the truncation point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import calib
from .dataset import (
    COMPARABLE_ITEMS,
    ITEMS,
    LIABILITY_ITEM,
    LOW_COMPARABILITY_ITEMS,
    MacroBenchmarks,
    RichList,
    SurveyDataset,
    coverage_ratio,
    horvitz_thompson,
)
from .errors import (
    BenchmarkFloorWarning,
    EmptyTail,
    NegativeAmountProduced,
    NegativeAmountWarning,
    SharesNotNormalized,
    UserInputError,
    ZeroBenchmark,
    ZeroItemTotal,
)
from .pareto import ParetoFit, fit_pareto

METHODS = (
    "survey_missing_tail",
    "pareto_cal",
    "pareto_cal_proportional",
    "single_iteration",
    "single_iteration_portfolio",
    "simultaneous",
)

SYNTHETIC_TAIL_ID = "SYNTH-TAIL"


@dataclass(frozen=True)
class AdjustmentConfig:
    method: str = "simultaneous"
    tau: float = 1.0  # shrinkage exponent in the imputation constants (1/w)^tau
    alpha_tolerance: float = 0.05  # |delta alpha| convergence threshold
    max_iterations: int = 10
    min_tail: int = 50
    comparable_items: tuple[str, ...] = COMPARABLE_ITEMS
    weight_bounds: tuple[float, float] | None = (0.1, 10.0)
    candidate_fraction: float = 0.2
    zeta_concept: str | None = None  # wealth concept for the single-iteration scalar

    def __post_init__(self):
        if self.method not in METHODS:
            raise UserInputError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.tau < 0:
            raise UserInputError("tau must be >= 0")
        if self.alpha_tolerance <= 0:
            raise UserInputError("alpha tolerance must be positive")
        if not self.comparable_items:
            raise UserInputError("comparable_items must not be empty")
        for item in self.comparable_items:
            if item not in ITEMS:
                raise UserInputError(f"unknown comparable item {item!r}")


@dataclass
class IterationRecord:
    iteration: int
    w0: float
    alpha: float
    r2: float
    t_d_top: float
    t_d_miss: float
    coverage_ratios: dict[str, float]
    max_constraint_residual: float

    def as_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "w0": self.w0,
            "alpha": self.alpha,
            "r2": self.r2,
            "t_d_top": self.t_d_top,
            "t_d_miss": self.t_d_miss,
            "coverage_ratios": dict(self.coverage_ratios),
            "max_constraint_residual": self.max_constraint_residual,
        }


@dataclass
class AdjustmentOutcome:
    dataset: SurveyDataset
    trace: list[IterationRecord] = field(default_factory=list)
    synthetic_tail_observation: str | None = None
    zeta: float | None = None
    amount_factors: np.ndarray | None = None  # cumulative per-household factor
    converged: bool = True
    flags: list[str] = field(default_factory=list)
    final_fit: ParetoFit | None = None


def _coverage_map(ds: SurveyDataset, bm: MacroBenchmarks, items) -> dict[str, float]:
    out = {}
    for item in items:
        if bm.item_totals.get(item, 0.0) > 0:
            out[item] = coverage_ratio(ds, bm, item)
    return out


def tail_item_shares(ds: SurveyDataset, w0: float, concept: str | None = None) -> dict[str, float]:
    """Per-item weighted tail totals as fractions of the tail's net wealth.

    Asset fractions minus the liability fraction equal 1, so a net amount
    decomposed with these shares reassembles exactly.
    """
    wealth = ds.wealth(concept)
    mask = wealth >= w0
    if not mask.any():
        raise EmptyTail(f"no household at or above w0={w0}")
    d = ds.weights[mask]
    net_total = float(np.sum(d * ds.net_wealth[mask]))
    if net_total <= 0:
        raise EmptyTail("tail net wealth is not positive; shares undefined")
    return {
        item: float(np.sum(d * ds.amounts[mask, j])) / net_total
        for j, item in enumerate(ITEMS)
    }


def _demographic_blocks(ds: SurveyDataset, bm: MacroBenchmarks):
    """One-hot auxiliary columns and count targets for every benchmark cell."""
    columns, targets, names = [], [], []
    for dim, cells in bm.demographic_counts.items():
        if dim not in ds.demographics:
            raise UserInputError(f"survey lacks demographic column {dim!r}")
        labels = np.asarray(ds.demographics[dim])
        for cell, count in cells.items():
            columns.append((labels == cell).astype(np.float64))
            targets.append(count)
            names.append(f"{dim}={cell}")
    return columns, targets, names


def pareto_calibration(
    ds: SurveyDataset,
    fit: ParetoFit,
    bm: MacroBenchmarks,
    bounds: tuple[float, float] | None = (0.1, 10.0),
) -> tuple[SurveyDataset, calib.CalibrationResult]:
    """Reweight so the tail matches the Pareto-implied counts and wealth.

    Constraints: tail wealth and household count at their model-implied
    observable totals, the below-threshold part frozen at its current
    item-decomposed totals and count, and the demographic margins. Amounts
    never change here.
    """
    fit.require_finite_mean()
    wealth = ds.wealth()
    in_tail = (wealth >= fit.w0).astype(np.float64)
    below = 1.0 - in_tail

    t_w_obs = fit.t_w_top - fit.t_w_miss
    t_d_obs = fit.t_d_obs
    total_households = bm.total_households()
    t_d_bot = total_households - t_d_obs

    columns = [wealth * in_tail, in_tail]
    targets = [t_w_obs, t_d_obs]
    for j, item in enumerate(ITEMS):
        col = ds.amounts[:, j] * below
        current = float(np.sum(ds.weights * col))
        if current == 0.0 and not col.any():
            continue  # vacuous constraint
        columns.append(col)
        targets.append(current)
    columns.append(below)
    targets.append(t_d_bot)
    demo_cols, demo_targets, _ = _demographic_blocks(ds, bm)
    columns.extend(demo_cols)
    targets.extend(demo_targets)

    problem = calib.CalibrationProblem(
        base_weights=ds.weights,
        aux=np.column_stack(columns),
        targets=np.asarray(targets),
        bounds=bounds,
    )
    with warnings.catch_warnings():
        # the count margins are linearly dependent by construction
        warnings.simplefilter("ignore", category=calib.RankDeficiencyWarning)
        result = calib.solve(problem)
    return ds.with_weights(result.new_weights), result


def _imputation_constants(ds: SurveyDataset, tau: float) -> np.ndarray:
    """(1/w_i)^tau computed in log space, median-filled for w <= 0, normalised."""
    w = ds.wealth()
    positive = w > 0
    if not positive.any():
        raise EmptyTail("no household with positive wealth; constants undefined")
    w_med = float(np.median(w[positive]))
    log_c = -tau * np.log(np.where(positive, w, w_med))
    log_c -= log_c.max()
    c = np.exp(log_c)
    return np.maximum(c, 1e-300)


def multivariate_imputation(
    ds: SurveyDataset,
    bm_targets: dict[str, float],
    tau: float = 1.0,
    comparable_items: tuple[str, ...] = COMPARABLE_ITEMS,
    constants: np.ndarray | None = None,
) -> tuple[SurveyDataset, calib.CalibrationResult, np.ndarray]:
    """Reverse calibration: solve factors on the current weights, apply to amounts.

    The factor of each household scales its comparable items and is carried
    to the low-comparability items; weights never change. Factors below zero
    would produce negative amounts and are fatal.
    """
    missing = [i for i in comparable_items if i not in bm_targets]
    if missing:
        raise UserInputError(f"no benchmark target for items {missing}")
    aux = np.column_stack([ds.item(i) for i in comparable_items])
    targets = np.asarray([bm_targets[i] for i in comparable_items])
    c = _imputation_constants(ds, tau) if constants is None else np.asarray(constants, float)
    problem = calib.CalibrationProblem(
        base_weights=ds.weights, aux=aux, targets=targets, constants=c
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=calib.NegativeWeightWarning)
        result = calib.solve_chi2(problem)
    factors = result.factors
    if np.any(factors < 0):
        raise NegativeAmountProduced(
            f"imputation factor as low as {factors.min():.4g} would create negative amounts"
        )
    amounts = ds.amounts.copy()
    scaled = set(comparable_items) | set(LOW_COMPARABILITY_ITEMS)
    for j, item in enumerate(ITEMS):
        if item in scaled:
            amounts[:, j] *= factors
    return ds.with_amounts(amounts), result, factors


def proportional_allocation(
    ds: SurveyDataset, bm: MacroBenchmarks, items: tuple[str, ...]
) -> tuple[SurveyDataset, dict[str, float]]:
    """Scale each item by the inverse of its coverage ratio; weights unchanged."""
    factors = {}
    amounts = ds.amounts.copy()
    for item in items:
        t = bm.item_totals.get(item, 0.0)
        if t <= 0:
            raise ZeroBenchmark(item)
        ht = horvitz_thompson(ds, item)
        if ht <= 0:
            raise ZeroItemTotal(item)
        factors[item] = t / ht
        amounts[:, ITEMS.index(item)] *= factors[item]
    return ds.with_amounts(amounts), factors


def difference_adjustment(
    ds: SurveyDataset, item: str, shares: np.ndarray, target: float
) -> tuple[SurveyDataset, list[str]]:
    """y* = y + b_i*(t - HT); requires sum(d_i*b_i) = 1 so the gap closes exactly.

    Zero reporters can receive positive amounts. Negative results are kept
    but flagged, since item magnitudes are nominally non-negative.
    """
    b = np.asarray(shares, dtype=np.float64)
    normalisation = float(np.sum(ds.weights * b))
    if abs(normalisation - 1.0) > 1e-8:
        raise SharesNotNormalized(normalisation)
    gap = target - horvitz_thompson(ds, item)
    amounts = ds.amounts.copy()
    j = ITEMS.index(item)
    amounts[:, j] = amounts[:, j] + b * gap
    flags = []
    if np.any(amounts[:, j] < 0):
        flags.append("NegativeAmountProduced")
        warnings.warn(
            f"difference adjustment drove {int(np.sum(amounts[:, j] < 0))} "
            f"{item} amounts negative",
            NegativeAmountWarning,
            stacklevel=2,
        )
    return ds.with_amounts(amounts), flags


def integrate_rich_list(rl: RichList, ds: SurveyDataset, w0: float) -> RichList:
    """Give rich-list entries portfolios using the survey tail's composition.

    Net worth is grossed up by the tail's liabilities/gross ratio, assets
    split by the tail's gross-wealth shares; the decomposition sums back to
    net worth by construction.
    """
    shares = tail_item_shares(ds, w0)
    portfolio = np.zeros((rl.n, len(ITEMS)))
    for j, item in enumerate(ITEMS):
        portfolio[:, j] = rl.wealth * shares[item]
    return RichList(wealth=rl.wealth, portfolio=portfolio)


def missing_tail_item_amounts(fit: ParetoFit, shares: dict[str, float]) -> dict[str, float]:
    """Decompose the missing tail's wealth into per-item totals."""
    fit.require_finite_mean()
    return {item: shares[item] * fit.t_w_miss for item in ITEMS}


def subtract_tail_totals(
    bm: MacroBenchmarks,
    fit: ParetoFit,
    shares: dict[str, float],
    amount: str = "top",
) -> MacroBenchmarks:
    """Benchmarks minus the tail's per-item holdings, floored at zero.

    `amount` selects the whole Pareto tail ("top") or just the unobserved
    part above the truncation point ("miss"); the iterative driver uses
    "miss" so totals including the synthetic record land on the originals.
    """
    fit.require_finite_mean()
    total = fit.t_w_top if amount == "top" else fit.t_w_miss
    adjusted = {}
    for item, value in bm.item_totals.items():
        take = shares.get(item, 0.0) * total
        if take > value:
            warnings.warn(
                f"tail holds {take:.6g} of {item!r}, above the benchmark {value:.6g}; "
                "flooring at 0",
                BenchmarkFloorWarning,
                stacklevel=2,
            )
        adjusted[item] = max(value - take, 0.0)
    return bm.replace_items(adjusted)


def impute_missing_tail_observation(
    ds: SurveyDataset,
    fit: ParetoFit,
    shares: dict[str, float] | None = None,
) -> tuple[SurveyDataset, str | None]:
    """Append one synthetic record carrying the unobserved part of the tail.

    Weight t_d_miss, net wealth t_w_miss/t_d_miss, portfolio decomposed with
    the tail's item shares. Nothing is appended when the missing count is
    negligible. Demographics take the tail's weighted modal cells.
    """
    fit.require_finite_mean()
    if fit.t_d_miss <= 1e-9:
        return ds, None
    shares = shares or tail_item_shares(ds, fit.w0)
    unit_net = fit.t_w_miss / fit.t_d_miss
    portfolio = np.asarray([[shares[item] * unit_net for item in ITEMS]])

    wealth = ds.wealth()
    tail_mask = wealth >= fit.w0
    demographics = {}
    for dim, labels in ds.demographics.items():
        arr = np.asarray(labels)
        if tail_mask.any():
            cells, idx = np.unique(arr[tail_mask], return_inverse=True)
            weights_per_cell = np.bincount(idx, weights=ds.weights[tail_mask])
            modal = cells[int(np.argmax(weights_per_cell))]
        else:
            modal = arr[0]
        demographics[dim] = tuple(labels) + (str(modal),)

    appended = SurveyDataset(
        ids=ds.ids + (SYNTHETIC_TAIL_ID,),
        weights=np.concatenate([ds.weights, [fit.t_d_miss]]),
        amounts=np.vstack([ds.amounts, portfolio]),
        demographics=demographics,
        currency=ds.currency,
        wealth_concept=ds.wealth_concept,
    )
    return appended, SYNTHETIC_TAIL_ID


# --- estimator pipelines ---------------------------------------------------


def _record(
    iteration: int,
    fit: ParetoFit,
    ds: SurveyDataset,
    bm: MacroBenchmarks,
    items,
    residual: float = 0.0,
) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        w0=fit.w0,
        alpha=fit.alpha,
        r2=fit.r2,
        t_d_top=fit.t_d_top,
        t_d_miss=fit.t_d_miss,
        coverage_ratios=_coverage_map(ds, bm, items),
        max_constraint_residual=residual,
    )


def _fit(ds: SurveyDataset, rl: RichList | None, cfg: AdjustmentConfig) -> ParetoFit:
    return fit_pareto(
        ds, rl, min_tail=cfg.min_tail, candidate_fraction=cfg.candidate_fraction
    )


def survey_missing_tail(
    ds: SurveyDataset, rl: RichList | None, bm: MacroBenchmarks, cfg: AdjustmentConfig
) -> AdjustmentOutcome:
    """Unadjusted survey plus the synthetic missing-tail record."""
    fit = _fit(ds, rl, cfg)
    shares = tail_item_shares(ds, fit.w0)
    adjusted, synth_id = impute_missing_tail_observation(ds, fit, shares)
    return AdjustmentOutcome(
        dataset=adjusted,
        trace=[_record(1, fit, ds, bm, cfg.comparable_items)],
        synthetic_tail_observation=synth_id,
        final_fit=fit,
    )


def pareto_cal(
    ds: SurveyDataset, rl: RichList | None, bm: MacroBenchmarks, cfg: AdjustmentConfig
) -> AdjustmentOutcome:
    """Pareto-calibration reweighting plus the missing-tail record."""
    fit = _fit(ds, rl, cfg)
    reweighted, result = pareto_calibration(ds, fit, bm, cfg.weight_bounds)
    shares = tail_item_shares(reweighted, fit.w0)
    adjusted, synth_id = impute_missing_tail_observation(reweighted, fit, shares)
    residual = float(np.max(np.abs(result.residuals))) if len(result.residuals) else 0.0
    return AdjustmentOutcome(
        dataset=adjusted,
        trace=[_record(1, fit, reweighted, bm, cfg.comparable_items, residual)],
        synthetic_tail_observation=synth_id,
        final_fit=fit,
    )


def pareto_cal_proportional(
    ds: SurveyDataset, rl: RichList | None, bm: MacroBenchmarks, cfg: AdjustmentConfig
) -> AdjustmentOutcome:
    """Pareto-calibration, then inverse-coverage scaling of the comparable items."""
    fit = _fit(ds, rl, cfg)
    reweighted, result = pareto_calibration(ds, fit, bm, cfg.weight_bounds)
    shares = tail_item_shares(reweighted, fit.w0)
    bm_net = subtract_tail_totals(bm, fit, shares, amount="miss")
    scaled, factors = proportional_allocation(reweighted, bm_net, cfg.comparable_items)
    adjusted, synth_id = impute_missing_tail_observation(scaled, fit, shares)
    residual = float(np.max(np.abs(result.residuals))) if len(result.residuals) else 0.0
    return AdjustmentOutcome(
        dataset=adjusted,
        trace=[_record(1, fit, scaled, bm, cfg.comparable_items, residual)],
        synthetic_tail_observation=synth_id,
        final_fit=fit,
        flags=[f"proportional_factor_{k}={v:.6g}" for k, v in factors.items()],
    )


def single_iteration(
    ds: SurveyDataset, rl: RichList | None, bm: MacroBenchmarks, cfg: AdjustmentConfig
) -> AdjustmentOutcome:
    """One-shot scaling: calibrate weights, scale wealth by the coverage scalar.

    Assumes the relative error converges to a constant, so after the
    reweighting step the benchmark gap yields a single scalar zeta and the
    amount factors a_i = 1 + lambda*d*_i solve the quadratic-loss
    calibration on reported wealth. The tail is refit on the rescaled data
    before the missing-tail record is appended.
    """
    fit0 = _fit(ds, rl, cfg)
    reweighted, result = pareto_calibration(ds, fit0, bm, cfg.weight_bounds)

    concept = cfg.zeta_concept or ds.wealth_concept
    wealth = reweighted.wealth(concept)
    below = wealth < fit0.w0
    ht_below = float(np.sum(reweighted.weights[below] * wealth[below]))
    t_w_hat = fit0.t_w_top + ht_below
    t_w_macro = bm.wealth_total(concept)
    zeta = t_w_macro / t_w_hat

    d_star = reweighted.weights
    positive = wealth > 0
    fixed = float(np.sum(d_star[~positive] * wealth[~positive]))
    target = zeta * float(np.sum(d_star * wealth)) - fixed
    sum_dw = float(np.sum(d_star[positive] * wealth[positive]))
    sum_ddw = float(np.sum(d_star[positive] ** 2 * wealth[positive]))
    lam = (target - sum_dw) / sum_ddw
    factors = np.where(positive, 1.0 + lam * d_star, 1.0)
    if np.any(factors < 0):
        raise NegativeAmountProduced(
            f"wealth factor as low as {factors.min():.4g} would create negative amounts"
        )
    scaled = reweighted.with_amounts(reweighted.amounts * factors[:, None])

    fit1 = _fit(scaled, rl, cfg)
    shares = tail_item_shares(scaled, fit1.w0)
    adjusted, synth_id = impute_missing_tail_observation(scaled, fit1, shares)
    residual = float(np.max(np.abs(result.residuals))) if len(result.residuals) else 0.0
    return AdjustmentOutcome(
        dataset=adjusted,
        trace=[
            _record(1, fit0, reweighted, bm, cfg.comparable_items, residual),
            _record(2, fit1, scaled, bm, cfg.comparable_items),
        ],
        synthetic_tail_observation=synth_id,
        zeta=zeta,
        amount_factors=factors,
        final_fit=fit1,
    )


def single_iteration_portfolio(
    ds: SurveyDataset, rl: RichList | None, bm: MacroBenchmarks, cfg: AdjustmentConfig
) -> AdjustmentOutcome:
    """Single-iteration scaling followed by a portfolio weight calibration.

    The extra step calibrates weights to the missing-tail-adjusted item
    benchmarks while holding the Pareto tail constraints and demographics,
    so final item totals (with the synthetic record) match the accounts.
    """
    base = single_iteration(ds, rl, bm, cfg)
    fit = base.final_fit
    assert fit is not None
    synth_id = base.synthetic_tail_observation
    # strip the synthetic record, recalibrate the real households, re-append
    if synth_id is not None:
        mask = np.asarray([i != synth_id for i in base.dataset.ids])
        core = base.dataset.subset(mask)
    else:
        core = base.dataset
    shares = tail_item_shares(core, fit.w0)
    bm_net = subtract_tail_totals(bm, fit, shares, amount="miss")

    wealth = core.wealth()
    in_tail = (wealth >= fit.w0).astype(np.float64)
    columns = [wealth * in_tail, in_tail]
    targets = [fit.t_w_top - fit.t_w_miss, fit.t_d_obs]
    for item in cfg.comparable_items:
        columns.append(core.item(item))
        targets.append(bm_net.item_totals[item])
    demo_cols, demo_targets, _ = _demographic_blocks(core, bm)
    columns.extend(demo_cols)
    targets.extend(demo_targets)
    problem = calib.CalibrationProblem(
        base_weights=core.weights,
        aux=np.column_stack(columns),
        targets=np.asarray(targets),
        bounds=cfg.weight_bounds,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=calib.RankDeficiencyWarning)
        result = calib.solve(problem)
    recalibrated = core.with_weights(result.new_weights)
    adjusted, synth_id = impute_missing_tail_observation(recalibrated, fit, shares)
    residual = float(np.max(np.abs(result.residuals))) if len(result.residuals) else 0.0
    trace = base.trace + [_record(3, fit, recalibrated, bm, cfg.comparable_items, residual)]
    return AdjustmentOutcome(
        dataset=adjusted,
        trace=trace,
        synthetic_tail_observation=synth_id,
        zeta=base.zeta,
        amount_factors=base.amount_factors,
        final_fit=fit,
    )


def simultaneous(
    ds: SurveyDataset, rl: RichList | None, bm: MacroBenchmarks, cfg: AdjustmentConfig
) -> AdjustmentOutcome:
    """Alternate Pareto-calibration and multivariate imputation to convergence.

    Stops when the tail shape moves by less than `alpha_tolerance` between
    consecutive iterations, or flags non-convergence after max_iterations.
    The missing-tail record appended at the end reuses the per-item amounts
    subtracted from the benchmarks in the last imputation, so final totals
    including the record match the original benchmarks.
    """
    work = ds
    trace: list[IterationRecord] = []
    factors_total = np.ones(ds.n)
    fit = _fit(work, rl, cfg)
    snapshot = None
    converged = False
    for iteration in range(1, cfg.max_iterations + 1):
        reweighted, cal_result = pareto_calibration(work, fit, bm, cfg.weight_bounds)
        shares = tail_item_shares(reweighted, fit.w0)
        bm_adjusted = subtract_tail_totals(bm, fit, shares, amount="miss")
        targets = {i: bm_adjusted.item_totals[i] for i in cfg.comparable_items}
        work, imp_result, factors = multivariate_imputation(
            reweighted, targets, cfg.tau, cfg.comparable_items
        )
        factors_total *= factors
        snapshot = (fit, shares)
        residual = float(
            max(
                np.max(np.abs(cal_result.residuals), initial=0.0),
                np.max(np.abs(imp_result.residuals), initial=0.0),
            )
        )
        trace.append(_record(iteration, fit, work, bm, cfg.comparable_items, residual))
        refit = _fit(work, rl, cfg)
        if abs(refit.alpha - fit.alpha) < cfg.alpha_tolerance:
            fit = refit
            converged = True
            break
        fit = refit

    assert snapshot is not None
    last_fit, last_shares = snapshot
    adjusted, synth_id = impute_missing_tail_observation(work, last_fit, last_shares)
    flags = [] if converged else ["NonConvergence"]
    original_sum = float(np.sum(ds.weights))
    adjusted_core = float(np.sum(adjusted.weights)) - (
        last_fit.t_d_miss if synth_id is not None else 0.0
    )
    if adjusted_core > original_sum + last_fit.t_d_miss + 1e-6:
        flags.append("weight_sum_increased")
    return AdjustmentOutcome(
        dataset=adjusted,
        trace=trace,
        synthetic_tail_observation=synth_id,
        amount_factors=factors_total,
        converged=converged,
        flags=flags,
        final_fit=fit,
    )


_PIPELINES = {
    "survey_missing_tail": survey_missing_tail,
    "pareto_cal": pareto_cal,
    "pareto_cal_proportional": pareto_cal_proportional,
    "single_iteration": single_iteration,
    "single_iteration_portfolio": single_iteration_portfolio,
    "simultaneous": simultaneous,
}


def run_adjustment(
    ds: SurveyDataset,
    rl: RichList | None,
    bm: MacroBenchmarks,
    cfg: AdjustmentConfig,
) -> AdjustmentOutcome:
    """Dispatch to the configured estimator pipeline."""
    return _PIPELINES[cfg.method](ds, rl, bm, cfg)
