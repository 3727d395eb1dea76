"""Rao-Wu rescaled bootstrap variance assessment.

Replicate weight streams are derived from (master seed, replicate index),
so replicates are independent of execution order and worker count; each
replicate reruns the full configured adjustment, re-estimating the Pareto
parameters, and failed calibrations are discarded rather than fatal.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adjust import AdjustmentConfig, run_adjustment
from .dataset import MacroBenchmarks, RichList, SurveyDataset
from .errors import (
    AllReplicatesFailed,
    MissingColumn,
    ReplicateWeightBandWarning,
    SingletonStratum,
    UserInputError,
    WealthGapError,
)
from .indicators import indicator_report


@dataclass(frozen=True)
class ReplicateWeights:
    """R replicate weight columns per household."""

    matrix: np.ndarray  # (n, R), all >= 0
    seed: int | None = None

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if np.any(m < 0):
            raise UserInputError("replicate weights must be non-negative")

    @property
    def R(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class BootstrapSummary:
    indicators: dict[str, dict[str, float | None]]  # name -> {mean, sd, cv}
    successful_replicates: int
    discarded: int
    R: int
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "indicators": {k: dict(v) for k, v in self.indicators.items()},
            "successful_replicates": self.successful_replicates,
            "discarded": self.discarded,
            "replicates": self.R,
            "seed": self.seed,
        }


def generate_rao_wu(
    ds: SurveyDataset,
    R: int,
    seed: int = 0,
    psu_labels: list[str] | None = None,
    strata_labels: list[str] | None = None,
) -> ReplicateWeights:
    """Resample n_h - 1 PSUs with replacement per stratum and rescale.

    Replicate weight = d_i * (n_h/(n_h-1)) * m_i with m_i the multiplicity of
    the household's PSU in the draw. Default design: each household its own
    PSU, one stratum. Deterministic given the seed.
    """
    if R < 1:
        raise UserInputError("need at least one replicate")
    psu = list(psu_labels) if psu_labels is not None else list(ds.ids)
    strata = list(strata_labels) if strata_labels is not None else ["_all"] * ds.n
    if len(psu) != ds.n or len(strata) != ds.n:
        raise UserInputError("psu and strata labels must match the dataset length")

    by_stratum: dict[str, list[str]] = {}
    psu_index: dict[tuple[str, str], int] = {}
    for s, p in zip(strata, psu):
        if (s, p) not in psu_index:
            psu_index[(s, p)] = len(by_stratum.setdefault(s, []))
            by_stratum[s].append(p)
    for s, psus in by_stratum.items():
        if len(psus) < 2:
            raise SingletonStratum(s)

    matrix = np.zeros((ds.n, R))
    household_pos = np.asarray([psu_index[(s, p)] for s, p in zip(strata, psu)])
    stratum_order = sorted(by_stratum)
    stratum_of = np.asarray([stratum_order.index(s) for s in strata])
    for r in range(R):
        rng = np.random.default_rng([seed, r])
        for si, s in enumerate(stratum_order):
            n_h = len(by_stratum[s])
            draws = rng.integers(0, n_h, size=n_h - 1)
            mult = np.bincount(draws, minlength=n_h)
            members = stratum_of == si
            matrix[members, r] = (
                ds.weights[members]
                * (n_h / (n_h - 1))
                * mult[household_pos[members]]
            )
    base_total = float(ds.weights.sum())
    rep_totals = matrix.sum(axis=0)
    off_band = np.abs(rep_totals - base_total) > 0.2 * base_total
    if off_band.any():
        warnings.warn(
            f"{int(off_band.sum())} replicate weight sums fall outside the "
            "20% sanity band around the original sum",
            ReplicateWeightBandWarning,
            stacklevel=2,
        )
    return ReplicateWeights(matrix=matrix, seed=seed)


def load_replicate_weights(path: str | Path, ds: SurveyDataset) -> ReplicateWeights:
    """Pass-through mode: read released replicate weights keyed by household id."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "id" not in header:
            raise MissingColumn("id")
        rep_cols = [c for c in header if c != "id"]
        rows = {rec["id"]: [float(rec[c]) for c in rep_cols] for rec in reader}
    missing = [i for i in ds.ids if i not in rows]
    if missing:
        raise UserInputError(f"replicate weights missing for ids {missing[:5]}")
    matrix = np.asarray([rows[i] for i in ds.ids])
    return ReplicateWeights(matrix=matrix)


@dataclass(frozen=True)
class _ReplicateTask:
    ds: SurveyDataset
    rl: RichList | None
    bm: MacroBenchmarks
    cfg: AdjustmentConfig
    matrix: np.ndarray

    def __call__(self, r: int) -> tuple[int, dict[str, float] | None]:
        weights = self.matrix[:, r]
        keep = weights > 0
        replicate = self.ds.subset(keep).with_weights(weights[keep])
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                outcome = run_adjustment(replicate, self.rl, self.bm, self.cfg)
                alpha = outcome.final_fit.alpha if outcome.final_fit else None
                report = indicator_report(outcome.dataset, self.bm, alpha)
            return r, report.flat()
        except WealthGapError:
            return r, None


def bootstrap_run(
    ds: SurveyDataset,
    rl: RichList | None,
    bm: MacroBenchmarks,
    cfg: AdjustmentConfig,
    reps: ReplicateWeights,
    workers: int = 1,
) -> BootstrapSummary:
    """Run the configured adjustment on every replicate and summarise.

    Summaries aggregate in replicate-index order, so results are bit-identical
    whatever the worker count. Standard deviations are population (ddof=0)
    so a single degenerate replicate reports sd = 0.
    """
    if reps.matrix.shape[0] != ds.n:
        raise UserInputError("replicate weights do not match the dataset")
    task = _ReplicateTask(ds=ds, rl=rl, bm=bm, cfg=cfg, matrix=reps.matrix)
    indices = range(reps.R)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, indices, chunksize=max(1, reps.R // (4 * workers))))
    else:
        results = [task(r) for r in indices]
    results.sort(key=lambda t: t[0])

    successes = [flat for _, flat in results if flat is not None]
    discarded = reps.R - len(successes)
    if not successes:
        raise AllReplicatesFailed(f"all {reps.R} replicates were discarded")

    names = sorted({k for flat in successes for k in flat})
    summary: dict[str, dict[str, float | None]] = {}
    for name in names:
        values = np.asarray([flat[name] for flat in successes if name in flat])
        mean = float(values.mean())
        sd = float(values.std(ddof=0))
        cv = sd / abs(mean) if mean != 0 else None
        summary[name] = {"mean": mean, "sd": sd, "cv": cv}
    return BootstrapSummary(
        indicators=summary,
        successful_replicates=len(successes),
        discarded=discarded,
        R=reps.R,
        seed=reps.seed,
    )
