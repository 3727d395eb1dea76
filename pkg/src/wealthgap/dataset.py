"""Survey, rich-list and benchmark data model plus basic weighted estimators.

Datasets are immutable after construction: the numpy arrays backing them are
marked read-only, so they can be shared freely across threads and bootstrap
workers. All estimators here are pure functions of their inputs.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateId,
    MissingColumn,
    NegativeAmount,
    NonPositiveWeight,
    UnknownColumnWarning,
    UnknownVariable,
    UserInputError,
    ZeroBenchmark,
)

# Fixed portfolio item set; liabilities are stored as a non-negative magnitude.
ITEMS = (
    "deposits",
    "bonds",
    "shares",
    "mutual_funds",
    "insurance_pensions",
    "money_owed",
    "business_wealth",
    "housing_wealth",
    "liabilities",
)
ASSET_ITEMS = ITEMS[:-1]
LIABILITY_ITEM = "liabilities"

# Instruments with high micro/macro conceptual comparability; the remaining
# two (business and housing wealth) receive carried adjustment factors.
COMPARABLE_ITEMS = (
    "deposits",
    "bonds",
    "shares",
    "mutual_funds",
    "insurance_pensions",
    "money_owed",
    "liabilities",
)
LOW_COMPARABILITY_ITEMS = ("business_wealth", "housing_wealth")

WEALTH_CONCEPTS = ("net", "gross")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Household:
    """One survey record: design weight, portfolio amounts, cell labels."""

    id: str
    weight: float
    portfolio: Mapping[str, float]
    demographics: Mapping[str, str] = field(default_factory=dict)

    def validate(self, row: int | None = None) -> None:
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise NonPositiveWeight(row, self.weight)
        for item in ITEMS:
            v = float(self.portfolio.get(item, 0.0))
            if not math.isfinite(v) or v < 0:
                raise NegativeAmount(row, item, v)

    @property
    def gross_wealth(self) -> float:
        return math.fsum(float(self.portfolio.get(i, 0.0)) for i in ASSET_ITEMS)

    @property
    def net_wealth(self) -> float:
        return self.gross_wealth - float(self.portfolio.get(LIABILITY_ITEM, 0.0))


@dataclass(frozen=True)
class SurveyDataset:
    """Columnar household survey with design weights.

    `amounts` has one column per entry of ITEMS, in that order. Ties in any
    wealth ranking are broken by id ascending so ranks are deterministic.
    """

    ids: tuple[str, ...]
    weights: np.ndarray
    amounts: np.ndarray
    demographics: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    currency: str = "EUR"
    wealth_concept: str = "net"

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        w = _readonly(np.asarray(self.weights, dtype=np.float64))
        a = _readonly(np.asarray(self.amounts, dtype=np.float64).reshape(-1, len(ITEMS)))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "amounts", a)
        object.__setattr__(
            self,
            "demographics",
            {k: tuple(str(x) for x in v) for k, v in self.demographics.items()},
        )
        if self.wealth_concept not in WEALTH_CONCEPTS:
            raise UserInputError(f"wealth_concept must be one of {WEALTH_CONCEPTS}")
        if len(w) != a.shape[0] or len(w) != len(self.ids):
            raise UserInputError("ids, weights and amounts must have equal length")
        for col, labels in self.demographics.items():
            if len(labels) != len(w):
                raise UserInputError(f"demographic column {col!r} has wrong length")

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def gross_wealth(self) -> np.ndarray:
        return _readonly(self.amounts[:, : len(ASSET_ITEMS)].sum(axis=1))

    @cached_property
    def net_wealth(self) -> np.ndarray:
        return _readonly(self.gross_wealth - self.amounts[:, ITEMS.index(LIABILITY_ITEM)])

    def wealth(self, concept: str | None = None) -> np.ndarray:
        concept = concept or self.wealth_concept
        if concept == "net":
            return self.net_wealth
        if concept == "gross":
            return self.gross_wealth
        raise UnknownVariable(concept)

    def item(self, name: str) -> np.ndarray:
        try:
            return self.amounts[:, ITEMS.index(name)]
        except ValueError:
            raise UnknownVariable(name) from None

    def variable(self, name: str) -> np.ndarray:
        """Resolve an item name or a wealth selector to a value column."""
        if name in ITEMS:
            return self.item(name)
        if name in ("net", "net_wealth", "wealth"):
            return self.net_wealth if name != "wealth" else self.wealth()
        if name in ("gross", "gross_wealth"):
            return self.gross_wealth
        raise UnknownVariable(name)

    def rank_order(self, concept: str | None = None) -> np.ndarray:
        """Indices sorting by wealth descending, ties broken by id ascending."""
        w = self.wealth(concept)
        order = sorted(range(self.n), key=lambda i: (-w[i], self.ids[i]))
        return np.asarray(order, dtype=np.intp)

    def with_weights(self, weights: np.ndarray) -> "SurveyDataset":
        return replace(self, weights=np.asarray(weights, dtype=np.float64))

    def with_amounts(self, amounts: np.ndarray) -> "SurveyDataset":
        return replace(self, amounts=np.asarray(amounts, dtype=np.float64))

    def subset(self, mask: np.ndarray) -> "SurveyDataset":
        idx = np.flatnonzero(mask)
        return SurveyDataset(
            ids=tuple(self.ids[i] for i in idx),
            weights=self.weights[idx],
            amounts=self.amounts[idx],
            demographics={k: tuple(v[i] for i in idx) for k, v in self.demographics.items()},
            currency=self.currency,
            wealth_concept=self.wealth_concept,
        )

    def households(self) -> Iterable[Household]:
        for i in range(self.n):
            yield Household(
                id=self.ids[i],
                weight=float(self.weights[i]),
                portfolio={item: float(self.amounts[i, j]) for j, item in enumerate(ITEMS)},
                demographics={k: v[i] for k, v in self.demographics.items()},
            )

    @classmethod
    def from_households(
        cls,
        households: Sequence[Household],
        currency: str = "EUR",
        wealth_concept: str = "net",
        validate: bool = True,
    ) -> "SurveyDataset":
        seen: dict[str, int] = {}
        demo_cols: list[str] = []
        for row, hh in enumerate(households, start=1):
            if validate:
                hh.validate(row)
            if hh.id in seen:
                raise DuplicateId(hh.id, row)
            seen[hh.id] = row
            for col in hh.demographics:
                if col not in demo_cols:
                    demo_cols.append(col)
        n = len(households)
        amounts = np.zeros((n, len(ITEMS)))
        for i, hh in enumerate(households):
            for j, item in enumerate(ITEMS):
                amounts[i, j] = float(hh.portfolio.get(item, 0.0))
        return cls(
            ids=tuple(hh.id for hh in households),
            weights=np.asarray([hh.weight for hh in households], dtype=np.float64),
            amounts=amounts,
            demographics={
                col: tuple(hh.demographics.get(col, "?") for hh in households)
                for col in demo_cols
            },
            currency=currency,
            wealth_concept=wealth_concept,
        )


@dataclass(frozen=True)
class RichList:
    """External top-wealth records, unit weight each, sorted richest first."""

    wealth: np.ndarray
    portfolio: np.ndarray | None = None  # optional (n, len(ITEMS)) amounts

    def __post_init__(self):
        w = np.asarray(self.wealth, dtype=np.float64)
        w = _readonly(np.sort(w)[::-1].copy())
        object.__setattr__(self, "wealth", w)
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise UserInputError("rich list wealth values must be positive and finite")
        if self.portfolio is not None:
            p = _readonly(np.asarray(self.portfolio, dtype=np.float64).reshape(-1, len(ITEMS)))
            if p.shape[0] != len(w):
                raise UserInputError("rich list portfolio has wrong length")
            object.__setattr__(self, "portfolio", p)

    @property
    def n(self) -> int:
        return len(self.wealth)

    @classmethod
    def empty(cls) -> "RichList":
        return cls(wealth=np.empty(0))


@dataclass(frozen=True)
class MacroBenchmarks:
    """Macro-side totals: per-item currency totals and demographic counts."""

    item_totals: Mapping[str, float]
    demographic_counts: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        items = {str(k): float(v) for k, v in self.item_totals.items()}
        for k, v in items.items():
            if not math.isfinite(v) or v < 0:
                raise UserInputError(f"item benchmark {k!r} must be finite and >= 0")
        demo = {
            str(dim): {str(c): float(v) for c, v in cells.items()}
            for dim, cells in self.demographic_counts.items()
        }
        for dim, cells in demo.items():
            for cell, v in cells.items():
                if not math.isfinite(v) or v <= 0:
                    raise UserInputError(f"demographic count {dim}/{cell} must be > 0")
        object.__setattr__(self, "item_totals", items)
        object.__setattr__(self, "demographic_counts", demo)

    def total(self, item: str) -> float:
        try:
            return self.item_totals[item]
        except KeyError:
            raise UnknownVariable(item) from None

    def total_households(self) -> float:
        """Population household count implied by the demographic margins.

        Every demographic dimension partitions the population, so each must
        sum to the same count; the first one is authoritative.
        """
        if not self.demographic_counts:
            raise UserInputError("benchmarks carry no demographic counts")
        sums = {dim: math.fsum(cells.values()) for dim, cells in self.demographic_counts.items()}
        first = next(iter(sums.values()))
        for dim, s in sums.items():
            if abs(s - first) > 1e-6 * max(first, 1.0):
                warnings.warn(
                    f"demographic dimension {dim!r} sums to {s}, expected {first}",
                    UnknownColumnWarning,
                    stacklevel=2,
                )
        return first

    def wealth_total(self, concept: str = "net") -> float:
        assets = math.fsum(self.item_totals.get(i, 0.0) for i in ASSET_ITEMS)
        if concept == "gross":
            return assets
        if concept == "net":
            return assets - self.item_totals.get(LIABILITY_ITEM, 0.0)
        raise UnknownVariable(concept)

    def replace_items(self, item_totals: Mapping[str, float]) -> "MacroBenchmarks":
        merged = dict(self.item_totals)
        merged.update(item_totals)
        return MacroBenchmarks(merged, self.demographic_counts)


# --- estimators ---------------------------------------------------------


def horvitz_thompson(ds: SurveyDataset, variable: str) -> float:
    """Weighted total sum(d_i * v_i), accumulated with compensated summation."""
    v = ds.variable(variable)
    return math.fsum(float(ds.weights[i]) * float(v[i]) for i in range(ds.n))


def coverage_ratio(ds: SurveyDataset, bm: MacroBenchmarks, item: str) -> float:
    t = bm.total(item)
    if t <= 0:
        raise ZeroBenchmark(item)
    return horvitz_thompson(ds, item) / t


# --- schema and file I/O --------------------------------------------------


@dataclass(frozen=True)
class SurveySchema:
    """Mapping from CSV columns to the survey data model."""

    id: str = "id"
    weight: str = "weight"
    items: Mapping[str, str] = field(default_factory=lambda: {i: i for i in ITEMS})
    demographics: tuple[str, ...] = ()

    def required_columns(self) -> list[str]:
        return [self.id, self.weight, *self.items.values(), *self.demographics]


def load_survey(
    path: str | Path,
    schema: SurveySchema | None = None,
    currency: str = "EUR",
    wealth_concept: str = "net",
) -> SurveyDataset:
    """Read and validate a household CSV (header row, UTF-8, '.' decimals).

    Any invariant violation is rejected with the offending 1-based data row
    in the raised error. Columns outside the schema are ignored with a
    warning. An empty file (no valid rows) is rejected.
    """
    schema = schema or SurveySchema()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in schema.required_columns():
            if col not in header:
                raise MissingColumn(col)
        known = set(schema.required_columns())
        unknown = [c for c in header if c not in known]
        if unknown:
            warnings.warn(
                f"ignoring unknown columns {unknown} in {path.name}",
                UnknownColumnWarning,
                stacklevel=2,
            )
        households = []
        for row, rec in enumerate(reader, start=1):
            hh = Household(
                id=rec[schema.id],
                weight=_parse_float(rec[schema.weight], row, schema.weight),
                portfolio={
                    item: _parse_float(rec[col], row, col) for item, col in schema.items.items()
                },
                demographics={c: rec[c] for c in schema.demographics},
            )
            households.append(hh)
    ds = SurveyDataset.from_households(
        households, currency=currency, wealth_concept=wealth_concept
    )
    if ds.n == 0 or float(ds.weights.sum()) <= 0:
        raise UserInputError(f"{path}: no households with positive weight")
    return ds


def _parse_float(text: str, row: int, col: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UserInputError(f"cannot parse {col!r}={text!r} at data row {row}") from None


def write_survey(
    ds: SurveyDataset,
    path: str | Path,
    extra_columns: Mapping[str, Sequence] | None = None,
) -> None:
    """Write a dataset back to CSV; floats use repr so reloads are value-identical."""
    path = Path(path)
    demo_cols = list(ds.demographics)
    extra = dict(extra_columns or {})
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "weight", *ITEMS, *demo_cols, *extra])
        for i in range(ds.n):
            writer.writerow(
                [
                    ds.ids[i],
                    repr(float(ds.weights[i])),
                    *(repr(float(x)) for x in ds.amounts[i]),
                    *(ds.demographics[c][i] for c in demo_cols),
                    *(extra[c][i] for c in extra),
                ]
            )


def load_rich_list(path: str | Path) -> RichList:
    """Read a rich list CSV: a `wealth` column, optionally the nine items."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "wealth" not in header:
            raise MissingColumn("wealth")
        has_items = all(i in header for i in ITEMS)
        wealth, rows = [], []
        for rec in reader:
            wealth.append(float(rec["wealth"]))
            if has_items:
                rows.append([float(rec[i]) for i in ITEMS])
    portfolio = np.asarray(rows) if has_items and rows else None
    return RichList(wealth=np.asarray(wealth), portfolio=portfolio)


def write_rich_list(rl: RichList, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if rl.portfolio is None:
            writer.writerow(["wealth"])
            for w in rl.wealth:
                writer.writerow([repr(float(w))])
        else:
            writer.writerow(["wealth", *ITEMS])
            for w, row in zip(rl.wealth, rl.portfolio):
                writer.writerow([repr(float(w)), *(repr(float(x)) for x in row)])


def load_benchmarks(path: str | Path) -> MacroBenchmarks:
    """Read a benchmarks JSON: {"items": {...}, "demographics": {dim: {cell: n}}}."""
    with Path(path).open(encoding="utf-8") as fh:
        doc = json.load(fh)
    if "items" not in doc:
        raise MissingColumn("items")
    return MacroBenchmarks(
        item_totals=doc["items"], demographic_counts=doc.get("demographics", {})
    )


def write_benchmarks(bm: MacroBenchmarks, path: str | Path) -> None:
    doc = {"items": dict(bm.item_totals), "demographics": {k: dict(v) for k, v in bm.demographic_counts.items()}}
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
