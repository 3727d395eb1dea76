"""Exception and warning hierarchy.

Two families matter for the CLI exit-code contract: errors caused by bad
user input (exit 1) and errors arising from the numerics of an otherwise
valid run (exit 2).
"""


class WealthGapError(Exception):
    """Base class for all library errors."""


class UserInputError(WealthGapError):
    """Invalid input data or configuration (CLI exit code 1)."""


class NumericalError(WealthGapError):
    """Estimation or optimisation failure on valid inputs (CLI exit code 2)."""


# --- ingestion / data model ---------------------------------------------


class MissingColumn(UserInputError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"required column missing: {column!r}")


class NonPositiveWeight(UserInputError):
    def __init__(self, row, value):
        self.row = row
        self.value = value
        super().__init__(f"non-positive weight {value!r} in data row {row}")


class NegativeAmount(UserInputError):
    def __init__(self, row, item, value):
        self.row = row
        self.item = item
        self.value = value
        super().__init__(f"negative amount {value!r} for {item!r} in data row {row}")


class DuplicateId(UserInputError):
    def __init__(self, household_id, row):
        self.household_id = household_id
        self.row = row
        super().__init__(f"duplicate household id {household_id!r} at data row {row}")


class UnknownVariable(UserInputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class ZeroBenchmark(UserInputError):
    def __init__(self, item):
        self.item = item
        super().__init__(f"benchmark total for {item!r} must be positive")


class SharesNotNormalized(UserInputError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"weighted shares sum to {total!r}, expected 1")


class UsageError(UserInputError):
    """Bad command-line invocation."""


# --- Pareto tail --------------------------------------------------------


class DomainError(NumericalError):
    """Argument outside the support of the fitted distribution."""


class InfiniteMean(NumericalError):
    def __init__(self, alpha):
        self.alpha = alpha
        super().__init__(f"Pareto mean undefined for alpha={alpha!r} <= 1")


class EmptyExceedanceSet(NumericalError):
    """No observation exceeds the evaluation point."""


class InsufficientTail(NumericalError):
    """Too few observations above every candidate threshold."""


class DegenerateRegression(NumericalError):
    """Tail regression has no usable spread in log wealth."""


class EmptyTail(NumericalError):
    """No usable observations at or above the threshold."""


# --- calibration --------------------------------------------------------


class SingularGram(NumericalError):
    """Calibration constraints are mutually inconsistent."""


class NoFeasibleSolution(NumericalError):
    """Range restrictions exhaust the free units before constraints are met."""


class NegativeAmountProduced(NumericalError):
    """An imputation factor would drive portfolio amounts negative."""


class ZeroItemTotal(NumericalError):
    def __init__(self, item):
        self.item = item
        super().__init__(f"survey total for {item!r} is zero; cannot scale")


class ZeroMean(NumericalError):
    """Weighted mean is zero; indicator undefined."""


# --- variance -----------------------------------------------------------


class SingletonStratum(NumericalError):
    def __init__(self, stratum):
        self.stratum = stratum
        super().__init__(f"stratum {stratum!r} has a single PSU; cannot resample")


class EmptySample(NumericalError):
    """Sampling produced no respondents."""


class AllReplicatesFailed(NumericalError):
    """Every bootstrap replicate was discarded."""


# --- warnings -----------------------------------------------------------


class WealthGapWarning(UserWarning):
    pass


class UnknownColumnWarning(WealthGapWarning):
    pass


class RankDeficiencyWarning(WealthGapWarning):
    pass


class NegativeWeightWarning(WealthGapWarning):
    pass


class NegativeAmountWarning(WealthGapWarning):
    pass


class BenchmarkFloorWarning(WealthGapWarning):
    pass


class ReplicateWeightBandWarning(WealthGapWarning):
    pass
