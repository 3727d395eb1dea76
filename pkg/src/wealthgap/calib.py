"""Chi-squared survey calibration with range restrictions and ridge bands.

Finds per-unit adjustment factors a_i so the reweighted totals
sum(d_i*a_i*y_ir) meet benchmark targets t_r while minimising
sum((d_i*a_i - d_i)^2 / (d_i*c_i)). The unrestricted problem has the
analytic solution a_i = 1 + c_i*y_i'lambda with lambda from the Gram system;
bounds are handled by clamp-freeze-resolve iteration and ridge tolerances by
per-constraint penalties shrunk until every relaxed constraint sits inside
its band.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeWeightWarning,
    NoFeasibleSolution,
    RankDeficiencyWarning,
    SingularGram,
    UserInputError,
)

HARD_TOL = 1e-8  # relative, analytic solve
BOUNDED_TOL = 1e-6  # relative, restricted solve
MAX_CLAMP_ITERATIONS = 50
MAX_RIDGE_ITERATIONS = 60


@dataclass(frozen=True)
class CalibrationProblem:
    base_weights: np.ndarray  # d_i > 0
    aux: np.ndarray  # (n, k) auxiliary vectors y_i
    targets: np.ndarray  # (k,) benchmark totals t(y)
    constants: np.ndarray | None = None  # c_i > 0, default 1
    bounds: tuple[float, float] | None = None  # (L, U), 0 <= L < 1 < U
    ridge_tolerances: np.ndarray | None = None  # per-constraint tau_r in (-1, 1)

    def __post_init__(self):
        d = np.asarray(self.base_weights, dtype=np.float64)
        y = np.atleast_2d(np.asarray(self.aux, dtype=np.float64))
        if y.shape[0] != len(d):
            y = y.T
        t = np.atleast_1d(np.asarray(self.targets, dtype=np.float64))
        c = (
            np.ones(len(d))
            if self.constants is None
            else np.asarray(self.constants, dtype=np.float64)
        )
        object.__setattr__(self, "base_weights", d)
        object.__setattr__(self, "aux", y)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "constants", c)
        if y.shape != (len(d), len(t)):
            raise UserInputError(
                f"aux shape {y.shape} incompatible with {len(d)} units and {len(t)} targets"
            )
        if len(t) < 1:
            raise UserInputError("need at least one constraint")
        if not np.all(np.isfinite(t)):
            raise UserInputError("targets must be finite")
        if len(d) and (not np.all(np.isfinite(d)) or np.any(d <= 0)):
            raise UserInputError("base weights must be positive and finite")
        if len(d) and (not np.all(np.isfinite(c)) or np.any(c <= 0)):
            raise UserInputError("constants must be positive and finite")
        if self.bounds is not None:
            L, U = self.bounds
            if not (0 <= L < 1 < U):
                raise UserInputError(f"bounds must satisfy 0 <= L < 1 < U, got {self.bounds}")
        if self.ridge_tolerances is not None:
            tau = np.atleast_1d(np.asarray(self.ridge_tolerances, dtype=np.float64))
            if len(tau) != len(t):
                raise UserInputError("one ridge tolerance per constraint required")
            if np.any(np.abs(tau) >= 1):
                raise UserInputError("ridge tolerances must lie in (-1, 1)")
            object.__setattr__(self, "ridge_tolerances", tau)

    @property
    def n(self) -> int:
        return len(self.base_weights)

    @property
    def k(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class CalibrationResult:
    factors: np.ndarray
    new_weights: np.ndarray
    multipliers: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class KKTDiagnostics:
    stationarity: float
    constraint_residuals: np.ndarray


def _constraint_scales(problem: CalibrationProblem) -> np.ndarray:
    """Denominators for relative residuals; robust to zero targets."""
    t = np.abs(problem.targets)
    spread = np.abs(problem.base_weights[:, None] * problem.aux).sum(axis=0)
    return np.maximum(np.maximum(t, spread), 1e-300)


def _solve_gram(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm solve of M lambda = b with a rank-deficiency warning."""
    lam, _, rank, _ = np.linalg.lstsq(M, b, rcond=None)
    if rank < M.shape[0]:
        warnings.warn(
            f"calibration Gram matrix has rank {rank} < {M.shape[0]}; "
            "using the minimum-norm multipliers",
            RankDeficiencyWarning,
            stacklevel=3,
        )
    return lam


def solve_chi2(problem: CalibrationProblem) -> CalibrationResult:
    """Analytic chi-squared calibration; every constraint met to 1e-8 relative.

    Consistent rank-deficient constraint sets (redundant benchmarks) fall back
    to minimum-norm multipliers; inconsistent ones raise SingularGram.
    Negative weights are reported with a warning, not an error, when no
    bounds are requested.
    """
    d, y, t, c = problem.base_weights, problem.aux, problem.targets, problem.constants
    gap = t - d @ y
    M = (d * c)[:, None] * y
    M = y.T @ M
    lam = _solve_gram(M, gap)
    factors = 1.0 + c * (y @ lam)
    new_weights = d * factors
    residuals = new_weights @ y - t
    rel = np.abs(residuals) / _constraint_scales(problem)
    if np.any(rel > HARD_TOL):
        raise SingularGram(
            f"constraints cannot be met (max relative residual {rel.max():.3e}); "
            "the Gram system is inconsistent"
        )
    if np.any(new_weights < 0):
        warnings.warn(
            f"{int(np.sum(new_weights < 0))} calibrated weights are negative",
            NegativeWeightWarning,
            stacklevel=2,
        )
    return CalibrationResult(
        factors=factors,
        new_weights=new_weights,
        multipliers=lam,
        residuals=residuals,
        iterations=0,
        converged=True,
    )


def _restricted_solve(
    problem: CalibrationProblem,
    omega: np.ndarray | None,
    band: np.ndarray | None,
) -> CalibrationResult:
    """Clamp-freeze-resolve loop shared by the bounded and ridge paths.

    `omega` adds per-constraint penalties to the Gram diagonal (ridge) and
    `band` gives per-constraint absolute residual allowances (zero = hard).
    """
    d, y, t, c = problem.base_weights, problem.aux, problem.targets, problem.constants
    L, U = problem.bounds if problem.bounds is not None else (-np.inf, np.inf)
    scales = _constraint_scales(problem)
    allowance = np.zeros(problem.k) if band is None else band
    tol = BOUNDED_TOL if problem.bounds is not None else HARD_TOL

    factors = np.ones(problem.n)
    free = np.ones(problem.n, dtype=bool)
    lam = np.zeros(problem.k)
    iterations = 0
    for iterations in range(MAX_CLAMP_ITERATIONS):
        fixed_total = (d * factors * ~free) @ y
        sub_gap = t - fixed_total - (d * free) @ y
        df, cf, yf = d[free], c[free], y[free]
        M = yf.T @ ((df * cf)[:, None] * yf)
        if omega is not None:
            M = M + np.diag(omega)
        lam = _solve_gram(M, sub_gap)
        factors = np.where(free, 1.0 + c * (y @ lam), factors)
        below, above = factors < L, factors > U
        violating = (below | above) & free
        if violating.any():
            factors = np.clip(factors, L, U)
            free &= ~violating
            if not free.any():
                residuals = (d * factors) @ y - t
                if np.any(np.abs(residuals) > allowance + tol * scales):
                    raise NoFeasibleSolution(
                        "every unit is clamped to its bound but constraints remain unmet"
                    )
                break
            continue
        break
    new_weights = d * factors
    residuals = new_weights @ y - t
    converged = bool(np.all(np.abs(residuals) <= allowance + tol * scales))
    return CalibrationResult(
        factors=factors,
        new_weights=new_weights,
        multipliers=lam,
        residuals=residuals,
        iterations=iterations,
        converged=converged,
    )


def solve_bounded(problem: CalibrationProblem) -> CalibrationResult:
    """Restricted chi-squared calibration with factors kept inside [L, U]."""
    if problem.bounds is None:
        raise UserInputError("solve_bounded requires bounds")
    result = _restricted_solve(problem, omega=None, band=None)
    if not result.converged:
        raise NoFeasibleSolution(
            f"constraints unmet after {result.iterations + 1} restricted iterations"
        )
    return result


def solve_ridge(problem: CalibrationProblem) -> CalibrationResult:
    """Calibration with relaxed constraints: residual_r within |tau_r|*t_r.

    Constraints with tau_r = 0 stay hard. Implemented as penalised least
    squares: each relaxed constraint starts with a penalty on the Gram
    diagonal which is shrunk until the achieved residual sits inside the
    band, recovering the exact solution as the penalty vanishes.
    """
    if problem.ridge_tolerances is None:
        raise UserInputError("solve_ridge requires ridge tolerances")
    tau = np.abs(problem.ridge_tolerances)
    band = tau * np.abs(problem.targets)
    d, y, c = problem.base_weights, problem.aux, problem.constants
    gram_diag = np.einsum("i,ir,ir->r", d * c, y, y)
    omega = np.where(tau > 0, gram_diag * tau / (1.0 - tau), 0.0)

    result = None
    for _ in range(MAX_RIDGE_ITERATIONS):
        result = _restricted_solve(problem, omega=omega, band=band)
        if result.converged:
            return result
        over = np.abs(result.residuals) > band + BOUNDED_TOL * _constraint_scales(problem)
        relaxed_over = over & (tau > 0) & (omega > 0)
        if not relaxed_over.any():
            break
        shrink = np.ones(problem.k)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(
                np.abs(result.residuals) > 0, band / np.abs(result.residuals), 1.0
            )
        shrink[relaxed_over] = np.minimum(0.5, 0.9 * ratio[relaxed_over])
        omega = omega * shrink
        omega[omega < 1e-14 * np.maximum(gram_diag, 1.0)] = 0.0
    if result is not None and result.converged:
        return result
    raise NoFeasibleSolution("constraints unmet even within the ridge bands")


def solve(problem: CalibrationProblem) -> CalibrationResult:
    """Dispatch on the problem: ridge if tolerances given, bounded if bounds."""
    if problem.ridge_tolerances is not None:
        return solve_ridge(problem)
    if problem.bounds is not None:
        return solve_bounded(problem)
    return solve_chi2(problem)


def kkt_residuals(problem: CalibrationProblem, result: CalibrationResult) -> KKTDiagnostics:
    """Stationarity gap max|a_i - 1 - c_i y_i'lambda| and constraint residuals."""
    if problem.n == 0:
        return KKTDiagnostics(0.0, np.zeros(problem.k))
    predicted = 1.0 + problem.constants * (problem.aux @ result.multipliers)
    stationarity = float(np.max(np.abs(result.factors - predicted)))
    residuals = (problem.base_weights * result.factors) @ problem.aux - problem.targets
    return KKTDiagnostics(stationarity, residuals)
