"""Micro-macro reconciliation for household wealth surveys.

Adjusts weighted survey microdata for differential nonresponse at the top
tail (truncated Pareto model plus calibration) and for measurement error
(reverse-calibration imputation) so weighted totals match national-accounts
benchmarks while the micro-level distribution stays usable.
"""

__version__ = "0.1.0"

from .adjust import (
    METHODS,
    AdjustmentConfig,
    AdjustmentOutcome,
    difference_adjustment,
    impute_missing_tail_observation,
    integrate_rich_list,
    multivariate_imputation,
    pareto_calibration,
    proportional_allocation,
    run_adjustment,
    simultaneous,
    single_iteration,
    subtract_tail_totals,
    tail_item_shares,
)
from .calib import (
    CalibrationProblem,
    CalibrationResult,
    kkt_residuals,
    solve,
    solve_bounded,
    solve_chi2,
    solve_ridge,
)
from .dataset import (
    ASSET_ITEMS,
    COMPARABLE_ITEMS,
    ITEMS,
    LOW_COMPARABILITY_ITEMS,
    Household,
    MacroBenchmarks,
    RichList,
    SurveyDataset,
    SurveySchema,
    coverage_ratio,
    horvitz_thompson,
    load_benchmarks,
    load_rich_list,
    load_survey,
    write_benchmarks,
    write_rich_list,
    write_survey,
)
from .indicators import (
    IndicatorReport,
    bottom_share,
    ccdf_points,
    gini,
    indicator_report,
    top_share,
    weighted_gini,
)
from .pareto import (
    ParetoFit,
    PooledTail,
    detect_threshold,
    estimate_alpha,
    estimate_tail_households,
    fit_pareto,
    mean_excess,
    missing_tail,
    pareto_cdf,
    pareto_mean,
    pool_with_rich_list,
    tail_wealth,
)
from .synth import (
    LogisticNonresponse,
    PopulationSpec,
    SamplingSpec,
    SynthOutput,
    draw_survey,
    generate_population,
)
from .variance import (
    BootstrapSummary,
    ReplicateWeights,
    bootstrap_run,
    generate_rao_wu,
    load_replicate_weights,
)
