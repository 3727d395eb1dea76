"""Command-line front end.

Subcommands: synth, fit-pareto, calibrate, adjust, indicators, bootstrap.
Exit codes: 0 success, 1 user error, 2 numerical failure. Every run echoes
its resolved configuration into the output directory, and JSON artifacts are
written with sorted keys and 12-significant-digit floats so identical runs
produce identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adjust import METHODS, AdjustmentConfig, run_adjustment
from .calib import CalibrationProblem, solve
from .dataset import (
    ITEMS,
    SurveySchema,
    load_benchmarks,
    load_rich_list,
    load_survey,
    write_benchmarks,
    write_rich_list,
    write_survey,
)
from .errors import NumericalError, UsageError, UserInputError
from .indicators import ccdf_points, indicator_report, lorenz_points
from .pareto import fit_pareto, mean_excess_curve
from .synth import (
    LogisticNonresponse,
    PopulationSpec,
    SamplingSpec,
    draw_survey,
    generate_population,
)
from .variance import bootstrap_run, generate_rao_wu, load_replicate_weights

log = logging.getLogger("wealthgap")

FLOAT_DIGITS = 12


def _json_ready(obj):
    """Recursively round floats to 12 significant digits for stable goldens."""
    if isinstance(obj, float):
        if not np.isfinite(obj):
            return None
        return float(f"{obj:.{FLOAT_DIGITS}g}")
    if isinstance(obj, (np.floating,)):
        return _json_ready(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    return obj


def dump_json(obj, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        json.dump(_json_ready(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo_config(args, out: Path) -> None:
    resolved = {k: v for k, v in vars(args).items() if k != "func" and not k.startswith("_")}
    dump_json(resolved, out / "run_config.json")


def _load_config_defaults(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Apply --config JSON values as defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        cfg_path = argv[i + 1]
    except IndexError:
        raise UsageError("--config requires a path") from None
    with open(cfg_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    parser.set_defaults(**{k.replace("-", "_"): v for k, v in doc.items()})
    return [a for j, a in enumerate(argv) if j not in (i, i + 1)]


def _schema(args) -> SurveySchema:
    demo = tuple(d for d in (args.demographics or "").split(",") if d)
    return SurveySchema(demographics=demo)


def _adjustment_config(args) -> AdjustmentConfig:
    return AdjustmentConfig(
        method=args.method,
        tau=args.tau,
        alpha_tolerance=args.alpha_tolerance,
        max_iterations=args.max_iterations,
        min_tail=args.min_tail,
    )


# --- subcommands -----------------------------------------------------------


def cmd_synth(args) -> int:
    out = _outdir(args)
    pop_spec = PopulationSpec(
        n=args.population_size,
        tail_fraction=args.tail_fraction,
        tail_w0=args.tail_w0,
        tail_alpha=args.tail_alpha,
        seed=args.seed,
    )
    nonresponse = None
    if args.nonresponse_floor < 1.0:
        nonresponse = LogisticNonresponse(floor=args.nonresponse_floor)
    item_error = {}
    for pair in args.item_error or []:
        item, _, value = pair.partition("=")
        if item not in ITEMS:
            raise UsageError(f"unknown item {item!r} in --item-error")
        item_error[item] = float(value)
    samp_spec = SamplingSpec(
        sample_size=args.sample_size,
        nonresponse=nonresponse,
        truncation_w1=args.truncation,
        item_error=item_error,
        rich_list_size=args.rich_list_size,
        seed=args.seed + 1,
    )
    synth = generate_population(pop_spec)
    survey, rich = draw_survey(synth.population, samp_spec)
    write_survey(synth.population, out / "population.csv")
    write_survey(survey, out / "survey.csv")
    write_rich_list(rich, out / "richlist.csv")
    write_benchmarks(synth.benchmarks, out / "benchmarks.json")
    dump_json(synth.oracle.flat(), out / "oracle.json")
    _echo_config(args, out)
    log.info("wrote synthetic fixtures to %s (survey n=%d)", out, survey.n)
    return 0


def cmd_fit_pareto(args) -> int:
    out = _outdir(args)
    ds = load_survey(args.survey, _schema(args), wealth_concept=args.wealth_concept)
    rich = load_rich_list(args.rich_list) if args.rich_list else None
    fit = fit_pareto(ds, rich, min_tail=args.min_tail)
    dump_json(dataclasses.asdict(fit), out / "pareto_fit.json")
    w, me, wt = mean_excess_curve(ds)
    with (out / "mean_excess.csv").open("w", encoding="utf-8") as fh:
        fh.write("wealth,mean_excess,regression_weight\n")
        for row in zip(w, me, wt):
            fh.write(",".join(f"{float(x):.{FLOAT_DIGITS}g}" for x in row) + "\n")
    _echo_config(args, out)
    log.info("fit: w0=%.6g alpha=%.4f r2=%.4f", fit.w0, fit.alpha, fit.r2)
    return 0


def cmd_calibrate(args) -> int:
    out = _outdir(args)
    ds = load_survey(args.survey, _schema(args))
    bm = load_benchmarks(args.benchmarks)
    with open(args.constraints, encoding="utf-8") as fh:
        spec = json.load(fh)
    columns, targets = [], []
    for item in spec.get("items", []):
        columns.append(ds.item(item))
        targets.append(bm.total(item))
    for dim in spec.get("demographics", []):
        labels = np.asarray(ds.demographics[dim])
        for cell, count in bm.demographic_counts[dim].items():
            columns.append((labels == cell).astype(float))
            targets.append(count)
    if not columns:
        raise UsageError("constraint spec selects no constraints")
    bounds = spec.get("bounds")
    ridge = spec.get("ridge_tolerances")
    problem = CalibrationProblem(
        base_weights=ds.weights,
        aux=np.column_stack(columns),
        targets=np.asarray(targets),
        bounds=tuple(bounds) if bounds else None,
        ridge_tolerances=np.asarray(ridge) if ridge else None,
    )
    result = solve(problem)
    with (out / "weights.csv").open("w", encoding="utf-8") as fh:
        fh.write("id,weight,factor\n")
        for i in range(ds.n):
            fh.write(f"{ds.ids[i]},{result.new_weights[i]!r},{result.factors[i]!r}\n")
    q = np.quantile(result.factors, [0.0, 0.25, 0.5, 0.75, 1.0]) if ds.n else []
    dump_json(
        {
            "converged": result.converged,
            "iterations": result.iterations,
            "residuals": result.residuals,
            "factor_quantiles": {p: v for p, v in zip(("min", "q25", "median", "q75", "max"), q)},
        },
        out / "calibration_diagnostics.json",
    )
    _echo_config(args, out)
    return 0


def cmd_adjust(args) -> int:
    out = _outdir(args)
    ds = load_survey(args.survey, _schema(args), wealth_concept=args.wealth_concept)
    rich = load_rich_list(args.rich_list) if args.rich_list else None
    bm = load_benchmarks(args.benchmarks)
    cfg = _adjustment_config(args)
    outcome = run_adjustment(ds, rich, bm, cfg)
    adjusted = outcome.dataset
    synthetic = [1 if i == outcome.synthetic_tail_observation else 0 for i in adjusted.ids]
    factors = list(outcome.amount_factors) if outcome.amount_factors is not None else [1.0] * ds.n
    if adjusted.n > len(factors):
        factors = factors + [1.0] * (adjusted.n - len(factors))
    write_survey(
        adjusted,
        out / "adjusted.csv",
        extra_columns={"amount_factor": [repr(float(f)) for f in factors], "synthetic": synthetic},
    )
    dump_json(
        {
            "method": cfg.method,
            "converged": outcome.converged,
            "flags": outcome.flags,
            "zeta": outcome.zeta,
            "synthetic_tail_observation": outcome.synthetic_tail_observation,
            "iterations": [r.as_dict() for r in outcome.trace],
        },
        out / "trace.json",
    )
    _echo_config(args, out)
    log.info(
        "adjusted %d households with %s (converged=%s)", ds.n, cfg.method, outcome.converged
    )
    return 0


def cmd_indicators(args) -> int:
    out = _outdir(args)
    ds = load_survey(args.survey, _schema(args), wealth_concept=args.wealth_concept)
    bm = load_benchmarks(args.benchmarks) if args.benchmarks else None
    report = indicator_report(ds, bm)
    dump_json(report.flat(), out / "indicators.json")
    if args.lorenz_csv:
        with (out / "lorenz.csv").open("w", encoding="utf-8") as fh:
            fh.write("population_share,wealth_share\n")
            for a, b in lorenz_points(ds):
                fh.write(f"{a:.{FLOAT_DIGITS}g},{b:.{FLOAT_DIGITS}g}\n")
    if args.ccdf_above is not None:
        with (out / "ccdf.csv").open("w", encoding="utf-8") as fh:
            fh.write("wealth,survivor_share\n")
            for w, s in ccdf_points(ds, args.ccdf_above):
                fh.write(f"{w:.{FLOAT_DIGITS}g},{s:.{FLOAT_DIGITS}g}\n")
    _echo_config(args, out)
    return 0


def cmd_bootstrap(args) -> int:
    out = _outdir(args)
    ds = load_survey(args.survey, _schema(args), wealth_concept=args.wealth_concept)
    rich = load_rich_list(args.rich_list) if args.rich_list else None
    bm = load_benchmarks(args.benchmarks)
    cfg = _adjustment_config(args)
    if args.replicate_weights:
        reps = load_replicate_weights(args.replicate_weights, ds)
    else:
        reps = generate_rao_wu(ds, R=args.replicates, seed=args.seed)
    summary = bootstrap_run(ds, rich, bm, cfg, reps, workers=args.workers)
    dump_json(summary.as_dict(), out / "bootstrap_summary.json")
    _echo_config(args, out)
    log.info(
        "bootstrap: %d/%d replicates succeeded",
        summary.successful_replicates,
        summary.R,
    )
    return 0


# --- parser ------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, survey: bool = True) -> None:
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--log-level", default="INFO")
    if survey:
        p.add_argument("--survey", required=True, help="household CSV")
        p.add_argument(
            "--demographics",
            default="region,hsize",
            help="comma-separated demographic column names",
        )
        p.add_argument("--wealth-concept", default="net", choices=("net", "gross"))


def _add_adjustment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", default="simultaneous", choices=METHODS)
    p.add_argument("--rich-list", help="rich list CSV")
    p.add_argument("--benchmarks", required=True, help="benchmarks JSON")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--alpha-tolerance", type=float, default=0.05)
    p.add_argument("--max-iterations", type=int, default=10)
    p.add_argument("--min-tail", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wealthgap",
        description="Adjust wealth survey microdata to macro benchmarks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic population and survey fixtures")
    _add_common(p, survey=False)
    p.add_argument("--population-size", type=int, default=100_000)
    p.add_argument("--sample-size", type=int, default=5000)
    p.add_argument("--tail-fraction", type=float, default=0.05)
    p.add_argument("--tail-w0", type=float, default=1e6)
    p.add_argument("--tail-alpha", type=float, default=1.5)
    p.add_argument("--truncation", type=float, default=None)
    p.add_argument("--rich-list-size", type=int, default=20)
    p.add_argument("--nonresponse-floor", type=float, default=1.0,
                   help="logistic nonresponse floor; 1.0 disables nonresponse")
    p.add_argument("--item-error", action="append", metavar="ITEM=ZETA",
                   help="multiplicative under-reporting, e.g. deposits=0.8")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit-pareto", help="fit the upper tail and emit diagnostics")
    _add_common(p)
    p.add_argument("--rich-list")
    p.add_argument("--min-tail", type=int, default=50)
    p.set_defaults(func=cmd_fit_pareto)

    p = sub.add_parser("calibrate", help="generic weight calibration to benchmarks")
    _add_common(p)
    p.add_argument("--benchmarks", required=True)
    p.add_argument("--constraints", required=True, help="constraint spec JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("adjust", help="run one of the adjustment estimators")
    _add_common(p)
    _add_adjustment_flags(p)
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("indicators", help="distributional indicator report")
    _add_common(p)
    p.add_argument("--benchmarks")
    p.add_argument("--lorenz-csv", action="store_true")
    p.add_argument("--ccdf-above", type=float, default=None)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("bootstrap", help="Rao-Wu bootstrap variance assessment")
    _add_common(p)
    _add_adjustment_flags(p)
    p.add_argument("--replicates", "-R", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicate-weights", help="released replicate weight CSV (skips generation)")
    p.add_argument(
        "--workers",
        type=int,
        default=int(os.environ.get("WEALTHGAP_WORKERS", os.cpu_count() or 1)),
    )
    p.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _load_config_defaults(argv, parser)
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=getattr(logging, str(getattr(args, "log_level", "INFO")).upper(), logging.INFO),
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except UserInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
