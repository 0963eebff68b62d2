from __future__ import annotations

import argparse
import csv
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from .analytic import (
    DesignParams,
    Mode,
    ProblemInstance,
    SchemeKind,
    closed_form_expected_tests,
    efficiency_ratio,
    expected_total_tests,
    individual_testing_savings,
    integer_refine,
    optimal_design,
)
from .configuration import (
    DEFAULT_CONFIG_PATH,
    TwoStageSettings,
    apply_key_path,
    parse_typed_value,
)
from .errors import InvalidParametersError, TwoStageError
from .harness import (
    RobustnessRow,
    RobustnessSpec,
    SweepRow,
    SweepSpec,
    parse_range,
    run_robustness,
    run_sweep,
)
from .oracle import compare_with_analytic
from .pooling import dump_design, sample_design
from .simulation import FIXED_DESIGN_STREAM, replication_rng, run_replications
from .utils.logging import configure_logging, get_logger, run_context
from .utils.metrics import write_metrics

log = get_logger("cli")

_SCHEMES = [scheme.value for scheme in SchemeKind]


def _schemes(value: str) -> list[SchemeKind]:
    return list(SchemeKind) if value == "all" else [SchemeKind(value)]


def _instance(args: argparse.Namespace) -> ProblemInstance:
    if args.p is not None:
        return ProblemInstance.binomial(args.n, args.p)
    return ProblemInstance.fixed_k(args.n, args.k)


def _explicit_params(args: argparse.Namespace, scheme: SchemeKind) -> DesignParams | None:
    if args.m is None and args.secondary is None:
        return None
    if args.m is None or args.secondary is None:
        raise InvalidParametersError("--m and the scheme parameter (--b, --d or --a) go together")
    return DesignParams.create(scheme, args.m, args.secondary)


def _print_json(payload: Any) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2))


def _print_csv(header: Sequence[str], rows: Sequence[SweepRow | RobustnessRow]) -> None:
    writer = csv.DictWriter(sys.stdout, fieldnames=list(header), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv())


def _handle_design(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    inst = _instance(args)
    mode = Mode(args.mode)
    report = []
    for scheme in _schemes(args.scheme):
        continuous = optimal_design(inst, scheme)
        refined = integer_refine(inst, scheme, continuous, settings.refine_window)
        expected = expected_total_tests(inst, refined, mode).expected_total_tests
        report.append(
            {
                "continuous": continuous.describe(),
                "refined": refined.describe(),
                "mode": mode.value,
                "expected_total_tests": expected,
                "closed_form_expected_tests": closed_form_expected_tests(inst, scheme),
                "efficiency_ratio": efficiency_ratio(inst, expected),
                "individual_testing_savings": individual_testing_savings(inst, expected),
            }
        )
    _print_json(report)


def _handle_simulate(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    inst = _instance(args)
    mode = Mode(args.mode)
    schemes = _schemes(args.scheme)
    if len(schemes) > 1 and args.m is not None:
        raise InvalidParametersError("explicit design parameters need a single --scheme")
    if len(schemes) > 1 and args.dump_design:
        raise InvalidParametersError("--dump-design needs a single --scheme")
    report = []
    for scheme in schemes:
        params = _explicit_params(args, scheme)
        if params is None:
            params = integer_refine(
                inst, scheme, optimal_design(inst, scheme), settings.refine_window
            )
        summary = run_replications(
            inst,
            scheme,
            params,
            args.reps,
            args.seed,
            fixed_design=args.fixed_design,
            workers=args.workers,
        )
        if args.dump_design:
            stream = FIXED_DESIGN_STREAM if args.fixed_design else 0
            design = sample_design(scheme, inst.n, params, replication_rng(args.seed, 0, stream))
            Path(args.dump_design).write_text(dump_design(design), encoding="utf-8")
        theory = expected_total_tests(inst, params, mode).expected_total_tests
        gap = (summary.mean_total - theory) / theory
        report.append(
            {
                **summary.as_dict(),
                "mode": mode.value,
                "theory_total": theory,
                "relative_gap": gap,
                "within_tolerance": abs(gap) <= settings.agreement_tolerance,
            }
        )
    _print_json(report)


def _handle_sweep(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    if args.p_range is not None:
        model, axis = "binomial", parse_range(args.p_range)
    else:
        model, axis = "fixedk", parse_range(args.k_range, integer=True)
    spec = SweepSpec.create(
        schemes=args.scheme,
        n=args.n,
        model=model,
        axis=axis,
        reps=args.reps,
        seed=args.seed,
        out=args.out,
        fixed_design=args.fixed_design,
        workers=args.workers,
        refine_window=settings.refine_window,
    )
    rows = run_sweep(spec)
    if spec.out is None:
        _print_csv(SweepRow.header(), rows)
    else:
        print(f"Wrote {len(rows)} rows to {spec.out}")


def _handle_robustness(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    spec = RobustnessSpec.create(
        scheme=args.scheme,
        n=args.n,
        k_true=args.k,
        k_estimates=parse_range(args.k_est_range),
        reps=args.reps,
        seed=args.seed,
        out=args.out,
        fixed_design=args.fixed_design,
        workers=args.workers,
        refine_window=settings.refine_window,
    )
    rows = run_robustness(spec)
    if spec.out is None:
        _print_csv(RobustnessRow.header(), rows)
    else:
        print(f"Wrote {len(rows)} rows to {spec.out}")


def _handle_oracle(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    inst = ProblemInstance.fixed_k(args.n, args.k)
    scheme = SchemeKind(args.scheme)
    params = DesignParams.create(scheme, args.m, args.secondary)
    budget = args.budget if args.budget is not None else settings.oracle_budget
    comparison = compare_with_analytic(inst, scheme, params, budget)
    enumeration = comparison.enumeration
    _print_json(
        {
            **params.describe(),
            "n": inst.n,
            "k": inst.infected_count(),
            "exact_expected_tests": comparison.exact,
            "exact_expected_tests_fraction": str(enumeration.exact_expected_T),
            "paper_approx": comparison.paper_approx,
            "exact_form": comparison.exact_form,
            **comparison.gaps(),
            "states": enumeration.state_count,
        }
    )


def _handle_config_show(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    payload = settings.model_dump(mode="json") if args.as_json else settings.model_dump()
    print(json.dumps(payload, ensure_ascii=False, indent=2, default=str))


def _handle_config_set(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    value = parse_typed_value(args.value, args.type)
    updated = apply_key_path(settings, _split_key_path(args.key), value)
    updated.save(args.config)
    print(f"Updated {args.key} in {args.config}")


def _split_key_path(path: str) -> Sequence[str]:
    return [segment.strip() for segment in path.split(".") if segment.strip()]


def _add_population_arguments(parser: argparse.ArgumentParser, *, binomial: bool = True) -> None:
    parser.add_argument("--n", type=int, required=True, help="Population size")
    if binomial:
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--k", type=float, help="Fixed number of infected individuals")
        group.add_argument("--p", type=float, help="Per-individual infection probability")
    else:
        parser.add_argument("--k", type=int, required=True, help="Number of infected individuals")


def _add_design_arguments(parser: argparse.ArgumentParser, *, required: bool = False) -> None:
    parser.add_argument("--m", type=int, required=required, help="Number of pools")
    parser.add_argument(
        "--secondary",
        "--b",
        "--d",
        "--a",
        dest="secondary",
        type=float,
        required=required,
        help="Pool size b (ftp), pools per individual d (fti) or probability a (rp)",
    )


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--reps", type=int, default=None, help="Replications per point")
    parser.add_argument("--workers", type=int, default=None, help="Replication threads")
    parser.add_argument(
        "--fixed-design",
        action="store_true",
        help="Share one design across replications and redraw only the infected set",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=str(DEFAULT_CONFIG_PATH))
    common.add_argument("--seed", type=int, default=None, help="Base seed")
    common.add_argument("--metrics-out", help="Write Prometheus metrics to this file")

    ap = argparse.ArgumentParser(
        prog="twostage", description="Two-stage randomized group testing toolkit"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    design = sub.add_parser("design", parents=[common], help="Optimal design and predictions")
    design.add_argument("--scheme", choices=[*_SCHEMES, "all"], default="all")
    _add_population_arguments(design)
    design.add_argument("--mode", choices=["paper", "exact"], default="paper")
    design.set_defaults(func=_handle_design)

    simulate = sub.add_parser("simulate", parents=[common], help="Replicate two-stage testing")
    simulate.add_argument("--scheme", choices=[*_SCHEMES, "all"], default="all")
    _add_population_arguments(simulate)
    _add_design_arguments(simulate)
    _add_run_arguments(simulate)
    simulate.add_argument("--mode", choices=["paper", "exact"], default="paper")
    simulate.add_argument("--dump-design", help="Write the first sampled design to this file")
    simulate.set_defaults(func=_handle_simulate)

    sweep = sub.add_parser("sweep", parents=[common], help="Sweep k or p and write CSV")
    sweep.add_argument("--scheme", choices=[*_SCHEMES, "all"], default="all")
    sweep.add_argument("--n", type=int, required=True, help="Population size")
    axis = sweep.add_mutually_exclusive_group(required=True)
    axis.add_argument("--k-range", help="start:stop:step of infected counts")
    axis.add_argument("--p-range", help="start:stop:step of infection probabilities")
    _add_run_arguments(sweep)
    sweep.add_argument("--out", help="CSV output file (stdout when omitted)")
    sweep.set_defaults(func=_handle_sweep)

    robustness = sub.add_parser(
        "robustness", parents=[common], help="Inflation from a misestimated k"
    )
    robustness.add_argument("--scheme", choices=_SCHEMES, default="fti")
    _add_population_arguments(robustness, binomial=False)
    robustness.add_argument(
        "--k-est-range", "--k-range", dest="k_est_range", required=True,
        help="start:stop:step of estimated infected counts",
    )
    _add_run_arguments(robustness)
    robustness.add_argument("--out", help="CSV output file (stdout when omitted)")
    robustness.set_defaults(func=_handle_robustness)

    oracle = sub.add_parser("oracle", parents=[common], help="Exact enumeration of tiny instances")
    oracle.add_argument("--scheme", choices=_SCHEMES, required=True)
    _add_population_arguments(oracle, binomial=False)
    _add_design_arguments(oracle, required=True)
    oracle.add_argument("--budget", type=int, default=None, help="Maximum enumerated states")
    oracle.set_defaults(func=_handle_oracle)

    config_parser = sub.add_parser("config", help="Inspect or modify configuration")
    config_parser.add_argument("--config", default=str(DEFAULT_CONFIG_PATH))
    config_sub = config_parser.add_subparsers(dest="config_cmd", required=True)

    show_parser = config_sub.add_parser("show", help="Display the current configuration")
    show_parser.add_argument("--as-json", action="store_true")
    show_parser.set_defaults(func=_handle_config_show)

    set_parser = config_sub.add_parser("set", help="Update a configuration value")
    set_parser.add_argument("key", help="Setting name (e.g. reps)")
    set_parser.add_argument("value", help="New value for the key")
    set_parser.add_argument(
        "--type",
        choices=["str", "int", "float", "bool", "json", "null"],
        default="str",
        help="Type of the value for correct parsing",
    )
    set_parser.set_defaults(func=_handle_config_set)
    return ap


def _apply_setting_defaults(args: argparse.Namespace, settings: TwoStageSettings) -> None:
    for name in ("seed", "reps", "workers"):
        if getattr(args, name, None) is None and hasattr(args, name):
            setattr(args, name, getattr(settings, name))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = TwoStageSettings.load(args.config)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    configure_logging(settings)
    _apply_setting_defaults(args, settings)

    run_id = f"{args.command}-{getattr(args, 'seed', settings.seed)}"
    with run_context(run_id):
        try:
            args.func(args, settings)
        except TwoStageError as exc:
            log.error("command failed", extra={"command": args.command, "error": str(exc)})
            print(f"error: {exc}", file=sys.stderr)
            return exc.exit_code
        except (FileNotFoundError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        finally:
            if getattr(args, "metrics_out", None):
                write_metrics(args.metrics_out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
