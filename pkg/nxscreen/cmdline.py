# -*- coding: utf-8 -*-

import argparse
import logging
import os
import sys

from .case_io import load_case, resolve_case_path
from .constants import *
from .dc_sensitivities import compute_lodf, solve_dc
from .grid_graph import build_subgraph, subgraph_to_dot
from .metrics import compute_metrics, rank_branches
from .oracle import brute_force_contingencies
from .reports import *
from .screening import ScreeningConfig, compare_with_baseline, prepare, screen, timing_sweep
from .utils import *
from .validation import ValidationOptions, validate_contingency, validate_many
from . import __version__


__all__ = ["main"]

logger = logging.getLogger(__name__)


def _add_case_arguments(parser):
    parser.add_argument(
        "-c",
        "--case",
        required=True,
        help="Path to a case file, or the name of a bundled case (%s)." % ", ".join(BUNDLED_CASES),
    )
    parser.add_argument(
        "-e",
        "--encoding",
        default=None,
        help="The encoding to use when reading the case file (default: platform-dependent).",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr (-v for INFO, -vv for DEBUG).",
    )


def _add_output_arguments(parser, formats=True):
    parser.add_argument(
        "-o",
        "--out",
        default=".",
        help="Directory into which to write the output files (default: current directory).",
    )
    if formats:
        parser.add_argument(
            "--output",
            choices=OUTPUT_FORMATS,
            default=FORMAT_CSV,
            help="Report format (default=%s)." % FORMAT_CSV,
        )
        parser.add_argument(
            "--deterministic",
            action="store_true",
            help="Write runtime columns as 0 so that repeated runs produce identical reports.",
        )


def _add_validation_arguments(parser):
    parser.add_argument(
        "--method",
        choices=METHODS,
        default=METHOD_AC,
        help="Power flow used to validate outage sets (default=%s)." % METHOD_AC,
    )
    parser.add_argument(
        "--reserve-req",
        type=float,
        default=None,
        help="Required spinning reserve in MW (default: capacity of the largest online generator).",
    )
    parser.add_argument(
        "--no-q-limits",
        action="store_true",
        help="Do not enforce generator reactive power limits in the AC power flow.",
    )
    parser.add_argument(
        "--exit-zero",
        action="store_true",
        help="Exit with 0 even when violations are found.",
    )


def _add_threads_argument(parser):
    parser.add_argument(
        "-j",
        "--threads",
        type=int,
        default=1,
        help="Number of worker threads (default = 1). Output does not depend on this value.",
    )


def _add_screening_arguments(parser):
    parser.add_argument(
        "-d",
        "--distance",
        type=int,
        default=4,
        help="Hops within which other high-impact branches join a seed's subgraph (default = 4).",
    )
    parser.add_argument(
        "-s",
        "--search-level",
        type=int,
        default=4,
        help="Hops around the desired branches included in the subgraph; must be >= distance (default = 4).",
    )
    parser.add_argument(
        "-a",
        "--top-percent",
        type=float,
        default=DEFAULT_A_PERCENT,
        help="Percentage of branches, by impact, used as seeds (default = %g)." % DEFAULT_A_PERCENT,
    )
    parser.add_argument(
        "--pair-rule",
        choices=PAIR_RULES,
        default=PAIR_RULE_ENDPOINTS,
        help="Which node pairs take part in group betweenness (default=%s)." % PAIR_RULE_ENDPOINTS,
    )


def _configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _validation_options(args):
    return ValidationOptions(
        method=args.method,
        reserve_req=args.reserve_req,
        enforce_q_limits=not args.no_q_limits,
    )


def _manifest(args, config, stages, outputs):
    return RunManifest(
        command=args.command,
        config=config,
        case=args.case,
        case_sha256=file_sha256(resolve_case_path(args.case)),
        stages=stages,
        outputs=outputs,
    )


def _prepare_out(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _finish(args, violations):
    if violations and not args.exit_zero:
        return EXIT_VIOLATIONS
    return EXIT_OK


def _print_record(case, record):
    report = record.report
    print(
        "%s: %d overflow, %d undervoltage, %d overvoltage%s%s%s"
        % (
            ",".join(format_branch_label(case.branch_label(b)) for b in record.branches) or "base case",
            report.overflow_count,
            report.undervoltage_count,
            report.overvoltage_count,
            ", reserve limit" if report.reserve_limit else "",
            ", unsolved" if report.unsolved else "",
            (", %.3f MW islanded" % report.islanded_load_mw) if report.islanded_load_mw > 0 else "",
        )
    )


def cmd_analyze(args):
    """Screens for candidate outage sets and validates each of them."""
    case = load_case(args.case, encoding=args.encoding)
    x_values = parse_range(args.sweep_x) if args.sweep_x else [args.x]
    configs = [
        ScreeningConfig(
            x=x,
            d=args.distance,
            sl=args.search_level,
            a_percent=args.top_percent,
            max_candidates=args.max_candidates,
            seed_limit=args.seed_limit,
            pair_rule=args.pair_rule,
            threads=args.threads,
        )
        for x in x_values
    ]
    options = _validation_options(args)
    out_dir = _prepare_out(args)

    timer = StageTimer()
    with timer.stage("metrics"):
        prepared = prepare(case)

    rows = []
    violations = 0
    for cfg in configs:
        result = screen(case, cfg, prepared)
        timer.add("subgraphs_x%d" % cfg.x, result.timings["subgraphs"])
        timer.add("gbc_x%d" % cfg.x, result.timings["gbc"])
        novel = None
        if args.compare_baseline:
            with timer.stage("baseline_x%d" % cfg.x):
                novel = [flag for _, flag in compare_with_baseline(case, cfg, prepared)]
        with timer.stage("validation_x%d" % cfg.x):
            records = validate_many(
                case,
                [c.group for c in result.candidates],
                options,
                threads=args.threads,
                scores=[c.gbc_score for c in result.candidates],
            )
        violations += sum(1 for r in records if r.report.has_violations)
        rows.extend(records_to_rows(records, case, args.deterministic, novel))
        print(
            "x=%d: %d seeds, %d candidate sets, %d with violations"
            % (
                cfg.x,
                len(result.seeds),
                len(records),
                sum(1 for r in records if r.report.has_violations),
            )
        )

    report_name = "report.%s" % args.output
    write_report(rows, args.output, os.path.join(out_dir, report_name))
    config = {
        "x": x_values,
        "distance": args.distance,
        "search_level": args.search_level,
        "top_percent": args.top_percent,
        "max_candidates": args.max_candidates,
        "seed_limit": args.seed_limit,
        "pair_rule": args.pair_rule,
        "method": args.method,
        "reserve_req": args.reserve_req,
        "q_limits": not args.no_q_limits,
        "compare_baseline": args.compare_baseline,
    }
    _manifest(args, config, timer.stages, [report_name]).write(
        os.path.join(out_dir, MANIFEST_FILENAME)
    )
    print("Report written to %s" % os.path.join(out_dir, report_name))
    return _finish(args, violations)


def cmd_lodf(args):
    case = load_case(args.case, encoding=args.encoding)
    out_dir = _prepare_out(args)
    timer = StageTimer()
    with timer.stage("lodf"):
        sens = compute_lodf(case, solve_dc(case))
    write_lodf_csv(os.path.join(out_dir, "lodf.csv"), case, sens)
    _manifest(args, {}, timer.stages, ["lodf.csv"]).write(os.path.join(out_dir, MANIFEST_FILENAME))
    print(
        "LODF for %d branches (%d bridges) written to %s"
        % (case.n_branch, int(sens.bridge.sum()), os.path.join(out_dir, "lodf.csv"))
    )
    return EXIT_OK


def cmd_metrics(args):
    case = load_case(args.case, encoding=args.encoding)
    out_dir = _prepare_out(args)
    timer = StageTimer()
    with timer.stage("metrics"):
        dc = solve_dc(case)
        metrics = compute_metrics(case, dc, compute_lodf(case, dc))
    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), case, dc, metrics)
    _manifest(args, {}, timer.stages, ["metrics.csv"]).write(
        os.path.join(out_dir, MANIFEST_FILENAME)
    )
    print("Metrics written to %s" % os.path.join(out_dir, "metrics.csv"))
    return EXIT_OK


def _parse_seed(case, text):
    text = text.strip()
    if text.isdigit():
        index = int(text)
        if index >= case.n_branch:
            raise ValueError("Branch index %d out of range" % index)
        return index
    return resolve_branch_pairs(case, parse_branch_pairs(text))[0]


def cmd_subgraph(args):
    """Writes the search subgraph of one seed branch as DOT."""
    case = load_case(args.case, encoding=args.encoding)
    if args.search_level < args.distance:
        raise ValueError("search-level must be >= distance")
    seed = _parse_seed(case, args.seed)
    prepared = prepare(case)
    high_m = rank_branches(prepared.metrics, args.top_percent)
    sub = build_subgraph(prepared.graph, seed, high_m, args.distance, args.search_level)
    dot = subgraph_to_dot(prepared.graph, sub)
    if args.out is None:
        sys.stdout.write(dot)
    else:
        with open(args.out, "wt", encoding="utf-8", newline="\n") as f:
            f.write(dot)
        print(
            "Subgraph of branch %d: %d buses, %d branches, written to %s"
            % (seed, len(sub.node_set), len(sub.edge_set), args.out)
        )
    return EXIT_OK


def cmd_brute_force(args):
    case = load_case(args.case, encoding=args.encoding)
    options = _validation_options(args)
    out_dir = _prepare_out(args)
    timer = StageTimer()
    with timer.stage("brute_force"):
        result = brute_force_contingencies(
            case,
            args.x,
            dc_prescreen=args.prescreen,
            options=options,
            threads=args.threads,
        )
    violating = result.violating
    report_name = "brute_force.%s" % args.output
    write_report(
        records_to_rows(violating, case, args.deterministic),
        args.output,
        os.path.join(out_dir, report_name),
    )
    config = {
        "x": args.x,
        "dc_prescreen": args.x == 2 if args.prescreen is None else args.prescreen,
        "method": args.method,
        "reserve_req": args.reserve_req,
        "q_limits": not args.no_q_limits,
        "enumerated": result.enumerated_count,
        "screened_out": result.screened_out,
    }
    _manifest(args, config, timer.stages, [report_name]).write(
        os.path.join(out_dir, MANIFEST_FILENAME)
    )
    print(
        "Enumerated %d sets (%d skipped by DC prescreen), %d with violations"
        % (result.enumerated_count, result.screened_out, len(violating))
    )
    for record in violating[: args.show]:
        _print_record(case, record)
    return _finish(args, len(violating))


def cmd_solve(args):
    """Validates the base case, or the base case minus the given outage set."""
    case = load_case(args.case, encoding=args.encoding)
    branches = []
    if args.outage:
        branches = resolve_branch_pairs(case, parse_branch_pairs(args.outage))
    record = validate_contingency(case, branches, _validation_options(args))
    _print_record(case, record)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        report_name = "solve.%s" % args.output
        write_report(
            records_to_rows([record], case, args.deterministic),
            args.output,
            os.path.join(args.out, report_name),
        )
        config = {"outage": args.outage, "method": args.method, "reserve_req": args.reserve_req}
        _manifest(args, config, {"validation": record.runtime}, [report_name]).write(
            os.path.join(args.out, MANIFEST_FILENAME)
        )
    return _finish(args, record.report.has_violations)


def cmd_timing(args):
    case = load_case(args.case, encoding=args.encoding)
    out_dir = _prepare_out(args)
    d_values = parse_int_list(args.distances)
    sl_values = parse_int_list(args.search_levels)
    x_values = parse_int_list(args.x_values)
    timer = StageTimer()
    with timer.stage("sweep"):
        rows = timing_sweep(
            case, d_values, sl_values, x_values, a_percent=args.top_percent, threads=args.threads
        )
    write_timing(os.path.join(out_dir, "timing.csv"), rows)
    config = {
        "distances": d_values,
        "search_levels": sl_values,
        "x": x_values,
        "top_percent": args.top_percent,
    }
    _manifest(args, config, timer.stages, ["timing.csv"]).write(
        os.path.join(out_dir, MANIFEST_FILENAME)
    )
    print("%d timing rows written to %s" % (len(rows), os.path.join(out_dir, "timing.csv")))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "lodf": cmd_lodf,
    "metrics": cmd_metrics,
    "subgraph": cmd_subgraph,
    "brute-force": cmd_brute_force,
    "solve": cmd_solve,
    "timing": cmd_timing,
}


def build_parser():
    parser = argparse.ArgumentParser(
        description="N-x contingency screening with LODF metrics and group betweenness (v%s)."
        % __version__
    )
    subparsers = parser.add_subparsers(help="The command to execute.", dest="command")

    parser_analyze = subparsers.add_parser(
        "analyze", help="Screen for critical outage sets and validate them with a power flow."
    )
    _add_case_arguments(parser_analyze)
    parser_analyze.add_argument(
        "-x", "--x", type=int, default=1, help="Number of branches per outage set (default = 1)."
    )
    parser_analyze.add_argument(
        "--sweep-x",
        default=None,
        help="Range of outage orders to run in one go, e.g. 1..5 (overrides --x).",
    )
    _add_screening_arguments(parser_analyze)
    parser_analyze.add_argument(
        "--seed-limit",
        type=int,
        default=None,
        help="Use at most this many seeds, taken from the top of the ranking.",
    )
    parser_analyze.add_argument(
        "--max-candidates",
        type=int,
        default=DEFAULT_MAX_CANDIDATES,
        help="Maximum number of candidate sets per outage order (default = %d)." % DEFAULT_MAX_CANDIDATES,
    )
    parser_analyze.add_argument(
        "--compare-baseline",
        action="store_true",
        help="Also screen with distance 0 and flag the sets only the distance parameter found.",
    )
    _add_validation_arguments(parser_analyze)
    _add_output_arguments(parser_analyze)
    _add_threads_argument(parser_analyze)

    parser_lodf = subparsers.add_parser("lodf", help="Write the LODF matrix of a case as CSV.")
    _add_case_arguments(parser_lodf)
    _add_output_arguments(parser_lodf, formats=False)

    parser_metrics = subparsers.add_parser(
        "metrics", help="Write base flow, NLODF and M per branch as CSV."
    )
    _add_case_arguments(parser_metrics)
    _add_output_arguments(parser_metrics, formats=False)

    parser_subgraph = subparsers.add_parser(
        "subgraph", help="Print the search subgraph around a seed branch in DOT format."
    )
    _add_case_arguments(parser_subgraph)
    parser_subgraph.add_argument(
        "--seed",
        required=True,
        help="Seed branch, as a branch index or a [from,to] bus pair.",
    )
    _add_screening_arguments(parser_subgraph)
    parser_subgraph.add_argument(
        "-o", "--out", default=None, help="DOT file to write (default: stdout)."
    )

    parser_brute = subparsers.add_parser(
        "brute-force", help="Validate every N-1 or N-2 outage set."
    )
    _add_case_arguments(parser_brute)
    parser_brute.add_argument(
        "-x", "--x", type=int, choices=(1, 2), default=1, help="Outage order (default = 1)."
    )
    parser_brute.add_argument(
        "--prescreen",
        dest="prescreen",
        action="store_true",
        default=None,
        help="Validate only the sets the DC prescreen flags (default for -x 2).",
    )
    parser_brute.add_argument(
        "--no-prescreen",
        dest="prescreen",
        action="store_false",
        help="Validate every set (default for -x 1).",
    )
    parser_brute.add_argument(
        "--show",
        type=int,
        default=10,
        help="Number of the most severe sets to print (default = 10).",
    )
    _add_validation_arguments(parser_brute)
    _add_output_arguments(parser_brute)
    _add_threads_argument(parser_brute)

    parser_solve = subparsers.add_parser(
        "solve", help="Solve a case, optionally with an outage set, and report violations."
    )
    _add_case_arguments(parser_solve)
    parser_solve.add_argument(
        "--outage",
        default=None,
        help='Branches to switch out as [from,to] pairs, e.g. "[136,133],[135,133]".',
    )
    _add_validation_arguments(parser_solve)
    _add_output_arguments(parser_solve)
    parser_solve.set_defaults(out=None)

    parser_timing = subparsers.add_parser(
        "timing", help="Time the screening stages over a grid of distance, search level and x."
    )
    _add_case_arguments(parser_timing)
    parser_timing.add_argument(
        "--distances", default="0..4", help="Distances to sweep (default = 0..4)."
    )
    parser_timing.add_argument(
        "--search-levels", default="0..5", help="Search levels to sweep (default = 0..5)."
    )
    parser_timing.add_argument(
        "--x-values", default="1..3", help="Outage orders to sweep (default = 1..3)."
    )
    parser_timing.add_argument(
        "-a",
        "--top-percent",
        type=float,
        default=DEFAULT_A_PERCENT,
        help="Percentage of branches used as seeds (default = %g)." % DEFAULT_A_PERCENT,
    )
    _add_output_arguments(parser_timing, formats=False)
    _add_threads_argument(parser_timing)

    subparsers.add_parser("version", help="Display the version of nxscreen and exit.")
    return parser


def main(argv=None):
    """Main routine for handling command line functionality for nxscreen. Returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_INPUT_ERROR
    if args.command == "version":
        print("nxscreen v%s" % __version__)
        return EXIT_OK

    _configure_logging(args.verbose)
    logger.debug("running %s with %s", args.command, vars(args))
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        print("Error: %s" % e, file=sys.stderr)
        return EXIT_INPUT_ERROR
