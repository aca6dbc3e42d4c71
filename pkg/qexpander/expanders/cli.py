"""Command-line interface for the expander analyses."""

import argparse
import logging
import sys
import time
from typing import List, Optional

from ..settings import ExpanderSettings, ReportSettings
from .exceptions import CertificateViolated, ExpanderError, InputError
from .formats import write_adjacency_csv, write_spectrum_csv, write_text
from .processor import (
    Analysis,
    analyze_channel,
    analyze_graph,
    bicrossed,
    certify,
    dual_cayley,
    group_irreps,
    harrow,
    lift_graph_file,
    schreier,
)
from .reports import RunReport

settings = ExpanderSettings()
report_settings = ReportSettings()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qexpander",
        description="Construct and certify classical and quantum expanders from graphs, finite groups, matched pairs and duals of finite groups",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Spectrum and Cheeger inequalities of a graph
  qexpander graph analyze petersen.txt

  # Lift a regular graph to a quantum channel and store it
  qexpander graph lift petersen.txt --channel-out petersen.json

  # Channels of every nontrivial irrep of S4 on the transpositions
  qexpander harrow s4.grp --set transpositions

  # Bicrossed channel of the factorization S4 = Z4 * S3
  qexpander bicrossed s4.grp "(1,2,3,4)" "(1,2,3);(1,2)" --state tr

  # Quantum Cayley graph over the dual of S3 generated by the 2-dimensional irrep
  qexpander dual-cayley s3.grp --irreps dim:2

  # Schreier certificates for every subgroup of S4
  qexpander schreier s4.grp --subgroup all --set transpositions

  # Spectral gap bound from a Kazhdan constant alone
  qexpander certify --eps 0 --dimHE 5

Group files hold one generator per line in 1-based cycle notation, or a .csv multiplication table.
Exit status: 0 when every check passes, 1 when a certificate or check fails, 2 on bad input.
        """,
    )
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help=f"Seed for every randomized step (default: {settings.DEFAULT_SEED})")
    parser.add_argument("--tol", type=float, default=settings.DEFAULT_TOL, help=f"Slack for asserted inequalities (default: {settings.DEFAULT_TOL})")
    parser.add_argument("--budget", type=int, default=settings.HQ_BUDGET, help=f"Random restarts of the h_Q search (default: {settings.HQ_BUDGET})")
    parser.add_argument("--out", "-o", default="-", help="Report path, '-' for standard output (default: -)")
    parser.add_argument("--csv", help="Also write the spectrum, or the Schreier adjacencies, as a CSV table")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")

    commands = parser.add_subparsers(dest="command", required=True)

    graph = commands.add_parser("graph", help="Classical graph analyses")
    graph.add_argument("action", choices=["analyze", "lift"])
    graph.add_argument("file", help="Edge list: 'n m' then m lines 'u v' (0-based)")
    graph.add_argument("--channel-out", help="Write the lifted channel as JSON (lift only)")

    group = commands.add_parser("group", help="Group representation analyses")
    group.add_argument("action", choices=["irreps"])
    group.add_argument("file", help="Group file")
    group.add_argument("--export", help="Write the irreps as JSON")

    channel = commands.add_parser("channel", help="Quantum channel analyses")
    channel.add_argument("action", choices=["analyze"])
    channel.add_argument("file", help="Channel JSON")

    harrow_cmd = commands.add_parser("harrow", help="Irrep channels of a generating set")
    harrow_cmd.add_argument("file", help="Group file")
    harrow_cmd.add_argument("--set", dest="set_spec", default="transpositions", help="'transpositions', 'all', ';'-separated cycles, or 'sym:' before cycles to add inverses")

    bicrossed_cmd = commands.add_parser("bicrossed", help="Bicrossed product channel of an exact factorization")
    bicrossed_cmd.add_argument("file", help="Ambient group file")
    bicrossed_cmd.add_argument("gamma", help="Generators of the first factor")
    bicrossed_cmd.add_argument("g", help="Generators of the second factor")
    bicrossed_cmd.add_argument("--orbit", help="Element of the first factor whose orbit is used (default: a largest orbit)")
    bicrossed_cmd.add_argument("--state", default="tr", help="'tr' or 'diag:w1,w2,...' (default: tr)")

    dual = commands.add_parser("dual-cayley", help="Quantum Cayley graph over the dual of a group")
    dual.add_argument("file", help="Group file")
    dual.add_argument("--irreps", default="nontrivial", help="'nontrivial', 'dim:k' or comma-separated irrep indices")

    schreier_cmd = commands.add_parser("schreier", help="Schreier graphs and their spectral gap certificates")
    schreier_cmd.add_argument("file", help="Group file")
    schreier_cmd.add_argument("--subgroup", required=True, help="';'-separated generators, or 'all'")
    schreier_cmd.add_argument("--set", dest="set_spec", help="Generating set for the classical mode")
    schreier_cmd.add_argument("--irreps", help="Irrep subset for the dual mode")
    schreier_cmd.add_argument("--dual", action="store_true", help="Restrict the quantum Cayley graph of the dual instead")

    certify_cmd = commands.add_parser("certify", help="Spectral gap bound from a Kazhdan constant")
    certify_cmd.add_argument("--eps", type=float, required=True, help="Kazhdan constant")
    certify_cmd.add_argument("--dimHE", type=int, required=True, help="Dimension of the generating block space")
    certify_cmd.add_argument("--lambda-min", type=float, help="Smallest eigenvalue of the state (default: 1/dimHE)")
    certify_cmd.add_argument("--channel", help="Channel JSON to check")
    certify_cmd.add_argument("--lambda2", type=float, help="Second eigenvalue to check when no channel is given")
    return parser


def _dispatch(args: argparse.Namespace) -> Analysis:
    if args.command == "graph":
        if args.action == "analyze":
            return analyze_graph(args.file, args.tol)
        return lift_graph_file(args.file, args.seed, args.budget, args.tol, args.channel_out)
    if args.command == "group":
        return group_irreps(args.file, args.seed, args.export)
    if args.command == "channel":
        return analyze_channel(args.file, args.seed, args.budget, args.tol)
    if args.command == "harrow":
        return harrow(args.file, args.set_spec, args.seed, args.budget, args.tol)
    if args.command == "bicrossed":
        return bicrossed(args.file, args.gamma, args.g, args.orbit, args.state, args.tol)
    if args.command == "dual-cayley":
        return dual_cayley(args.file, args.irreps, args.seed, args.tol)
    if args.command == "schreier":
        return schreier(args.file, args.subgroup, args.set_spec, args.irreps, args.dual, args.seed, args.tol)
    return certify(args.eps, args.dimHE, args.lambda_min, args.channel, args.lambda2, args.tol)


def _write_table(analysis: Analysis, path: str) -> None:
    if analysis.adjacency:
        write_adjacency_csv(path, analysis.adjacency)
    elif analysis.spectrum is not None:
        write_spectrum_csv(path, analysis.spectrum)
    else:
        logging.warning(f"Nothing to write to {path}: this analysis has no spectrum or adjacency table")
        return
    logging.info(f"Table written to {path}")


def _write_report(report: RunReport, out: str) -> None:
    text = report.model_dump_json(indent=report_settings.REPORT_INDENT)
    if out == "-":
        sys.stdout.write(text + "\n")
        return
    write_text(out, text + "\n")
    logging.info(f"Report written to {out}")


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one analysis and write its report.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when omitted.

    Returns:
        Exit status: 0 on success, 1 when a certificate or check fails, 2 on bad input.
    """
    arguments = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(arguments)
    logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)

    report = RunReport(
        command=["qexpander", *arguments],
        seed=args.seed,
        tolerances={
            "tol": args.tol,
            "hermitian": settings.HERMITIAN_TOL,
            "rank": settings.RANK_TOL,
            "fixed_point_gap": settings.FIXED_POINT_GAP,
        },
    )
    start = time.perf_counter()
    try:
        logging.info(f"Running {args.command}")
        analysis = _dispatch(args)
    except InputError as e:
        logging.error(f"Invalid input: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except CertificateViolated as e:
        logging.error(f"Certificate violated: {e}")
        report.results = {"violation": {"name": e.name, "lhs": e.lhs, "rhs": e.rhs}}
        report.add_check(e.name, False)
    except ExpanderError as e:
        logging.error(f"Analysis failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILED
    else:
        report.results = analysis.results
        for name, value in analysis.checks.items():
            report.add_check(name, value)
        if args.csv:
            _write_table(analysis, args.csv)
    report.wall_time = time.perf_counter() - start

    _write_report(report, args.out)
    if not report.passed:
        failed = [name for name, value in report.checks.items() if not value]
        print(f"Error: failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def main() -> None:
    """Main CLI entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
