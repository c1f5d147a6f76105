"""
citex command-line entry point.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import ValidationError

from citex import __version__
from citex.config import get_settings
from citex.core.command_runner import get_command_runner
from citex.core.exceptions import CitexError
from citex.models.enums import (
    Command,
    ImpactIndex,
    MatrixFormat,
    RaeScoring,
    ScoreTransform,
    Statistic,
)
from citex.schemas.options import RunOptions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

MATRIX_COMMANDS = {Command.DESCRIBE, Command.CLUSTER, Command.EIGENFACTOR, Command.STIGLER, Command.LASSO, Command.REPORT}


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"{value} must be >= 1")
    return number


def _non_negative_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"{value} must be >= 0")
    return number


def _non_negative_float(value: str) -> float:
    number = float(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"{value} must be >= 0")
    return number


def _unit_interval(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} must lie in [0, 1]")
    return number


def _damping(value: str) -> float:
    number = float(value)
    if not 0.0 <= number < 1.0:
        raise argparse.ArgumentTypeError(f"{value} must lie in [0, 1)")
    return number


def _journal_pair(value: str) -> Tuple[str, str]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected two journals as A,B, got '{value}'")
    return parts[0], parts[1]


def _key_list(value: str) -> List[str]:
    return [p.strip() for p in value.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    settings = get_settings()

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=settings.out,
                        help="output directory (default: $CITEX_OUT or %(default)s)")
    common.add_argument("--format", choices=[f.value for f in MatrixFormat], default=MatrixFormat.MATRIX_CSV.value,
                        help="input matrix layout")
    common.add_argument("--window", default="", help="label of the citation window")
    common.add_argument("--seed", type=int, default=settings.seed, help="seed for stochastic steps")
    common.add_argument("--tol", type=float, default=None, help="solver tolerance")
    common.add_argument("--aliases", type=Path, help="alias table CSV alias,abbrev")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="citex",
        description="Rank journals from cross-citation matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(command: Command, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(command.value, parents=[common], help=help_text)
        if command in MATRIX_COMMANDS:
            p.add_argument("--input", type=Path, required=True, help="citation matrix CSV (rows cited, columns citing)")
        return p

    describe = add(Command.DESCRIBE, "citations made and received per journal")
    describe.add_argument("--stat-keys", type=_key_list, help="comma-separated in-list journals")

    index = add(Command.INDEX, "Impact-Factor family index")
    index.add_argument("--yearly", type=Path, required=True,
                       help="CSV journal,year,citations,citable_items[,self_citations]")
    index.add_argument("--kind", choices=[k.value for k in ImpactIndex], default=ImpactIndex.IF.value)
    index.add_argument("--year", type=int, help="census year (default: latest year in the file)")

    clustering = add(Command.CLUSTER, "correlation-distance complete-linkage clustering")
    clustering.add_argument("--cut", type=_non_negative_float, default=0.6, help="cut height")

    eigen = add(Command.EIGENFACTOR, "Eigenfactor and Article Influence")
    eigen.add_argument("--articles", type=Path, help="CSV journal,articles")
    eigen.add_argument("--lambda", dest="damping", type=_damping, default=settings.damping, help="damping")

    model = add(Command.STIGLER, "Stigler model export scores")
    model.add_argument("--constraint", default="sum", help="sum or ref:ABBREV")
    model.add_argument("--qvar", action="store_true", help="add quasi standard errors")
    model.add_argument("--ztest", type=_journal_pair, help="compare two journals, e.g. Bka,JASA")
    model.add_argument("--simulations", type=_non_negative_int, default=0,
                       help="bootstrap replicates for the residual envelope")
    model.add_argument("--level", type=float, default=settings.envelope_level, help="envelope level")
    model.add_argument("--workers", type=_positive_int, default=settings.simulation_workers)

    lasso = add(Command.LASSO, "adaptive ranking lasso path")
    lasso.add_argument("--points", type=_positive_int, default=settings.lasso_points, help="grid size")
    lasso.add_argument("--constraint", default="sum", help="sum or ref:ABBREV")

    assessment = add(Command.ASSESS, "compare unit assessment scores with journal scores")
    assessment.add_argument("--scores", type=Path, required=True, help="journal scores CSV")
    assessment.add_argument("--score-column", dest="score_columns", type=_key_list,
                            help="comma-separated score columns (default: mu_grouped, then mu; "
                                 "every numeric column of a method_scores.csv)")
    assessment.add_argument("--outputs", type=Path, required=True, help="CSV unit,journal_raw")
    assessment.add_argument("--profiles", type=Path, required=True, help="CSV unit,pct4,pct3,pct2,pct1,pctU")
    assessment.add_argument("--transform", choices=[t.value for t in ScoreTransform],
                            help="applied to every column (default: exponentiate export scores only)")
    assessment.add_argument("--statistic", choices=[s.value for s in Statistic], default=Statistic.MEAN.value)
    assessment.add_argument("--scoring", choices=[s.value for s in RaeScoring], default=RaeScoring.STANDARD.value)
    assessment.add_argument("--min-coverage", type=_unit_interval, default=settings.min_coverage)

    report = add(Command.REPORT, "combined score table, rank table and workbook")
    report.add_argument("--constraint", default="sum", help="sum or ref:ABBREV")
    report.add_argument("--points", type=_positive_int, default=settings.lasso_points)
    report.add_argument("--articles", type=Path, help="CSV journal,articles")
    report.add_argument("--lambda", dest="damping", type=_damping, default=settings.damping)
    report.add_argument("--yearly", type=Path, help="yearly counts for II/IF/IFno/IF5")
    report.add_argument("--year", type=int)
    report.add_argument("--level", type=float, default=0.95, help="comparison interval level")
    return parser


def _options(args: argparse.Namespace) -> RunOptions:
    fields = set(RunOptions.model_fields)
    values = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    return RunOptions(**values)


def _missing_files(options: RunOptions) -> List[str]:
    flags = {
        "--input": options.input,
        "--articles": options.articles,
        "--yearly": options.yearly,
        "--scores": options.scores,
        "--outputs": options.outputs,
        "--profiles": options.profiles,
        "--aliases": options.aliases,
    }
    return [f"{flag}: file not found: {path}" for flag, path in flags.items() if path is not None and not path.is_file()]


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run one subcommand.

    Returns:
        0 on success, 2 on usage errors or missing inputs, 1 on computation errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, get_settings().log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        options = _options(args)
    except ValidationError as e:
        for error in e.errors():
            where = "--" + "-".join(str(p) for p in error["loc"]).replace("_", "-")
            print(f"citex {args.command}: {where}: {error['msg']}", file=sys.stderr)
        return EXIT_USAGE

    missing = _missing_files(options)
    if missing:
        for message in missing:
            print(f"citex {args.command}: {message}", file=sys.stderr)
        return EXIT_USAGE

    runner = get_command_runner()
    try:
        manifest = runner.run(Command(args.command), options)
    except FileNotFoundError as e:
        print(f"citex {args.command}: file not found: {e.filename}", file=sys.stderr)
        return EXIT_USAGE
    except CitexError as e:
        print(f"citex {args.command}: {e}", file=sys.stderr)
        return EXIT_FAILURE

    for message in runner.messages:
        print(message)
    for artifact in manifest.artifacts:
        print(options.out / artifact)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
