"""
Command line interface: synthesize or ingest data, rank attributes, train,
evaluate, predict and collect live.
"""

import argparse
import json
import logging
import os
import sys
from argparse import Action, ArgumentParser, Namespace
from contextlib import contextmanager
from typing import IO, Any, Iterator, Sequence

from . import __version__
from .agent import SimulatedAgent, scenario_by_name
from .classifiers import train
from .collector import AgentEndpoint, classify_stream
from .dataset import Dataset, load_csv, read_dataset, write_csv
from .errors import (
    CollectorError,
    DatasetError,
    MibguardError,
    SchemaMismatchError,
    UsageError,
)
from .evaluation import evaluate_cv, render_report
from .experiments import DEFAULT_CLASSIFIERS, DEFAULT_SELECTIONS, render_grid, run_grid
from .features import AttributeSelection, rank_attributes, render_ranking
from .file import load_model, save_model
from .model import ClassifierSpec
from .synth import PRESETS, load_synth_spec, synth_generate
from .types import LABELS, Evaluator, OutputFormat

log = logging.getLogger(__name__)

SEED_ENV = "MIBGUARD_SEED"
DEFAULT_SEED = 1
STDIO = "-"


class CommandParser(ArgumentParser):
    """Argument parser that raises UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class OptionsAction(Action):
    """Argument choosing a value from a table of case-insensitive names"""

    def __init__(self, options: dict[str, Any], default: str, **kwargs):
        self.options = {name.lower(): value for name, value in options.items()}
        super().__init__(
            choices=list(self.options),
            default=self.options[default.lower()],
            type=str.lower,
            **kwargs,
        )

    def __call__(
        self,
        parser: ArgumentParser,
        namespace: Namespace,
        values: Any,
        option_string=None,
    ):
        setattr(namespace, self.dest, self.options[values])


def _selection(text: str) -> AttributeSelection:
    try:
        return AttributeSelection.parse(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _classifier(text: str) -> ClassifierSpec:
    try:
        return ClassifierSpec.parse(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not >= 1")
    return value


def add_data_arg(parser: ArgumentParser):
    """
    Adds the --data argument.

    args.data: str
    """
    parser.add_argument(
        "--data",
        required=True,
        help='Labeled CSV dataset ("-" reads standard input)',
    )


def add_attrs_arg(parser: ArgumentParser):
    """
    Adds the --attrs argument.

    args.attrs: AttributeSelection
    """
    parser.add_argument(
        "--attrs",
        type=_selection,
        default=AttributeSelection(),
        help="Attributes to use: all, a comma-separated list, or top:N:EVALUATOR",
    )


def add_classifier_arg(parser: ArgumentParser):
    """
    Adds the --classifier argument.

    args.classifier: ClassifierSpec
    """
    parser.add_argument(
        "--classifier",
        type=_classifier,
        required=True,
        help="bayes | ibk[:K] | j48[:MIN_LEAF] | rules[:MIN_COV] | "
        "bagging[:ITERS[:BASE]] | pasting[:ITERS[:BASE]]",
    )


def add_seed_arg(parser: ArgumentParser):
    """
    Adds the --seed argument.

    args.seed: int | None
    """
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"Random seed (default: ${SEED_ENV} or {DEFAULT_SEED})",
    )


def add_folds_arg(parser: ArgumentParser):
    """
    Adds the --folds argument.

    args.folds: int
    """
    parser.add_argument(
        "--folds", type=int, default=10, help="Cross-validation folds (default: 10)"
    )


def add_workers_arg(parser: ArgumentParser):
    """
    Adds the --workers argument.

    args.workers: int
    """
    parser.add_argument(
        "--workers",
        type=_positive_int,
        default=1,
        help="Threads for folds and ensemble members (default: 1)",
    )


def add_output_args(parser: ArgumentParser, formats: bool = True):
    """
    Adds the --out and --format arguments.

    args.out: str
    args.format: OutputFormat
    """
    parser.add_argument(
        "--out",
        default=STDIO,
        help='Output file ("-" writes standard output)',
    )
    if formats:
        parser.add_argument(
            "--format",
            action=OptionsAction,
            options={fmt.value: fmt for fmt in OutputFormat},
            default="text",
            help="Report format",
        )


def add_endpoint_args(parser: ArgumentParser):
    """
    Adds the --agent, --community, --timeout and --retries arguments.

    args.agent: str
    args.community: str
    args.timeout: float
    args.retries: int
    """
    parser.add_argument("--agent", required=True, help="Agent address HOST[:PORT]")
    parser.add_argument("--community", default="public", help="Community string")
    parser.add_argument(
        "--timeout", type=float, default=1.0, help="Seconds per request attempt"
    )
    parser.add_argument(
        "--retries", type=int, default=1, help="Attempts after the first one"
    )


def make_parser() -> CommandParser:
    """Parser for every subcommand"""
    parser = CommandParser(
        prog="mibguard",
        description="Classify DoS and brute-force traffic from SNMP ICMP counters",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to standard error (-vv for debug output)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Generate a synthetic dataset")
    source = synth.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=sorted(PRESETS), help="Built-in spec")
    source.add_argument("--spec", help="Synthetic spec JSON document")
    add_seed_arg(synth)
    add_output_args(synth, formats=False)

    rank = commands.add_parser("rank", help="Rank attributes with an evaluator")
    add_data_arg(rank)
    rank.add_argument(
        "--method",
        action=OptionsAction,
        options={evaluator.value: evaluator for evaluator in Evaluator},
        default="relieff",
        help="Attribute evaluator",
    )
    rank.add_argument(
        "--neighbors", type=_positive_int, default=10, help="ReliefF neighbours"
    )
    rank.add_argument(
        "--samples", type=_positive_int, default=None, help="ReliefF sampled records"
    )
    rank.add_argument(
        "--bins", type=_positive_int, default=10, help="InfoGain discretization bins"
    )
    add_seed_arg(rank)
    add_output_args(rank)

    train_cmd = commands.add_parser("train", help="Train a model and save it")
    add_data_arg(train_cmd)
    add_classifier_arg(train_cmd)
    add_attrs_arg(train_cmd)
    add_seed_arg(train_cmd)
    add_workers_arg(train_cmd)
    add_output_args(train_cmd, formats=False)

    evaluate = commands.add_parser("eval", help="Cross-validate a classifier")
    add_data_arg(evaluate)
    add_classifier_arg(evaluate)
    add_attrs_arg(evaluate)
    add_folds_arg(evaluate)
    add_seed_arg(evaluate)
    add_workers_arg(evaluate)
    add_output_args(evaluate)

    predict = commands.add_parser("predict", help="Classify unlabeled rows")
    predict.add_argument("--model", required=True, help="Model JSON file")
    predict.add_argument(
        "--input",
        default=STDIO,
        help='Headerless CSV rows in model attribute order ("-" reads standard input)',
    )
    add_output_args(predict)

    compare = commands.add_parser(
        "compare", help="Evaluate classifiers on attribute selections"
    )
    add_data_arg(compare)
    compare.add_argument(
        "--classifier",
        type=_classifier,
        action="append",
        help="Classifier to compare, repeatable (default: "
        + " ".join(DEFAULT_CLASSIFIERS)
        + ")",
    )
    compare.add_argument(
        "--attrs",
        type=_selection,
        action="append",
        help="Attribute selection, repeatable (default: "
        + " ".join(DEFAULT_SELECTIONS)
        + ")",
    )
    add_folds_arg(compare)
    add_seed_arg(compare)
    add_workers_arg(compare)
    add_output_args(compare)

    collect = commands.add_parser("collect", help="Poll an agent and classify windows")
    collect.add_argument("--model", required=True, help="Model JSON file")
    add_endpoint_args(collect)
    collect.add_argument(
        "--interval", type=float, default=10.0, help="Seconds between polls"
    )
    collect.add_argument(
        "--polls", type=_positive_int, default=None, help="Stop after this many polls"
    )
    collect.add_argument(
        "--rates", action="store_true", help="Classify per-second rates, not deltas"
    )
    collect.add_argument(
        "--detect-restart",
        action="store_true",
        help="Read sysUpTime and report agent restarts as gaps",
    )
    add_output_args(collect, formats=False)

    agent = commands.add_parser("agent", help="Serve a simulated SNMP agent")
    agent.add_argument(
        "--scenario",
        default="echo-flood",
        help="Preset (constant, idle, echo-flood) or scenario JSON document",
    )
    agent.add_argument("--host", default="127.0.0.1", help="Address to bind")
    agent.add_argument("--port", type=int, default=1161, help="UDP port to bind")

    return parser


def _seed(args: Namespace, fallback: int = DEFAULT_SEED) -> int:
    if args.seed is not None:
        return args.seed
    text = os.environ.get(SEED_ENV)
    if text is None:
        return fallback
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError(f"${SEED_ENV} is not an integer: {text!r}") from exc


@contextmanager
def _output(path: str, stdout: IO[str]) -> Iterator[IO[str]]:
    if path == STDIO:
        yield stdout
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            yield file
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _read_data(path: str, stdin: IO[str]) -> Dataset:
    if path == STDIO:
        return load_csv(stdin)
    try:
        return read_dataset(path)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc


def _read_rows(lines: IO[str], width: int) -> Iterator[list[float]]:
    for row, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cells = line.strip().split(",")
        if len(cells) != width:
            raise SchemaMismatchError(
                f"row {row} has {len(cells)} values, the model expects {width}"
            )
        try:
            yield [float(cell) for cell in cells]
        except ValueError as exc:
            raise DatasetError(f"non-numeric value: {exc}", row=row) from exc


def do_synth(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Write a synthetic dataset as CSV"""
    if args.preset:
        spec = PRESETS[args.preset](_seed(args))
    else:
        try:
            spec = load_synth_spec(args.spec)
        except OSError as exc:
            raise DatasetError(f"cannot read {args.spec}: {exc}") from exc
    ds = synth_generate(spec, _seed(args, spec.seed))
    with _output(args.out, stdout) as sink:
        write_csv(ds, sink)


def do_rank(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Rank the attributes of a dataset"""
    ds = _read_data(args.data, stdin)
    ranking = rank_attributes(
        ds,
        args.method,
        k_neighbors=args.neighbors,
        sample_count=args.samples,
        seed=_seed(args),
        max_bins=args.bins,
    )
    with _output(args.out, stdout) as sink:
        sink.write(render_ranking(ranking, args.format))


def do_train(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Train a classifier and write its model file"""
    seed = _seed(args)
    ds = args.attrs.apply(_read_data(args.data, stdin), seed)
    model = train(ds, args.classifier, seed, args.workers)
    with _output(args.out, stdout) as sink:
        save_model(model, sink)


def do_eval(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Cross-validate a classifier"""
    seed = _seed(args)
    ds = args.attrs.apply(_read_data(args.data, stdin), seed)
    report = evaluate_cv(ds, args.classifier, args.folds, seed, args.workers)
    with _output(args.out, stdout) as sink:
        sink.write(render_report(report, args.format))


def do_predict(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Classify headerless rows with a saved model"""
    model = load_model(args.model)
    width = len(model.schema)

    def classify(lines: IO[str], sink: IO[str]):
        for vector in _read_rows(lines, width):
            label = model.predict(vector)
            if args.format == OutputFormat.JSON:
                distribution = model.predict_distribution(vector)
                record = {
                    "label": label.canonical,
                    "distribution": {
                        item.canonical: float(p)
                        for item, p in zip(LABELS, distribution)
                    },
                }
                sink.write(json.dumps(record) + "\n")
            else:
                sink.write(f"{label.canonical}\n")

    with _output(args.out, stdout) as sink:
        if args.input == STDIO:
            classify(stdin, sink)
        else:
            try:
                with open(args.input, encoding="utf-8") as lines:
                    classify(lines, sink)
            except (OSError, UnicodeDecodeError) as exc:
                raise DatasetError(f"cannot read {args.input}: {exc}") from exc


def do_compare(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Evaluate the classifier x attribute selection grid"""
    seed = _seed(args)
    ds = _read_data(args.data, stdin)
    options = {}
    if args.attrs:
        options["selection"] = args.attrs
    if args.classifier:
        options["classifier"] = args.classifier
    results = run_grid(ds, args.folds, seed, args.workers, **options)
    with _output(args.out, stdout) as sink:
        sink.write(render_grid(results, args.format))


def do_collect(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Poll an agent and write classified windows as JSON lines"""
    model = load_model(args.model)
    endpoint = AgentEndpoint.parse(
        args.agent,
        community=args.community,
        timeout=args.timeout,
        retries=args.retries,
    )
    with _output(args.out, stdout) as sink:
        for _ in classify_stream(
            endpoint,
            model,
            args.interval,
            sink,
            polls=args.polls,
            rates=args.rates,
            detect_restart=args.detect_restart,
        ):
            pass


def do_agent(args: Namespace, stdin: IO[str], stdout: IO[str]):
    """Serve a simulated agent until interrupted"""
    scenario = scenario_by_name(args.scenario)
    try:
        agent = SimulatedAgent(scenario, args.host, args.port)
    except OSError as exc:
        raise CollectorError(f"cannot bind {args.host}:{args.port}: {exc}") from exc
    agent.serve_forever()


COMMANDS = {
    "synth": do_synth,
    "rank": do_rank,
    "train": do_train,
    "eval": do_eval,
    "predict": do_predict,
    "compare": do_compare,
    "collect": do_collect,
    "agent": do_agent,
}


def run(
    argv: Sequence[str],
    stdin: IO[str] | None = None,
    stdout: IO[str] | None = None,
    stderr: IO[str] | None = None,
) -> int:
    """
    Run one command and return its exit code: 0 on success, 1 for usage
    errors, 2 for data and model errors, 3 for network errors.
    """
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr

    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    package_log = logging.getLogger("mibguard")
    previous_level = package_log.level
    package_log.addHandler(handler)
    try:
        try:
            args = make_parser().parse_args(argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else 0
        package_log.setLevel(
            [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
        )
        COMMANDS[args.command](args, stdin, stdout)
        return 0
    except MibguardError as exc:
        stderr.write(f"error: {exc}\n")
        return exc.exit_code
    finally:
        package_log.removeHandler(handler)
        package_log.setLevel(previous_level)


def main():  # pylint: disable=missing-function-docstring
    try:
        sys.exit(run(sys.argv[1:]))
    except KeyboardInterrupt:
        sys.exit(130)
