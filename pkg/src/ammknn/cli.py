"""Command-line entry point.

Subcommands: prepare, loocv, validate, predict, synth, plot.
Exit codes: 0 success, 2 config error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline, report
from .config import load_config
from .errors import ConfigError, DataError, InvalidSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ammknn",
        description="Adaptive minimum-match KNN score-prediction pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="aggregate, split, standardize, select")
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True, help="raw cohort CSV")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("loocv", help="leave-one-out evaluation on prepared data")
    p.add_argument("--config", required=True)
    p.add_argument("--train", required=True, help="prepared training CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = sub.add_parser("validate", help="predict and evaluate a scored cohort")
    p.add_argument("--config", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = sub.add_parser("predict", help="predict an unscored cohort")
    p.add_argument("--config", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")

    p = sub.add_parser("plot", help="render an SVG scatter from a report")
    p.add_argument("--report", required=True, help="evaluation report JSON")
    p.add_argument(
        "--kind", choices=("scatter", "packrat_scatter"), default="scatter"
    )
    p.add_argument("--out", required=True)
    return parser


def _cmd_prepare(args) -> int:
    config = load_config(args.config)
    summary = pipeline.run_prepare(config, args.input, args.out)
    print(
        "prepared {train_rows} training rows "
        "(dropped {train_dropped_missing_target} missing-target, "
        "{train_dropped_incomplete} incomplete) and {validation_rows} validation rows "
        "(dropped {validation_dropped_missing_target} missing-target, "
        "{validation_dropped_incomplete} incomplete)".format(**summary)
    )
    print(
        "kept {columns_kept} of {columns_in} columns "
        "({columns_dropped} below the correlation threshold)".format(**summary)
    )
    return EXIT_OK


def _cmd_loocv(args) -> int:
    config = load_config(args.config)
    reports = pipeline.run_loocv(config, args.train, args.out)
    if args.format == "json":
        print(json.dumps(reports["ammknn"], indent=2))
        print(json.dumps(reports["knn"], indent=2))
    else:
        print(report.format_metrics_table(reports["ammknn"]))
        print(report.format_metrics_table(reports["knn"]))
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    result = pipeline.run_validate(config, args.train, args.cohort, args.out)
    if args.format == "json":
        print(json.dumps(result["report"], indent=2))
    else:
        print(report.format_metrics_table(result["report"]))
        print("roster (worst predicted risk first):")
        for entry in result["roster"]:
            print(f"  {entry['id']}: {entry['predicted']:.1f} [{entry['tier']}]")
    return EXIT_OK


def _cmd_predict(args) -> int:
    config = load_config(args.config)
    lines = pipeline.run_predict(config, args.train, args.cohort, args.out)
    print(f"wrote {len(lines)} prediction records")
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"{args.spec}: invalid JSON: {exc}") from exc
    summary = pipeline.run_synth(doc, args.out, seed_override=args.seed)
    print(f"wrote {summary['rows']} rows x {summary['columns']} columns to {summary['path']}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    out_path = pipeline.run_plot(args.report, args.kind, args.out)
    print(f"wrote {out_path}")
    return EXIT_OK


_COMMANDS = {
    "prepare": _cmd_prepare,
    "loocv": _cmd_loocv,
    "validate": _cmd_validate,
    "predict": _cmd_predict,
    "synth": _cmd_synth,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stdout)
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
