"""
Command-line entry point: tanglish {prepare,train,eval,predict,experiment} [--config FILE] [--seed N] [flags]

Exit codes: 0 success, 2 config or schema error, 3 data error, 4 numeric error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..common.errors import ConfigError, TanglishError
from .config import add_config_args, config_from_args
from .experiment import TanglishExperiment, run_comparison
from .predict import cmd_predict
from .preprocess import cmd_prepare
from .test import cmd_eval
from .train import cmd_train

LOGGER = logging.getLogger(__package__ + ".cli")


def _create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tanglish", description="Offensive language identification pipeline")
    # subcommand flags take precedence over these
    parser.add_argument("--config", dest="global_config", type=Path, default=None, help="YAML or JSON config file")
    parser.add_argument("--seed", dest="global_seed", type=int, default=None, help="Random seed")
    subparsers = parser.add_subparsers(dest="command", required=True)

    prepare = subparsers.add_parser("prepare", help="Clean the raw corpora and build the vocabulary")
    add_config_args(prepare)

    train = subparsers.add_parser("train", help="Train a classifier on the prepared corpus")
    add_config_args(train)
    train.add_argument("--resume", default=False, action="store_true", help="Resume from the saved checkpoint")

    evaluate = subparsers.add_parser("eval", help="Score a checkpoint on a labeled test file")
    add_config_args(evaluate)
    evaluate.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint file (default: output_dir)")

    predict = subparsers.add_parser("predict", help="Label raw texts")
    add_config_args(predict)
    predict.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint file (default: output_dir)")
    predict.add_argument("--input", type=Path, default=None, help="Input TSV (default: one text per line on stdin)")
    predict.add_argument("--output", type=Path, default=None, help="Output TSV (default: stdout)")

    experiment = subparsers.add_parser("experiment", help="Prepare, train and test in one run")
    add_config_args(experiment)
    experiment.add_argument(
        "--compare", default=False, action="store_true", help="Compare both pooler kinds with and without balancing"
    )
    return parser


def run(args: argparse.Namespace) -> None:
    if args.config is None:
        args.config = args.global_config
    if args.seed is None:
        args.seed = args.global_seed
    config = config_from_args(args)
    config.set_seed()
    if args.command == "prepare":
        cmd_prepare(config)
    elif args.command == "train":
        cmd_train(config, resume=args.resume)
    elif args.command == "eval":
        cmd_eval(config, args.checkpoint)
    elif args.command == "predict":
        cmd_predict(config, args.checkpoint, args.input, args.output)
    elif args.command == "experiment":
        if args.compare:
            run_comparison(config)
        else:
            TanglishExperiment(config).run()


def main(argv: Optional[List[str]] = None) -> int:
    args = _create_parser().parse_args(argv)
    try:
        run(args)
    except TanglishError as e:
        return _report(e, e.exit_code)
    except OSError as e:
        return _report(e, ConfigError.exit_code)
    return 0


def _report(e: Exception, exit_code: int) -> int:
    message = f"{type(e).__name__}: {e}"
    LOGGER.error(message)
    print(f"error: {message}", file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
