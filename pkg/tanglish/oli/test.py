import argparse
import logging
from pathlib import Path
from typing import Optional

from ..common.corpus import load_tsv
from ..common.errors import SchemaError
from ..common.metrics import WeightedReport, format_table
from ..common.utils import init_file_logger
from .checkpoint import load_checkpoint
from .config import Config, add_config_args, config_from_args
from .preprocess import write_json
from .runner import evaluate

LOGGER = logging.getLogger(__package__ + ".test")


def cmd_eval(config: Config, checkpoint_path: Optional[Path] = None) -> WeightedReport:
    """Scores the checkpoint on the raw test file (or the prepared one when none is configured).

    Text is cleaned with the checkpoint's rules. Writes scores.json to output_dir and prints the score table.
    """
    ckpt = load_checkpoint(config.checkpoint_path if checkpoint_path is None else checkpoint_path)
    if list(ckpt.label_names) != list(config.label_names):
        raise SchemaError(f"The checkpoint labels {ckpt.label_names} do not match the configured {config.label_names}.")
    test_path = config.test_path if config.test_path is not None else config.test_corpus_path
    corpus = load_tsv(test_path, config.text_col, config.label_col, config.id_col, ckpt.label_names, ckpt.clean_rules)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    init_file_logger(config.output_dir)

    report, matrix = evaluate(ckpt.to_model(), ckpt.vocab, corpus, ckpt.train_config.eval_batch_size)
    write_json(
        config.scores_path,
        {"config": config.to_dict(), "test_path": str(test_path), "confusion": matrix.to_dict(), **report.to_dict()},
    )
    print(format_table([report], [test_path.stem]))
    LOGGER.info(f"W-F1 on {test_path}: {report.f1:.4f}")
    return report


def main() -> None:
    parser = argparse.ArgumentParser(description="Scores a trained classifier on a labeled test file")
    add_config_args(parser)
    parser.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint file (default: output_dir)")
    args = parser.parse_args()

    config = config_from_args(args)
    cmd_eval(config, args.checkpoint)


if __name__ == "__main__":
    main()
