import argparse
import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

from ..common.corpus import LabeledCorpus, LoadStats, balance, concat, load_tsv_with_stats, write_tsv
from ..common.errors import ConfigError
from ..common.utils import init_file_logger
from .config import Config, add_config_args, config_from_args
from .tokenizer import build_vocab

LOGGER = logging.getLogger(__package__ + ".preprocess")


def write_json(path: Path, obj: dict) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as file:
        json.dump(obj, file, indent=2, sort_keys=True, ensure_ascii=False)
        file.write("\n")


def _load(config: Config, path: Path, split: str) -> Tuple[LabeledCorpus, LoadStats]:
    return load_tsv_with_stats(
        path, config.text_col, config.label_col, config.id_col, config.label_names, config.clean_rules, split
    )


def _split_stats(corpus: LabeledCorpus, file_stats: List[LoadStats]) -> dict:
    return {
        "files": [s.to_dict() for s in file_stats],
        "rows_in": sum(s.rows_in for s in file_stats),
        "rows_out": sum(s.rows_out for s in file_stats),
        "class_counts": corpus.counts_by_name(),
    }


def load_train_corpus(config: Config) -> Tuple[LabeledCorpus, List[LoadStats]]:
    if len(config.train_paths) == 0:
        raise ConfigError("No training files were specified (train_paths).")
    corpus: Optional[LabeledCorpus] = None
    file_stats: List[LoadStats] = []
    for path in config.train_paths:
        part, stats = _load(config, path, "train")
        corpus = part if corpus is None else concat(corpus, part)
        file_stats.append(stats)
    assert corpus is not None
    return corpus, file_stats


def cmd_prepare(config: Config) -> dict:
    """Cleans the raw train and test files, writes them with the vocab into output_dir and returns the stats."""
    for path in config.train_paths + ([config.test_path] if config.test_path is not None else []):
        if not path.is_file():
            raise FileNotFoundError(f"The corpus file {path} does not exist.")
    config.output_dir.mkdir(parents=True, exist_ok=True)
    init_file_logger(config.output_dir)

    train_corpus, train_file_stats = load_train_corpus(config)
    stats = {"config": config.to_dict(), "train": _split_stats(train_corpus, train_file_stats)}
    tcfg = config.train_config
    if tcfg.balance:
        balanced = balance(train_corpus, tcfg.balance_strategy, tcfg.seed)
        stats["train"]["balanced_class_counts"] = balanced.counts_by_name()
    write_tsv(config.train_corpus_path, train_corpus, config.text_col, config.label_col, config.id_col or "id")

    if config.test_path is not None:
        test_corpus, test_file_stats = _load(config, config.test_path, "test")
        stats["test"] = _split_stats(test_corpus, [test_file_stats])
        write_tsv(config.test_corpus_path, test_corpus, config.text_col, config.label_col, config.id_col or "id")

    vocab = build_vocab(train_corpus.texts, config.root["vocab_max_size"], config.root["vocab_min_freq"])
    vocab.save(config.vocab_path)
    stats["vocab_size"] = len(vocab)

    write_json(config.stats_path, stats)
    LOGGER.info(
        f"Prepared {stats['train']['rows_out']} training rows"
        + (f" and {stats['test']['rows_out']} test rows" if "test" in stats else "")
        + f" in {config.output_dir}"
    )
    return stats


def main() -> None:
    parser = argparse.ArgumentParser(description="Cleans the raw corpora and builds the vocabulary")
    add_config_args(parser)
    args = parser.parse_args()

    config = config_from_args(args)
    config.set_seed()
    cmd_prepare(config)


if __name__ == "__main__":
    main()
