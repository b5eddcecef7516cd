import argparse
import logging
from pathlib import Path
from typing import List, Optional

from ..common.corpus import LabeledCorpus, load_tsv
from ..common.utils import init_file_logger
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import Config, add_config_args, config_from_args
from .preprocess import write_json
from .runner import train
from .tokenizer import Vocab

LOGGER = logging.getLogger(__package__ + ".train")


def _load_prepared(config: Config, path: Path) -> LabeledCorpus:
    return load_tsv(path, config.text_col, config.label_col, config.id_col, config.label_names, config.clean_rules)


def cmd_train(config: Config, resume: bool = False) -> List[dict]:
    """Trains on the prepared corpus in output_dir, keeping the checkpoint current after every epoch."""
    vocab = Vocab.load(config.vocab_path)
    train_corpus = _load_prepared(config, config.train_corpus_path)
    eval_corpus: Optional[LabeledCorpus] = None
    if config.test_corpus_path.is_file():
        eval_corpus = _load_prepared(config, config.test_corpus_path)
    init_file_logger(config.output_dir)

    resume_from: Optional[Checkpoint] = None
    if resume and config.checkpoint_path.is_file():
        resume_from = load_checkpoint(config.checkpoint_path)

    def on_epoch_end(ckpt: Checkpoint) -> None:
        save_checkpoint(ckpt, config.checkpoint_path)

    ckpt, history = train(
        config.model_config(len(vocab)),
        train_corpus,
        eval_corpus,
        config.train_config,
        vocab=vocab,
        rules=config.clean_rules,
        resume=resume_from,
        on_epoch_end=on_epoch_end,
    )
    save_checkpoint(ckpt, config.checkpoint_path)
    write_json(config.history_path, {"config": config.to_dict(), "history": history})
    if len(history) > 0:
        LOGGER.info(f"Final train W-F1: {history[-1]['train']['f1']:.4f}")
    return history


def main() -> None:
    parser = argparse.ArgumentParser(description="Trains an offensive language classifier")
    add_config_args(parser)
    parser.add_argument("--resume", default=False, action="store_true", help="Resume from the saved checkpoint")
    args = parser.parse_args()

    config = config_from_args(args)
    config.set_seed()
    print("=== Training ===")
    cmd_train(config, resume=args.resume)
    print("Training completed")


if __name__ == "__main__":
    main()
