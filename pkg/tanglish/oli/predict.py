import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd

from ..common.clean import clean_text
from ..common.corpus import read_tsv
from ..common.errors import SchemaError
from .checkpoint import load_checkpoint
from .config import Config, add_config_args, config_from_args
from .runner import predict_probs

LOGGER = logging.getLogger(__package__ + ".predict")


def _read_inputs(config: Config, input_path: Optional[Path], stdin: TextIO) -> Tuple[List[str], List[str]]:
    if input_path is None:
        texts = [line.rstrip("\r\n") for line in stdin]
        return [str(i) for i in range(1, len(texts) + 1)], texts
    df = read_tsv(input_path)
    df.columns = [str(c).strip() for c in df.columns]
    if config.text_col not in df.columns:
        raise SchemaError(f"The input file {input_path} does not have a '{config.text_col}' column.")
    texts = df[config.text_col].tolist()
    if config.id_col is not None and config.id_col in df.columns:
        ids = [str(i).strip() for i in df[config.id_col]]
    else:
        ids = [str(i) for i in range(1, len(texts) + 1)]
    return ids, texts


def cmd_predict(
    config: Config,
    checkpoint_path: Optional[Path] = None,
    input_path: Optional[Path] = None,
    output_path: Optional[Path] = None,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
) -> pd.DataFrame:
    """Writes one TSV row per input row: id, predicted label and the probability of every class."""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    ckpt = load_checkpoint(config.checkpoint_path if checkpoint_path is None else checkpoint_path)
    ids, raw_texts = _read_inputs(config, input_path, stdin)
    texts = [clean_text(text, ckpt.clean_rules) for text in raw_texts]

    if len(texts) > 0:
        probs = predict_probs(ckpt.to_model(), ckpt.vocab, texts, ckpt.train_config.eval_batch_size)
    else:
        probs = np.zeros((0, len(ckpt.label_names)))
    df = pd.DataFrame({"id": ids, "label": [ckpt.label_names[k] for k in probs.argmax(axis=1)]})
    for k, name in enumerate(ckpt.label_names):
        df[f"prob_{name}"] = probs[:, k]

    if output_path is None:
        df.to_csv(stdout, sep="\t", index=False, float_format="%.6f", lineterminator="\n")
    else:
        df.to_csv(output_path, sep="\t", index=False, float_format="%.6f", lineterminator="\n")
        LOGGER.info(f"Wrote {len(df)} predictions to {output_path}")
    return df


def main() -> None:
    parser = argparse.ArgumentParser(description="Labels raw texts with a trained classifier")
    add_config_args(parser)
    parser.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint file (default: output_dir)")
    parser.add_argument("--input", type=Path, default=None, help="Input TSV (default: one text per line on stdin)")
    parser.add_argument("--output", type=Path, default=None, help="Output TSV (default: stdout)")
    args = parser.parse_args()

    config = config_from_args(args)
    cmd_predict(config, args.checkpoint, args.input, args.output)


if __name__ == "__main__":
    main()
