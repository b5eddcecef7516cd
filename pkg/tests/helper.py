from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from tanglish.common.corpus import LabeledCorpus, LabeledExample
from tanglish.oli.config import ModelConfig, TrainConfig
from tanglish.oli.tokenizer import TokenBatch

FILLER_WORDS = ["padam", "super", "vera", "level", "mass", "thalaiva", "trailer", "song", "semma", "waiting"]
OFFENSIVE_MARKER = "bad1"


def write_raw_tsv(
    path: Path, rows: Iterable[Sequence[str]], header: Sequence[str] = ("id", "text", "category")
) -> Path:
    lines = ["\t".join(header)] + ["\t".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def separable_corpus(n: int = 64, seed: int = 7) -> LabeledCorpus:
    """Cleaned texts of 2 to 4 filler words; every class-1 text also holds the marker token."""
    rng = np.random.default_rng(seed)
    examples: List[LabeledExample] = []
    for i in range(n):
        label = i % 2
        words = [FILLER_WORDS[k] for k in rng.integers(0, len(FILLER_WORDS), size=int(rng.integers(2, 5)))]
        if label == 1:
            words.insert(int(rng.integers(0, len(words) + 1)), OFFENSIVE_MARKER)
        examples.append(LabeledExample(str(i + 1), " ".join(words), label))
    return LabeledCorpus(tuple(examples))


def separable_rows(n: int = 64, seed: int = 7) -> List[Tuple[str, str, str]]:
    corpus = separable_corpus(n, seed)
    return [(e.id, e.text, corpus.label_names[e.label]) for e in corpus]


def tiny_model_config(vocab_size: int = 12, pooler_kind: str = "attention", **kwargs) -> ModelConfig:
    settings = dict(
        vocab_size=vocab_size,
        d_model=8,
        n_layers=1,
        n_heads=2,
        d_ff=16,
        max_seq_len=8,
        pooler_kind=pooler_kind,
        dropout_p=0.0,
        encoder_dropout=0.0,
    )
    settings.update(kwargs)
    return ModelConfig(**settings)


def learning_configs(pooler_kind: str, epochs: int = 30) -> Tuple[ModelConfig, TrainConfig]:
    model_cfg = ModelConfig(
        vocab_size=4,
        d_model=64,
        n_layers=2,
        n_heads=4,
        d_ff=128,
        max_seq_len=32,
        pooler_kind=pooler_kind,
        encoder_dropout=0.0,
    )
    tcfg = TrainConfig(lr=2e-3, epochs=epochs, dropout=0.0, balance=False, seed=111)
    return model_cfg, tcfg


def random_batch(rng: np.random.Generator, batch: int, seq_len: int, vocab_size: int) -> TokenBatch:
    lengths = rng.integers(1, seq_len + 1, size=batch)
    lengths[0] = seq_len
    mask = (np.arange(seq_len)[None, :] < lengths[:, None]).astype(np.int64)
    ids = rng.integers(4, vocab_size, size=(batch, seq_len)) * mask
    ids[:, 0] = 2
    return TokenBatch(ids.astype(np.int64), mask)


def brute_force_prf(preds: Sequence[int], labels: Sequence[int], n_classes: int) -> Tuple[float, float, float]:
    """Weighted precision, recall and F1 by direct counting, undefined ratios scored 0."""
    total = len(labels)
    precision = recall = f1 = 0.0
    for k in range(n_classes):
        tp = sum(1 for p, t in zip(preds, labels) if p == k and t == k)
        predicted = sum(1 for p in preds if p == k)
        support = sum(1 for t in labels if t == k)
        p_k = tp / predicted if predicted > 0 else 0.0
        r_k = tp / support if support > 0 else 0.0
        f_k = 2 * p_k * r_k / (p_k + r_k) if p_k + r_k > 0 else 0.0
        precision += support * p_k / total
        recall += support * r_k / total
        f1 += support * f_k / total
    return precision, recall, f1
