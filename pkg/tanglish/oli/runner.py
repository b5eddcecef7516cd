import copy
import logging
import math
from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..common.clean import CleanRules
from ..common.corpus import LabeledCorpus, balance, batches
from ..common.errors import DataError, DimensionError, NumericError, SchemaError
from ..common.metrics import ConfusionMatrix, WeightedReport, confusion, weighted_prf
from ..common.utils import SplitMix64
from .checkpoint import Checkpoint
from .config import ModelConfig, TrainConfig, model_config_for_training
from .models.classifier import OffensiveClassifier
from .models.tensor_ops import ParamStore
from .optimizer import OptimizerState, adamw_step, clip_grad_norm, lr_at
from .tokenizer import Vocab, build_vocab, encode_batch

LOGGER = logging.getLogger(__package__ + ".runner")

_MASK64 = (1 << 64) - 1

EpochCallback = Callable[[Checkpoint], None]


def cross_entropy_loss(probs: np.ndarray, labels: Sequence[int]) -> Tuple[float, np.ndarray]:
    """Mean negative log-likelihood of the true labels and its gradient with respect to the logits.

    With two classes this is binary cross-entropy on the positive-class probability.
    """
    n, n_classes = probs.shape
    label_arr = np.asarray(labels, dtype=np.int64)
    if label_arr.shape != (n,):
        raise DimensionError(f"There are {n} probability rows but {label_arr.size} labels.")
    if n > 0 and (label_arr.min() < 0 or label_arr.max() >= n_classes):
        raise DataError(f"A label lies outside the {n_classes} classes.")
    rows = np.arange(n)
    with np.errstate(divide="ignore"):
        loss = float(-np.mean(np.log(probs[rows, label_arr])))
    onehot = np.zeros_like(probs)
    onehot[rows, label_arr] = 1.0
    return loss, (probs - onehot) / n


def predict_probs(
    model: OffensiveClassifier, vocab: Vocab, texts: Sequence[str], batch_size: int = 32
) -> np.ndarray:
    """Class probabilities of already cleaned texts, in input order."""
    if len(texts) == 0:
        raise DataError("There are no texts to score.")
    rows: List[np.ndarray] = []
    for start in range(0, len(texts), batch_size):
        batch = encode_batch(texts[start : start + batch_size], vocab, model.cfg.max_seq_len)
        rows.append(model.predict_proba(batch))
    return np.concatenate(rows, axis=0)


def evaluate(
    model: OffensiveClassifier, vocab: Vocab, corpus: LabeledCorpus, batch_size: int = 32
) -> Tuple[WeightedReport, ConfusionMatrix]:
    if len(corpus) == 0:
        raise DataError("Cannot evaluate an empty corpus.")
    preds = predict_probs(model, vocab, corpus.texts, batch_size).argmax(axis=1)
    m = confusion(preds.tolist(), corpus.labels, len(corpus.label_names), corpus.label_names)
    return weighted_prf(m), m


def derive_seed(seed: int, *parts: int) -> int:
    prng = SplitMix64(seed)
    for part in parts:
        prng = SplitMix64(prng.next_u64() ^ (part & _MASK64))
    return prng.next_u64()


def _copy_params(params: ParamStore) -> ParamStore:
    copied = ParamStore()
    for name, param in params.items():
        copied.add(name, param.value.copy())
    return copied


def _weighted(report: WeightedReport) -> dict:
    return {"precision": report.precision, "recall": report.recall, "f1": report.f1}


def train(
    model_cfg: ModelConfig,
    train_corpus: LabeledCorpus,
    eval_corpus: Optional[LabeledCorpus],
    tcfg: TrainConfig,
    vocab: Optional[Vocab] = None,
    rules: Optional[CleanRules] = None,
    resume: Optional[Checkpoint] = None,
    on_epoch_end: Optional[EpochCallback] = None,
    vocab_max_size: int = 8000,
    vocab_min_freq: int = 2,
) -> Tuple[Checkpoint, List[dict]]:
    """Fine-tunes a classifier for tcfg.epochs epochs and returns the final checkpoint and per-epoch history.

    Batches are reshuffled every epoch from (seed, epoch) and dropout masks are drawn from (seed, step), so a run
    resumed from a checkpoint written after epoch k continues exactly as the uninterrupted run would.
    """
    if len(train_corpus) == 0:
        raise DataError("The training corpus is empty.")
    if eval_corpus is not None and tuple(eval_corpus.label_names) != tuple(train_corpus.label_names):
        raise SchemaError("The training and evaluation corpora have different label names.")
    rules = CleanRules() if rules is None else rules
    label_names = list(train_corpus.label_names)

    if resume is not None:
        if list(resume.label_names) != label_names:
            raise SchemaError(f"The checkpoint labels {resume.label_names} do not match {label_names}.")
        cfg = resume.model_config
        vocab = resume.vocab
        model = OffensiveClassifier(cfg, _copy_params(resume.params))
        state = copy.deepcopy(resume.optimizer) if resume.optimizer is not None else OptimizerState.zeros(model.params)
        history = list(resume.history)
        start_epoch = resume.epochs_completed
        LOGGER.info(f"Resuming training after epoch {start_epoch}")
    else:
        if vocab is None:
            vocab = build_vocab(train_corpus.texts, vocab_max_size, vocab_min_freq)
        cfg = replace(model_config_for_training(model_cfg, tcfg), vocab_size=len(vocab))
        model = OffensiveClassifier(cfg, seed=tcfg.seed)
        state = OptimizerState.zeros(model.params)
        history = []
        start_epoch = 0
    if len(vocab) != cfg.vocab_size:
        raise SchemaError(f"The vocab has {len(vocab)} entries but the model expects {cfg.vocab_size}.")

    data = balance(train_corpus, tcfg.balance_strategy, tcfg.seed) if tcfg.balance else train_corpus
    if tcfg.balance:
        LOGGER.info(f"Balanced training classes: {data.counts_by_name()}")
    batches_per_epoch = math.ceil(len(data) / tcfg.batch_size)
    total_steps = tcfg.epochs * batches_per_epoch
    dropout_root = tcfg.seed & _MASK64
    LOGGER.info(
        f"Training for {tcfg.epochs} epochs of {batches_per_epoch} batches ({model.params.num_values()} weights)"
    )

    def snapshot(epochs_completed: int) -> Checkpoint:
        return Checkpoint(
            model_config=cfg,
            train_config=tcfg,
            label_names=label_names,
            vocab=vocab,
            params=_copy_params(model.params),
            clean_rules=rules,
            history=copy.deepcopy(history),
            optimizer=copy.deepcopy(state),
            epochs_completed=epochs_completed,
        )

    for epoch in range(start_epoch, tcfg.epochs):
        losses: List[float] = []
        lr = tcfg.lr
        epoch_batches = batches(data, tcfg.batch_size, derive_seed(tcfg.seed, epoch))
        for index, (texts, labels) in enumerate(tqdm(epoch_batches, desc=f"Epoch {epoch + 1}", leave=False)):
            step = epoch * batches_per_epoch + index
            lr = lr_at(step, total_steps, tcfg.lr, tcfg.warmup_steps)
            token_batch = encode_batch(texts, vocab, cfg.max_seq_len)
            probs, cache = model.forward(token_batch, train=True, seed=(dropout_root, step))
            loss, dlogits = cross_entropy_loss(probs, labels)
            if not math.isfinite(loss):
                raise NumericError(f"The loss of batch {index} in epoch {epoch + 1} is not finite.")
            model.backward(dlogits, cache)
            if tcfg.max_grad_norm is not None:
                clip_grad_norm(model.params, tcfg.max_grad_norm)
            adamw_step(model.params, state, lr, tcfg)
            losses.append(loss)

        entry = {"epoch": epoch + 1, "loss": float(np.mean(losses)), "lr": lr}
        train_report, _ = evaluate(model, vocab, train_corpus, tcfg.eval_batch_size)
        entry["train"] = _weighted(train_report)
        if eval_corpus is not None:
            eval_report, _ = evaluate(model, vocab, eval_corpus, tcfg.eval_batch_size)
            entry["eval"] = _weighted(eval_report)
        history.append(entry)
        LOGGER.info(
            f"Epoch {epoch + 1}/{tcfg.epochs}: loss {entry['loss']:.6f}, lr {lr:.3e}, "
            f"train W-F1 {train_report.f1:.4f}"
            + (f", eval W-F1 {entry['eval']['f1']:.4f}" if "eval" in entry else "")
        )
        if on_epoch_end is not None:
            on_epoch_end(snapshot(epoch + 1))

    return snapshot(max(start_epoch, tcfg.epochs)), copy.deepcopy(history)
