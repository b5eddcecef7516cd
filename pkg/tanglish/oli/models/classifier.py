from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from ..config import ModelConfig, PoolerKind
from ..tokenizer import TokenBatch
from .encoder import EncoderCache, dropout_seed, encoder_backward, encoder_forward, init_encoder_params
from .poolers import (
    AttentionPoolCache,
    AttentionPoolerParams,
    MeanPoolCache,
    attention_pool,
    attention_pool_backward,
    mean_pool,
    mean_pool_backward,
    pooling_mask,
)
from .tensor_ops import (
    DropoutCache,
    LinearCache,
    Param,
    ParamStore,
    Seed,
    dropout,
    dropout_backward,
    linear,
    linear_backward,
    softmax_rows,
)

POOLER_QUERY = "pooler.q"
POOLER_PROJECTION = "pooler.w_h"
CLASSIFIER_WEIGHTS = "classifier.w_o"
CLASSIFIER_BIAS = "classifier.b_o"

# dropout site of the classification head, after every encoder site
_HEAD_DROPOUT_SITE = 1_000_000


@dataclass(frozen=True)
class ClassifierParams:
    w_o: Param
    b_o: Param


class ClassifyCache(NamedTuple):
    dropout: DropoutCache
    logits: LinearCache


def classify(
    pooled: np.ndarray, c: ClassifierParams, dropout_p: float, train: bool = False, seed: Seed = None
) -> Tuple[np.ndarray, ClassifyCache]:
    """softmax(W_o^T dropout(o) + b_o), one probability row per example."""
    x, drop_cache = dropout(pooled, dropout_p, train, seed)
    logits, logits_cache = linear(x, c.w_o, c.b_o)
    probs, _ = softmax_rows(logits)
    return probs, ClassifyCache(drop_cache, logits_cache)


def classify_backward(dlogits: np.ndarray, cache: ClassifyCache) -> np.ndarray:
    """Takes the gradient with respect to the logits and returns the gradient with respect to the pooled vector."""
    return dropout_backward(linear_backward(dlogits, cache.logits), cache.dropout)


def init_params(cfg: ModelConfig, seed: int) -> ParamStore:
    """Weights ~ Normal(0, init_std); biases and the pooler query start at 0, layer norms at gamma 1, beta 0.

    The zero query makes a fresh attention pooler weigh every live token equally.
    """
    rng = np.random.default_rng(seed)
    params = ParamStore()
    init_encoder_params(params, cfg, rng)
    if cfg.pooler_kind == PoolerKind.ATTENTION:
        params.add(POOLER_QUERY, np.zeros(cfg.d_model))
        params.add(POOLER_PROJECTION, rng.normal(0.0, cfg.init_std, (cfg.d_model, cfg.d_model)))
    params.add(CLASSIFIER_WEIGHTS, rng.normal(0.0, cfg.init_std, (cfg.d_model, cfg.n_classes)))
    params.add(CLASSIFIER_BIAS, np.zeros(cfg.n_classes))
    return params


class ForwardCache(NamedTuple):
    encoder: EncoderCache
    pool: Union[AttentionPoolCache, MeanPoolCache]
    classify: ClassifyCache


class OffensiveClassifier:
    def __init__(self, cfg: ModelConfig, params: Optional[ParamStore] = None, seed: int = 111) -> None:
        self.cfg = cfg
        self.params = init_params(cfg, seed) if params is None else params

    @property
    def pooler_params(self) -> AttentionPoolerParams:
        return AttentionPoolerParams(self.params[POOLER_QUERY], self.params[POOLER_PROJECTION])

    @property
    def classifier_params(self) -> ClassifierParams:
        return ClassifierParams(self.params[CLASSIFIER_WEIGHTS], self.params[CLASSIFIER_BIAS])

    def forward(self, batch: TokenBatch, train: bool = False, seed: Seed = None) -> Tuple[np.ndarray, ForwardCache]:
        h, encoder_cache = encoder_forward(batch, self.params, self.cfg, train, seed)
        mask = pooling_mask(batch.mask, self.cfg.pool_include_cls)
        pool_cache: Union[AttentionPoolCache, MeanPoolCache]
        if self.cfg.pooler_kind == PoolerKind.ATTENTION:
            pooled, pool_cache = attention_pool(h, mask, self.pooler_params)
        else:
            pooled, pool_cache = mean_pool(h, mask)
        probs, classify_cache = classify(
            pooled, self.classifier_params, self.cfg.dropout_p, train, dropout_seed(seed, _HEAD_DROPOUT_SITE)
        )
        return probs, ForwardCache(encoder_cache, pool_cache, classify_cache)

    def backward(self, dlogits: np.ndarray, cache: ForwardCache) -> None:
        d_pooled = classify_backward(dlogits, cache.classify)
        if isinstance(cache.pool, AttentionPoolCache):
            dh = attention_pool_backward(d_pooled, cache.pool)
        else:
            dh = mean_pool_backward(d_pooled, cache.pool)
        encoder_backward(dh, cache.encoder)

    def predict_proba(self, batch: TokenBatch) -> np.ndarray:
        probs, _ = self.forward(batch, train=False)
        return probs
