"""
Heads that reduce the last hidden states [batch, seq_len, d_model] to one vector per example.

The attention pooler scores every live token state against a learnable query, softmaxes the scores over the
live positions and projects the weighted sum: o = W_h^T sum_i softmax(q . h_i) h_i. With q = 0 and W_h = I it
is exactly the mean pooler.
"""
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from ...common.errors import DimensionError, NumericError
from .tensor_ops import LinearCache, Param, SoftmaxCache, linear, linear_backward, softmax_rows, softmax_rows_backward


@dataclass(frozen=True)
class AttentionPoolerParams:
    q: Param
    w_h: Param


def pooling_mask(mask: np.ndarray, include_cls: bool = True) -> np.ndarray:
    """The positions a pooler reads; without CLS, a row whose only live token is CLS keeps it."""
    live = mask.astype(np.float64)
    if include_cls:
        return live
    live = live.copy()
    live[:, 0] = 0.0
    empty = live.sum(axis=1) == 0
    live[empty, 0] = mask[empty, 0]
    return live


def _check_rows(h: np.ndarray, mask: np.ndarray) -> None:
    if h.ndim != 3 or mask.shape != h.shape[:2]:
        raise DimensionError(f"Hidden states of shape {h.shape} do not match a mask of shape {mask.shape}.")
    if not np.all(mask.sum(axis=1) > 0):
        raise NumericError("Cannot pool a row without live tokens.")


class AttentionPoolCache(NamedTuple):
    h: np.ndarray
    weights: SoftmaxCache
    projection: LinearCache
    q: Param


def attention_pool(h: np.ndarray, mask: np.ndarray, p: AttentionPoolerParams) -> Tuple[np.ndarray, AttentionPoolCache]:
    _check_rows(h, mask)
    scores = h @ p.q.value
    weights, weights_cache = softmax_rows(scores, mask)
    context = np.einsum("nl,nld->nd", weights, h)
    pooled, projection = linear(context, p.w_h)
    return pooled, AttentionPoolCache(h, weights_cache, projection, p.q)


def attention_pool_backward(dy: np.ndarray, cache: AttentionPoolCache) -> np.ndarray:
    h, weights_cache, projection, q = cache
    weights = weights_cache.y
    d_context = linear_backward(dy, projection)
    dh = weights[:, :, None] * d_context[:, None, :]
    d_scores = softmax_rows_backward(np.einsum("nd,nld->nl", d_context, h), weights_cache)
    q.grad += np.einsum("nl,nld->d", d_scores, h)
    return dh + d_scores[:, :, None] * q.value[None, None, :]


class MeanPoolCache(NamedTuple):
    mask: np.ndarray
    counts: np.ndarray


def mean_pool(h: np.ndarray, mask: np.ndarray) -> Tuple[np.ndarray, MeanPoolCache]:
    _check_rows(h, mask)
    live = mask.astype(np.float64)
    counts = live.sum(axis=1, keepdims=True)
    return np.einsum("nl,nld->nd", live, h) / counts, MeanPoolCache(live, counts)


def mean_pool_backward(dy: np.ndarray, cache: MeanPoolCache) -> np.ndarray:
    return cache.mask[:, :, None] * (dy / cache.counts)[:, None, :]
