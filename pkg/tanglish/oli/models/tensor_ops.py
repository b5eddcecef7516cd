"""
Dense float64 operations with hand-written backward passes.

Every forward returns (output, cache); the matching *_backward takes the upstream gradient and the cache,
accumulates into the Param.grad slots it touched and returns the gradient with respect to its input.
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterator, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ...common.errors import ConfigError, DataError, DimensionError, NumericError

MASK_BIAS = -1e9
GELU_COEFF = 0.044715
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

Seed = Optional[Union[int, Sequence[int]]]


@dataclass
class Param:
    value: np.ndarray
    grad: np.ndarray

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape


class ParamStore:
    def __init__(self) -> None:
        self._params: Dict[str, Param] = {}

    def add(self, name: str, value: np.ndarray) -> Param:
        if name in self._params:
            raise ConfigError(f"The parameter {name} is already defined.")
        value = np.array(value, dtype=np.float64)
        param = Param(value, np.zeros_like(value))
        self._params[name] = param
        return param

    def __getitem__(self, name: str) -> Param:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self) -> Iterator[Tuple[str, Param]]:
        return iter(self._params.items())

    def zero_grad(self) -> None:
        for param in self._params.values():
            param.grad.fill(0.0)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: param.value.copy() for name, param in self._params.items()}

    def load_state_dict(self, values: Dict[str, np.ndarray]) -> None:
        if set(values) != set(self._params):
            missing = sorted(set(self._params) - set(values))
            unexpected = sorted(set(values) - set(self._params))
            raise DataError(f"Parameter mismatch; missing: {missing}, unexpected: {unexpected}.")
        for name, param in self._params.items():
            value = values[name]
            if value.shape != param.shape:
                raise DimensionError(f"The parameter {name} has shape {value.shape}, expected {param.shape}.")
            param.value[...] = value

    def num_values(self) -> int:
        return sum(param.value.size for param in self._params.values())


class LinearCache(NamedTuple):
    x: np.ndarray
    w: Param
    b: Optional[Param]


def linear(x: np.ndarray, w: Param, b: Optional[Param] = None) -> Tuple[np.ndarray, LinearCache]:
    d_in, d_out = w.shape
    if x.shape[-1] != d_in:
        raise DimensionError(f"Linear input has last dimension {x.shape[-1]}, expected {d_in}.")
    if b is not None and b.shape != (d_out,):
        raise DimensionError(f"Linear bias has shape {b.shape}, expected ({d_out},).")
    y = x @ w.value
    if b is not None:
        y = y + b.value
    return y, LinearCache(x, w, b)


def linear_backward(dy: np.ndarray, cache: LinearCache) -> np.ndarray:
    x, w, b = cache
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    w.grad += x2.T @ dy2
    if b is not None:
        b.grad += dy2.sum(axis=0)
    return dy @ w.value.T


class SoftmaxCache(NamedTuple):
    y: np.ndarray


def softmax_rows(x: np.ndarray, mask: Optional[np.ndarray] = None) -> Tuple[np.ndarray, SoftmaxCache]:
    """Softmax over the last axis. Entries where mask is 0 get a weight of exactly 0."""
    if mask is None:
        shifted = x - x.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
    else:
        live = np.broadcast_to(mask, x.shape).astype(bool)
        if not np.all(live.any(axis=-1)):
            raise NumericError("Softmax over a fully masked row is undefined.")
        row_max = np.where(live, x, -np.inf).max(axis=-1, keepdims=True)
        e = np.where(live, np.exp(np.where(live, x - row_max, 0.0)), 0.0)
    y = e / e.sum(axis=-1, keepdims=True)
    return y, SoftmaxCache(y)


def softmax_rows_backward(dy: np.ndarray, cache: SoftmaxCache) -> np.ndarray:
    y = cache.y
    return y * (dy - (dy * y).sum(axis=-1, keepdims=True))


class LayerNormCache(NamedTuple):
    x_hat: np.ndarray
    inv_std: np.ndarray
    gamma: Param
    beta: Param


def layer_norm(
    x: np.ndarray, gamma: Param, beta: Param, eps: float = 1e-12
) -> Tuple[np.ndarray, LayerNormCache]:
    d = x.shape[-1]
    if d == 0:
        raise DimensionError("Layer normalization needs a non-empty last dimension.")
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError(f"Layer norm parameters must have shape ({d},).")
    mean = x.mean(axis=-1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean) * inv_std
    return gamma.value * x_hat + beta.value, LayerNormCache(x_hat, inv_std, gamma, beta)


def layer_norm_backward(dy: np.ndarray, cache: LayerNormCache) -> np.ndarray:
    x_hat, inv_std, gamma, beta = cache
    d = x_hat.shape[-1]
    gamma.grad += (dy * x_hat).reshape(-1, d).sum(axis=0)
    beta.grad += dy.reshape(-1, d).sum(axis=0)
    dx_hat = dy * gamma.value
    return (
        inv_std
        / d
        * (
            d * dx_hat
            - dx_hat.sum(axis=-1, keepdims=True)
            - x_hat * (dx_hat * x_hat).sum(axis=-1, keepdims=True)
        )
    )


class GeluCache(NamedTuple):
    x: np.ndarray
    t: np.ndarray


def gelu(x: np.ndarray) -> Tuple[np.ndarray, GeluCache]:
    t = np.tanh(_SQRT_2_OVER_PI * (x + GELU_COEFF * x ** 3))
    return 0.5 * x * (1.0 + t), GeluCache(x, t)


def gelu_backward(dy: np.ndarray, cache: GeluCache) -> np.ndarray:
    x, t = cache
    du = _SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_COEFF * x ** 2)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t ** 2) * du)


class EmbeddingCache(NamedTuple):
    ids: np.ndarray
    table: Param


def embedding_lookup(ids: np.ndarray, table: Param) -> Tuple[np.ndarray, EmbeddingCache]:
    vocab_size = table.shape[0]
    if ids.size > 0 and (ids.min() < 0 or ids.max() >= vocab_size):
        raise DataError(f"Token ids must lie in [0, {vocab_size}).")
    return table.value[ids], EmbeddingCache(ids, table)


def embedding_lookup_backward(dy: np.ndarray, cache: EmbeddingCache) -> None:
    ids, table = cache
    np.add.at(table.grad, ids.reshape(-1), dy.reshape(-1, table.shape[1]))


class DropoutCache(NamedTuple):
    scale: Optional[np.ndarray]


def dropout(x: np.ndarray, p: float, train: bool, seed: Seed = None) -> Tuple[np.ndarray, DropoutCache]:
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"The dropout probability must lie in [0, 1), got {p}.")
    if not train or p == 0.0:
        return x, DropoutCache(None)
    rng = np.random.default_rng(seed)
    scale = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * scale, DropoutCache(scale)


def dropout_backward(dy: np.ndarray, cache: DropoutCache) -> np.ndarray:
    if cache.scale is None:
        return dy
    return dy * cache.scale


class AttentionCache(NamedTuple):
    q_cache: LinearCache
    k_cache: LinearCache
    v_cache: LinearCache
    o_cache: LinearCache
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    softmax_cache: SoftmaxCache
    n_heads: int
    scale: float


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    n, length, d = x.shape
    return x.reshape(n, length, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    n, h, length, d_head = x.shape
    return x.transpose(0, 2, 1, 3).reshape(n, length, h * d_head)


def multi_head_attention(
    x: np.ndarray, mask: np.ndarray, wq: Param, wk: Param, wv: Param, wo: Param, n_heads: int
) -> Tuple[np.ndarray, AttentionCache]:
    """Scaled dot-product self-attention; padded keys get an additive bias of -1e9 before the softmax."""
    d = x.shape[-1]
    if n_heads < 1 or d % n_heads != 0:
        raise ConfigError(f"The model dimension {d} is not divisible by {n_heads} heads.")
    if mask.shape != x.shape[:2]:
        raise DimensionError(f"The attention mask has shape {mask.shape}, expected {x.shape[:2]}.")
    q_lin, q_cache = linear(x, wq)
    k_lin, k_cache = linear(x, wk)
    v_lin, v_cache = linear(x, wv)
    q = _split_heads(q_lin, n_heads)
    k = _split_heads(k_lin, n_heads)
    v = _split_heads(v_lin, n_heads)
    scale = 1.0 / math.sqrt(d // n_heads)
    bias = (1.0 - mask[:, None, None, :]) * MASK_BIAS
    weights, softmax_cache = softmax_rows(q @ k.transpose(0, 1, 3, 2) * scale + bias)
    out, o_cache = linear(_merge_heads(weights @ v), wo)
    return out, AttentionCache(q_cache, k_cache, v_cache, o_cache, q, k, v, softmax_cache, n_heads, scale)


def multi_head_attention_backward(dy: np.ndarray, cache: AttentionCache) -> np.ndarray:
    d_ctx = _split_heads(linear_backward(dy, cache.o_cache), cache.n_heads)
    weights = cache.softmax_cache.y
    d_weights = d_ctx @ cache.v.transpose(0, 1, 3, 2)
    dv = weights.transpose(0, 1, 3, 2) @ d_ctx
    d_scores = softmax_rows_backward(d_weights, cache.softmax_cache) * cache.scale
    dq = d_scores @ cache.k
    dk = d_scores.transpose(0, 1, 3, 2) @ cache.q
    dx = linear_backward(_merge_heads(dq), cache.q_cache)
    dx = dx + linear_backward(_merge_heads(dk), cache.k_cache)
    dx = dx + linear_backward(_merge_heads(dv), cache.v_cache)
    return dx
