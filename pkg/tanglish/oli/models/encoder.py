from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from ...common.errors import DataError
from ..config import ModelConfig
from ..tokenizer import TokenBatch
from .tensor_ops import (
    AttentionCache,
    DropoutCache,
    EmbeddingCache,
    GeluCache,
    LayerNormCache,
    LinearCache,
    ParamStore,
    Seed,
    dropout,
    dropout_backward,
    embedding_lookup,
    embedding_lookup_backward,
    gelu,
    gelu_backward,
    layer_norm,
    layer_norm_backward,
    linear,
    linear_backward,
    multi_head_attention,
    multi_head_attention_backward,
)

TOKEN_EMBEDDINGS = "embeddings.token"
POSITION_EMBEDDINGS = "embeddings.position"


def layer_prefix(index: int) -> str:
    return f"encoder.layer{index}"


def dropout_seed(seed: Seed, site: int) -> Tuple[int, ...]:
    """Derives the dropout stream of one site in the network from the step seed."""
    if seed is None:
        base: Tuple[int, ...] = ()
    elif isinstance(seed, int):
        base = (seed,)
    else:
        base = tuple(seed)
    return base + (site,)


def init_encoder_params(params: ParamStore, cfg: ModelConfig, rng: np.random.Generator) -> None:
    d = cfg.d_model
    params.add(TOKEN_EMBEDDINGS, rng.normal(0.0, cfg.init_std, (cfg.vocab_size, d)))
    params.add(POSITION_EMBEDDINGS, rng.normal(0.0, cfg.init_std, (cfg.max_seq_len, d)))
    for i in range(cfg.n_layers):
        prefix = layer_prefix(i)
        for name in ("wq", "wk", "wv", "wo"):
            params.add(f"{prefix}.attention.{name}", rng.normal(0.0, cfg.init_std, (d, d)))
        params.add(f"{prefix}.attention_norm.gamma", np.ones(d))
        params.add(f"{prefix}.attention_norm.beta", np.zeros(d))
        params.add(f"{prefix}.ffn.w1", rng.normal(0.0, cfg.init_std, (d, cfg.d_ff)))
        params.add(f"{prefix}.ffn.b1", np.zeros(cfg.d_ff))
        params.add(f"{prefix}.ffn.w2", rng.normal(0.0, cfg.init_std, (cfg.d_ff, d)))
        params.add(f"{prefix}.ffn.b2", np.zeros(d))
        params.add(f"{prefix}.ffn_norm.gamma", np.ones(d))
        params.add(f"{prefix}.ffn_norm.beta", np.zeros(d))


class LayerCache(NamedTuple):
    attention: AttentionCache
    attention_dropout: DropoutCache
    attention_norm: LayerNormCache
    ffn_in: LinearCache
    ffn_act: GeluCache
    ffn_out: LinearCache
    ffn_dropout: DropoutCache
    ffn_norm: LayerNormCache


class EncoderCache(NamedTuple):
    token: EmbeddingCache
    position: EmbeddingCache
    embedding_dropout: DropoutCache
    layers: List[LayerCache]


def _layer_forward(
    x: np.ndarray, mask: np.ndarray, params: ParamStore, index: int, cfg: ModelConfig, train: bool, seed: Seed
) -> Tuple[np.ndarray, LayerCache]:
    prefix = layer_prefix(index)
    attn, attn_cache = multi_head_attention(
        x,
        mask,
        params[f"{prefix}.attention.wq"],
        params[f"{prefix}.attention.wk"],
        params[f"{prefix}.attention.wv"],
        params[f"{prefix}.attention.wo"],
        cfg.n_heads,
    )
    attn, attn_drop = dropout(attn, cfg.encoder_dropout, train, dropout_seed(seed, 1 + 2 * index))
    h, attn_norm = layer_norm(
        x + attn, params[f"{prefix}.attention_norm.gamma"], params[f"{prefix}.attention_norm.beta"]
    )

    f, ffn_in = linear(h, params[f"{prefix}.ffn.w1"], params[f"{prefix}.ffn.b1"])
    f, ffn_act = gelu(f)
    f, ffn_out = linear(f, params[f"{prefix}.ffn.w2"], params[f"{prefix}.ffn.b2"])
    f, ffn_drop = dropout(f, cfg.encoder_dropout, train, dropout_seed(seed, 2 + 2 * index))
    out, ffn_norm = layer_norm(h + f, params[f"{prefix}.ffn_norm.gamma"], params[f"{prefix}.ffn_norm.beta"])
    return out, LayerCache(attn_cache, attn_drop, attn_norm, ffn_in, ffn_act, ffn_out, ffn_drop, ffn_norm)


def _layer_backward(dy: np.ndarray, cache: LayerCache) -> np.ndarray:
    d_ffn_sum = layer_norm_backward(dy, cache.ffn_norm)
    df = dropout_backward(d_ffn_sum, cache.ffn_dropout)
    df = linear_backward(df, cache.ffn_out)
    df = gelu_backward(df, cache.ffn_act)
    dh = linear_backward(df, cache.ffn_in) + d_ffn_sum

    d_attn_sum = layer_norm_backward(dh, cache.attention_norm)
    d_attn = dropout_backward(d_attn_sum, cache.attention_dropout)
    return multi_head_attention_backward(d_attn, cache.attention) + d_attn_sum


def encoder_forward(
    batch: TokenBatch, params: ParamStore, cfg: ModelConfig, train: bool = False, seed: Optional[Seed] = None
) -> Tuple[np.ndarray, EncoderCache]:
    """Token plus learned position embeddings followed by cfg.n_layers post-norm transformer layers.

    Returns the last layer's hidden states, shape [batch, seq_len, d_model].
    """
    n, seq_len = batch.ids.shape
    if seq_len > cfg.max_seq_len:
        raise DataError(f"The batch has {seq_len} positions but the model supports at most {cfg.max_seq_len}.")
    tokens, token_cache = embedding_lookup(batch.ids, params[TOKEN_EMBEDDINGS])
    positions = np.broadcast_to(np.arange(seq_len), (n, seq_len))
    pos, pos_cache = embedding_lookup(positions, params[POSITION_EMBEDDINGS])
    x, emb_drop = dropout(tokens + pos, cfg.encoder_dropout, train, dropout_seed(seed, 0))

    mask = batch.mask.astype(np.float64)
    layer_caches: List[LayerCache] = []
    for i in range(cfg.n_layers):
        x, layer_cache = _layer_forward(x, mask, params, i, cfg, train, seed)
        layer_caches.append(layer_cache)
    return x, EncoderCache(token_cache, pos_cache, emb_drop, layer_caches)


def encoder_backward(dh: np.ndarray, cache: EncoderCache) -> None:
    for layer_cache in reversed(cache.layers):
        dh = _layer_backward(dh, layer_cache)
    d_emb = dropout_backward(dh, cache.embedding_dropout)
    embedding_lookup_backward(d_emb, cache.token)
    embedding_lookup_backward(d_emb, cache.position)
