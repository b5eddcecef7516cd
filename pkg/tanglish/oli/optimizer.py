"""
AdamW with decoupled weight decay and the linear learning-rate schedule.

A step first shrinks every parameter by (1 - lr * weight_decay), then applies the bias-corrected Adam update
lr * m_hat / (sqrt(v_hat) + eps). The decay never passes through the moment estimates.
"""
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..common.errors import ConfigError, NumericError
from .config import TrainConfig
from .models.tensor_ops import ParamStore


@dataclass
class OptimizerState:
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros(cls, params: ParamStore) -> "OptimizerState":
        return cls(
            {name: np.zeros_like(p.value) for name, p in params.items()},
            {name: np.zeros_like(p.value) for name, p in params.items()},
        )


def adamw_step(params: ParamStore, state: OptimizerState, lr_t: float, cfg: TrainConfig) -> None:
    for name, param in params.items():
        if not np.all(np.isfinite(param.grad)):
            raise NumericError(f"The gradient of {name} contains NaN or Inf values.")
        if name not in state.m:
            state.m[name] = np.zeros_like(param.value)
            state.v[name] = np.zeros_like(param.value)

    state.t += 1
    bias_correction1 = 1.0 - cfg.beta1 ** state.t
    bias_correction2 = 1.0 - cfg.beta2 ** state.t
    for name, param in params.items():
        g = param.grad
        m = state.m[name]
        v = state.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        m_hat = m / bias_correction1
        denom = np.sqrt(v / bias_correction2) + cfg.adam_eps
        update = np.zeros_like(m_hat)
        np.divide(m_hat, denom, out=update, where=denom > 0)

        param.value *= 1.0 - lr_t * cfg.weight_decay
        param.value -= lr_t * update
    params.zero_grad()


def lr_at(step: int, total_steps: int, base_lr: float, warmup_steps: int = 0) -> float:
    """Linear decay from base_lr at step 0 to 0 at total_steps, after an optional linear warmup from 0."""
    if total_steps <= 0:
        raise ConfigError("The learning rate schedule needs at least one step.")
    if not 0 <= step <= total_steps:
        raise ConfigError(f"Step {step} lies outside the schedule of {total_steps} steps.")
    if step == total_steps:
        return 0.0
    warmup_steps = min(warmup_steps, total_steps)
    if step < warmup_steps:
        return base_lr * step / warmup_steps
    return base_lr * (total_steps - step) / (total_steps - warmup_steps)


def clip_grad_norm(params: ParamStore, max_norm: float) -> float:
    """Scales all gradients so their global L2 norm is at most max_norm. Returns the norm before clipping."""
    total = math.sqrt(sum(float(np.sum(p.grad * p.grad)) for _, p in params.items()))
    if total > max_norm:
        scale = max_norm / total
        for _, param in params.items():
            param.grad *= scale
    return total
