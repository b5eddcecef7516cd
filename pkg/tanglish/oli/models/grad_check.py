from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping

import numpy as np

from .tensor_ops import ParamStore


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: Dict[str, float]
    tol_rel: float

    @property
    def failed(self) -> List[str]:
        return [name for name, err in self.max_rel_error.items() if err > self.tol_rel]

    @property
    def passed(self) -> bool:
        return len(self.failed) == 0

    def __str__(self) -> str:
        failed = set(self.failed)
        return "\n".join(
            f"{name}: {err:.3e}{' FAILED' if name in failed else ''}" for name, err in self.max_rel_error.items()
        )


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))


def numeric_grad(value_fn: Callable[[], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences of the scalar value_fn with respect to every coordinate of x, which is perturbed in place."""
    grad = np.zeros(x.shape)
    for i in range(x.size):
        orig = x.flat[i]
        x.flat[i] = orig + h
        f_plus = value_fn()
        x.flat[i] = orig - h
        f_minus = value_fn()
        x.flat[i] = orig
        grad.flat[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def grad_check(
    value_fn: Callable[[], float],
    inputs: Mapping[str, np.ndarray],
    analytic: Mapping[str, np.ndarray],
    h: float = 1e-5,
    tol_rel: float = 1e-4,
) -> GradCheckReport:
    """Compares analytic gradients against central differences.

    value_fn must read the arrays in inputs (they are perturbed in place and restored) and return the scalar
    value of the graph, usually the sum of its outputs.
    """
    errors: Dict[str, float] = {}
    for name, x in inputs.items():
        numeric = numeric_grad(value_fn, x, h)
        errors[name] = float(relative_error(analytic[name], numeric).max()) if x.size > 0 else 0.0
    return GradCheckReport(errors, tol_rel)


def grad_check_params(
    loss_fn: Callable[[bool], float], params: ParamStore, h: float = 1e-5, tol_rel: float = 1e-4
) -> GradCheckReport:
    """Runs loss_fn(True) once to fill the parameter gradients, then checks every parameter with loss_fn(False)."""
    params.zero_grad()
    loss_fn(True)
    analytic = {name: param.grad.copy() for name, param in params.items()}
    inputs = {name: param.value for name, param in params.items()}
    return grad_check(lambda: loss_fn(False), inputs, analytic, h, tol_rel)
