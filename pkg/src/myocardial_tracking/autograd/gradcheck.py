"""Central finite-difference gradient checking."""

import logging
from typing import Callable, List, Sequence

import numpy as np

from .tensor import Tape, Tensor, default_dtype, no_record

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-6


def numerical_gradient(
    fn: Callable[..., Tensor],
    arrays: Sequence[np.ndarray],
    index: int,
    step: float = DEFAULT_STEP,
) -> np.ndarray:
    """
    Estimate d fn / d arrays[index] by central differences.

    Args:
        fn: Maps tensors to a scalar tensor
        arrays: Input values (float64)
        index: Which input to differentiate
        step: Finite-difference step

    Returns:
        Gradient estimate with the shape of arrays[index]
    """
    base = [np.array(a, dtype=np.float64) for a in arrays]
    target = base[index]
    grad = np.zeros_like(target)
    flat_target, flat_grad = target.reshape(-1), grad.reshape(-1)
    with no_record():
        for k in range(flat_target.size):
            original = flat_target[k]
            flat_target[k] = original + step
            plus = fn(*[Tensor(a, dtype=np.float64) for a in base]).item()
            flat_target[k] = original - step
            minus = fn(*[Tensor(a, dtype=np.float64) for a in base]).item()
            flat_target[k] = original
            flat_grad[k] = (plus - minus) / (2.0 * step)
    return grad


def analytic_gradients(fn: Callable[..., Tensor], arrays: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Gradients of fn with respect to every input, via the tape."""
    tensors = [Tensor(a, requires_grad=True, dtype=np.float64) for a in arrays]
    with Tape() as tape:
        loss = fn(*tensors)
    grads = tape.backward(loss)
    return [grads[t] for t in tensors]


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max absolute deviation relative to the largest gradient magnitude."""
    scale = max(float(np.abs(analytic).max(initial=0.0)), float(np.abs(numeric).max(initial=0.0)), 1e-12)
    return float(np.abs(analytic - numeric).max(initial=0.0)) / scale


def check_gradients(
    fn: Callable[..., Tensor],
    arrays: Sequence[np.ndarray],
    step: float = DEFAULT_STEP,
) -> float:
    """
    Compare tape gradients with central finite differences in float64.

    Args:
        fn: Maps tensors to a scalar tensor
        arrays: Input values
        step: Finite-difference step

    Returns:
        The largest relative error over all inputs
    """
    with default_dtype("float64"):
        analytic = analytic_gradients(fn, arrays)
        worst = 0.0
        for index, grad in enumerate(analytic):
            numeric = numerical_gradient(fn, arrays, index, step)
            worst = max(worst, relative_error(grad, numeric))
    logger.debug("gradient check over %d inputs: max relative error %.3e", len(arrays), worst)
    return worst
