"""
Differentiable array operations.

Binary elementwise operations require identical shapes. Broadcasting only happens
through the explicit entry points `scale`, `add_bias`, `mul_lastdim` and `broadcast_to`.
"""

from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError
from .tensor import Tensor, make_result

ElementwiseKind = Literal["add", "sub", "mul", "relu", "scale"]


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape, "no implicit broadcasting")


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("add", a, b)
    return make_result(a.data + b.data, "add", (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("sub", a, b)
    return make_result(a.data - b.data, "sub", (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("mul", a, b)
    a_data, b_data = a.data, b.data
    return make_result(a_data * b_data, "mul", (a, b), lambda g: (g * b_data, g * a_data))


def scale(a: Tensor, factor: float) -> Tensor:
    return make_result(a.data * factor, "scale", (a,), lambda g: (g * factor,))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return make_result(np.where(mask, a.data, 0).astype(a.dtype), "relu", (a,), lambda g: (g * mask,))


def absolute(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return make_result(np.abs(a.data), "abs", (a,), lambda g: (g * sign,))


def elementwise(kind: ElementwiseKind, a: Tensor, b: Optional[Tensor] = None, factor: float = 1.0) -> Tensor:
    """
    Dispatch an elementwise operation by name.

    Args:
        kind: One of "add", "sub", "mul", "relu", "scale"
        a: First operand
        b: Second operand for binary kinds
        factor: Scalar for "scale"

    Returns:
        Result tensor with the shape of `a`
    """
    if kind in ("add", "sub", "mul"):
        if b is None:
            raise ValueError(f"elementwise '{kind}' needs two operands")
        return {"add": add, "sub": sub, "mul": mul}[kind](a, b)
    if kind == "relu":
        return relu(a)
    if kind == "scale":
        return scale(a, factor)
    raise ValueError(f"unknown elementwise kind '{kind}'")


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Add a vector along the last axis of `x`."""
    if bias.shape != x.shape[-1:]:
        raise ShapeError("add_bias", x.shape, bias.shape, "bias must match the last axis")
    lead = tuple(range(x.ndim - 1))
    return make_result(x.data + bias.data, "add_bias", (x, bias), lambda g: (g, g.sum(axis=lead)))


def mul_lastdim(x: Tensor, gain: Tensor) -> Tensor:
    """Multiply by a vector along the last axis of `x`."""
    if gain.shape != x.shape[-1:]:
        raise ShapeError("mul_lastdim", x.shape, gain.shape, "gain must match the last axis")
    lead = tuple(range(x.ndim - 1))
    x_data, gain_data = x.data, gain.data
    return make_result(
        x_data * gain_data,
        "mul_lastdim",
        (x, gain),
        lambda g: (g * gain_data, (g * x_data).sum(axis=lead)),
    )


def broadcast_to(x: Tensor, shape: Sequence[int]) -> Tensor:
    """Explicitly repeat `x` over new leading axes."""
    shape = tuple(shape)
    if shape[len(shape) - x.ndim:] != x.shape:
        raise ShapeError("broadcast_to", x.shape, shape, "only new leading axes are allowed")
    lead = tuple(range(len(shape) - x.ndim))
    data = np.ascontiguousarray(np.broadcast_to(x.data, shape))
    return make_result(data, "broadcast_to", (x,), lambda g: (g.sum(axis=lead),))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Contract a (M×K) with b (K×P).

    Backward: dA = dC·Bᵀ, dB = Aᵀ·dC.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape, "inner extents must match")
    a_data, b_data = a.data, b.data
    return make_result(a_data @ b_data, "matmul", (a, b), lambda g: (g @ b_data.T, a_data.T @ g))


def einsum(subscripts: str, a: Tensor, b: Tensor) -> Tensor:
    """
    Two-operand Einstein summation, e.g. "nijd,tnuvd->tnijuv".

    Every index of an operand must appear in the output or in the other operand,
    and no index may repeat within one operand.
    """
    inputs, output = subscripts.replace(" ", "").split("->")
    sub_a, sub_b = inputs.split(",")
    for sub, tensor in ((sub_a, a), (sub_b, b)):
        if len(sub) != tensor.ndim or len(set(sub)) != len(sub):
            raise ShapeError("einsum", a.shape, b.shape, f"subscripts '{subscripts}'")
    extents = {}
    for sub, tensor in ((sub_a, a), (sub_b, b)):
        for index, extent in zip(sub, tensor.shape):
            if extents.setdefault(index, extent) != extent:
                raise ShapeError("einsum", a.shape, b.shape, f"index '{index}' disagrees")
    a_data, b_data = a.data, b.data
    data = np.einsum(subscripts, a_data, b_data, optimize=True)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        grad_a = np.einsum(f"{output},{sub_b}->{sub_a}", g, b_data, optimize=True)
        grad_b = np.einsum(f"{output},{sub_a}->{sub_b}", g, a_data, optimize=True)
        return grad_a, grad_b

    return make_result(np.asarray(data), "einsum", (a, b), backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    original = x.shape
    try:
        data = x.data.reshape(tuple(shape))
    except ValueError as exc:
        raise ShapeError("reshape", original, tuple(shape), str(exc)) from exc
    return make_result(data, "reshape", (x,), lambda g: (g.reshape(original),))


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    perm = tuple(axes) if axes else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(perm))
    data = np.ascontiguousarray(np.transpose(x.data, perm))
    return make_result(data, "transpose", (x,), lambda g: (np.transpose(g, inverse),))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate tensors along an existing axis."""
    if not tensors:
        raise ValueError("concat needs at least one tensor")
    axis = axis % tensors[0].ndim
    reference = tensors[0].shape
    for tensor in tensors[1:]:
        if tensor.ndim != len(reference) or any(
            s != r for i, (s, r) in enumerate(zip(tensor.shape, reference)) if i != axis
        ):
            raise ShapeError("concat", reference, tensor.shape, f"axis {axis}")
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, ...]:
        index: List[slice] = [slice(None)] * g.ndim
        pieces = []
        for start, stop in zip(bounds[:-1], bounds[1:]):
            index[axis] = slice(int(start), int(stop))
            pieces.append(g[tuple(index)])
        return tuple(pieces)

    data = np.concatenate([t.data for t in tensors], axis=axis)
    return make_result(data, "concat", tuple(tensors), backward)


def take(x: Tensor, indices: np.ndarray, axis: int) -> Tensor:
    """
    Gather entries of `x` along `axis` with an integer index array.

    The result has shape x.shape[:axis] + indices.shape + x.shape[axis+1:].
    """
    indices = np.asarray(indices, dtype=np.int64)
    axis = axis % x.ndim
    if indices.size and (indices.min() < 0 or indices.max() >= x.shape[axis]):
        raise IndexError(f"take: index out of range for axis {axis} with extent {x.shape[axis]}")
    data = np.take(x.data, indices, axis=axis)
    x_shape = x.shape

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros(x_shape, dtype=g.dtype)
        moved = np.moveaxis(grad, axis, 0)
        g_moved = np.moveaxis(g, tuple(range(axis, axis + indices.ndim)), tuple(range(indices.ndim)))
        np.add.at(moved, indices, g_moved)
        return (grad,)

    return make_result(np.ascontiguousarray(data), "take", (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    shape = x.shape
    return make_result(np.asarray(x.data.sum()), "sum", (x,), lambda g: (np.broadcast_to(g, shape).copy(),))


def mean_all(x: Tensor) -> Tensor:
    shape, count = x.shape, max(x.size, 1)
    return make_result(
        np.asarray(x.data.mean()),
        "mean",
        (x,),
        lambda g: (np.broadcast_to(g / count, shape).copy(),),
    )


def stack_scalars(values: Sequence[Tensor], weights: Sequence[float]) -> Tensor:
    """Weighted sum of scalar tensors."""
    if len(values) != len(weights):
        raise ValueError("stack_scalars: values and weights differ in length")
    for value in values:
        if value.size != 1:
            raise ShapeError("stack_scalars", value.shape, (), "scalar operands required")
    total = sum(w * v.data.reshape(()) for w, v in zip(weights, values))
    dtype = values[0].dtype
    return make_result(
        np.asarray(total, dtype=dtype),
        "weighted_sum",
        tuple(values),
        lambda g: tuple(np.asarray(g * w).reshape(v.shape) for w, v in zip(weights, values)),
    )
