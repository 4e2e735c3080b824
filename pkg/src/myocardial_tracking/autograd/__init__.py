"""Dense tensors with reverse-mode differentiation."""

from .tensor import (
    Gradients,
    Tape,
    Tensor,
    active_tape,
    default_dtype,
    get_default_dtype,
    is_deterministic,
    no_record,
    set_default_dtype,
    set_deterministic,
)
from .ops import (
    absolute,
    add,
    add_bias,
    broadcast_to,
    concat,
    einsum,
    elementwise,
    matmul,
    mean_all,
    mul,
    mul_lastdim,
    relu,
    reshape,
    scale,
    stack_scalars,
    sub,
    sum_all,
    take,
    transpose,
)
from .nn_ops import (
    bilinear_sample,
    conv2d,
    l2_normalize_lastdim,
    layer_norm_lastdim,
    shift_channels_in_time,
    shift_frames,
    softmax_lastdim,
)
from .gradcheck import check_gradients


def backward(tape: Tape, loss: Tensor) -> Gradients:
    """Run the backward pass of `tape` from a scalar loss."""
    return tape.backward(loss)


__all__ = [
    "Gradients",
    "Tape",
    "Tensor",
    "active_tape",
    "backward",
    "default_dtype",
    "get_default_dtype",
    "is_deterministic",
    "no_record",
    "set_default_dtype",
    "set_deterministic",
    "absolute",
    "add",
    "add_bias",
    "broadcast_to",
    "concat",
    "einsum",
    "elementwise",
    "matmul",
    "mean_all",
    "mul",
    "mul_lastdim",
    "relu",
    "reshape",
    "scale",
    "stack_scalars",
    "sub",
    "sum_all",
    "take",
    "transpose",
    "bilinear_sample",
    "conv2d",
    "l2_normalize_lastdim",
    "layer_norm_lastdim",
    "shift_channels_in_time",
    "shift_frames",
    "softmax_lastdim",
    "check_gradients",
]
