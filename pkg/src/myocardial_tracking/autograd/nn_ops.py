"""
Neural-network kernels: convolution, normalisation, attention softmax and sampling.

All kernels accept optional leading batch axes and record their own backward rules.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError
from .tensor import Tensor, make_result

LAYER_NORM_EPS = 1e-5


def conv2d(x: Tensor, w: Tensor, stride: int = 1) -> Tensor:
    """
    2D convolution with "same" zero padding before striding.

    Args:
        x: Input [..., H, W, Cin]
        w: Kernel [kh, kw, Cin, Cout], kh and kw odd
        stride: Spatial stride

    Returns:
        Output [..., ceil(H/stride), ceil(W/stride), Cout]
    """
    if w.ndim != 4 or x.ndim < 3:
        raise ShapeError("conv2d", x.shape, w.shape, "expected x [..., H, W, Cin] and w [kh, kw, Cin, Cout]")
    kh, kw, cin, cout = w.shape
    if x.shape[-1] != cin:
        raise ShapeError("conv2d", x.shape, w.shape, "channel mismatch")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("conv2d", x.shape, w.shape, "kernel extents must be odd")
    if stride < 1:
        raise ValueError(f"conv2d: stride must be >= 1, got {stride}")

    ph, pw = (kh - 1) // 2, (kw - 1) // 2
    lead = x.shape[:-3]
    height, width = x.shape[-3], x.shape[-2]
    pad_spec = [(0, 0)] * len(lead) + [(ph, ph), (pw, pw), (0, 0)]
    padded = np.pad(x.data, pad_spec)
    # [..., Hp-kh+1, Wp-kw+1, Cin, kh, kw] -> strided output positions
    windows = sliding_window_view(padded, (kh, kw), axis=(-3, -2))[..., ::stride, ::stride, :, :, :]
    out_h, out_w = windows.shape[-5], windows.shape[-4]
    kernel = np.transpose(w.data, (2, 0, 1, 3))  # [Cin, kh, kw, Cout]
    out = np.tensordot(windows, kernel, axes=([-3, -2, -1], [0, 1, 2]))
    w_data = w.data
    n_lead = len(lead)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        spatial_axes = list(range(n_lead + 2))
        grad_kernel = np.tensordot(windows, g, axes=(spatial_axes, spatial_axes))  # [Cin, kh, kw, Cout]
        grad_w = np.transpose(grad_kernel, (1, 2, 0, 3))
        cols = np.tensordot(g, w_data, axes=([-1], [3]))  # [..., Ho, Wo, kh, kw, Cin]
        grad_padded = np.zeros(padded.shape, dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                grad_padded[
                    ...,
                    i: i + stride * (out_h - 1) + 1: stride,
                    j: j + stride * (out_w - 1) + 1: stride,
                    :,
                ] += cols[..., i, j, :]
        grad_x = grad_padded[..., ph: ph + height, pw: pw + width, :]
        return np.ascontiguousarray(grad_x), grad_w

    return make_result(np.ascontiguousarray(out), "conv2d", (x, w), backward)


def softmax_lastdim(x: Tensor) -> Tensor:
    """Softmax over the last axis, stabilised by max-subtraction."""
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ShapeError("softmax_lastdim", x.shape, (), "last extent must be >= 1")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    y = exps / exps.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return make_result(y, "softmax", (x,), backward)


def layer_norm_lastdim(
    x: Tensor,
    gain: Optional[Tensor] = None,
    bias: Optional[Tensor] = None,
    eps: float = LAYER_NORM_EPS,
) -> Tensor:
    """
    Normalise the last axis to zero mean and unit variance, then apply an optional affine map.

    Args:
        x: Input [..., d]
        gain: Optional scale [d]
        bias: Optional shift [d]
        eps: Added to the variance in the denominator
    """
    d = x.shape[-1]
    for name, param in (("gain", gain), ("bias", bias)):
        if param is not None and param.shape != (d,):
            raise ShapeError("layer_norm_lastdim", x.shape, param.shape, f"{name} must be [d]")
    mean = x.data.mean(axis=-1, keepdims=True)
    centred = x.data - mean
    inv_std = 1.0 / np.sqrt((centred ** 2).mean(axis=-1, keepdims=True) + eps)
    xhat = centred * inv_std
    out = xhat
    if gain is not None:
        out = out * gain.data
    if bias is not None:
        out = out + bias.data
    lead = tuple(range(x.ndim - 1))
    gain_data = gain.data if gain is not None else None

    inputs = [x]
    if gain is not None:
        inputs.append(gain)
    if bias is not None:
        inputs.append(bias)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, ...]:
        g_hat = g * gain_data if gain_data is not None else g
        grad_x = inv_std * (
            g_hat
            - g_hat.mean(axis=-1, keepdims=True)
            - xhat * (g_hat * xhat).mean(axis=-1, keepdims=True)
        )
        grads = [grad_x]
        if gain is not None:
            grads.append((g * xhat).sum(axis=lead))
        if bias is not None:
            grads.append(g.sum(axis=lead))
        return tuple(grads)

    return make_result(np.ascontiguousarray(out), "layer_norm", tuple(inputs), backward)


def l2_normalize_lastdim(x: Tensor, eps: float = 1e-8) -> Tensor:
    """
    Divide each vector along the last axis by (its norm + eps).

    Zero vectors map to zero, so cosine similarities built from the result stay in [-1, 1].
    """
    norm = np.sqrt((x.data ** 2).sum(axis=-1, keepdims=True))
    denom = norm + eps
    y = x.data / denom
    safe_norm = np.where(norm > 0, norm, 1.0)
    x_data = x.data

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        projection = (g * x_data).sum(axis=-1, keepdims=True)
        return (g / denom - x_data * projection / (safe_norm * denom ** 2),)

    return make_result(y, "l2_normalize", (x,), backward)


def bilinear_sample(fmap: Tensor, coords: Tensor) -> Tensor:
    """
    Bilinearly sample a feature map at continuous (row, col) coordinates.

    Grid cells outside [0, H-1] x [0, W-1] contribute zero. Differentiable with respect
    to both the map and the coordinates.

    Args:
        fmap: Feature map [H, W, d] or batched [B, H, W, d]
        coords: Coordinates [P, 2] or batched [B, P, 2], ordered (row, col)

    Returns:
        Samples [P, d] or [B, P, d]
    """
    batched = fmap.ndim == 4
    if not batched and (fmap.ndim != 3 or coords.ndim != 2):
        raise ShapeError("bilinear_sample", fmap.shape, coords.shape, "expected [H, W, d] and [P, 2]")
    if batched and (coords.ndim != 3 or coords.shape[0] != fmap.shape[0]):
        raise ShapeError("bilinear_sample", fmap.shape, coords.shape, "expected [B, H, W, d] and [B, P, 2]")
    if coords.shape[-1] != 2:
        raise ShapeError("bilinear_sample", fmap.shape, coords.shape, "coordinates must be (row, col)")

    maps = fmap.data if batched else fmap.data[None]
    points = coords.data if batched else coords.data[None]
    n_batch, height, width, depth = maps.shape
    flat_map = maps.reshape(n_batch * height * width, depth)

    rows, cols = points[..., 0], points[..., 1]
    row0, col0 = np.floor(rows), np.floor(cols)
    wy, wx = rows - row0, cols - col0
    row0, col0 = row0.astype(np.int64), col0.astype(np.int64)
    batch_offset = (np.arange(n_batch) * height * width)[:, None]

    corners = []
    for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
        rr, cc = row0 + dy, col0 + dx
        valid = (rr >= 0) & (rr < height) & (cc >= 0) & (cc < width)
        flat_index = batch_offset + np.clip(rr, 0, height - 1) * width + np.clip(cc, 0, width - 1)
        values = flat_map[flat_index] * valid[..., None]
        corners.append((flat_index, valid, values))

    weights = [(1 - wy) * (1 - wx), (1 - wy) * wx, wy * (1 - wx), wy * wx]
    out = sum(w[..., None] * values for w, (_, _, values) in zip(weights, corners))
    map_shape = fmap.shape

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g_b = g if batched else g[None]
        grad_flat = np.zeros_like(flat_map, dtype=g_b.dtype)
        for w, (flat_index, valid, _) in zip(weights, corners):
            contribution = g_b * (w * valid)[..., None]
            np.add.at(grad_flat, flat_index.reshape(-1), contribution.reshape(-1, depth))
        grad_map = grad_flat.reshape(map_shape)

        projected = [(g_b * values).sum(axis=-1) for _, _, values in corners]
        v00, v01, v10, v11 = projected
        grad_rows = (1 - wx) * (v10 - v00) + wx * (v11 - v01)
        grad_cols = (1 - wy) * (v01 - v00) + wy * (v11 - v10)
        grad_coords = np.stack([grad_rows, grad_cols], axis=-1)
        if not batched:
            grad_coords = grad_coords[0]
        return grad_map, grad_coords

    result = out if batched else out[0]
    return make_result(np.ascontiguousarray(result.astype(fmap.dtype)), "bilinear_sample", (fmap, coords), backward)


def shift_channels_in_time(x: Tensor, fold: int) -> Tensor:
    """
    Shift the first `fold` channels one frame backward and the next `fold` one frame forward.

    Vacated boundary frames are zero; the remaining channels pass through.

    Args:
        x: Features [T, h, w, d]
        fold: Number of channels per shift direction
    """
    if x.ndim != 4:
        raise ShapeError("shift_channels_in_time", x.shape, (), "expected [T, h, w, d]")
    if 2 * fold > x.shape[-1]:
        raise ShapeError("shift_channels_in_time", x.shape, (fold,), "2*fold exceeds channel count")
    out = np.zeros_like(x.data)
    out[:-1, ..., :fold] = x.data[1:, ..., :fold]
    out[1:, ..., fold: 2 * fold] = x.data[:-1, ..., fold: 2 * fold]
    out[..., 2 * fold:] = x.data[..., 2 * fold:]

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros_like(g)
        grad[1:, ..., :fold] = g[:-1, ..., :fold]
        grad[:-1, ..., fold: 2 * fold] = g[1:, ..., fold: 2 * fold]
        grad[..., 2 * fold:] = g[..., 2 * fold:]
        return (grad,)

    return make_result(out, "temporal_shift", (x,), backward)


def shift_frames(x: Tensor, offset: int) -> Tensor:
    """Return features of frame t+offset at frame t, zero where that frame does not exist."""
    n_frames = x.shape[0]
    out = np.zeros_like(x.data)
    if abs(offset) < n_frames:
        if offset >= 0:
            out[: n_frames - offset] = x.data[offset:]
        else:
            out[-offset:] = x.data[: n_frames + offset]

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros_like(g)
        if abs(offset) < n_frames:
            if offset >= 0:
                grad[offset:] = g[: n_frames - offset]
            else:
                grad[: n_frames + offset] = g[-offset:]
        return (grad,)

    return make_result(out, "shift_frames", (x,), backward)
