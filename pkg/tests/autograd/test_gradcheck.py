"""Finite-difference checks of every differentiable operation."""

import numpy as np
import pytest

from myocardial_tracking.autograd import (
    Tensor,
    absolute,
    add,
    add_bias,
    bilinear_sample,
    broadcast_to,
    check_gradients,
    concat,
    conv2d,
    einsum,
    l2_normalize_lastdim,
    layer_norm_lastdim,
    matmul,
    mean_all,
    mul,
    mul_lastdim,
    relu,
    reshape,
    scale,
    shift_channels_in_time,
    shift_frames,
    softmax_lastdim,
    stack_scalars,
    sub,
    sum_all,
    take,
    transpose,
)

OP_TOLERANCE = 1e-4


def weighted(out: Tensor, seed: int = 99) -> Tensor:
    """Reduce to a scalar with fixed random weights so every output entry matters."""
    weights = np.random.default_rng(seed).standard_normal(out.shape)
    return sum_all(mul(out, Tensor(weights, dtype=out.dtype)))


def away_from_zero(rng, shape):
    values = rng.uniform(0.2, 1.0, size=shape)
    return values * rng.choice([-1.0, 1.0], size=shape)


GRADCHECK_SEEDS = range(20)


@pytest.fixture(params=GRADCHECK_SEEDS)
def rng(request):
    return np.random.default_rng(request.param)


def off_grid(rng, count, rows, cols):
    """Random (row, col) positions whose fractional parts stay clear of the sampling kinks."""
    cells = np.stack([rng.integers(0, rows - 1, size=count), rng.integers(0, cols - 1, size=count)], axis=-1)
    return cells + rng.uniform(0.05, 0.95, size=(count, 2))


def test_elementwise_gradients(rng):
    """Test add, sub, mul and scale."""
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((3, 4))
    assert check_gradients(lambda x, y: weighted(add(x, y)), [a, b]) < OP_TOLERANCE
    assert check_gradients(lambda x, y: weighted(sub(x, y)), [a, b]) < OP_TOLERANCE
    assert check_gradients(lambda x, y: weighted(mul(x, y)), [a, b]) < OP_TOLERANCE
    assert check_gradients(lambda x: weighted(scale(x, -2.5)), [a]) < OP_TOLERANCE


def test_relu_and_abs_gradients(rng):
    """Test relu and absolute away from their kinks."""
    a = away_from_zero(rng, (4, 5))
    assert check_gradients(lambda x: weighted(relu(x)), [a]) < OP_TOLERANCE
    assert check_gradients(lambda x: weighted(absolute(x)), [a]) < OP_TOLERANCE


def test_lastdim_broadcast_gradients(rng):
    """Test add_bias, mul_lastdim and broadcast_to."""
    x, v = rng.standard_normal((2, 3, 4)), rng.standard_normal(4)
    assert check_gradients(lambda a, b: weighted(add_bias(a, b)), [x, v]) < OP_TOLERANCE
    assert check_gradients(lambda a, b: weighted(mul_lastdim(a, b)), [x, v]) < OP_TOLERANCE
    assert check_gradients(lambda a: weighted(broadcast_to(a, (5, 4))), [v]) < OP_TOLERANCE


def test_matmul_gradients(rng):
    """Test matrix product gradients dA = dC·Bᵀ and dB = Aᵀ·dC."""
    a, b = rng.standard_normal((3, 5)), rng.standard_normal((5, 2))
    assert check_gradients(lambda x, y: weighted(matmul(x, y)), [a, b]) < OP_TOLERANCE


def test_einsum_gradients(rng):
    """Test two-operand contractions used by correlation and attention."""
    q, f = rng.standard_normal((2, 3, 3, 4)), rng.standard_normal((2, 2, 3, 3, 4))
    assert check_gradients(lambda x, y: weighted(einsum("nijd,tnuvd->tnijuv", x, y)), [q, f]) < OP_TOLERANCE
    a, b = rng.standard_normal((2, 3, 2, 4)), rng.standard_normal((2, 5, 2, 4))
    assert check_gradients(lambda x, y: weighted(einsum("bshd,bchd->bhsc", x, y)), [a, b]) < OP_TOLERANCE


def test_shape_op_gradients(rng):
    """Test reshape, transpose, concat and take with repeated indices."""
    x = rng.standard_normal((2, 3, 4))
    assert check_gradients(lambda a: weighted(reshape(a, (6, 4))), [x]) < OP_TOLERANCE
    assert check_gradients(lambda a: weighted(transpose(a, (2, 0, 1))), [x]) < OP_TOLERANCE
    y = rng.standard_normal((2, 3, 2))
    assert check_gradients(lambda a, b: weighted(concat([a, b], axis=-1)), [x, y]) < OP_TOLERANCE
    indices = np.array([[0, 2], [2, 2], [1, 0]])
    assert check_gradients(lambda a: weighted(take(a, indices, axis=1)), [x]) < OP_TOLERANCE


def test_reduction_gradients(rng):
    """Test mean_all and the weighted scalar stack."""
    x = rng.standard_normal((3, 3))
    assert check_gradients(lambda a: mean_all(a), [x]) < OP_TOLERANCE
    assert check_gradients(
        lambda a, b: stack_scalars([mean_all(a), sum_all(b)], [0.3, 1.7]),
        [x, rng.standard_normal(4)],
    ) < OP_TOLERANCE


def test_conv2d_gradients(rng):
    """Test convolution gradients at stride 1 and 2 with batched frames."""
    x = rng.standard_normal((2, 5, 6, 3))
    w = rng.standard_normal((3, 3, 3, 4))
    assert check_gradients(lambda a, b: weighted(conv2d(a, b, stride=1)), [x, w]) < OP_TOLERANCE
    assert check_gradients(lambda a, b: weighted(conv2d(a, b, stride=2)), [x, w]) < OP_TOLERANCE
    w1 = rng.standard_normal((1, 1, 3, 3))
    assert check_gradients(lambda a, b: weighted(conv2d(a, b)), [x, w1]) < OP_TOLERANCE


def test_normalisation_gradients(rng):
    """Test softmax, layer norm with and without affine parameters, and l2 normalisation."""
    x = rng.standard_normal((3, 5))
    assert check_gradients(lambda a: weighted(softmax_lastdim(a)), [x]) < OP_TOLERANCE
    assert check_gradients(lambda a: weighted(layer_norm_lastdim(a)), [x]) < OP_TOLERANCE
    gain, bias = rng.standard_normal(5), rng.standard_normal(5)
    assert check_gradients(
        lambda a, g, b: weighted(layer_norm_lastdim(a, g, b)), [x, gain, bias]
    ) < OP_TOLERANCE
    assert check_gradients(lambda a: weighted(l2_normalize_lastdim(a)), [x]) < OP_TOLERANCE


def test_bilinear_sample_gradients(rng):
    """Test sampling gradients with respect to both the map and the coordinates."""
    fmap = rng.standard_normal((5, 6, 3))
    coords = np.array([[1.3, 2.6], [0.4, 4.2], [3.7, 0.55], [4.45, 5.3]])
    assert check_gradients(lambda m, c: weighted(bilinear_sample(m, c)), [fmap, coords]) < OP_TOLERANCE
    scattered = off_grid(rng, 6, 5, 6)
    assert check_gradients(lambda m, c: weighted(bilinear_sample(m, c)), [fmap, scattered]) < OP_TOLERANCE
    batched_map = rng.standard_normal((2, 4, 4, 2))
    batched_coords = np.array([[[1.25, 2.6], [2.4, 0.3]], [[0.7, 1.8], [2.2, 2.9]]])
    assert check_gradients(
        lambda m, c: weighted(bilinear_sample(m, c)), [batched_map, batched_coords]
    ) < OP_TOLERANCE


def test_temporal_shift_gradients(rng):
    """Test the channel shift in time and whole-frame shifts."""
    x = rng.standard_normal((4, 2, 3, 8))
    assert check_gradients(lambda a: weighted(shift_channels_in_time(a, 2)), [x]) < OP_TOLERANCE
    assert check_gradients(lambda a: weighted(shift_frames(a, 1)), [x]) < OP_TOLERANCE
    assert check_gradients(lambda a: weighted(shift_frames(a, -2)), [x]) < OP_TOLERANCE


def test_bilinear_sample_hits_integer_cells():
    """Test that integer (row, col) coordinates return the stored map entries."""
    fmap = np.arange(4 * 5 * 2, dtype=np.float64).reshape(4, 5, 2)
    out = bilinear_sample(Tensor(fmap, dtype=np.float64), Tensor([[2.0, 3.0], [0.0, 0.0]], dtype=np.float64))
    np.testing.assert_array_equal(out.data, [fmap[2, 3], fmap[0, 0]])


def test_bilinear_sample_outside_is_zero():
    """Test that cells beyond the map contribute zero."""
    fmap = np.ones((3, 3, 1))
    out = bilinear_sample(Tensor(fmap, dtype=np.float64), Tensor([[-5.0, 1.0], [2.5, 1.0]], dtype=np.float64))
    assert out.data[0, 0] == 0.0
    assert out.data[1, 0] == pytest.approx(0.5)


def test_softmax_rows_sum_to_one():
    """Test softmax normalisation with large logits."""
    out = softmax_lastdim(Tensor([[1000.0, 1000.0], [0.0, np.log(3.0)]], dtype=np.float64))
    np.testing.assert_allclose(out.data.sum(axis=-1), 1.0)
    np.testing.assert_allclose(out.data[1], [0.25, 0.75])


def test_l2_normalize_zero_vector():
    """Test that a zero vector stays zero."""
    out = l2_normalize_lastdim(Tensor(np.zeros((1, 3)), dtype=np.float64))
    np.testing.assert_array_equal(out.data, 0.0)


def test_mul_gradient_tight():
    """Test the product rule on 3×3 inputs to a tight tolerance."""
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    assert check_gradients(lambda x, y: weighted(mul(x, y)), [a, b]) < 1e-6


def test_composed_chain_gradients(rng):
    """Test conv, relu and matmul composed end to end."""
    x = rng.standard_normal((1, 5, 5, 2))
    w = rng.standard_normal((3, 3, 2, 3))
    m = rng.standard_normal((3, 4))

    def chain(a, b, c):
        features = relu(conv2d(a, b))
        return weighted(matmul(reshape(features, (25, 3)), c))

    assert check_gradients(chain, [x, w, m]) < OP_TOLERANCE


def test_conv2d_identity_and_stride_shape():
    """Test that a 1×1 identity kernel copies the input and stride 2 halves the extent."""
    x = np.random.default_rng(6).standard_normal((2, 8, 8, 3))
    identity = np.eye(3).reshape(1, 1, 3, 3)
    out = conv2d(Tensor(x, dtype=np.float64), Tensor(identity, dtype=np.float64))
    np.testing.assert_allclose(out.data, x)
    strided = conv2d(Tensor(x), Tensor(np.ones((3, 3, 3, 4))), stride=2)
    assert strided.shape == (2, 4, 4, 4)


def test_softmax_symmetric_and_saturated():
    """Test softmax of equal logits and of a very large gap."""
    np.testing.assert_allclose(softmax_lastdim(Tensor([[0.0, 0.0]], dtype=np.float64)).data, [[0.5, 0.5]])
    out = softmax_lastdim(Tensor([[1000.0, 0.0]], dtype=np.float64)).data
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out, [[1.0, 0.0]], atol=1e-9)


def test_bilinear_sample_midpoint_is_average():
    """Test that halfway between two horizontal neighbours gives their mean."""
    fmap = np.random.default_rng(7).standard_normal((4, 5, 3))
    out = bilinear_sample(Tensor(fmap, dtype=np.float64), Tensor([[1.0, 2.5]], dtype=np.float64))
    np.testing.assert_allclose(out.data[0], (fmap[1, 2] + fmap[1, 3]) / 2.0)
