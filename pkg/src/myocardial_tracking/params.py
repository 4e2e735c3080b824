"""Named parameter sets and the small layers built on them."""

from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

import numpy as np

from .autograd import Tensor, add_bias, conv2d, get_default_dtype, matmul, reshape
from .errors import ShapeError


class ModelParams:
    """
    Ordered collection of named learnable tensors.

    Registration order is part of the serialisation identity: two parameter sets built
    from the same configuration list the same names, shapes and order.
    """

    def __init__(self) -> None:
        self._tensors: Dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> Tensor:
        """
        Register a new parameter.

        Args:
            name: Dotted parameter name, unique within the set
            value: Initial values

        Returns:
            The registered tensor (requires_grad=True)
        """
        if name in self._tensors:
            raise KeyError(f"parameter '{name}' registered twice")
        tensor = Tensor(value, requires_grad=True, name=name)
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise KeyError(f"unknown parameter '{name}'") from None

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def names(self) -> List[str]:
        return list(self._tensors)

    def items(self) -> List[Tuple[str, Tensor]]:
        return list(self._tensors.items())

    def count(self) -> int:
        """Total number of scalar parameters."""
        return int(sum(t.size for t in self._tensors.values()))

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {name: t.shape for name, t in self._tensors.items()}

    def arrays(self) -> Dict[str, np.ndarray]:
        """Copies of all parameter values, in registration order."""
        return {name: t.numpy() for name, t in self._tensors.items()}

    def load_arrays(self, values: Mapping[str, np.ndarray]) -> None:
        """
        Replace parameter values in place of the registered tensors.

        Raises:
            KeyError: If names differ from the registered set
            ShapeError: If a shape differs
        """
        missing = set(self._tensors) - set(values)
        unexpected = set(values) - set(self._tensors)
        if missing or unexpected:
            raise KeyError(
                f"parameter names differ: missing={sorted(missing)} unexpected={sorted(unexpected)}"
            )
        for name, tensor in self._tensors.items():
            new = np.asarray(values[name])
            if new.shape != tensor.shape:
                raise ShapeError(f"load '{name}'", tensor.shape, new.shape)
            self._tensors[name] = Tensor(new, requires_grad=True, dtype=tensor.dtype, name=name)

    def assign(self, name: str, values: np.ndarray) -> None:
        """Overwrite the values of one parameter, keeping the tensor object."""
        tensor = self[name]
        values = np.asarray(values)
        if values.shape != tensor.shape:
            raise ShapeError(f"assign '{name}'", tensor.shape, values.shape)
        tensor.data = np.ascontiguousarray(values, dtype=tensor.dtype)
        tensor.grad = None

    def copy(self) -> "ModelParams":
        clone = ModelParams()
        for name, tensor in self._tensors.items():
            clone._tensors[name] = Tensor(tensor.data, requires_grad=True, dtype=tensor.dtype, name=name)
        return clone


def glorot(rng: np.random.Generator, shape: Sequence[int], fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform Glorot initialisation."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=tuple(shape)).astype(get_default_dtype())


def he_normal(rng: np.random.Generator, shape: Sequence[int], fan_in: int) -> np.ndarray:
    return (rng.standard_normal(tuple(shape)) * np.sqrt(2.0 / fan_in)).astype(get_default_dtype())


def zeros(shape: Sequence[int]) -> np.ndarray:
    return np.zeros(tuple(shape), dtype=get_default_dtype())


def init_linear(
    params: ModelParams,
    rng: np.random.Generator,
    name: str,
    fan_in: int,
    fan_out: int,
) -> None:
    """Register `name.w` [fan_in, fan_out] and `name.b` [fan_out]."""
    params.add(f"{name}.w", glorot(rng, (fan_in, fan_out), fan_in, fan_out))
    params.add(f"{name}.b", zeros((fan_out,)))


def linear(x: Tensor, params: ModelParams, name: str) -> Tensor:
    """Apply the affine map registered under `name` to the last axis of x."""
    weight, bias = params[f"{name}.w"], params[f"{name}.b"]
    lead = x.shape[:-1]
    flat = reshape(x, (-1, x.shape[-1]))
    out = add_bias(matmul(flat, weight), bias)
    return reshape(out, lead + (weight.shape[1],))


def init_conv(
    params: ModelParams,
    rng: np.random.Generator,
    name: str,
    kernel: int,
    c_in: int,
    c_out: int,
    bias: bool = True,
) -> None:
    """Register `name.w` [k, k, c_in, c_out] and optionally `name.b`."""
    params.add(f"{name}.w", he_normal(rng, (kernel, kernel, c_in, c_out), kernel * kernel * c_in))
    if bias:
        params.add(f"{name}.b", zeros((c_out,)))


def conv(x: Tensor, params: ModelParams, name: str, stride: int = 1) -> Tensor:
    out = conv2d(x, params[f"{name}.w"], stride=stride)
    bias_name = f"{name}.b"
    if bias_name in params:
        out = add_bias(out, params[bias_name])
    return out


def identity_mixing(channels: int) -> np.ndarray:
    """1×1 identity kernel [1, 1, C, C]."""
    return np.eye(channels, dtype=np.float64).reshape(1, 1, channels, channels).astype(get_default_dtype())
