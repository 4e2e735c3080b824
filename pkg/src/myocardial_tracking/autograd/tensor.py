"""
Dense tensor with tape-based reverse-mode differentiation.

A `Tensor` wraps a contiguous row-major `numpy.ndarray`. Operations in `ops` and
`nn_ops` compute their forward result with numpy and, when a `Tape` is active and
any input requires gradients, record a node holding the inputs and a backward rule.
`Tape.backward` replays the nodes in exact reverse recording order.
"""

import contextlib
import logging
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import TapeError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence[Any]]
BackwardRule = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_SUPPORTED_DTYPES = {"float32": np.float32, "float64": np.float64}
_default_dtype: Any = np.float32
_deterministic = False
_local = threading.local()


def set_default_dtype(dtype: Union[str, Any]) -> None:
    """
    Select the floating point type used for new tensors.

    Args:
        dtype: "float32" (production) or "float64" (gradient checks)
    """
    global _default_dtype
    _default_dtype = _resolve_dtype(dtype)


def get_default_dtype() -> Any:
    """Return the numpy dtype used for new tensors."""
    return _default_dtype


@contextlib.contextmanager
def default_dtype(dtype: Union[str, Any]) -> Iterator[None]:
    """Temporarily switch the default dtype."""
    previous = _default_dtype
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


def set_deterministic(flag: bool) -> None:
    """Force sequential, fixed-order execution in every worker pool."""
    global _deterministic
    _deterministic = bool(flag)


def is_deterministic() -> bool:
    return _deterministic


def _resolve_dtype(dtype: Union[str, Any]) -> Any:
    if isinstance(dtype, str):
        if dtype not in _SUPPORTED_DTYPES:
            raise ValueError(f"unsupported dtype '{dtype}', expected one of {sorted(_SUPPORTED_DTYPES)}")
        return _SUPPORTED_DTYPES[dtype]
    resolved = np.dtype(dtype).type
    if resolved not in (np.float32, np.float64):
        raise ValueError(f"unsupported dtype {dtype}")
    return resolved


class Tensor:
    """
    Dense N-dimensional array with an optional gradient.

    Tensors are treated as immutable once created; operations always return new tensors.
    """

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Optional[Any] = None,
        name: Optional[str] = None,
    ):
        """
        Create a tensor.

        Args:
            data: Array-like values, copied into a contiguous array
            requires_grad: Whether gradients should flow to this tensor
            dtype: Explicit dtype; defaults to the configured default dtype
            name: Optional label used in diagnostics
        """
        target = _resolve_dtype(dtype) if dtype is not None else _default_dtype
        self.data: np.ndarray = np.array(data, dtype=target, order="C", copy=True)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @classmethod
    def _wrap(cls, data: np.ndarray) -> "Tensor":
        """Adopt a freshly computed array without copying it."""
        out = cls.__new__(cls)
        out.data = np.ascontiguousarray(data)
        if out.data.dtype.type not in (np.float32, np.float64):
            out.data = out.data.astype(_default_dtype)
        out.requires_grad = False
        out.grad = None
        out.name = None
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> Any:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying values."""
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() requires a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, dtype=self.data.dtype, name=self.name)

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return (
            f"Tensor{label}(shape={self.shape}, dtype={self.data.dtype.name}, "
            f"requires_grad={self.requires_grad})"
        )

    # Operator sugar. The ops module imports this one, so bind lazily.

    def __add__(self, other: "Tensor") -> "Tensor":
        from . import ops
        return ops.add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from . import ops
        return ops.sub(self, other)

    def __mul__(self, other: Union["Tensor", float, int]) -> "Tensor":
        from . import ops
        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.scale(self, float(other))

    def __rmul__(self, other: Union[float, int]) -> "Tensor":
        from . import ops
        return ops.scale(self, float(other))

    def __neg__(self) -> "Tensor":
        from . import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops
        return ops.matmul(self, other)

    def reshape(self, *shape: Any) -> "Tensor":
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        from . import ops
        return ops.transpose(self, axes if axes else None)

    def sum(self) -> "Tensor":
        from . import ops
        return ops.sum_all(self)

    def mean(self) -> "Tensor":
        from . import ops
        return ops.mean_all(self)

    def relu(self) -> "Tensor":
        from . import ops
        return ops.relu(self)


@dataclass
class Node:
    """One recorded operation."""

    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


class Gradients:
    """Mapping from tensors to the gradients computed by a backward pass."""

    def __init__(self, grads: Dict[int, np.ndarray]):
        self._grads = grads

    def __getitem__(self, tensor: Tensor) -> np.ndarray:
        if id(tensor) in self._grads:
            return self._grads[id(tensor)]
        return np.zeros_like(tensor.data)

    def __contains__(self, tensor: Tensor) -> bool:
        return id(tensor) in self._grads

    def __len__(self) -> int:
        return len(self._grads)


class Tape:
    """
    Ordered record of differentiable operations.

    Usage:
        with Tape() as tape:
            loss = model(...)
        grads = tape.backward(loss)

    A tape can be replayed once; recording a fresh forward pass needs a fresh tape.
    """

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self._produced: Dict[int, int] = {}
        self._consumed = False

    def __enter__(self) -> "Tape":
        stack = _tape_stack()
        stack.append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor, backward: BackwardRule) -> None:
        if self._consumed:
            raise TapeError("cannot record on a tape that has already been replayed")
        self.nodes.append(Node(op, tuple(inputs), output, backward))
        self._produced[id(output)] = len(self.nodes) - 1

    def backward(self, loss: Tensor) -> Gradients:
        """
        Propagate gradients from a scalar loss to every recorded input.

        Args:
            loss: Single-element tensor produced on this tape

        Returns:
            Gradients for every tensor with requires_grad that influenced the loss.
            Leaf tensors also receive their gradient in `.grad`.

        Raises:
            TapeError: If the loss is not scalar, the tape is empty, or it was already replayed
        """
        if loss.size != 1:
            raise TapeError(f"backward requires a scalar loss, got shape {loss.shape}")
        if not self.nodes:
            raise TapeError("backward called on an empty tape")
        if self._consumed:
            raise TapeError("stale tape: backward was already called on this recording")
        self._consumed = True

        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        tensors: Dict[int, Tensor] = {id(loss): loss}
        leaf_grads: Dict[int, np.ndarray] = {}

        for node in reversed(self.nodes):
            upstream = grads.pop(id(node.output), None)
            if upstream is None:
                continue
            input_grads = node.backward(upstream)
            for tensor, grad in zip(node.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                if grad.shape != tensor.shape:
                    grad = grad.reshape(tensor.shape)
                key = id(tensor)
                tensors[key] = tensor
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad

        for key, grad in grads.items():
            tensor = tensors[key]
            if key in self._produced or not tensor.requires_grad:
                continue
            tensor.grad = grad
            leaf_grads[key] = grad

        logger.debug("backward replayed %d nodes, %d leaf gradients", len(self.nodes), len(leaf_grads))
        return Gradients(leaf_grads)


def _tape_stack() -> List[Tape]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape() -> Optional[Tape]:
    """Return the innermost tape of the calling thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


@contextlib.contextmanager
def no_record() -> Iterator[None]:
    """Suspend recording on the calling thread."""
    stack = _tape_stack()
    saved = list(stack)
    stack.clear()
    try:
        yield
    finally:
        stack.extend(saved)


def make_result(
    data: np.ndarray,
    op: str,
    inputs: Sequence[Tensor],
    backward: BackwardRule,
) -> Tensor:
    """
    Wrap a forward result and record it on the active tape when needed.

    Args:
        data: Forward result
        op: Operation name for diagnostics
        inputs: Operand tensors, in the order the backward rule returns gradients
        backward: Maps the upstream gradient to one gradient (or None) per input

    Returns:
        Output tensor
    """
    out = Tensor._wrap(data)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(op, inputs, out, backward)
    return out
