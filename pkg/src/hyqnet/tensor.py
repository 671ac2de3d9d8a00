"""Dense tensor with a dynamic reverse-mode autograd graph.

Every classical layer and every quantum layer in this package produces and
consumes the same :class:`Tensor`. Operations evaluate eagerly; when any
operand requires gradients the result records one :class:`GraphNode` per
differentiable input, and :func:`backward` replays those edges in reverse
topological order.

Values default to float32; pass ``dtype=np.float64`` (or use
:func:`tensor(..., dtype=...)`) for gradient-check-grade precision.
"""

from __future__ import annotations

import struct
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, FormatError

DEFAULT_DTYPE = np.float32

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    """Disable graph construction within the scope (forward still evaluates)."""
    prev = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


@dataclass
class GraphNode:
    """Edge of the computation graph: points at a parent tensor together with
    the function mapping an incoming gradient to the parent's contribution."""

    parent: "Tensor"
    df: Callable[[np.ndarray], np.ndarray]


class Tensor:
    """N-dimensional array of real numbers with optional gradient tracking."""

    __array_priority__ = 100  # keep numpy from hijacking mixed operators

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype if dtype is not None else None)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(dtype if dtype is not None else DEFAULT_DTYPE)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.nodes: list[GraphNode] = []

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor({self.data!r}{flag})"

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype)

    # -- gradient bookkeeping ------------------------------------------------

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g.astype(self.data.dtype, copy=False).reshape(self.data.shape)

    def backward(self, retain_graph: bool = False) -> None:
        backward(self, retain_graph=retain_graph)

    # -- operators -------------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_as_tensor(other, self.dtype), self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def matmul(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def sum(self):
        return tsum(self)

    def mean(self):
        return tmean(self)


def _as_tensor(value, dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)


def tensor(values, shape: Sequence[int] | None = None, requires_grad: bool = False,
           dtype=None) -> Tensor:
    """Create a tensor from a flat value list and an explicit shape.

    Raises DimensionError when len(values) does not match product(shape) or a
    dimension is < 1.
    """
    arr = np.asarray(values, dtype=dtype if dtype is not None else DEFAULT_DTYPE)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise DimensionError(f"shape entries must be >= 1, got {shape}")
        count = int(np.prod(shape))
        if arr.size != count:
            raise DimensionError(
                f"cannot shape {arr.size} values into {shape} ({count} elements)")
        arr = arr.reshape(shape)
    return Tensor(arr.copy(), requires_grad=requires_grad, dtype=arr.dtype)


def _make_result(data: np.ndarray, nodes: list[GraphNode]) -> Tensor:
    out = Tensor(data, dtype=data.dtype)
    if grad_enabled() and nodes:
        out.requires_grad = True
        out.nodes = nodes
    return out


def _reduce_broadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient over axes that were expanded by broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_check(a_shape, b_shape):
    try:
        return np.broadcast_shapes(a_shape, b_shape)
    except ValueError:
        raise DimensionError(f"shapes {a_shape} and {b_shape} do not broadcast") from None


def _binary(a, b, fwd, df_a, df_b) -> Tensor:
    a = _as_tensor(a)
    b = _as_tensor(b, a.dtype)
    _broadcast_check(a.shape, b.shape)
    data = fwd(a.data, b.data)
    nodes = []
    if a.requires_grad:
        nodes.append(GraphNode(a, lambda g, a=a, b=b: _reduce_broadcast(df_a(g, a.data, b.data), a.shape)))
    if b.requires_grad:
        nodes.append(GraphNode(b, lambda g, a=a, b=b: _reduce_broadcast(df_b(g, a.data, b.data), b.shape)))
    return _make_result(data, nodes)


def add(a, b) -> Tensor:
    return _binary(a, b, lambda x, y: x + y,
                   lambda g, x, y: g,
                   lambda g, x, y: g)


def sub(a, b) -> Tensor:
    return _binary(a, b, lambda x, y: x - y,
                   lambda g, x, y: g,
                   lambda g, x, y: -g)


def mul(a, b) -> Tensor:
    return _binary(a, b, lambda x, y: x * y,
                   lambda g, x, y: g * y,
                   lambda g, x, y: g * x)


def div(a, b) -> Tensor:
    # Division by an exact zero propagates inf/nan per IEEE-754; not trapped.
    def fwd(x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return x / y

    def dfa(g, x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return g / y

    def dfb(g, x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -g * x / (y * y)

    return _binary(a, b, fwd, dfa, dfb)


def elementwise(op_code: str, a, b) -> Tensor:
    """Dispatch one of the four basic elementwise operations by name."""
    try:
        op = {"add": add, "sub": sub, "mul": mul, "div": div}[op_code]
    except KeyError:
        raise ContractError(f"unknown elementwise op {op_code!r}") from None
    return op(a, b)


def matmul(a, b) -> Tensor:
    a = _as_tensor(a)
    b = _as_tensor(b, a.dtype)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise DimensionError(
            f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")
    data = a.data @ b.data
    nodes = []
    if a.requires_grad:
        nodes.append(GraphNode(a, lambda g, b=b: g @ b.data.T))
    if b.requires_grad:
        nodes.append(GraphNode(b, lambda g, a=a: a.data.T @ g))
    return _make_result(data, nodes)


def reshape(t: Tensor, shape) -> Tensor:
    t = _as_tensor(t)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != t.size:
        raise DimensionError(f"cannot reshape {t.shape} ({t.size} elements) to {shape}")
    data = t.data.reshape(shape)
    nodes = []
    if t.requires_grad:
        nodes.append(GraphNode(t, lambda g, s=t.shape: g.reshape(s)))
    return _make_result(data, nodes)


def flatten(t: Tensor, start_axis: int = 1) -> Tensor:
    """Collapse all axes from ``start_axis`` onward into one."""
    t = _as_tensor(t)
    if not 0 <= start_axis < max(t.data.ndim, 1):
        raise DimensionError(f"flatten axis {start_axis} out of range for {t.shape}")
    lead = t.shape[:start_axis]
    return reshape(t, lead + (int(np.prod(t.shape[start_axis:])),))


def tsum(t: Tensor) -> Tensor:
    t = _as_tensor(t)
    data = np.asarray(t.data.sum())
    nodes = []
    if t.requires_grad:
        nodes.append(GraphNode(t, lambda g, s=t.shape, d=t.dtype: np.broadcast_to(np.asarray(g, dtype=d), s).copy()))
    return _make_result(data, nodes)


def tmean(t: Tensor) -> Tensor:
    t = _as_tensor(t)
    n = t.size
    data = np.asarray(t.data.mean())
    nodes = []
    if t.requires_grad:
        nodes.append(GraphNode(t, lambda g, s=t.shape, d=t.dtype: np.broadcast_to(np.asarray(g, dtype=d) / n, s).copy()))
    return _make_result(data, nodes)


def backward(loss: Tensor, retain_graph: bool = False) -> None:
    """Accumulate gradients of every reachable tensor with requires_grad.

    The traversal seeds the loss with gradient 1, walks tensors in reverse
    topological order and calls each GraphNode exactly once, so repeated runs
    over the same retained graph are bit-identical. Unless ``retain_graph``
    is set the visited edges are dropped afterwards to free the graph.
    """
    if loss.size != 1:
        raise ContractError(f"backward requires a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return

    # Post-order DFS; child edges are expanded in their recorded order so the
    # resulting accumulation order is fixed for a fixed graph.
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        t, expanded = stack.pop()
        if expanded:
            order.append(t)
            continue
        if id(t) in seen:
            continue
        seen.add(id(t))
        stack.append((t, True))
        for node in reversed(t.nodes):
            if id(node.parent) not in seen:
                stack.append((node.parent, False))

    pending: dict[int, np.ndarray] = {
        id(loss): np.ones_like(loss.data)
    }
    for t in reversed(order):
        g = pending.pop(id(t), None)
        if g is None:
            continue
        if t.requires_grad:
            t.accumulate_grad(g)
        for node in t.nodes:
            contribution = np.asarray(node.df(g))
            if contribution.shape != node.parent.shape:
                contribution = contribution.reshape(node.parent.shape)
            key = id(node.parent)
            if key in pending:
                pending[key] = pending[key] + contribution
            else:
                pending[key] = contribution
        if not retain_graph:
            t.nodes = []


# -- binary tensor blob format ------------------------------------------------
#
# header: magic "HYQT", version u32, dtype u8 (0 = f32, 1 = f64), rank u8,
# one u64 per dimension; then raw little-endian values, row-major.

_MAGIC = b"HYQT"
_BLOB_VERSION = 1
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
_CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def save_tensor(t: Tensor, path) -> None:
    arr = np.ascontiguousarray(t.data)
    code = _DTYPE_CODES[arr.dtype]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IBB", _BLOB_VERSION, code, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def load_tensor(path) -> Tensor:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise FormatError(f"bad tensor magic {blob[:4]!r}")
    version, code, rank = struct.unpack_from("<IBB", blob, 4)
    if version != _BLOB_VERSION:
        raise FormatError(f"unsupported tensor blob version {version}")
    if code not in _CODE_DTYPES:
        raise FormatError(f"unknown dtype code {code}")
    dims = struct.unpack_from(f"<{rank}Q", blob, 10)
    offset = 10 + 8 * rank
    dtype = _CODE_DTYPES[code]
    count = int(np.prod(dims)) if rank else 1
    expected = offset + count * dtype.itemsize
    if len(blob) != expected:
        raise FormatError(f"tensor blob truncated: {len(blob)} bytes, expected {expected}")
    arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).reshape(dims)
    return Tensor(arr.astype(dtype.newbyteorder("=")), dtype=arr.dtype.newbyteorder("="))
