"""Classical calculation nodes arranged in a module tree.

Layers register their parameters on attribute assignment, so a nested
model exposes every trainable tensor through ``parameters()`` exactly
once regardless of how deeply modules are nested.
"""

from __future__ import annotations

import os
from typing import Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DimensionError, FormatError
from .rng import default_generator
from .tensor import DEFAULT_DTYPE, Tensor, GraphNode, _make_result, load_tensor, save_tensor


class Parameter(Tensor):
    """Trainable leaf tensor; always requires a gradient."""

    def __init__(self, data: np.ndarray, dtype=None):
        super().__init__(np.asarray(data, dtype=dtype or DEFAULT_DTYPE), requires_grad=True)


class Module:
    """Base class for calculation nodes.

    Subclasses assign ``Parameter`` and ``Module`` attributes in
    ``__init__`` and implement ``forward``.
    """

    def __init__(self):
        object.__setattr__(self, "_parameters", {})
        object.__setattr__(self, "_children", {})
        object.__setattr__(self, "training", True)

    def __setattr__(self, name: str, value) -> None:
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._children[name] = value
        object.__setattr__(self, name, value)

    def forward(self, *args):
        raise NotImplementedError

    def __call__(self, *args):
        return self.forward(*args)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        seen: set[int] = set()
        for name, param in self._walk(prefix):
            if id(param) not in seen:
                seen.add(id(param))
                yield name, param

    def _walk(self, prefix: str) -> Iterator[tuple[str, Parameter]]:
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, child in self._children.items():
            yield from child._walk(prefix + name + ".")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def children(self) -> list["Module"]:
        return list(self._children.values())

    def train(self, mode: bool = True) -> "Module":
        object.__setattr__(self, "training", mode)
        for child in self._children.values():
            child.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


def _pair(value) -> tuple[int, int]:
    if isinstance(value, (tuple, list)):
        if len(value) != 2:
            raise ConfigError(f"expected a pair, got {value!r}")
        return int(value[0]), int(value[1])
    return int(value), int(value)


def _same_pads(size: int, kernel: int, stride: int) -> tuple[int, int]:
    out = -(-size // stride)
    total = max((out - 1) * stride + kernel - size, 0)
    lead = total // 2
    # asymmetric padding goes on the bottom/right
    return lead, total - lead


def _xavier(shape: tuple[int, ...], fan_in: int, fan_out: int, dtype) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return default_generator().uniform(-bound, bound, size=shape).astype(dtype)


class Conv2D(Module):
    """2-D cross-correlation layer over [N, C, H, W] inputs."""

    def __init__(self, input_channels: int, output_channels: int,
                 kernel_size=(3, 3), stride=(1, 1), padding: str = "valid",
                 dtype=None):
        super().__init__()
        if input_channels < 1 or output_channels < 1:
            raise ConfigError("channel counts must be positive")
        if padding not in ("valid", "same"):
            raise ConfigError(f"unknown padding mode {padding!r}")
        self.input_channels = int(input_channels)
        self.output_channels = int(output_channels)
        self.kernel_size = _pair(kernel_size)
        self.stride = _pair(stride)
        if min(self.kernel_size) < 1 or min(self.stride) < 1:
            raise ConfigError("kernel size and stride must be positive")
        self.padding = padding
        dtype = dtype or DEFAULT_DTYPE
        kh, kw = self.kernel_size
        fan_in = input_channels * kh * kw
        fan_out = output_channels * kh * kw
        self.weight = Parameter(
            _xavier((output_channels, input_channels, kh, kw), fan_in, fan_out, dtype),
            dtype=dtype)
        self.bias = Parameter(np.zeros(output_channels), dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 4:
            raise DimensionError(f"expected [N, C, H, W] input, got shape {x.shape}")
        n, c, h, w = x.shape
        if c != self.input_channels:
            raise DimensionError(
                f"input has {c} channels, layer expects {self.input_channels}")
        kh, kw = self.kernel_size
        sh, sw = self.stride
        if self.padding == "same":
            pt, pb = _same_pads(h, kh, sh)
            pl, pr = _same_pads(w, kw, sw)
        else:
            if h < kh or w < kw:
                raise DimensionError(
                    f"kernel {self.kernel_size} does not fit input {h}x{w}")
            pt = pb = pl = pr = 0
        xp = np.pad(x.data, ((0, 0), (0, 0), (pt, pb), (pl, pr)))
        hp, wp = xp.shape[2], xp.shape[3]
        ho = (hp - kh) // sh + 1
        wo = (wp - kw) // sw + 1

        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
        cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * kh * kw)
        wmat = self.weight.data.reshape(self.output_channels, -1)
        out = cols @ wmat.T + self.bias.data
        data = out.reshape(n, ho, wo, self.output_channels).transpose(0, 3, 1, 2)

        weight, bias = self.weight, self.bias

        def df_x(g: np.ndarray) -> np.ndarray:
            g2 = g.transpose(0, 2, 3, 1).reshape(n * ho * wo, self.output_channels)
            dcols = (g2 @ wmat).reshape(n, ho, wo, c, kh, kw).transpose(0, 3, 1, 2, 4, 5)
            dxp = np.zeros_like(xp)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, :, i:i + sh * ho:sh, j:j + sw * wo:sw] += dcols[:, :, :, :, i, j]
            return dxp[:, :, pt:pt + h, pl:pl + w]

        def df_w(g: np.ndarray) -> np.ndarray:
            g2 = g.transpose(0, 2, 3, 1).reshape(n * ho * wo, self.output_channels)
            return (g2.T @ cols).reshape(weight.data.shape)

        nodes = []
        if x.requires_grad or x.nodes:
            nodes.append(GraphNode(x, df_x))
        nodes.append(GraphNode(weight, df_w))
        nodes.append(GraphNode(bias, lambda g: g.sum(axis=(0, 2, 3))))
        return _make_result(data, nodes)


class MaxPool2D(Module):
    """Max pooling over [N, C, H, W] inputs."""

    def __init__(self, pool_size, stride=None, padding: str = "valid"):
        super().__init__()
        if padding not in ("valid", "same"):
            raise ConfigError(f"unknown padding mode {padding!r}")
        self.pool_size = _pair(pool_size)
        self.stride = _pair(stride) if stride is not None else self.pool_size
        self.padding = padding

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 4:
            raise DimensionError(f"expected [N, C, H, W] input, got shape {x.shape}")
        n, c, h, w = x.shape
        ph, pw = self.pool_size
        sh, sw = self.stride
        if self.padding == "same":
            pt, pb = _same_pads(h, ph, sh)
            pl, pr = _same_pads(w, pw, sw)
        else:
            if h < ph or w < pw:
                raise DimensionError(
                    f"window {self.pool_size} does not fit input {h}x{w}")
            pt = pb = pl = pr = 0
        # -inf padding keeps padded cells out of every max
        xp = np.pad(x.data, ((0, 0), (0, 0), (pt, pb), (pl, pr)),
                    constant_values=-np.inf)
        windows = sliding_window_view(xp, (ph, pw), axis=(2, 3))[:, :, ::sh, ::sw]
        ho, wo = windows.shape[2], windows.shape[3]
        flat = windows.reshape(n, c, ho, wo, ph * pw)
        arg = flat.argmax(axis=-1)  # first occurrence wins ties
        data = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

        def df_x(g: np.ndarray) -> np.ndarray:
            ni, ci, oi, oj = np.indices(arg.shape, sparse=True)
            hi = oi * sh + arg // pw
            wi = oj * sw + arg % pw
            dxp = np.zeros_like(xp, dtype=g.dtype)
            np.add.at(dxp, (ni, ci, hi, wi), g)
            return dxp[:, :, pt:pt + h, pl:pl + w]

        nodes = []
        if x.requires_grad or x.nodes:
            nodes.append(GraphNode(x, df_x))
        return _make_result(data, nodes)


class Linear(Module):
    """Affine layer: x @ weight.T + bias."""

    def __init__(self, input_channels: int, output_channels: int, dtype=None):
        super().__init__()
        if input_channels < 1 or output_channels < 1:
            raise ConfigError("channel counts must be positive")
        self.input_channels = int(input_channels)
        self.output_channels = int(output_channels)
        dtype = dtype or DEFAULT_DTYPE
        self.weight = Parameter(
            _xavier((output_channels, input_channels), input_channels,
                    output_channels, dtype),
            dtype=dtype)
        self.bias = Parameter(np.zeros(output_channels), dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.shape[1] != self.input_channels:
            raise DimensionError(
                f"expected [N, {self.input_channels}] input, got shape {x.shape}")
        weight, bias = self.weight, self.bias
        data = x.data @ weight.data.T + bias.data
        xd = x.data
        nodes = []
        if x.requires_grad or x.nodes:
            nodes.append(GraphNode(x, lambda g: g @ weight.data))
        nodes.append(GraphNode(weight, lambda g: g.T @ xd))
        nodes.append(GraphNode(bias, lambda g: g.sum(axis=0)))
        return _make_result(data, nodes)


class ReLu(Module):
    """Elementwise max(0, x); gradient is zero at x = 0."""

    def forward(self, x: Tensor) -> Tensor:
        mask = x.data > 0
        nodes = []
        if x.requires_grad or x.nodes:
            nodes.append(GraphNode(x, lambda g: g * mask))
        return _make_result(np.maximum(x.data, 0), nodes)


ReLU = ReLu


class BatchNorm(Module):
    """Per-channel standardization over axis 1 with running statistics."""

    def __init__(self, num_features: int, eps: float = 1e-5,
                 momentum: float = 0.1, dtype=None):
        super().__init__()
        if num_features < 1:
            raise ConfigError("num_features must be positive")
        dtype = dtype or DEFAULT_DTYPE
        self.num_features = int(num_features)
        self.eps = float(eps)
        self.momentum = float(momentum)
        self.gamma = Parameter(np.ones(num_features), dtype=dtype)
        self.beta = Parameter(np.zeros(num_features), dtype=dtype)
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim < 2 or x.shape[1] != self.num_features:
            raise DimensionError(
                f"expected [N, {self.num_features}, ...] input, got shape {x.shape}")
        axes = (0,) + tuple(range(2, x.data.ndim))
        shape = (1, self.num_features) + (1,) * (x.data.ndim - 2)
        if self.training:
            mean = x.data.mean(axis=axes)
            var = x.data.var(axis=axes)  # biased, matching the eval-path stats
            m = self.momentum
            self.running_mean = ((1 - m) * self.running_mean + m * mean).astype(
                self.running_mean.dtype)
            self.running_var = ((1 - m) * self.running_var + m * var).astype(
                self.running_var.dtype)
        else:
            mean = self.running_mean
            var = self.running_var
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x.data - mean.reshape(shape)) * inv.reshape(shape)
        data = self.gamma.data.reshape(shape) * xhat + self.beta.data.reshape(shape)

        gamma, beta = self.gamma, self.beta
        count = x.data.size // self.num_features
        training = self.training

        def df_x(g: np.ndarray) -> np.ndarray:
            gs = gamma.data.reshape(shape) * inv.reshape(shape)
            if not training:
                return g * gs
            gsum = g.sum(axis=axes, keepdims=True)
            gx = (g * xhat).sum(axis=axes, keepdims=True)
            return gs * (g - gsum / count - xhat * gx / count)

        nodes = []
        if x.requires_grad or x.nodes:
            nodes.append(GraphNode(x, df_x))
        nodes.append(GraphNode(gamma, lambda g: (g * xhat).sum(axis=axes)))
        nodes.append(GraphNode(beta, lambda g: g.sum(axis=axes)))
        return _make_result(data, nodes)


MANIFEST_NAME = "manifest.txt"


def save_checkpoint(module: Module, directory: str) -> None:
    """Write every named parameter as a tensor blob plus a manifest."""
    os.makedirs(directory, exist_ok=True)
    lines = []
    for name, param in module.named_parameters():
        filename = name.replace(".", "_") + ".bin"
        save_tensor(param, os.path.join(directory, filename))
        lines.append(f"{name} {filename}")
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(module: Module, directory: str) -> None:
    """Restore parameters written by save_checkpoint, matching by name."""
    manifest = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest):
        raise FileNotFoundError(f"no manifest found in {directory}")
    params = dict(module.named_parameters())
    with open(manifest) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            name, _, filename = line.partition(" ")
            if name not in params:
                raise FormatError(f"manifest names unknown parameter {name!r}")
            loaded = load_tensor(os.path.join(directory, filename))
            target = params[name]
            if loaded.shape != target.shape:
                raise DimensionError(
                    f"checkpoint shape {loaded.shape} does not match "
                    f"parameter {name!r} of shape {target.shape}")
            target.data = loaded.data.astype(target.data.dtype, copy=False)
