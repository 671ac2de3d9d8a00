"""Loss functions and gradient-descent optimizers."""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ContractError, DimensionError
from .tensor import DEFAULT_DTYPE, Tensor, GraphNode, _make_result, _as_tensor


def one_hot(labels, num_classes: int, dtype=None) -> Tensor:
    """Encode integer labels as one-hot rows."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ContractError(f"labels out of range for {num_classes} classes")
    out = np.zeros((labels.size, num_classes), dtype=dtype or DEFAULT_DTYPE)
    out[np.arange(labels.size), labels] = 1
    return Tensor(out)


class SoftmaxCrossEntropy:
    """Mean softmax cross-entropy over a batch; targets come first.

    Loss gradients flow to the logits only; targets are treated as data.
    """

    def __call__(self, targets, logits) -> Tensor:
        targets = _as_tensor(targets)
        logits = _as_tensor(logits)
        t = targets.data
        z = logits.data
        if t.shape != z.shape or z.ndim != 2:
            raise DimensionError(
                f"targets {t.shape} and logits {z.shape} must both be [N, C]")
        rows = np.sum(t, axis=1)
        if not (np.all((t == 0) | (t == 1)) and np.all(rows == 1)):
            raise ContractError("each target row must be one-hot")

        m = z.max(axis=1, keepdims=True)
        shifted = z - m
        lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        n = z.shape[0]
        loss = -(t * (shifted - lse)).sum() / n

        def df(g: np.ndarray) -> np.ndarray:
            softmax = np.exp(shifted - lse)
            return g * (softmax - t) / n

        nodes = []
        if logits.requires_grad:
            nodes.append(GraphNode(logits, df))
        return _make_result(np.asarray(loss, dtype=z.dtype), nodes)


class SGD:
    """Plain gradient descent: p <- p - lr * grad."""

    def __init__(self, params, lr: float = 0.01):
        self.params = list(params)
        self.lr = float(lr)

    def step(self) -> None:
        for p in self.params:
            if p.grad is None:
                warnings.warn("skipping parameter with no gradient", stacklevel=2)
                continue
            p.data = p.data - self.lr * p.grad.astype(p.data.dtype, copy=False)

    _step = step

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


class Adam:
    """Adam with bias correction (Kingma-Ba defaults)."""

    def __init__(self, params, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad.astype(p.data.dtype, copy=False)
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            mhat = self.m[i] / (1 - b1 ** self.t)
            vhat = self.v[i] / (1 - b2 ** self.t)
            p.data = p.data - self.lr * mhat / (np.sqrt(vhat) + self.eps)

    _step = step

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
