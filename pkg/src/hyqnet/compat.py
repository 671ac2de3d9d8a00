"""Adapter for opaque external circuits exposing run(inputs) -> expectation.

The adapter never inspects circuit structure; forward calls run() per
sample and backward applies the central shift rule per input dimension,
so any ecosystem's circuit becomes a differentiable node.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AdapterError, ConfigError, DimensionError
from .nn import Module
from .tensor import Tensor, GraphNode, _make_result


@dataclass
class ExternalCircuit:
    run: Callable[[list[float]], float]
    n_inputs: int
    metadata: str = ""

    def __post_init__(self):
        if self.n_inputs < 1:
            raise ConfigError("n_inputs must be >= 1")


def _invoke(ext: ExternalCircuit, values) -> float:
    try:
        return float(ext.run([float(v) for v in values]))
    except AdapterError:
        raise
    except Exception as exc:
        raise AdapterError(f"external circuit failed: {exc}",
                           ext.metadata) from exc


def compat_grad(ext: ExternalCircuit, inputs, shift: float = np.pi / 2,
                grad_scale: float = 0.5, upstream: float = 1.0) -> np.ndarray:
    """Shift-rule gradient of run() with respect to each input.

    Every shifted expectation is a fresh run() call; nothing is cached,
    so a stochastic external circuit still yields an unbiased estimate.
    """
    if not shift > 0:
        raise ConfigError("shift must be positive")
    values = np.asarray(inputs, dtype=np.float64)
    grads = np.zeros(values.size, dtype=np.float64)
    for i in range(values.size):
        shifted = values.copy()
        shifted[i] = values[i] + shift
        e_plus = _invoke(ext, shifted)
        shifted[i] = values[i] - shift
        e_minus = _invoke(ext, shifted)
        grads[i] = (e_plus - e_minus) * grad_scale * upstream
    return grads


class CompatLayer(Module):
    """Differentiable node around an ExternalCircuit."""

    def __init__(self, external: ExternalCircuit, shift: float = np.pi / 2,
                 grad_scale: float = 0.5):
        super().__init__()
        if not shift > 0:
            raise ConfigError("shift must be positive")
        self.external = external
        self.shift = float(shift)
        self.grad_scale = float(grad_scale)

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.shape[1] != self.external.n_inputs:
            raise DimensionError(
                f"expected [N, {self.external.n_inputs}] input, "
                f"got shape {x.shape}")
        xd = x.data.astype(np.float64)
        n = xd.shape[0]
        out = np.empty((n, 1), dtype=np.float64)
        for i in range(n):
            out[i, 0] = _invoke(self.external, xd[i])

        ext, shift, scale = self.external, self.shift, self.grad_scale
        nodes = []
        if x.requires_grad:
            def df_x(g: np.ndarray) -> np.ndarray:
                grads = np.zeros_like(xd)
                for i in range(n):
                    grads[i] = compat_grad(ext, xd[i], shift, scale,
                                           float(g[i, 0]))
                return grads
            nodes.append(GraphNode(x, df_x))
        return _make_result(out.astype(x.data.dtype), nodes)


class SubprocessCircuit:
    """External circuit in a child process, one evaluation per line.

    Protocol: the adapter writes space-separated input reals to stdin
    and reads a single expectation real from stdout.  Calls are
    serialized; the child must answer one line per line received.
    """

    def __init__(self, argv: list[str], n_inputs: int, metadata: str = ""):
        self.argv = list(argv)
        self.n_inputs = int(n_inputs)
        self.metadata = metadata or " ".join(self.argv)
        self._proc = subprocess.Popen(
            self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)

    def run(self, inputs) -> float:
        proc = self._proc
        if proc.poll() is not None:
            raise AdapterError("circuit process has exited", self.metadata)
        line = " ".join(repr(float(v)) for v in inputs)
        try:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()
            reply = proc.stdout.readline()
        except OSError as exc:
            raise AdapterError(f"pipe failure: {exc}", self.metadata) from exc
        if not reply:
            raise AdapterError("circuit process closed stdout", self.metadata)
        try:
            return float(reply.strip())
        except ValueError:
            raise AdapterError(f"unparseable expectation {reply!r}",
                               self.metadata) from None

    def as_external(self) -> ExternalCircuit:
        return ExternalCircuit(run=self.run, n_inputs=self.n_inputs,
                               metadata=self.metadata)

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)

    def __enter__(self) -> "SubprocessCircuit":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
