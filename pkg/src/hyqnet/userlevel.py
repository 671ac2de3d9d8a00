"""Line-delimited JSON server exposing the public API to other languages.

Run with ``python3 -m hyqnet.userlevel``. Each stdin line is one request
``{"id": n, "op": name, ...}`` answered by one stdout line
``{"id": n, "ok": true, "value": ...}`` or ``{"id": n, "ok": false,
"error": ...}``. Objects stay in this process and cross the boundary as
opaque integer handles; tensor payloads travel as base64 of the raw
buffer so round trips are bit-exact. Any failure, including use of a
freed handle, produces an error reply and leaves the server running.

The first request must be ``hello`` carrying the client's expected core
version; a mismatch is refused with both version strings in the error.
"""

from __future__ import annotations

import base64
import json
import sys

import numpy as np

from . import __version__
from .data import LabeledImages, batch_generator, filter_digits, synthetic_digits
from .models import CNN, HQCNN
from .nn import BatchNorm, Conv2D, Linear, MaxPool2D, Module, ReLu
from .optim import Adam, SGD, SoftmaxCrossEntropy
from .rng import manual_seed
from .tensor import (Tensor, add, backward, div, flatten, matmul, mul,
                     reshape, sub, tmean, tsum)

_DTYPES = {"float32": np.float32, "float64": np.float64}

_BINARY = {"add": add, "sub": sub, "mul": mul, "div": div, "matmul": matmul}

_LAYERS = {
    "linear": lambda cfg: Linear(cfg["in"], cfg["out"]),
    "conv2d": lambda cfg: Conv2D(cfg["in"], cfg["out"],
                                 tuple(cfg.get("kernel", (3, 3))),
                                 tuple(cfg.get("stride", (1, 1))),
                                 cfg.get("padding", "valid")),
    "maxpool2d": lambda cfg: MaxPool2D(tuple(cfg["pool"]),
                                       tuple(cfg["stride"]) if cfg.get("stride") else None,
                                       cfg.get("padding", "valid")),
    "relu": lambda cfg: ReLu(),
    "batchnorm": lambda cfg: BatchNorm(cfg["features"]),
}

_MODELS = {
    "cnn": lambda cfg: CNN(),
    "hqcnn": lambda cfg: HQCNN(machine_type=cfg.get("machine_type", "exact_prob"),
                               shots=cfg.get("shots", 100),
                               seed=cfg.get("seed", 0)),
}

_OPTIMIZERS = {
    "adam": lambda params, cfg: Adam(params, lr=cfg.get("lr", 0.001)),
    "sgd": lambda params, cfg: SGD(params, lr=cfg.get("lr", 0.01)),
}


def _encode(array: np.ndarray) -> dict:
    raw = np.ascontiguousarray(array).tobytes()
    return {"shape": list(array.shape), "dtype": str(array.dtype),
            "b64": base64.b64encode(raw).decode("ascii")}


def _decode(payload: dict) -> np.ndarray:
    dtype = _DTYPES[payload["dtype"]]
    flat = np.frombuffer(base64.b64decode(payload["b64"]), dtype=dtype)
    return flat.reshape(payload["shape"]).copy()


class Server:
    """Request dispatcher holding the handle table."""

    def __init__(self):
        self._objects: dict[int, object] = {}
        self._next_handle = 1
        self._ready = False
        self._loss = SoftmaxCrossEntropy()

    def _register(self, obj) -> int:
        handle = self._next_handle
        self._next_handle += 1
        self._objects[handle] = obj
        return handle

    def _get(self, handle, cls):
        obj = self._objects.get(handle)
        if obj is None:
            raise LookupError(f"unknown or freed handle {handle}")
        if not isinstance(obj, cls):
            raise TypeError(f"handle {handle} is {type(obj).__name__}, "
                            f"expected {cls.__name__}")
        return obj

    def _tensor_reply(self, t: Tensor) -> dict:
        return {"handle": self._register(t), "shape": list(t.shape),
                "dtype": str(t.data.dtype)}

    def _operand(self, msg: dict, key: str):
        if f"{key}_scalar" in msg:
            return msg[f"{key}_scalar"]
        return self._get(msg[key], Tensor)

    # ---- ops ----------------------------------------------------------

    def op_hello(self, msg):
        client = msg["version"]
        if client != __version__:
            raise RuntimeError(f"version mismatch: binding expects "
                               f"{client!r}, core is {__version__!r}")
        self._ready = True
        return {"version": __version__}

    def op_seed(self, msg):
        manual_seed(msg["value"])
        return None

    def op_free(self, msg):
        if msg["handle"] not in self._objects:
            raise LookupError(f"unknown or freed handle {msg['handle']}")
        del self._objects[msg["handle"]]
        return None

    def op_tensor(self, msg):
        data = _decode(msg)
        return self._tensor_reply(Tensor(data,
                                         requires_grad=msg.get("requires_grad", False)))

    def op_tensor_read(self, msg):
        return _encode(self._get(msg["handle"], Tensor).data)

    def op_tensor_grad(self, msg):
        grad = self._get(msg["handle"], Tensor).grad
        return None if grad is None else _encode(grad)

    def op_binary(self, msg):
        fn = _BINARY[msg["name"]]
        return self._tensor_reply(fn(self._operand(msg, "a"),
                                     self._operand(msg, "b")))

    def op_reshape(self, msg):
        t = self._get(msg["handle"], Tensor)
        return self._tensor_reply(reshape(t, tuple(msg["shape"])))

    def op_flatten(self, msg):
        t = self._get(msg["handle"], Tensor)
        return self._tensor_reply(flatten(t, msg.get("start_axis", 1)))

    def op_sum(self, msg):
        return self._tensor_reply(tsum(self._get(msg["handle"], Tensor)))

    def op_mean(self, msg):
        return self._tensor_reply(tmean(self._get(msg["handle"], Tensor)))

    def op_backward(self, msg):
        backward(self._get(msg["handle"], Tensor),
                 retain_graph=msg.get("retain_graph", False))
        return None

    def op_layer(self, msg):
        kind = msg["kind"]
        if kind not in _LAYERS:
            raise ValueError(f"unknown layer kind {kind!r}")
        return {"handle": self._register(_LAYERS[kind](msg.get("config", {})))}

    def op_model(self, msg):
        kind = msg["kind"]
        if kind not in _MODELS:
            raise ValueError(f"unknown model kind {kind!r}")
        return {"handle": self._register(_MODELS[kind](msg.get("config", {})))}

    def op_forward(self, msg):
        module = self._get(msg["module"], Module)
        return self._tensor_reply(module(self._get(msg["x"], Tensor)))

    def op_module_params(self, msg):
        module = self._get(msg["module"], Module)
        return [{"name": name, "shape": list(p.shape),
                 "dtype": str(p.data.dtype)}
                for name, p in module.named_parameters()]

    def op_param_read(self, msg):
        module = self._get(msg["module"], Module)
        params = dict(module.named_parameters())
        if msg["param"] not in params:
            raise LookupError(f"no parameter named {msg['param']!r}")
        return _encode(params[msg["param"]].data)

    def op_param_grad(self, msg):
        module = self._get(msg["module"], Module)
        params = dict(module.named_parameters())
        if msg["param"] not in params:
            raise LookupError(f"no parameter named {msg['param']!r}")
        grad = params[msg["param"]].grad
        return None if grad is None else _encode(grad)

    def op_train_mode(self, msg):
        self._get(msg["module"], Module).train(msg.get("mode", True))
        return None

    def op_optimizer(self, msg):
        kind = msg["kind"]
        if kind not in _OPTIMIZERS:
            raise ValueError(f"unknown optimizer kind {kind!r}")
        params = []
        for handle in msg["modules"]:
            params.extend(self._get(handle, Module).parameters())
        optimizer = _OPTIMIZERS[kind](params, msg.get("config", {}))
        return {"handle": self._register(optimizer)}

    def op_opt_step(self, msg):
        self._get(msg["handle"], (Adam, SGD)).step()
        return None

    def op_opt_zero_grad(self, msg):
        self._get(msg["handle"], (Adam, SGD)).zero_grad()
        return None

    def op_softmax_xent(self, msg):
        targets = self._get(msg["targets"], Tensor)
        logits = self._get(msg["logits"], Tensor)
        return self._tensor_reply(self._loss(targets, logits))

    def op_synthetic(self, msg):
        data = synthetic_digits(msg["count"],
                                num_classes=msg.get("num_classes", 10),
                                rows=msg.get("rows", 28),
                                cols=msg.get("cols", 28),
                                seed=msg.get("seed", 0))
        return {"handle": self._register(data), "count": len(data)}

    def op_filter_digits(self, msg):
        data = self._get(msg["handle"], LabeledImages)
        kept = filter_digits(data, tuple(msg["digits"]))
        return {"handle": self._register(kept), "count": len(kept)}

    def op_batches(self, msg):
        data = self._get(msg["handle"], LabeledImages)
        pairs = []
        for x, y in batch_generator(data, msg["batch_size"],
                                    shuffle=msg.get("shuffle", False),
                                    seed=msg.get("seed", 0),
                                    num_classes=msg.get("num_classes")):
            pairs.append({"x": self._tensor_reply(x), "y": self._tensor_reply(y)})
        return pairs

    # ---- wire loop ----------------------------------------------------

    def handle_line(self, line: str) -> dict:
        request_id = None
        try:
            msg = json.loads(line)
            request_id = msg.get("id")
            op = msg.get("op")
            handler = getattr(self, f"op_{op}", None)
            if handler is None:
                raise ValueError(f"unknown op {op!r}")
            if not self._ready and op != "hello":
                raise RuntimeError("handshake required: send hello first")
            return {"id": request_id, "ok": True, "value": handler(msg)}
        except Exception as exc:
            return {"id": request_id, "ok": False,
                    "error": f"{type(exc).__name__}: {exc}"}


def main() -> int:
    server = Server()
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(json.dumps(server.handle_line(line)) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
