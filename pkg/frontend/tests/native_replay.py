"""Replay parity programs straight against the core library.

Reads ``{"cases": [[op, ...], ...]}`` from stdin, runs every case with
direct calls into :mod:`hyqnet` (no RPC server involved), and writes
``{"cases": [[payload-or-null, ...], ...]}`` to stdout: one entry per
read-style op, in program order.  The TypeScript suite runs the same
programs through the stdio binding and expects byte-identical payloads.
"""

import base64
import json
import sys

import numpy as np

from hyqnet import Conv2D, Linear, MaxPool2D, ReLu, Tensor, manual_seed
from hyqnet.tensor import backward, elementwise, flatten, matmul, reshape, tmean, tsum


def encode(array: np.ndarray) -> dict:
    raw = np.ascontiguousarray(array).tobytes()
    return {
        "shape": list(array.shape),
        "dtype": str(array.dtype),
        "b64": base64.b64encode(raw).decode("ascii"),
    }


def decode(payload: dict) -> np.ndarray:
    flat = np.frombuffer(base64.b64decode(payload["b64"]), dtype=np.dtype(payload["dtype"]))
    return flat.reshape(payload["shape"]).copy()


LAYERS = {
    "linear": lambda cfg: Linear(cfg["in"], cfg["out"]),
    "conv2d": lambda cfg: Conv2D(
        cfg["in"],
        cfg["out"],
        tuple(cfg["kernel"]),
        tuple(cfg.get("stride", (1, 1))),
        cfg.get("padding", "valid"),
    ),
    "maxpool2d": lambda cfg: MaxPool2D(
        tuple(cfg["pool"]),
        tuple(cfg["stride"]) if cfg.get("stride") else None,
    ),
    "relu": lambda cfg: ReLu(),
}


def run_case(ops: list) -> list:
    env = {}
    outputs = []
    for op in ops:
        kind = op["t"]
        if kind == "seed":
            manual_seed(op["value"])
        elif kind == "tensor":
            env[op["name"]] = Tensor(
                decode(op["payload"]), requires_grad=op.get("requiresGrad", False)
            )
        elif kind == "binary":
            a, b = env[op["a"]], env[op["b"]]
            env[op["name"]] = matmul(a, b) if op["op"] == "matmul" else elementwise(op["op"], a, b)
        elif kind == "binaryScalar":
            env[op["name"]] = elementwise(op["op"], env[op["a"]], op["scalar"])
        elif kind == "reshape":
            env[op["name"]] = reshape(env[op["a"]], tuple(op["shape"]))
        elif kind == "flatten":
            env[op["name"]] = flatten(env[op["a"]], op.get("start", 1))
        elif kind == "reduce":
            env[op["name"]] = (tsum if op["op"] == "sum" else tmean)(env[op["a"]])
        elif kind == "layer":
            env[op["name"]] = LAYERS[op["kind"]](op.get("config", {}))
        elif kind == "forward":
            env[op["name"]] = env[op["layer"]](env[op["x"]])
        elif kind == "backward":
            backward(env[op["loss"]])
        elif kind == "read":
            outputs.append(encode(env[op["a"]].data))
        elif kind == "readGrad":
            grad = env[op["a"]].grad
            outputs.append(None if grad is None else encode(grad))
        elif kind == "paramRead":
            params = dict(env[op["layer"]].named_parameters())
            outputs.append(encode(params[op["param"]].data))
        elif kind == "paramGrad":
            grad = dict(env[op["layer"]].named_parameters())[op["param"]].grad
            outputs.append(None if grad is None else encode(grad))
        else:
            raise ValueError(f"unknown op {kind!r}")
    return outputs


def main() -> None:
    program = json.load(sys.stdin)
    json.dump({"cases": [run_case(case) for case in program["cases"]]}, sys.stdout)


if __name__ == "__main__":
    main()
