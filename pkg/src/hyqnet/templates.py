"""Circuit fragments: data-encoding templates and composite gates.

Fragments are plain GateOp lists, ready for Circuit.extend.  All
composites reduce to the native gate set, so anything built here runs
on the simulator unchanged.
"""

from __future__ import annotations

import numpy as np

from .errors import EncodingError
from .qsim import GateOp


def basis_embedding(bits, qubits=None) -> list[GateOp]:
    """X on every listed qubit whose bit is 1."""
    bits = list(bits)
    if qubits is None:
        qubits = range(len(bits))
    qubits = [int(q) for q in qubits]
    if len(bits) > len(qubits):
        raise EncodingError(f"{len(bits)} bits exceed {len(qubits)} qubits")
    ops = []
    for bit, qubit in zip(bits, qubits):
        if bit not in (0, 1):
            raise EncodingError(f"basis embedding needs 0/1 values, got {bit!r}")
        if bit:
            ops.append(GateOp("X", (qubit,)))
    return ops


def angle_embedding(features, axis: str = "Y", qubits=None) -> list[GateOp]:
    """One R<axis>(feature) rotation per qubit."""
    features = [float(f) for f in features]
    if axis not in ("X", "Y", "Z"):
        raise EncodingError(f"axis must be X, Y or Z, got {axis!r}")
    if qubits is None:
        qubits = range(len(features))
    qubits = [int(q) for q in qubits]
    if len(features) > len(qubits):
        raise EncodingError(f"{len(features)} features exceed {len(qubits)} qubits")
    return [GateOp("R" + axis, (q,), f) for f, q in zip(features, qubits)]


def _ucry(controls: list[int], target: int, angles: np.ndarray,
          ops: list[GateOp]) -> None:
    # multiplexed RY: applies RY(angles[j]) for control bit pattern j
    # (controls[0] is the most significant bit of j)
    if not np.any(angles):
        return
    if not controls:
        ops.append(GateOp("RY", (target,), float(angles[0])))
        return
    half = len(angles) // 2
    lo, hi = angles[:half], angles[half:]
    _ucry(controls[1:], target, (lo + hi) / 2.0, ops)
    ops.append(GateOp("CNOT", (controls[0], target)))
    _ucry(controls[1:], target, (lo - hi) / 2.0, ops)
    ops.append(GateOp("CNOT", (controls[0], target)))


def amplitude_embedding(vector, qubits=None) -> list[GateOp]:
    """Prepare a state whose amplitudes equal vector / ||vector||.

    The vector is zero-padded to the next power of two.  Signs are
    carried by the innermost rotation angles, so any real vector is
    prepared exactly.
    """
    v = np.asarray(vector, dtype=np.float64).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise EncodingError("amplitude embedding needs a finite nonzero vector")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise EncodingError("cannot embed the zero vector")
    n = max(1, int(np.ceil(np.log2(v.size))))
    if qubits is None:
        qubits = range(n)
    qubits = [int(q) for q in qubits]
    if v.size > 2 ** len(qubits):
        raise EncodingError(
            f"vector of length {v.size} exceeds {len(qubits)} qubits")
    n = len(qubits)
    padded = np.zeros(2 ** n, dtype=np.float64)
    padded[:v.size] = v / norm

    # branch norms per depth: norms[d][b] is the norm of chunk b, which
    # covers the 2^(n-d) amplitudes whose leading d index bits equal b
    norms: list[np.ndarray] = [np.empty(0)] * (n + 1)
    norms[n] = np.abs(padded)
    for d in range(n - 1, -1, -1):
        norms[d] = np.hypot(norms[d + 1][0::2], norms[d + 1][1::2])

    ops: list[GateOp] = []
    for depth in range(n):
        target = qubits[n - 1 - depth]
        controls = [qubits[n - 1 - k] for k in range(depth)]
        if depth == n - 1:
            # leaf angles keep the signed pair values
            pairs = padded.reshape(-1, 2)
            angles = 2.0 * np.arctan2(pairs[:, 1], pairs[:, 0])
        else:
            child = norms[depth + 1]
            angles = 2.0 * np.arctan2(child[1::2], child[0::2])
        _ucry(controls, target, angles, ops)
    return ops


def cry(control: int, target: int, angle: float) -> list[GateOp]:
    """Controlled RY via two CNOTs and half-angle rotations."""
    return [GateOp("RY", (target,), angle / 2.0),
            GateOp("CNOT", (control, target)),
            GateOp("RY", (target,), -angle / 2.0),
            GateOp("CNOT", (control, target))]


def crz(control: int, target: int, angle: float) -> list[GateOp]:
    """Controlled RZ via two CNOTs and half-angle rotations."""
    return [GateOp("RZ", (target,), angle / 2.0),
            GateOp("CNOT", (control, target)),
            GateOp("RZ", (target,), -angle / 2.0),
            GateOp("CNOT", (control, target))]


def ccz(a: int, b: int, target: int) -> list[GateOp]:
    """Doubly-controlled Z from controlled phase rotations."""
    return [GateOp("CR", (b, target), np.pi / 2.0),
            GateOp("CNOT", (a, b)),
            GateOp("CR", (b, target), -np.pi / 2.0),
            GateOp("CNOT", (a, b)),
            GateOp("CR", (a, target), np.pi / 2.0)]


def toffoli(a: int, b: int, target: int) -> list[GateOp]:
    """Doubly-controlled X: H conjugation of ccz."""
    return ([GateOp("H", (target,))] + ccz(a, b, target)
            + [GateOp("H", (target,))])


def cswap(control: int, a: int, b: int) -> list[GateOp]:
    """Controlled swap of a and b."""
    return ([GateOp("CNOT", (b, a))] + toffoli(control, a, b)
            + [GateOp("CNOT", (b, a))])
