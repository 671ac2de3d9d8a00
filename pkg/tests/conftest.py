"""Shared oracles: finite-difference gradients, dense unitaries, and a
1-qubit density-matrix channel model.

These are deliberately independent implementations: the dense oracle
builds matrices by basis-state bit arithmetic, never touching the
library's gate kernels, and the channel oracle evolves a density matrix
instead of sampling trajectories.
"""

import numpy as np
import pytest

from hyqnet.qsim import Circuit, GateOp


def finite_difference(f, tensors, eps=1e-6):
    """Central differences of the scalar f() w.r.t. each tensor's entries.

    f must rebuild its computation from the tensors' current .data on
    every call.
    """
    def evaluate():
        out = f()
        return float(out.data) if hasattr(out, "data") else float(out)

    grads = []
    for t in tensors:
        flat = t.data.reshape(-1)
        g = np.zeros_like(flat, dtype=np.float64)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = evaluate()
            flat[i] = keep - eps
            down = evaluate()
            flat[i] = keep
            g[i] = (up - down) / (2 * eps)
        grads.append(g.reshape(t.data.shape))
    return grads


def relative_error(a, b, floor=1e-8):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / scale))


# --- dense unitary oracle -------------------------------------------------

_SQ2 = 1.0 / np.sqrt(2.0)


def _oracle_single(kind, angle):
    if kind == "H":
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if kind == "Z":
        return np.diag([1, -1]).astype(complex)
    half = angle / 2.0
    if kind == "RX":
        return np.array([[np.cos(half), -1j * np.sin(half)],
                         [-1j * np.sin(half), np.cos(half)]])
    if kind == "RY":
        return np.array([[np.cos(half), -np.sin(half)],
                         [np.sin(half), np.cos(half)]], dtype=complex)
    if kind == "RZ":
        return np.diag([np.exp(-1j * half), np.exp(1j * half)])
    raise AssertionError(kind)


def dense_gate(n_qubits, op: GateOp) -> np.ndarray:
    """2^n x 2^n matrix of one gate, built by per-basis-state bit logic."""
    dim = 2 ** n_qubits
    u = np.zeros((dim, dim), dtype=complex)
    if op.kind in ("H", "X", "Y", "Z", "RX", "RY", "RZ"):
        q = op.targets[0]
        m = _oracle_single(op.kind, op.angle)
        for j in range(dim):
            bit = (j >> q) & 1
            u[j & ~(1 << q), j] += m[0, bit]
            u[j | (1 << q), j] += m[1, bit]
        return u
    a, b = op.targets
    for j in range(dim):
        bit_a, bit_b = (j >> a) & 1, (j >> b) & 1
        if op.kind == "CNOT":
            u[j ^ (1 << b) if bit_a else j, j] = 1
        elif op.kind == "CZ":
            u[j, j] = -1 if bit_a and bit_b else 1
        elif op.kind == "CR":
            u[j, j] = np.exp(1j * op.angle) if bit_a and bit_b else 1
        elif op.kind == "SWAP":
            swapped = j & ~(1 << a) & ~(1 << b)
            swapped |= (bit_b << a) | (bit_a << b)
            u[swapped, j] = 1
    return u


def dense_unitary(circuit: Circuit) -> np.ndarray:
    u = np.eye(2 ** circuit.n_qubits, dtype=complex)
    for op in circuit.ops:
        u = dense_gate(circuit.n_qubits, op) @ u
    return u


def random_circuit(rng, n_qubits, n_gates, measured=True) -> Circuit:
    """Seeded random circuit across the full gate set."""
    circuit = Circuit(n_qubits)
    kinds = ["H", "X", "Y", "Z", "RX", "RY", "RZ"]
    if n_qubits >= 2:
        kinds += ["CNOT", "CZ", "CR", "SWAP"]
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind in ("CNOT", "CZ", "CR", "SWAP"):
            a, b = rng.choice(n_qubits, size=2, replace=False)
            angle = float(rng.uniform(-2 * np.pi, 2 * np.pi))
            circuit.add(GateOp(kind, (int(a), int(b)),
                               angle if kind == "CR" else None))
        else:
            q = int(rng.integers(n_qubits))
            angle = float(rng.uniform(-2 * np.pi, 2 * np.pi))
            circuit.add(GateOp(kind, (q,),
                               angle if kind.startswith("R") else None))
    if measured:
        circuit.measure(*range(n_qubits))
    return circuit


# --- 1-qubit density-matrix channel oracle --------------------------------

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def channel_kraus(name: str, p: float):
    if name == "bit_flip":
        return [np.sqrt(1 - p) * _PAULI["I"], np.sqrt(p) * _PAULI["X"]]
    if name == "phase_flip":
        return [np.sqrt(1 - p) * _PAULI["I"], np.sqrt(p) * _PAULI["Z"]]
    if name == "depolarizing":
        return [np.sqrt(1 - 3 * p / 4) * _PAULI["I"],
                np.sqrt(p / 4) * _PAULI["X"],
                np.sqrt(p / 4) * _PAULI["Y"],
                np.sqrt(p / 4) * _PAULI["Z"]]
    if name == "amplitude_damping":
        return [np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
                np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)]
    raise AssertionError(name)


def density_evolve(circuit: Circuit, channels_by_kind) -> np.ndarray:
    """1-qubit reference: unitary steps plus Kraus sums after each gate."""
    assert circuit.n_qubits == 1
    rho = np.zeros((2, 2), dtype=complex)
    rho[0, 0] = 1.0
    for op in circuit.ops:
        u = _oracle_single(op.kind, op.angle)
        rho = u @ rho @ u.conj().T
        for name, p in channels_by_kind.get(op.kind, []):
            kraus = channel_kraus(name, p)
            rho = sum(k @ rho @ k.conj().T for k in kraus)
    return rho


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
