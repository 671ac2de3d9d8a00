"""Full-amplitude state-vector simulator with Monte Carlo measurement.

Qubit k addresses bit k of the amplitude index (little-endian), so on a
2-qubit register index 2 = 0b10 is the state with qubit 1 set.  Counts
bitstrings put the highest listed qubit leftmost, matching the binary
rendering of the index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CircuitError, ContractError, FormatError

MAX_QUBITS = 24

SINGLE_GATES = ("H", "X", "Y", "Z")
ROTATION_GATES = ("RX", "RY", "RZ")
CONTROLLED_GATES = ("CNOT", "CZ", "CR", "SWAP")
GATE_KINDS = SINGLE_GATES + ROTATION_GATES + CONTROLLED_GATES

_SQ2 = 1.0 / np.sqrt(2.0)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """Return the 2x2 matrix of a single-qubit gate kind."""
    if kind in _FIXED:
        return _FIXED[kind].copy()
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * angle), 0],
                         [0, np.exp(0.5j * angle)]], dtype=np.complex128)
    raise CircuitError(f"{kind} has no single-qubit matrix")


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        takes_angle = self.kind in ROTATION_GATES or self.kind == "CR"
        if takes_angle:
            if self.angle is None or not np.isfinite(self.angle):
                raise CircuitError(f"{self.kind} requires one finite angle")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} takes no angle")
        arity = 2 if self.kind in CONTROLLED_GATES else 1
        if len(self.targets) != arity:
            raise CircuitError(f"{self.kind} acts on {arity} qubit(s), "
                               f"got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise CircuitError(f"duplicate targets in {self.kind} {self.targets}")
        if any(q < 0 for q in self.targets):
            raise CircuitError(f"negative qubit index in {self.targets}")


class StateVector:
    """2^n complex amplitudes over n qubits, initialized to |0...0>."""

    def __init__(self, n_qubits: int):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise CircuitError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
        self.n_qubits = int(n_qubits)
        self.amplitudes = np.zeros(2 ** n_qubits, dtype=np.complex128)
        self.amplitudes[0] = 1.0

    def copy(self) -> "StateVector":
        out = StateVector.__new__(StateVector)
        out.n_qubits = self.n_qubits
        out.amplitudes = self.amplitudes.copy()
        return out

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass
class Circuit:
    n_qubits: int
    ops: list[GateOp] = field(default_factory=list)
    measured_qubits: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise CircuitError(
                f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        ops, measured = self.ops, self.measured_qubits
        self.ops, self.measured_qubits = [], []
        self.extend(ops)
        self.measure(*measured)

    def add(self, op: GateOp) -> None:
        if max(op.targets) >= self.n_qubits:
            raise CircuitError(
                f"{op.kind} targets {op.targets} exceed {self.n_qubits} qubits")
        self.ops.append(op)

    def extend(self, ops) -> None:
        for op in ops:
            self.add(op)

    def h(self, q: int) -> None: self.add(GateOp("H", (q,)))
    def x(self, q: int) -> None: self.add(GateOp("X", (q,)))
    def y(self, q: int) -> None: self.add(GateOp("Y", (q,)))
    def z(self, q: int) -> None: self.add(GateOp("Z", (q,)))
    def rx(self, q: int, angle: float) -> None: self.add(GateOp("RX", (q,), angle))
    def ry(self, q: int, angle: float) -> None: self.add(GateOp("RY", (q,), angle))
    def rz(self, q: int, angle: float) -> None: self.add(GateOp("RZ", (q,), angle))
    def cnot(self, control: int, target: int) -> None:
        self.add(GateOp("CNOT", (control, target)))
    def cz(self, control: int, target: int) -> None:
        self.add(GateOp("CZ", (control, target)))
    def cr(self, control: int, target: int, angle: float) -> None:
        self.add(GateOp("CR", (control, target), angle))
    def swap(self, a: int, b: int) -> None: self.add(GateOp("SWAP", (a, b)))

    def measure(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise CircuitError(f"measured qubit {q} out of range")
            if q in self.measured_qubits:
                raise CircuitError(f"qubit {q} measured twice")
            self.measured_qubits.append(q)


def _qubit_axis(state: StateVector, q: int) -> int:
    if not 0 <= q < state.n_qubits:
        raise CircuitError(f"qubit {q} out of range for {state.n_qubits} qubits")
    # C-order reshape puts bit 0 (qubit 0) on the last axis
    return state.n_qubits - 1 - q


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Apply one gate in place and return the state."""
    n = state.n_qubits
    view = state.amplitudes.reshape([2] * n)
    if op.kind in SINGLE_GATES or op.kind in ROTATION_GATES:
        m = gate_matrix(op.kind, op.angle)
        v = np.moveaxis(view, _qubit_axis(state, op.targets[0]), 0)
        v0 = m[0, 0] * v[0] + m[0, 1] * v[1]
        v1 = m[1, 0] * v[0] + m[1, 1] * v[1]
        v[0] = v0
        v[1] = v1
        return state
    a, b = op.targets
    v = np.moveaxis(view, (_qubit_axis(state, a), _qubit_axis(state, b)), (0, 1))
    if op.kind == "CNOT":
        tmp = v[1, 0].copy()
        v[1, 0] = v[1, 1]
        v[1, 1] = tmp
    elif op.kind == "CZ":
        v[1, 1] = -v[1, 1]
    elif op.kind == "CR":
        v[1, 1] = np.exp(1j * op.angle) * v[1, 1]
    elif op.kind == "SWAP":
        tmp = v[0, 1].copy()
        v[0, 1] = v[1, 0]
        v[1, 0] = tmp
    return state


def simulate(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run all ops in order; the caller's initial state is not mutated."""
    if initial is None:
        state = StateVector(circuit.n_qubits)
    else:
        if initial.n_qubits != circuit.n_qubits:
            raise CircuitError(
                f"initial state has {initial.n_qubits} qubits, "
                f"circuit has {circuit.n_qubits}")
        state = initial.copy()
    for op in circuit.ops:
        apply_gate(state, op)
    return state


def probabilities(state: StateVector, qubits) -> np.ndarray:
    """Marginal Born probabilities over the listed qubits.

    Entry j corresponds to the outcome where bit i of j is the value of
    qubits[i].
    """
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise CircuitError(f"duplicate qubits in {qubits}")
    axes = [_qubit_axis(state, q) for q in qubits]
    p = (np.abs(state.amplitudes) ** 2).reshape([2] * state.n_qubits)
    drop = tuple(ax for ax in range(state.n_qubits) if ax not in axes)
    marg = p.sum(axis=drop)
    # remaining axes are ordered by descending qubit index; reorder so the
    # last axis is qubits[0] (least significant bit of the outcome index)
    kept = sorted(qubits, reverse=True)
    perm = [kept.index(q) for q in reversed(qubits)]
    return marg.transpose(perm).reshape(-1)


class Counts(dict):
    """Bitstring -> count map carrying the total shot number."""

    def __init__(self, mapping=(), shots: int = 0):
        super().__init__(mapping)
        self.shots = int(shots)


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Counter-based per-shot substream; shot order cannot change draws."""
    return np.random.Generator(np.random.Philox(key=[seed, shot]))


def _draw_outcome(cum: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, len(cum) - 1)


def bitstring(index: int, width: int) -> str:
    return format(index, f"0{width}b")


def measure_shots(state: StateVector, qubits, shots: int, seed: int) -> Counts:
    """Draw i.i.d. samples from the Born distribution of the listed qubits."""
    if shots < 1:
        raise ContractError(f"shots must be >= 1, got {shots}")
    qubits = list(qubits)
    cum = np.cumsum(probabilities(state, qubits))
    width = len(qubits)
    tally: dict[str, int] = {}
    for shot in range(shots):
        u = shot_rng(seed, shot).random()
        key = bitstring(_draw_outcome(cum, u), width)
        tally[key] = tally.get(key, 0) + 1
    return Counts(tally, shots)


def parse_circuit_text(text: str) -> Circuit:
    """Parse the one-op-per-line format: `GATE q0[,q1][ angle]` / `MEASURE q...`."""
    ops: list[GateOp] = []
    measured: list[int] = []
    max_index = 0
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0].upper()
        try:
            if kind == "MEASURE":
                measured.extend(int(tok) for tok in tokens[1:])
                indices = measured
            else:
                targets = tuple(int(tok) for tok in tokens[1].split(","))
                angle = float(tokens[2]) if len(tokens) > 2 else None
                ops.append(GateOp(kind, targets, angle))
                indices = targets
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad circuit line {raw!r}: {exc}") from None
        if indices:
            max_index = max(max_index, max(indices))
    circuit = Circuit(max_index + 1)
    circuit.extend(ops)
    circuit.measure(*measured)
    return circuit


def format_circuit_text(circuit: Circuit) -> str:
    lines = []
    for op in circuit.ops:
        targets = ",".join(str(q) for q in op.targets)
        if op.angle is not None:
            lines.append(f"{op.kind} {targets} {op.angle!r}")
        else:
            lines.append(f"{op.kind} {targets}")
    if circuit.measured_qubits:
        lines.append("MEASURE " + " ".join(str(q) for q in circuit.measured_qubits))
    return "\n".join(lines) + "\n"
