"""Stochastic noise channels applied as per-shot quantum trajectories.

Each configured channel acts right after its gate kind, on every qubit
the gate touched, as a single Kraus jump.  A channel with parameter 0
draws nothing from the shot stream, so an all-zero model reproduces
noiseless counts bit-exactly under matched seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .qsim import (GATE_KINDS, Circuit, Counts, GateOp, StateVector,
                   _draw_outcome, apply_gate, bitstring, probabilities,
                   shot_rng)

CHANNEL_NAMES = ("bit_flip", "phase_flip", "depolarizing", "amplitude_damping")


@dataclass(frozen=True)
class Channel:
    name: str
    param: float

    def __post_init__(self):
        if self.name not in CHANNEL_NAMES:
            raise ConfigError(f"unknown channel {self.name!r}")
        if not 0.0 <= self.param <= 1.0:
            raise ConfigError(f"{self.name} parameter {self.param} outside [0, 1]")


def bit_flip(p: float) -> Channel:
    return Channel("bit_flip", float(p))


def phase_flip(p: float) -> Channel:
    return Channel("phase_flip", float(p))


def depolarizing(p: float) -> Channel:
    """p is the total depolarizing weight: rho -> (1-p) rho + p I/2."""
    return Channel("depolarizing", float(p))


def amplitude_damping(gamma: float) -> Channel:
    return Channel("amplitude_damping", float(gamma))


class NoiseModel:
    """Maps gate kinds (optionally per qubit) to channel lists."""

    def __init__(self):
        self._by_kind: dict[str, list[Channel]] = {}
        self._by_kind_qubit: dict[tuple[str, int], list[Channel]] = {}

    def add(self, gate_kind: str, channel: Channel, qubit: int | None = None) -> "NoiseModel":
        if gate_kind not in GATE_KINDS:
            raise ConfigError(f"unknown gate kind {gate_kind!r}")
        if qubit is None:
            self._by_kind.setdefault(gate_kind, []).append(channel)
        else:
            self._by_kind_qubit.setdefault((gate_kind, int(qubit)), []).append(channel)
        return self

    def channels_for(self, gate_kind: str, qubit: int) -> list[Channel]:
        override = self._by_kind_qubit.get((gate_kind, qubit))
        if override is not None:
            return override
        return self._by_kind.get(gate_kind, [])

    def is_trivial(self) -> bool:
        every = list(self._by_kind.values()) + list(self._by_kind_qubit.values())
        return all(ch.param == 0.0 for chans in every for ch in chans)


def _excited_population(state: StateVector, qubit: int) -> float:
    view = (np.abs(state.amplitudes) ** 2).reshape([2] * state.n_qubits)
    v = np.moveaxis(view, state.n_qubits - 1 - qubit, 0)
    return float(v[1].sum())


def _apply_damping(state: StateVector, qubit: int, gamma: float) -> None:
    n = state.n_qubits
    view = state.amplitudes.reshape([2] * n)
    v = np.moveaxis(view, n - 1 - qubit, 0)
    v[0] = np.sqrt(gamma) * v[1]
    v[1] = 0.0


def apply_channel(state: StateVector, qubit: int, channel: Channel,
                  rng: np.random.Generator) -> None:
    """Sample one Kraus jump in place; zero-parameter channels draw nothing."""
    p = channel.param
    if p == 0.0:
        return
    name = channel.name
    if name == "bit_flip":
        if rng.random() < p:
            apply_gate(state, GateOp("X", (qubit,)))
    elif name == "phase_flip":
        if rng.random() < p:
            apply_gate(state, GateOp("Z", (qubit,)))
    elif name == "depolarizing":
        # one draw decides both whether and which Pauli fires
        u = rng.random()
        if u < 0.75 * p:
            kind = "XYZ"[int(u // (0.25 * p))]
            apply_gate(state, GateOp(kind, (qubit,)))
    elif name == "amplitude_damping":
        p_jump = p * _excited_population(state, qubit)
        if rng.random() < p_jump:
            _apply_damping(state, qubit, p)
            norm = np.sqrt(p_jump)
        else:
            n = state.n_qubits
            view = state.amplitudes.reshape([2] * n)
            v = np.moveaxis(view, n - 1 - qubit, 0)
            v[1] = np.sqrt(1.0 - p) * v[1]
            norm = np.sqrt(1.0 - p_jump)
        if norm > 0:
            state.amplitudes /= norm


def run_trajectory(circuit: Circuit, noise: NoiseModel,
                   rng: np.random.Generator) -> StateVector:
    """One noisy pass over the circuit, channels sampled from rng."""
    state = StateVector(circuit.n_qubits)
    for op in circuit.ops:
        apply_gate(state, op)
        for qubit in op.targets:
            for channel in noise.channels_for(op.kind, qubit):
                apply_channel(state, qubit, channel, rng)
    return state


def simulate_noisy(circuit: Circuit, noise: NoiseModel, shots: int,
                   seed: int) -> Counts:
    """Per-shot stochastic trajectories ending in one measurement draw each."""
    if shots < 1:
        raise ContractError(f"shots must be >= 1, got {shots}")
    qubits = circuit.measured_qubits or list(range(circuit.n_qubits))
    width = len(qubits)
    tally: dict[str, int] = {}
    for shot in range(shots):
        rng = shot_rng(seed, shot)
        state = run_trajectory(circuit, noise, rng)
        cum = np.cumsum(probabilities(state, qubits))
        key = bitstring(_draw_outcome(cum, rng.random()), width)
        tally[key] = tally.get(key, 0) + 1
    return Counts(tally, shots)
