"""Quantum calculation nodes: circuit-backed layers with shift-rule gradients.

A layer owns a circuit builder ``(inputs, params) -> Circuit`` and an
execution mode.  Expectations are classical floats, so these layers
compose with the classical ones in a single module tree and a single
backward pass.
"""

from __future__ import annotations

import numpy as np

from .errors import CircuitError, ConfigError, ContractError, DimensionError
from .nn import Module, Parameter
from .noise import NoiseModel, simulate_noisy
from .qsim import Circuit, Counts, GateOp, measure_shots, probabilities, simulate
from .rng import default_generator
from .templates import amplitude_embedding, cry, crz, cswap
from .tensor import Tensor, GraphNode, _make_result

EXACT_PROB = "exact_prob"
SHOT_SAMPLING = "shot_sampling"
NOISY = "noisy"
MACHINE_TYPES = (EXACT_PROB, SHOT_SAMPLING, NOISY)


def expectation_from_counts(counts: Counts) -> float:
    """Mean outcome value; each bitstring is read as a binary integer."""
    shots = counts.shots
    if shots <= 0:
        raise ContractError("counts carry no shots")
    return sum(int(key, 2) * c for key, c in counts.items()) / shots


def parameter_shift_grad(execute, values, shift: float, grad_scale: float,
                         upstream: float) -> np.ndarray:
    """Central-difference shift rule applied per scalar component.

    grad_scale 1/2 is the exact derivative for rotation gates whose
    generator has eigenvalues +-1/2; grad_scale 1 gives the unscaled
    difference some frameworks use.
    """
    values = np.asarray(values, dtype=np.float64)
    grads = np.zeros(values.size, dtype=np.float64)
    for i in range(values.size):
        shifted = values.copy()
        shifted[i] = values[i] + shift
        e_plus = execute(shifted)
        shifted[i] = values[i] - shift
        e_minus = execute(shifted)
        grads[i] = (e_plus - e_minus) * grad_scale * upstream
    return grads


class QuantumLayer(Module):
    """Batch of per-sample circuit evaluations returning expectations.

    circuit_builder(inputs, params) must return a Circuit; measured
    qubits default to all qubits when the builder sets none.
    """

    def __init__(self, circuit_builder, n_params: int,
                 machine_type: str = EXACT_PROB, shots: int = 100,
                 shift: float = np.pi / 2, grad_scale: float = 0.5,
                 seed: int = 0, param_init=None,
                 noise_model: NoiseModel | None = None):
        super().__init__()
        if machine_type not in MACHINE_TYPES:
            raise ConfigError(f"unknown machine_type {machine_type!r}")
        if machine_type == NOISY and noise_model is None:
            raise ConfigError("noisy machine_type requires a noise_model")
        if n_params < 0:
            raise ConfigError("n_params must be >= 0")
        if not shift > 0:
            raise ConfigError("shift must be positive")
        if shots < 1:
            raise ConfigError("shots must be >= 1")
        self.circuit_builder = circuit_builder
        self.n_params = int(n_params)
        self.machine_type = machine_type
        self.shots = int(shots)
        self.shift = float(shift)
        self.grad_scale = float(grad_scale)
        self.seed = int(seed)
        self.noise_model = noise_model
        if n_params > 0:
            if param_init is None:
                param_init = default_generator().uniform(0, 2 * np.pi, n_params)
            param_init = np.asarray(param_init, dtype=np.float64)
            if param_init.shape != (n_params,):
                raise ConfigError(
                    f"param_init shape {param_init.shape} != ({n_params},)")
            self.params = Parameter(param_init, dtype=np.float64)

    def _build(self, inputs, params) -> Circuit:
        try:
            circuit = self.circuit_builder([float(v) for v in inputs],
                                           [float(v) for v in params])
        except CircuitError:
            raise
        except Exception as exc:
            raise CircuitError(f"circuit builder failed: {exc}") from exc
        if not isinstance(circuit, Circuit):
            raise CircuitError("circuit builder must return a Circuit")
        return circuit

    def _execute(self, circuit: Circuit) -> float:
        qubits = circuit.measured_qubits or list(range(circuit.n_qubits))
        if self.machine_type == NOISY:
            counts = simulate_noisy(circuit, self.noise_model, self.shots,
                                    self.seed)
            return expectation_from_counts(counts)
        state = simulate(circuit)
        if self.machine_type == EXACT_PROB:
            probs = probabilities(state, qubits)
            return float(np.arange(probs.size) @ probs)
        counts = measure_shots(state, qubits, self.shots, self.seed)
        return expectation_from_counts(counts)

    def _run(self, inputs, params) -> float:
        return self._execute(self._build(inputs, params))

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2:
            raise DimensionError(f"expected [N, d] input, got shape {x.shape}")
        xd = x.data.astype(np.float64)
        pd = (self.params.data.copy() if self.n_params > 0
              else np.zeros(0, dtype=np.float64))
        n = xd.shape[0]
        out = np.empty((n, 1), dtype=np.float64)
        for i in range(n):
            out[i, 0] = self._run(xd[i], pd)

        shift, scale = self.shift, self.grad_scale
        nodes = []
        if x.requires_grad:
            def df_x(g: np.ndarray) -> np.ndarray:
                grads = np.zeros_like(xd)
                for i in range(n):
                    grads[i] = parameter_shift_grad(
                        lambda v: self._run(v, pd), xd[i],
                        shift, scale, float(g[i, 0]))
                return grads
            nodes.append(GraphNode(x, df_x))
        if self.n_params > 0:
            def df_p(g: np.ndarray) -> np.ndarray:
                total = np.zeros_like(pd)
                for i in range(n):
                    total += parameter_shift_grad(
                        lambda v: self._run(xd[i], v), pd,
                        shift, scale, float(g[i, 0]))
                return total
            nodes.append(GraphNode(self.params, df_p))
        return _make_result(out.astype(x.data.dtype), nodes)


class NoiseQuantumLayer(QuantumLayer):
    """QuantumLayer executed through per-shot noise trajectories."""

    def __init__(self, circuit_builder, n_params: int, noise_model: NoiseModel,
                 shots: int = 100, shift: float = np.pi / 2,
                 grad_scale: float = 0.5, seed: int = 0, param_init=None):
        super().__init__(circuit_builder, n_params, machine_type=NOISY,
                         shots=shots, shift=shift, grad_scale=grad_scale,
                         seed=seed, param_init=param_init,
                         noise_model=noise_model)


class QAELayer(Module):
    """Quantum autoencoder: encoder ansatz plus SWAP-test fidelity readout.

    Register layout: qubit 0 is the test ancilla, qubits 1..trash hold
    the |0> reference register, the rest form the training register.
    The trash subset is the tail of the training register.  The output
    is P(ancilla = 0) = (1 + overlap) / 2, so 1 means the trash qubits
    were driven back to |0...0>.
    """

    def __init__(self, trash_qubits: int, total_qubits: int,
                 machine_type: str = SHOT_SAMPLING, shots: int = 100,
                 shift: float = np.pi / 2, grad_scale: float = 0.5,
                 seed: int = 0, param_init=None):
        super().__init__()
        if trash_qubits < 1:
            raise ConfigError("trash_qubits must be >= 1")
        if total_qubits <= trash_qubits + 1:
            raise ConfigError(
                "total_qubits must exceed trash_qubits + 1 (ancilla)")
        if machine_type not in (EXACT_PROB, SHOT_SAMPLING):
            raise ConfigError(f"unsupported machine_type {machine_type!r}")
        if not shift > 0:
            raise ConfigError("shift must be positive")
        self.trash_qubits = int(trash_qubits)
        self.total_qubits = int(total_qubits)
        self.machine_type = machine_type
        self.shots = int(shots)
        self.shift = float(shift)
        self.grad_scale = float(grad_scale)
        self.seed = int(seed)
        t = total_qubits - 1 - trash_qubits
        self.training_size = t
        self.n_params = 3 * t + 3 * t * (t - 1) + 3 * t
        self.reference_qubits = list(range(1, 1 + trash_qubits))
        self.training_register = list(range(1 + trash_qubits, total_qubits))
        self.trash_register = self.training_register[-trash_qubits:]
        if param_init is None:
            param_init = default_generator().uniform(0, 2 * np.pi, self.n_params)
        param_init = np.asarray(param_init, dtype=np.float64)
        if param_init.shape != (self.n_params,):
            raise ConfigError(
                f"param_init shape {param_init.shape} != ({self.n_params},)")
        self.params = Parameter(param_init, dtype=np.float64)

    def encoder_ops(self, params) -> list[GateOp]:
        """Rotation triples per qubit, per ordered pair, then per qubit again."""
        params = list(params)
        if len(params) != self.n_params:
            raise ConfigError(
                f"encoder takes {self.n_params} parameters, got {len(params)}")
        ops: list[GateOp] = []
        it = iter(params)

        def triple(q):
            ops.append(GateOp("RZ", (q,), next(it)))
            ops.append(GateOp("RY", (q,), next(it)))
            ops.append(GateOp("RZ", (q,), next(it)))

        for q in self.training_register:
            triple(q)
        for control in self.training_register:
            for target in self.training_register:
                if target == control:
                    continue
                ops.extend(crz(control, target, next(it)))
                ops.extend(cry(control, target, next(it)))
                ops.extend(crz(control, target, next(it)))
        for q in self.training_register:
            triple(q)
        return ops

    def _build(self, inputs, params) -> Circuit:
        circuit = Circuit(self.total_qubits)
        circuit.extend(amplitude_embedding(inputs, qubits=self.training_register))
        circuit.extend(self.encoder_ops(params))
        circuit.h(0)
        for trash, ref in zip(self.trash_register, self.reference_qubits):
            circuit.extend(cswap(0, trash, ref))
        circuit.h(0)
        circuit.measure(0)
        return circuit

    def _run(self, inputs, params) -> float:
        circuit = self._build(inputs, params)
        if self.machine_type == EXACT_PROB:
            state = simulate(circuit)
            return float(probabilities(state, [0])[0])
        counts = measure_shots(simulate(circuit), [0], self.shots, self.seed)
        return counts.get("0", 0) / self.shots

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2:
            raise DimensionError(f"expected [N, d] input, got shape {x.shape}")
        if x.shape[1] > 2 ** self.training_size:
            raise CircuitError(
                f"{x.shape[1]} amplitudes exceed the training register "
                f"of {self.training_size} qubits")
        xd = x.data.astype(np.float64)
        pd = self.params.data.copy()
        n = xd.shape[0]
        out = np.empty((n, 1), dtype=np.float64)
        for i in range(n):
            out[i, 0] = self._run(xd[i], pd)

        shift, scale = self.shift, self.grad_scale

        def df_p(g: np.ndarray) -> np.ndarray:
            total = np.zeros_like(pd)
            for i in range(n):
                total += parameter_shift_grad(
                    lambda v: self._run(xd[i], v), pd,
                    shift, scale, float(g[i, 0]))
            return total

        return _make_result(out, [GraphNode(self.params, df_p)])
