"""Reference models for the bundled experiments."""

from __future__ import annotations

import numpy as np

from .nn import Conv2D, Linear, MaxPool2D, Module, ReLu
from .noise import NoiseModel
from .qnn import QAELayer, NoiseQuantumLayer, QuantumLayer
from .qsim import Circuit
from .tensor import Tensor, flatten


class CNN(Module):
    """Two 3x3 conv blocks into a 10-way classifier head.

    Spatial chain on 28x28 input: 26 -> 13 -> 11 -> 5, so the flattened
    width is 32 * 5 * 5 = 800.
    """

    def __init__(self):
        super().__init__()
        self.conv5 = Conv2D(input_channels=1, output_channels=32,
                            kernel_size=(3, 3), stride=(1, 1), padding="valid")
        self.conv6 = Conv2D(input_channels=32, output_channels=32,
                            kernel_size=(3, 3), stride=(1, 1), padding="valid")
        self.maxpool2 = MaxPool2D([2, 2], [2, 2], padding="valid")
        self.maxpool4 = MaxPool2D([2, 2], [2, 2], padding="valid")
        self.fc3 = Linear(input_channels=800, output_channels=10)
        self.relu = ReLu()

    def forward(self, x: Tensor) -> Tensor:
        x = self.maxpool2(self.relu(self.conv5(x)))
        x = self.maxpool4(self.relu(self.conv6(x)))
        x = flatten(x, 1)
        return self.fc3(x)


def hqcnn_circuit(inputs: list, params: list) -> Circuit:
    """Single-qubit readout circuit: H then RY(input)."""
    circuit = Circuit(1)
    circuit.h(0)
    circuit.ry(0, inputs[0])
    circuit.measure(0)
    return circuit


class HQCNN(Module):
    """Convolutional front end with a 1-qubit bottleneck before the head.

    Spatial chain on 28x28 input: 24 -> 12 -> 8 -> 4, flattened width
    16 * 4 * 4 = 256.  The quantum node maps the fc2 scalar to an
    expectation in [0, 1], which fc3 expands to two logits.
    """

    def __init__(self, machine_type: str = "exact_prob", shots: int = 100,
                 shift: float = np.pi / 2, grad_scale: float = 0.5,
                 seed: int = 0, noise_model: NoiseModel | None = None):
        super().__init__()
        self.conv1 = Conv2D(input_channels=1, output_channels=6,
                            kernel_size=(5, 5), stride=(1, 1), padding="valid")
        self.maxpool1 = MaxPool2D([2, 2], [2, 2], padding="valid")
        self.conv2 = Conv2D(input_channels=6, output_channels=16,
                            kernel_size=(5, 5), stride=(1, 1), padding="valid")
        self.maxpool2 = MaxPool2D([2, 2], [2, 2], padding="valid")
        self.fc1 = Linear(input_channels=256, output_channels=64)
        self.fc2 = Linear(input_channels=64, output_channels=1)
        if noise_model is not None:
            self.hybrid: QuantumLayer = NoiseQuantumLayer(
                hqcnn_circuit, 0, noise_model, shots=shots, shift=shift,
                grad_scale=grad_scale, seed=seed)
        else:
            self.hybrid = QuantumLayer(
                hqcnn_circuit, 0, machine_type=machine_type, shots=shots,
                shift=shift, grad_scale=grad_scale, seed=seed)
        self.fc3 = Linear(input_channels=1, output_channels=2)
        self.relu = ReLu()

    def forward(self, x: Tensor) -> Tensor:
        x = self.maxpool1(self.relu(self.conv1(x)))
        x = self.maxpool2(self.relu(self.conv2(x)))
        x = flatten(x, 1)
        x = self.relu(self.fc1(x))
        x = self.fc2(x)
        x = self.hybrid(x)
        return self.fc3(x)


class QAEModel(Module):
    """Thin wrapper keeping the autoencoder layer in a module tree."""

    def __init__(self, trash_qubits: int = 2, total_qubits: int = 7,
                 machine_type: str = "shot_sampling", shots: int = 100,
                 shift: float = np.pi / 2, grad_scale: float = 0.5,
                 seed: int = 0, param_init=None):
        super().__init__()
        self.pqc = QAELayer(trash_qubits, total_qubits,
                            machine_type=machine_type, shots=shots,
                            shift=shift, grad_scale=grad_scale, seed=seed,
                            param_init=param_init)

    def forward(self, x: Tensor) -> Tensor:
        return self.pqc(x)
