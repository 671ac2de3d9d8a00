"""hyqnet: hybrid classical-quantum networks on a unified autograd core.

Classical layers and simulated quantum circuits share one dynamic
computation graph, so a mixed model trains with a single backward pass:
analytic gradients through the classical nodes, parameter-shift
gradients through the quantum ones.
"""

from .errors import (AdapterError, CircuitError, ConfigError, ContractError,
                     DimensionError, EncodingError, FormatError, HyqnetError)
from .tensor import (Tensor, GraphNode, backward, elementwise, flatten,
                     load_tensor, matmul, no_grad, reshape, save_tensor,
                     tensor, tmean, tsum)
from .rng import manual_seed
from .nn import (BatchNorm, Conv2D, Linear, MaxPool2D, Module, Parameter,
                 ReLU, ReLu, load_checkpoint, save_checkpoint)
from .optim import Adam, SGD, SoftmaxCrossEntropy, one_hot
from .qsim import (Circuit, Counts, GateOp, StateVector, apply_gate,
                   format_circuit_text, gate_matrix, measure_shots,
                   parse_circuit_text, probabilities, simulate)
from .noise import (Channel, NoiseModel, amplitude_damping, bit_flip,
                    depolarizing, phase_flip, simulate_noisy)
from .templates import (amplitude_embedding, angle_embedding, basis_embedding,
                        ccz, cry, crz, cswap, toffoli)
from .qnn import (QAELayer, NoiseQuantumLayer, QuantumLayer,
                  expectation_from_counts, parameter_shift_grad)
from .compat import CompatLayer, ExternalCircuit, SubprocessCircuit, compat_grad
from .models import CNN, HQCNN, QAEModel, hqcnn_circuit
from .runner import RunConfig, TimingReport, bench, plot_emit, train

__version__ = "0.1.0"
