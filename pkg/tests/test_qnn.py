import numpy as np
import pytest

from hyqnet.errors import CircuitError, ConfigError
from hyqnet.noise import NoiseModel, bit_flip
from hyqnet.qnn import (EXACT_PROB, NOISY, SHOT_SAMPLING, NoiseQuantumLayer,
                        QAELayer, QuantumLayer, parameter_shift_grad)
from hyqnet.qsim import Circuit, simulate
from hyqnet.tensor import Tensor, backward, tsum

from conftest import relative_error


def h_ry(inputs, params):
    c = Circuit(1)
    c.h(0)
    c.ry(0, inputs[0])
    c.measure(0)
    return c


def ry_param(inputs, params):
    c = Circuit(1)
    c.ry(0, params[0])
    c.measure(0)
    return c


class TestParameterShift:
    def test_matches_cosine_for_born_rule(self):
        # E(theta) = P(1) = sin^2(theta/2); dE/dtheta = sin(theta)/2
        def execute(values):
            c = Circuit(1)
            c.ry(0, values[0])
            state = simulate(c)
            return float(np.abs(state.amplitudes[1]) ** 2)

        for theta in np.linspace(-np.pi, np.pi, 9):
            (g,) = parameter_shift_grad(execute, [theta], shift=np.pi / 2,
                                        grad_scale=0.5, upstream=1.0)
            assert g == pytest.approx(np.sin(theta) / 2, abs=1e-12)

    def test_upstream_and_scale_multiply(self):
        # linear probe: the rule yields slope * shift * 2 * scale * upstream
        execute = lambda values: values[0] * 2.0
        (g,) = parameter_shift_grad(execute, [0.3], shift=0.1, grad_scale=0.5,
                                    upstream=3.0)
        assert g == pytest.approx(2.0 * 0.1 * 2 * 0.5 * 3.0)

    def test_each_parameter_shifted_independently(self):
        execute = lambda v: v[0] * v[1]
        g = parameter_shift_grad(execute, [2.0, 5.0], shift=np.pi / 2,
                                 grad_scale=0.5, upstream=1.0)
        assert g[0] == pytest.approx(np.pi / 2 * 5.0)
        assert g[1] == pytest.approx(np.pi / 2 * 2.0)


class TestQuantumLayerExact:
    def test_h_ry_expectation_closed_form(self):
        layer = QuantumLayer(h_ry, n_params=0, machine_type=EXACT_PROB)
        thetas = np.linspace(-2 * np.pi, 2 * np.pi, 17)
        out = layer(Tensor(thetas.reshape(-1, 1), dtype=np.float64)).numpy()
        np.testing.assert_allclose(out[:, 0], (1 + np.sin(thetas)) / 2,
                                   atol=1e-12)

    def test_input_gradient_closed_form(self):
        layer = QuantumLayer(h_ry, n_params=0, machine_type=EXACT_PROB)
        theta = 0.4
        x = Tensor(np.array([[theta]]), requires_grad=True)
        backward(tsum(layer(x)))
        assert x.grad[0, 0] == pytest.approx(np.cos(theta) / 2, abs=1e-10)

    def test_param_gradient_closed_form(self):
        layer = QuantumLayer(ry_param, n_params=1, machine_type=EXACT_PROB,
                             param_init=[0.8])
        backward(tsum(layer(Tensor(np.zeros((1, 1))))))
        # E = P(1) = sin^2(theta/2); dE/dtheta = sin(theta)/2
        assert layer.params.grad[0] == pytest.approx(np.sin(0.8) / 2,
                                                     abs=1e-10)

    def test_batch_rows_processed_independently(self):
        layer = QuantumLayer(h_ry, n_params=0)
        x = np.array([[0.1], [0.7], [-1.3]])
        together = layer(Tensor(x, dtype=np.float64)).numpy()
        single = [layer(Tensor(row.reshape(1, -1), dtype=np.float64)).numpy()
                  for row in x]
        np.testing.assert_allclose(together, np.vstack(single), atol=1e-14)

    def test_param_grads_sum_over_batch(self):
        layer = QuantumLayer(ry_param, n_params=1, param_init=[0.5])
        backward(tsum(layer(Tensor(np.zeros((3, 1))))))
        assert layer.params.grad[0] == pytest.approx(3 * np.sin(0.5) / 2,
                                                     abs=1e-10)

    def test_output_dtype_follows_input(self):
        layer = QuantumLayer(h_ry, n_params=0)
        assert layer(Tensor(np.zeros((1, 1), dtype=np.float32))).dtype == np.float32
        assert layer(Tensor(np.zeros((1, 1), dtype=np.float64))).dtype == np.float64

    def test_builder_errors_wrapped(self):
        def broken(inputs, params):
            raise ValueError("boom")

        layer = QuantumLayer(broken, n_params=0)
        with pytest.raises(CircuitError):
            layer(Tensor(np.zeros((1, 1))))

    def test_builder_must_return_circuit(self):
        layer = QuantumLayer(lambda i, p: None, n_params=0)
        with pytest.raises(CircuitError):
            layer(Tensor(np.zeros((1, 1))))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            QuantumLayer(h_ry, n_params=0, machine_type="analog")
        with pytest.raises(ConfigError):
            QuantumLayer(h_ry, n_params=-1)
        with pytest.raises(ConfigError):
            QuantumLayer(h_ry, n_params=0, shots=0)
        with pytest.raises(ConfigError):
            QuantumLayer(h_ry, n_params=0, shift=0.0)
        with pytest.raises(ConfigError):
            QuantumLayer(h_ry, n_params=2, param_init=[1.0])
        with pytest.raises(ConfigError):
            QuantumLayer(h_ry, n_params=0, machine_type=NOISY)


class TestQuantumLayerShots:
    def test_deterministic_for_fixed_seed(self):
        a = QuantumLayer(h_ry, 0, machine_type=SHOT_SAMPLING, shots=100,
                         seed=7)
        b = QuantumLayer(h_ry, 0, machine_type=SHOT_SAMPLING, shots=100,
                         seed=7)
        x = Tensor(np.array([[0.3]]))
        np.testing.assert_array_equal(a(x).numpy(), b(x).numpy())

    def test_sampled_mean_near_exact(self):
        layer = QuantumLayer(h_ry, 0, machine_type=SHOT_SAMPLING, shots=4000,
                             seed=3)
        theta = 0.9
        got = layer(Tensor(np.array([[theta]]), dtype=np.float64)).item()
        want = (1 + np.sin(theta)) / 2
        assert abs(got - want) < 4 * np.sqrt(0.25 / 4000)

    def test_zero_noise_model_matches_shot_sampling(self):
        model = NoiseModel()
        model.add("H", bit_flip(0.0))
        noisy = NoiseQuantumLayer(h_ry, 0, noise_model=model, shots=250,
                                  seed=5)
        clean = QuantumLayer(h_ry, 0, machine_type=SHOT_SAMPLING, shots=250,
                             seed=5)
        x = Tensor(np.array([[0.6], [1.1]]), dtype=np.float64)
        np.testing.assert_array_equal(noisy(x).numpy(), clean(x).numpy())

    def test_grad_scale_one_uses_raw_difference(self):
        exact = QuantumLayer(h_ry, 0, grad_scale=0.5)
        raw = QuantumLayer(h_ry, 0, grad_scale=1.0)
        for layer, scale in ((exact, 0.5), (raw, 1.0)):
            x = Tensor(np.array([[0.4]]), requires_grad=True)
            backward(tsum(layer(x)))
            assert x.grad[0, 0] == pytest.approx(2 * scale * np.cos(0.4) / 2,
                                                 abs=1e-10)


class TestQAELayer:
    def test_parameter_count(self):
        layer = QAELayer(trash_qubits=2, total_qubits=7)
        assert layer.training_size == 4
        assert layer.n_params == 60
        assert layer.params.data.shape == (60,)

    def test_register_layout(self):
        layer = QAELayer(2, 7)
        assert layer.reference_qubits == [1, 2]
        assert layer.training_register == [3, 4, 5, 6]
        assert layer.trash_register == [5, 6]

    def test_output_range(self, rng):
        layer = QAELayer(2, 7, machine_type=EXACT_PROB, seed=1)
        x = rng.standard_normal((3, 16))
        out = layer(Tensor(x, dtype=np.float64)).numpy()
        assert np.all(out >= 0.5 - 1e-9) and np.all(out <= 1.0 + 1e-9)

    def test_identity_encoder_on_aligned_state_gives_one(self):
        layer = QAELayer(2, 7, machine_type=EXACT_PROB,
                         param_init=np.zeros(60))
        # support only on the first 4 amplitudes leaves the trash at |00>
        x = np.zeros((1, 16))
        x[0, :4] = [0.5, 0.5, 0.5, 0.5]
        assert layer(Tensor(x, dtype=np.float64)).item() == pytest.approx(1.0)

    def test_orthogonal_trash_gives_half(self):
        layer = QAELayer(1, 4, machine_type=EXACT_PROB,
                         param_init=np.zeros(18))
        # amplitude on the top half only: trash qubit is |1>
        x = np.zeros((1, 4))
        x[0, 2] = 1.0
        assert layer(Tensor(x, dtype=np.float64)).item() == pytest.approx(0.5)

    def test_shot_mode_deterministic(self):
        a = QAELayer(2, 7, machine_type=SHOT_SAMPLING, shots=100, seed=2,
                     param_init=np.linspace(0, 1, 60))
        b = QAELayer(2, 7, machine_type=SHOT_SAMPLING, shots=100, seed=2,
                     param_init=np.linspace(0, 1, 60))
        x = Tensor(np.eye(1, 16), dtype=np.float64)
        np.testing.assert_array_equal(a(x).numpy(), b(x).numpy())

    def test_single_qubit_params_match_finite_differences(self):
        # the two-point rule is exact for the per-qubit rotation triples;
        # controlled-rotation parameters carry an extra half-frequency
        # term the rule scales by sqrt(2), so they are excluded here
        layer = QAELayer(1, 4, machine_type=EXACT_PROB,
                         param_init=np.linspace(0.1, 1.1, 18))
        x = Tensor(np.array([[0.6, 0.8, 0.0, 0.0]]), dtype=np.float64)
        backward(tsum(layer(x)))
        analytic = layer.params.grad.copy()

        eps = 1e-6
        single = list(range(0, 6)) + list(range(12, 18))
        fd = np.zeros(len(single))
        for k, i in enumerate(single):
            layer.params.data[i] += eps
            up = layer(x).item()
            layer.params.data[i] -= 2 * eps
            down = layer(x).item()
            layer.params.data[i] += eps
            fd[k] = (up - down) / (2 * eps)
        assert relative_error(analytic[single], fd, floor=1e-4) < 1e-4

    def test_gradient_equals_two_point_rule_for_all_params(self):
        layer = QAELayer(1, 4, machine_type=EXACT_PROB,
                         param_init=np.linspace(0.1, 1.1, 18))
        x = Tensor(np.array([[0.6, 0.8, 0.0, 0.0]]), dtype=np.float64)
        backward(tsum(layer(x)))
        analytic = layer.params.grad.copy()

        for i in range(18):
            layer.params.data[i] += layer.shift
            up = layer(x).item()
            layer.params.data[i] -= 2 * layer.shift
            down = layer(x).item()
            layer.params.data[i] += layer.shift
            want = (up - down) * layer.grad_scale
            assert analytic[i] == pytest.approx(want, abs=1e-10)

    def test_input_is_not_differentiated(self):
        layer = QAELayer(1, 4, machine_type=EXACT_PROB)
        x = Tensor(np.array([[1.0, 0.0, 0.0, 0.0]]), requires_grad=True)
        backward(tsum(layer(x)))
        assert x.grad is None
        assert layer.params.grad is not None

    def test_oversized_input_rejected(self):
        layer = QAELayer(2, 7)
        with pytest.raises(CircuitError):
            layer(Tensor(np.ones((1, 17))))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            QAELayer(0, 4)
        with pytest.raises(ConfigError):
            QAELayer(2, 3)
        with pytest.raises(ConfigError):
            QAELayer(2, 7, machine_type=NOISY)
        with pytest.raises(ConfigError):
            QAELayer(2, 7, param_init=np.zeros(10))
