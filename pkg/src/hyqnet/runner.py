"""Experiment drivers: training runs, timing reports, plot emission."""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from .compat import CompatLayer, ExternalCircuit
from .data import LabeledImages, batch_generator, filter_digits, load_dataset, \
    qae_vectors, synthetic_digits
from .errors import ConfigError, FormatError
from .models import CNN, HQCNN, QAEModel, hqcnn_circuit
from .nn import Module, save_checkpoint
from .optim import Adam, SoftmaxCrossEntropy
from .qnn import EXACT_PROB, MACHINE_TYPES, QuantumLayer
from .rng import manual_seed
from .tensor import Tensor, backward, no_grad, sub, tmean, mul, reshape

MODEL_NAMES = ("cnn", "hqcnn", "qae", "compat-demo")

ROW_LABELS = (
    "Total training duration",
    "Single data training duration",
    "Quantum node BP duration",
    "Quantum node FP duration",
    "Network FP duration",
    "Single data testing duration",
    "Dataset testing duration",
)

METRIC_FIELDS = ("epoch", "train_loss", "train_acc", "test_loss", "test_acc")


@dataclass
class RunConfig:
    model: str = "hqcnn"
    epochs: int = 5
    batch_size: int = 16
    lr: float = 0.001
    seed: int = 0
    machine_type: str = EXACT_PROB
    shots: int = 100
    digits: tuple[int, ...] | None = None
    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    train_count: int = 200
    test_count: int = 100
    trash_qubits: int = 2
    total_qubits: int = 7
    output_dir: str = "runs"
    bench_runs: int = 3

    def validate(self) -> None:
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; "
                              f"choose from {MODEL_NAMES}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.machine_type not in MACHINE_TYPES:
            raise ConfigError(f"unknown machine_type {self.machine_type!r}")
        if self.train_count < 1 or self.test_count < 1:
            raise ConfigError("train_count and test_count must be positive")
        if self.bench_runs < 3:
            raise ConfigError("bench needs at least 3 measured runs")


def _remap_labels(data: LabeledImages, digits) -> LabeledImages:
    lookup = {d: i for i, d in enumerate(sorted(digits))}
    labels = np.array([lookup[int(v)] for v in data.labels], dtype=np.uint8)
    return LabeledImages(data.images, labels)


def _load_classification(cfg: RunConfig, num_classes: int):
    """Real IDX files when paths are set, otherwise synthetic bars."""
    paths = (cfg.train_images, cfg.train_labels, cfg.test_images, cfg.test_labels)
    if any(paths):
        if not all(paths):
            raise ConfigError("provide all four dataset paths or none")
        train = load_dataset(cfg.train_images, cfg.train_labels)
        test = load_dataset(cfg.test_images, cfg.test_labels)
        if cfg.digits:
            train = filter_digits(train, cfg.digits)
            test = filter_digits(test, cfg.digits)
            train = _remap_labels(train, cfg.digits)
            test = _remap_labels(test, cfg.digits)
    else:
        train = synthetic_digits(cfg.train_count, num_classes=num_classes,
                                 seed=cfg.seed)
        test = synthetic_digits(cfg.test_count, num_classes=num_classes,
                                seed=cfg.seed + 1)
    train = LabeledImages(train.images[:cfg.train_count],
                          train.labels[:cfg.train_count])
    test = LabeledImages(test.images[:cfg.test_count],
                         test.labels[:cfg.test_count])
    return train, test


def _accuracy(logits: Tensor, targets: Tensor) -> float:
    pred = logits.data.argmax(axis=1)
    truth = targets.data.argmax(axis=1)
    return float((pred == truth).mean())


def _eval_classifier(model: Module, data: LabeledImages, loss_fn,
                     batch_size: int, num_classes: int) -> tuple[float, float]:
    model.eval()
    total_loss = total_acc = count = 0.0
    try:
        with no_grad():
            for x, y in batch_generator(data, batch_size,
                                        num_classes=num_classes):
                out = model(x)
                n = x.shape[0]
                total_loss += loss_fn(y, out).item() * n
                total_acc += _accuracy(out, y) * n
                count += n
    finally:
        model.train()
    return total_loss / count, total_acc / count


def _write_metrics(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (row[k] if k == "epoch" else repr(float(row[k])))
                             for k in METRIC_FIELDS})


def _train_classifier(cfg: RunConfig) -> dict:
    num_classes = 2 if cfg.model == "hqcnn" else 10
    if cfg.digits:
        num_classes = len(cfg.digits)
    train, test = _load_classification(cfg, num_classes)
    if cfg.model == "hqcnn":
        model: Module = HQCNN(machine_type=cfg.machine_type, shots=cfg.shots,
                              seed=cfg.seed)
    else:
        model = CNN()
    loss_fn = SoftmaxCrossEntropy()
    opt = Adam(model.parameters(), lr=cfg.lr)
    rows = []
    for epoch in range(1, cfg.epochs + 1):
        total_loss = total_acc = count = 0.0
        for x, y in batch_generator(train, cfg.batch_size, shuffle=True,
                                    seed=cfg.seed + epoch,
                                    num_classes=num_classes):
            opt.zero_grad()
            out = model(x)
            loss = loss_fn(y, out)
            backward(loss)
            opt.step()
            n = x.shape[0]
            total_loss += loss.item() * n
            total_acc += _accuracy(out, y) * n
            count += n
        test_loss, test_acc = _eval_classifier(model, test, loss_fn,
                                               cfg.batch_size, num_classes)
        rows.append({"epoch": epoch, "train_loss": total_loss / count,
                     "train_acc": total_acc / count, "test_loss": test_loss,
                     "test_acc": test_acc})
    return {"model": model, "rows": rows}


def _train_qae(cfg: RunConfig) -> dict:
    model = QAEModel(cfg.trash_qubits, cfg.total_qubits,
                     machine_type=cfg.machine_type, shots=cfg.shots,
                     seed=cfg.seed)
    dim = 2 ** model.pqc.training_size
    support = 2 ** (model.pqc.training_size - cfg.trash_qubits)
    train = qae_vectors(cfg.train_count, dim, support, seed=cfg.seed)
    test = qae_vectors(cfg.test_count, dim, support, seed=cfg.seed + 1)
    opt = Adam(model.parameters(), lr=cfg.lr)
    rows = []
    for epoch in range(1, cfg.epochs + 1):
        opt.zero_grad()
        out = model(Tensor(train))
        fidelity = tmean(out)
        loss = tmean(sub(1.0, out))
        backward(loss)
        opt.step()
        with no_grad():
            test_fid = tmean(model(Tensor(test))).item()
        rows.append({"epoch": epoch, "train_loss": loss.item(),
                     "train_acc": fidelity.item(),
                     "test_loss": 1.0 - test_fid, "test_acc": test_fid})
    return {"model": model, "rows": rows}


def _train_compat_demo(cfg: RunConfig) -> dict:
    """Drive a black-box expectation toward 1.0 through the adapter."""
    probe = QuantumLayer(hqcnn_circuit, 0, machine_type=cfg.machine_type,
                         shots=cfg.shots, seed=cfg.seed)
    ext = ExternalCircuit(run=lambda vals: probe._run(vals, []), n_inputs=1,
                          metadata="internal H-RY expectation")
    layer = CompatLayer(ext)
    theta = Tensor(np.zeros((1, 1)), requires_grad=True)
    opt = Adam([theta], lr=cfg.lr)
    rows = []
    for epoch in range(1, cfg.epochs + 1):
        opt.zero_grad()
        out = layer(theta)
        err = sub(out, 1.0)
        loss = tmean(mul(err, err))
        backward(loss)
        opt.step()
        expectation = float(out.data[0, 0])
        rows.append({"epoch": epoch, "train_loss": loss.item(),
                     "train_acc": expectation, "test_loss": loss.item(),
                     "test_acc": expectation})
    return {"model": None, "rows": rows, "theta": float(theta.data[0, 0])}


def train(cfg: RunConfig) -> dict:
    """Run one training experiment; returns rows plus artifact paths."""
    cfg.validate()
    manual_seed(cfg.seed)
    os.makedirs(cfg.output_dir, exist_ok=True)
    if cfg.model == "qae":
        result = _train_qae(cfg)
    elif cfg.model == "compat-demo":
        result = _train_compat_demo(cfg)
    else:
        result = _train_classifier(cfg)
    csv_path = os.path.join(cfg.output_dir, "metrics.csv")
    _write_metrics(result["rows"], csv_path)
    result["csv_path"] = csv_path
    if result["model"] is not None:
        checkpoint_dir = os.path.join(cfg.output_dir, "checkpoint")
        save_checkpoint(result["model"], checkpoint_dir)
        result["checkpoint_dir"] = checkpoint_dir
    return result


@dataclass
class TimingReport:
    rows: list[tuple[str, float, float]]  # (label, mean s, stddev s)

    def to_text(self) -> str:
        width = max(len(label) for label, _, _ in self.rows)
        lines = [f"{'category'.ljust(width)}  {'mean_s':>12}  {'stddev_s':>12}"]
        for label, mean, std in self.rows:
            lines.append(f"{label.ljust(width)}  {mean:>12.6f}  {std:>12.6f}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "mean_s", "stddev_s"])
            for label, mean, std in self.rows:
                writer.writerow([label, repr(mean), repr(std)])


def _time_once(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def _bench_once(cfg: RunConfig, train: LabeledImages, test: LabeledImages,
                num_classes: int) -> dict[str, float]:
    manual_seed(cfg.seed)
    if cfg.model == "hqcnn":
        model: Module = HQCNN(machine_type=cfg.machine_type, shots=cfg.shots,
                              seed=cfg.seed)
        quantum = model.hybrid
    else:
        model = CNN()
        quantum = None
    loss_fn = SoftmaxCrossEntropy()
    opt = Adam(model.parameters(), lr=cfg.lr)

    def train_epoch():
        for x, y in batch_generator(train, cfg.batch_size,
                                    num_classes=num_classes):
            opt.zero_grad()
            loss = loss_fn(y, model(x))
            backward(loss)
            opt.step()

    timings = {"Total training duration": _time_once(train_epoch)}

    singles = list(batch_generator(train, 1, num_classes=num_classes))[:8]

    def single_step(batch):
        x, y = batch
        opt.zero_grad()
        loss = loss_fn(y, model(x))
        backward(loss)
        opt.step()

    timings["Single data training duration"] = float(np.mean(
        [_time_once(lambda b=b: single_step(b)) for b in singles]))

    timings["Network FP duration"] = float(np.mean(
        [_time_once(lambda b=b: model(b[0])) for b in singles]))

    if quantum is not None:
        probe = Tensor(np.array([[0.3]], dtype=np.float64), requires_grad=True)
        timings["Quantum node FP duration"] = float(np.mean(
            [_time_once(lambda: quantum(probe.detach())) for _ in range(8)]))

        def quantum_bp():
            out = quantum(probe)
            backward(out)
        timings["Quantum node BP duration"] = float(np.mean(
            [_time_once(quantum_bp) for _ in range(8)]))
    else:
        timings["Quantum node FP duration"] = 0.0
        timings["Quantum node BP duration"] = 0.0

    model.eval()
    with no_grad():
        test_singles = list(batch_generator(test, 1,
                                            num_classes=num_classes))[:8]
        timings["Single data testing duration"] = float(np.mean(
            [_time_once(lambda b=b: loss_fn(b[1], model(b[0])))
             for b in test_singles]))

        def eval_dataset():
            for x, y in batch_generator(test, cfg.batch_size,
                                        num_classes=num_classes):
                loss_fn(y, model(x))
        timings["Dataset testing duration"] = _time_once(eval_dataset)
    return timings


def bench(cfg: RunConfig) -> TimingReport:
    """Time the Table-shaped categories over >= 3 runs, warmup excluded."""
    cfg.validate()
    if cfg.model not in ("cnn", "hqcnn"):
        raise ConfigError("bench supports the cnn and hqcnn models")
    num_classes = 2 if cfg.model == "hqcnn" else 10
    train = synthetic_digits(min(cfg.train_count, 32), num_classes=num_classes,
                             seed=cfg.seed)
    test = synthetic_digits(min(cfg.test_count, 16), num_classes=num_classes,
                            seed=cfg.seed + 1)
    samples: list[dict[str, float]] = []
    for run in range(cfg.bench_runs + 1):
        timings = _bench_once(cfg, train, test, num_classes)
        if run > 0:  # first run is warmup
            samples.append(timings)
    rows = []
    for label in ROW_LABELS:
        values = np.array([s[label] for s in samples])
        rows.append((label, float(values.mean()), float(values.std())))
    return TimingReport(rows)


def plot_emit(metrics_csv: str, out_path: str) -> str:
    """Reshape a metrics CSV into tidy (epoch, series, value) rows."""
    with open(metrics_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames
        rows = list(reader)
    if not fields or "epoch" not in fields or not rows:
        raise FormatError(f"{metrics_csv}: not a metrics CSV")
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "series", "value"])
        for row in rows:
            for column in fields:
                if column != "epoch":
                    writer.writerow([row["epoch"], column, row[column]])
    return out_path
