"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 data error.  The
HYQNET_SEED environment variable overrides any --seed flag.
"""

from __future__ import annotations

import argparse
import os
import sys

from .data import save_idx_images, save_idx_labels, synthetic_digits
from .errors import ConfigError, FormatError, HyqnetError
from .noise import simulate_noisy
from .qsim import measure_shots, parse_circuit_text, simulate
from .runner import RunConfig, bench, plot_emit, train


def _parse_digits(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad digit list {text!r}") from None


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", default="hqcnn",
                        help="cnn, hqcnn, qae or compat-demo")
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--machine", dest="machine_type", default="exact_prob",
                        help="exact_prob, shot_sampling or noisy")
    parser.add_argument("--shots", type=int, default=100)
    parser.add_argument("--digits", type=_parse_digits, default=None,
                        help="comma-separated label subset, e.g. 0,1")
    parser.add_argument("--train-images")
    parser.add_argument("--train-labels")
    parser.add_argument("--test-images")
    parser.add_argument("--test-labels")
    parser.add_argument("--train-count", type=int, default=200)
    parser.add_argument("--test-count", type=int, default=100)
    parser.add_argument("--trash-qubits", type=int, default=2)
    parser.add_argument("--total-qubits", type=int, default=7)
    parser.add_argument("--out", dest="output_dir", default="runs")
    parser.add_argument("--bench-runs", type=int, default=3)


def _config_from(args: argparse.Namespace) -> RunConfig:
    seed = args.seed
    env_seed = os.environ.get("HYQNET_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"HYQNET_SEED must be an integer, "
                              f"got {env_seed!r}") from None
    return RunConfig(
        model=args.model, epochs=args.epochs, batch_size=args.batch_size,
        lr=args.lr, seed=seed, machine_type=args.machine_type,
        shots=args.shots, digits=args.digits,
        train_images=args.train_images, train_labels=args.train_labels,
        test_images=args.test_images, test_labels=args.test_labels,
        train_count=args.train_count, test_count=args.test_count,
        trash_qubits=args.trash_qubits, total_qubits=args.total_qubits,
        output_dir=args.output_dir, bench_runs=args.bench_runs)


def _cmd_train(args: argparse.Namespace) -> int:
    result = train(_config_from(args))
    final = result["rows"][-1]
    print(f"metrics: {result['csv_path']}")
    if "checkpoint_dir" in result:
        print(f"checkpoint: {result['checkpoint_dir']}")
    print(f"final: epoch={final['epoch']} train_loss={final['train_loss']:.6f} "
          f"train_acc={final['train_acc']:.4f} test_loss={final['test_loss']:.6f} "
          f"test_acc={final['test_acc']:.4f}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    report = bench(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    csv_path = os.path.join(cfg.output_dir, "bench.csv")
    report.write_csv(csv_path)
    print(report.to_text(), end="")
    print(f"written: {csv_path}")
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    out = plot_emit(args.metrics, args.out)
    print(f"written: {out}")
    return 0


def _cmd_gen_synthetic(args: argparse.Namespace) -> int:
    seed = args.seed
    env_seed = os.environ.get("HYQNET_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    os.makedirs(args.out, exist_ok=True)
    train = synthetic_digits(args.train_count, num_classes=args.classes,
                             seed=seed)
    test = synthetic_digits(args.test_count, num_classes=args.classes,
                            seed=seed + 1)
    paths = {
        "train-images.idx3-ubyte": (save_idx_images, train.images),
        "train-labels.idx1-ubyte": (save_idx_labels, train.labels),
        "test-images.idx3-ubyte": (save_idx_images, test.images),
        "test-labels.idx1-ubyte": (save_idx_labels, test.labels),
    }
    for name, (saver, payload) in paths.items():
        path = os.path.join(args.out, name)
        saver(path, payload)
        print(f"written: {path}")
    return 0


def _cmd_qsim_run(args: argparse.Namespace) -> int:
    with open(args.file) as fh:
        circuit = parse_circuit_text(fh.read())
    qubits = circuit.measured_qubits or list(range(circuit.n_qubits))
    seed = args.seed
    env_seed = os.environ.get("HYQNET_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    counts = measure_shots(simulate(circuit), qubits, args.shots, seed)
    for key in sorted(counts):
        print(f"{key} {counts[key]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyqnet",
                                     description="hybrid network experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model, emit metrics CSV")
    _add_run_flags(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_bench = sub.add_parser("bench", help="emit a timing report")
    _add_run_flags(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_plot = sub.add_parser("plot", help="reshape metrics CSV for plotting")
    p_plot.add_argument("metrics")
    p_plot.add_argument("--out", default="plot.csv")
    p_plot.set_defaults(func=_cmd_plot)

    p_gen = sub.add_parser("gen-synthetic", help="write synthetic IDX files")
    p_gen.add_argument("--out", default="data")
    p_gen.add_argument("--train-count", type=int, default=200)
    p_gen.add_argument("--test-count", type=int, default=100)
    p_gen.add_argument("--classes", type=int, default=10)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.set_defaults(func=_cmd_gen_synthetic)

    p_qsim = sub.add_parser("qsim", help="run a circuit text file")
    qsim_sub = p_qsim.add_subparsers(dest="action", required=True)
    p_run = qsim_sub.add_parser("run", help="sample measurement counts")
    p_run.add_argument("file")
    p_run.add_argument("--shots", type=int, default=100)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.set_defaults(func=_cmd_qsim_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, FormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except HyqnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
