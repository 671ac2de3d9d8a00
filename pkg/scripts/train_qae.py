"""Train the quantum autoencoder and report trash-state fidelity.

Each epoch takes one full-batch optimizer step; train_acc and test_acc
columns carry the fidelity proxy P(aux=0), which climbs toward 1.0 as
the encoder learns to park the trash register in |00>.
"""

import argparse

from hyqnet.runner import RunConfig, train


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--lr", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--machine", default="exact_prob",
                        choices=("exact_prob", "shot_sampling"))
    parser.add_argument("--shots", type=int, default=100)
    parser.add_argument("--trash-qubits", type=int, default=2)
    parser.add_argument("--total-qubits", type=int, default=7)
    parser.add_argument("--train-count", type=int, default=4)
    parser.add_argument("--test-count", type=int, default=4)
    parser.add_argument("--out", default="runs/qae")
    args = parser.parse_args()

    cfg = RunConfig(model="qae", epochs=args.epochs, lr=args.lr,
                    seed=args.seed, machine_type=args.machine,
                    shots=args.shots, trash_qubits=args.trash_qubits,
                    total_qubits=args.total_qubits,
                    train_count=args.train_count, test_count=args.test_count,
                    output_dir=args.out)
    result = train(cfg)
    for row in result["rows"]:
        print(f"step {row['epoch']:3d}  loss {row['train_loss']:.4f}  "
              f"fidelity {row['train_acc']:.4f}  "
              f"test fidelity {row['test_acc']:.4f}")
    print(f"metrics: {result['csv_path']}")
    print(f"checkpoint: {result['checkpoint_dir']}")


if __name__ == "__main__":
    main()
