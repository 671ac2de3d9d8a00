"""Train the hybrid classifier on two digit classes.

The quantum node runs in exact_prob mode by default; switch to
shot_sampling or noisy with --machine to study sampling effects.
"""

import argparse

from hyqnet.runner import RunConfig, train


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--machine", default="exact_prob",
                        choices=("exact_prob", "shot_sampling", "noisy"))
    parser.add_argument("--shots", type=int, default=100)
    parser.add_argument("--digits", default="0,1",
                        help="comma-separated pair of digit classes")
    parser.add_argument("--train-count", type=int, default=200)
    parser.add_argument("--test-count", type=int, default=100)
    parser.add_argument("--out", default="runs/hqcnn")
    args = parser.parse_args()

    digits = tuple(int(d) for d in args.digits.split(","))
    cfg = RunConfig(model="hqcnn", epochs=args.epochs,
                    batch_size=args.batch_size, lr=args.lr, seed=args.seed,
                    machine_type=args.machine, shots=args.shots,
                    digits=digits, train_count=args.train_count,
                    test_count=args.test_count, output_dir=args.out)
    result = train(cfg)
    for row in result["rows"]:
        print(f"epoch {row['epoch']:3d}  train_loss {row['train_loss']:.4f}  "
              f"train_acc {row['train_acc']:.3f}  "
              f"test_loss {row['test_loss']:.4f}  "
              f"test_acc {row['test_acc']:.3f}")
    print(f"metrics: {result['csv_path']}")
    print(f"checkpoint: {result['checkpoint_dir']}")


if __name__ == "__main__":
    main()
