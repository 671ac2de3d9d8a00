"""Train the 10-class convolutional baseline on synthetic digits.

Writes metrics.csv and a checkpoint under --out and prints one row per
epoch. Pass --train-images/--train-labels (and the test pair) to run on
real IDX files instead of the synthetic set.
"""

import argparse

from hyqnet.runner import RunConfig, train


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--train-count", type=int, default=2000)
    parser.add_argument("--test-count", type=int, default=500)
    parser.add_argument("--train-images")
    parser.add_argument("--train-labels")
    parser.add_argument("--test-images")
    parser.add_argument("--test-labels")
    parser.add_argument("--out", default="runs/cnn")
    args = parser.parse_args()

    cfg = RunConfig(model="cnn", epochs=args.epochs,
                    batch_size=args.batch_size, lr=args.lr, seed=args.seed,
                    train_images=args.train_images,
                    train_labels=args.train_labels,
                    test_images=args.test_images,
                    test_labels=args.test_labels,
                    train_count=args.train_count, test_count=args.test_count,
                    output_dir=args.out)
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
