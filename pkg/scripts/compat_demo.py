"""Optimize a black-box circuit through the shift-rule adapter.

The target is the internal H-RY expectation exposed only as an opaque
run() callable, so the gradient comes entirely from two-point shifted
evaluations. theta converges to pi/2 where the expectation peaks.
"""

import argparse
import math

from hyqnet.runner import RunConfig, train


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--lr", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/compat")
    args = parser.parse_args()

    cfg = RunConfig(model="compat-demo", epochs=args.epochs, lr=args.lr,
                    seed=args.seed, output_dir=args.out)
    result = train(cfg)
    for row in result["rows"]:
        if row["epoch"] % 20 == 0 or row["epoch"] == 1:
            print(f"step {row['epoch']:3d}  loss {row['train_loss']:.6f}  "
                  f"expectation {row['train_acc']:.4f}")
    theta = result["theta"]
    print(f"final expectation {result['rows'][-1]['train_acc']:.4f}  "
          f"theta {theta:.4f}  target {math.pi / 2:.4f}  "
          f"|error| {abs(theta - math.pi / 2):.4f}")
    print(f"metrics: {result['csv_path']}")


if __name__ == "__main__":
    main()
