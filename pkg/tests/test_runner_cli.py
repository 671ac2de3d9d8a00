import csv
import os

import numpy as np
import pytest

from hyqnet.cli import main
from hyqnet.data import save_idx_images, save_idx_labels, synthetic_digits
from hyqnet.errors import ConfigError, FormatError
from hyqnet.runner import ROW_LABELS, RunConfig, bench, plot_emit, train


def tiny_config(tmp_path, **kwargs):
    defaults = dict(model="cnn", epochs=1, batch_size=8, train_count=16,
                    test_count=8, seed=0, output_dir=str(tmp_path / "out"))
    defaults.update(kwargs)
    return RunConfig(**defaults)


class TestRunConfig:
    def test_validate_rejects_unknown_model(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, model="transformer").validate()

    def test_validate_rejects_bad_numbers(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, epochs=0).validate()
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, lr=0.0).validate()
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, bench_runs=2).validate()

    def test_partial_dataset_paths_rejected(self, tmp_path):
        cfg = tiny_config(tmp_path, train_images="only-this.idx3-ubyte")
        with pytest.raises(ConfigError):
            train(cfg)


class TestTrain:
    def test_cnn_writes_metrics_and_checkpoint(self, tmp_path):
        result = train(tiny_config(tmp_path))
        assert os.path.exists(result["csv_path"])
        assert os.path.exists(os.path.join(result["checkpoint_dir"],
                                           "manifest.txt"))
        with open(result["csv_path"], newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert set(rows[0]) == {"epoch", "train_loss", "train_acc",
                                "test_loss", "test_acc"}

    def test_cnn_deterministic_for_seed(self, tmp_path):
        a = train(tiny_config(tmp_path, seed=4,
                              output_dir=str(tmp_path / "a")))
        b = train(tiny_config(tmp_path, seed=4,
                              output_dir=str(tmp_path / "b")))
        assert a["rows"] == b["rows"]

    def test_hqcnn_runs_with_digit_filter(self, tmp_path):
        cfg = tiny_config(tmp_path, model="hqcnn", digits=(0, 1),
                          train_count=8, test_count=4)
        result = train(cfg)
        assert result["rows"][0]["train_loss"] > 0

    def test_qae_reports_fidelity(self, tmp_path):
        cfg = tiny_config(tmp_path, model="qae", epochs=3, train_count=4,
                          test_count=2, lr=0.05)
        result = train(cfg)
        for row in result["rows"]:
            assert 0.0 <= row["train_acc"] <= 1.0  # fidelity column reuse

    def test_compat_demo_moves_theta(self, tmp_path):
        cfg = tiny_config(tmp_path, model="compat-demo", epochs=30, lr=0.1)
        result = train(cfg)
        assert abs(result["theta"]) > 0.05

    def test_idx_paths_used_when_given(self, tmp_path):
        data = synthetic_digits(24, seed=9)
        paths = {}
        for key, name in (("train_images", "tri.idx3-ubyte"),
                          ("test_images", "tei.idx3-ubyte")):
            paths[key] = str(tmp_path / name)
            save_idx_images(paths[key], data.images)
        for key, name in (("train_labels", "trl.idx1-ubyte"),
                          ("test_labels", "tel.idx1-ubyte")):
            paths[key] = str(tmp_path / name)
            save_idx_labels(paths[key], data.labels)
        cfg = tiny_config(tmp_path, train_count=24, test_count=24, **paths)
        result = train(cfg)
        assert len(result["rows"]) == 1


class TestBench:
    def test_schema_and_statistics(self, tmp_path):
        cfg = tiny_config(tmp_path, model="cnn", train_count=8, test_count=4,
                          bench_runs=3)
        report = bench(cfg)
        assert [row[0] for row in report.rows] == list(ROW_LABELS)
        for _, mean, std in report.rows:
            assert mean >= 0.0 and std >= 0.0
        text = report.to_text()
        for label in ROW_LABELS:
            assert label in text

    def test_rejects_non_network_models(self, tmp_path):
        with pytest.raises(ConfigError):
            bench(tiny_config(tmp_path, model="qae"))


class TestPlotEmit:
    def test_tidy_output(self, tmp_path):
        result = train(tiny_config(tmp_path))
        out = plot_emit(result["csv_path"], str(tmp_path / "tidy.csv"))
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["epoch", "series", "value"]
        series = {row[1] for row in rows[1:]}
        assert series == {"train_loss", "train_acc", "test_loss", "test_acc"}

    def test_rejects_foreign_csv(self, tmp_path):
        path = tmp_path / "foreign.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(FormatError):
            plot_emit(str(path), str(tmp_path / "tidy.csv"))


class TestCli:
    def test_train_exit_zero(self, tmp_path, capsys):
        code = main(["train", "--model", "cnn", "--epochs", "1",
                     "--train-count", "12", "--test-count", "6",
                     "--out", str(tmp_path / "run")])
        assert code == 0
        assert "metrics" in capsys.readouterr().out

    def test_unknown_model_exits_two(self, tmp_path, capsys):
        code = main(["train", "--model", "nope",
                     "--out", str(tmp_path / "run")])
        assert code == 2

    def test_missing_data_file_exits_three(self, tmp_path, capsys):
        code = main(["train", "--model", "cnn",
                     "--train-images", str(tmp_path / "a.idx3-ubyte"),
                     "--train-labels", str(tmp_path / "b.idx1-ubyte"),
                     "--test-images", str(tmp_path / "c.idx3-ubyte"),
                     "--test-labels", str(tmp_path / "d.idx1-ubyte"),
                     "--out", str(tmp_path / "run")])
        assert code == 3

    def test_seed_env_override(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("HYQNET_SEED", "99")
        outdir = tmp_path / "env-run"
        code = main(["train", "--model", "cnn", "--epochs", "1",
                     "--train-count", "12", "--test-count", "6",
                     "--seed", "1", "--out", str(outdir)])
        assert code == 0
        monkeypatch.setenv("HYQNET_SEED", "not-an-int")
        code = main(["train", "--model", "cnn",
                     "--out", str(tmp_path / "bad")])
        assert code == 2

    def test_gen_synthetic_writes_four_files(self, tmp_path, capsys):
        code = main(["gen-synthetic", "--train-count", "10",
                     "--test-count", "4", "--out", str(tmp_path / "data")])
        assert code == 0
        names = sorted(os.listdir(tmp_path / "data"))
        assert names == ["test-images.idx3-ubyte", "test-labels.idx1-ubyte",
                         "train-images.idx3-ubyte", "train-labels.idx1-ubyte"]

    def test_plot_pipeline(self, tmp_path, capsys):
        rundir = tmp_path / "run"
        assert main(["train", "--model", "cnn", "--epochs", "1",
                     "--train-count", "12", "--test-count", "6",
                     "--out", str(rundir)]) == 0
        code = main(["plot", str(rundir / "metrics.csv"),
                     "--out", str(tmp_path / "tidy.csv")])
        assert code == 0
        assert (tmp_path / "tidy.csv").exists()

    def test_qsim_run_prints_sorted_counts(self, tmp_path, capsys):
        circuit = tmp_path / "bell.txt"
        circuit.write_text("H 0\nCNOT 0,1\nMEASURE 0 1\n")
        code = main(["qsim", "run", str(circuit), "--shots", "100",
                     "--seed", "0"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        keys = [line.split()[0] for line in lines]
        assert keys == sorted(keys)
        assert sum(int(line.split()[1]) for line in lines) == 100
        assert set(keys) <= {"00", "11"}

    def test_qsim_bad_file_exits_three(self, tmp_path, capsys):
        circuit = tmp_path / "bad.txt"
        circuit.write_text("WIBBLE 0\n")
        assert main(["qsim", "run", str(circuit)]) == 3
        assert main(["qsim", "run", str(tmp_path / "missing.txt")]) == 3

    def test_bench_writes_csv(self, tmp_path, capsys):
        outdir = tmp_path / "bench"
        code = main(["bench", "--model", "cnn", "--train-count", "8",
                     "--test-count", "4", "--bench-runs", "3",
                     "--out", str(outdir)])
        assert code == 0
        with open(outdir / "bench.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [row["category"] for row in rows] == list(ROW_LABELS)
        assert all(float(row["mean_s"]) >= 0 for row in rows)
