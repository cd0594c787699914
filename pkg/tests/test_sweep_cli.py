import numpy as np
import pytest

from amlpsim import cli
from amlpsim.datapath import run_dataset
from amlpsim.sweep import METRICS_COLUMNS, SWEEP_COLUMNS, run_metrics, run_sweep
from amlpsim.trainer import export_model, import_model

from conftest import random_features, random_model
from test_dataset import make_image_bytes, make_label_bytes


def run_cli(argv):
    try:
        return cli.main(argv)
    except SystemExit as exc:
        return exc.code


@pytest.fixture(scope="module")
def synth_mnist_dir(tmp_path_factory):
    """Small self-consistent IDX directory: 1200 train / 40 test images."""
    root = tmp_path_factory.mktemp("synthmnist")
    rng = np.random.default_rng(99)
    for n, img_name, lbl_name in (
        (1200, "train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        (40, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    ):
        imgs = rng.integers(0, 256, size=(n, 28, 28)).astype(np.uint8)
        labels = rng.integers(0, 10, size=n).astype(np.uint8)
        (root / img_name).write_bytes(make_image_bytes(imgs))
        (root / lbl_name).write_bytes(make_label_bytes(labels))
    return root


@pytest.fixture(scope="module")
def synth_rows(tmp_path_factory):
    model = random_model(seed=20)
    rng = np.random.default_rng(20)
    feats = random_features(rng, 30)
    labels = rng.integers(0, 10, size=30)
    out = tmp_path_factory.mktemp("sweepcsv") / "sweep.csv"
    rows = run_sweep(model, feats, labels, out, timestamp=False)
    return model, feats, labels, out, rows


def data_lines(path):
    return [l for l in path.read_text().splitlines() if l and not l.startswith("#")]


class TestRunSweep:
    def test_row_structure(self, synth_rows):
        _, _, _, out, rows = synth_rows
        lines = data_lines(out)
        assert lines[0] == SWEEP_COLUMNS
        assert len(lines) == 1 + 32
        assert [r.config for r in rows] == list(range(32))

    def test_exact_row_has_no_error_no_saving(self, synth_rows):
        _, _, _, out, rows = synth_rows
        first = data_lines(out)[1].split(",")
        assert first[0] == "0" and first[1] == "00000"
        assert first[3] == "0.0000" and first[9] == "0.0000"
        assert rows[0].error.er == 0 and rows[0].cost.network_saving == 0

    def test_percentages_have_four_decimals(self, synth_rows):
        _, _, _, out, _ = synth_rows
        for line in data_lines(out)[1:]:
            fields = line.split(",")
            for pct_field in (fields[2], fields[3], fields[4], fields[5], fields[9]):
                whole, frac = pct_field.split(".")
                assert len(frac) == 4

    def test_accuracy_matches_run_dataset(self, synth_rows):
        model, feats, labels, _, rows = synth_rows
        for mask in (0, 31):
            assert rows[mask].accuracy == run_dataset(model, feats, labels, mask).accuracy

    def test_byte_deterministic_without_timestamp(self, synth_rows, tmp_path):
        model, feats, labels, out, _ = synth_rows
        again = tmp_path / "again.csv"
        run_sweep(model, feats, labels, again, timestamp=False)
        assert again.read_bytes() == out.read_bytes()

    def test_all_approximate_rows_save_power(self, synth_rows):
        _, _, _, _, rows = synth_rows
        assert all(r.cost.network_saving > 0 for r in rows[1:])


class TestRunMetrics:
    def test_metrics_csv(self, tmp_path):
        out = tmp_path / "metrics.csv"
        summary, reports = run_metrics(out, timestamp=False)
        lines = data_lines(out)
        assert lines[0] == METRICS_COLUMNS
        assert len(lines) == 1 + 32
        assert lines[1].startswith("0,0.0000,0.0000,0.0000,0,")
        again = tmp_path / "metrics2.csv"
        run_metrics(again, timestamp=False)
        assert again.read_bytes() == out.read_bytes()
        text = out.read_text()
        assert "# summary over configurations 1-31" in text
        assert "# reference envelope" in text


class TestCli:
    def test_train_eval_info_flow(self, synth_mnist_dir, tmp_path, capsys):
        model_path = tmp_path / "model.amlp"
        code = run_cli(
            ["train", "--mnist-dir", str(synth_mnist_dir), "--out", str(model_path), "--epochs", "1"]
        )
        assert code == 0
        assert model_path.exists()
        import_model(model_path)  # loads cleanly

        code = run_cli(
            ["eval", "--model", str(model_path), "--mnist-dir", str(synth_mnist_dir), "--config", "3"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "accuracy:" in out and "network cost:" in out
        assert "220/image" in out

        code = run_cli(["info", "--model", str(model_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "feature indices:" in out and "CRC32 verified" in out

    def test_sweep_writes_csv_and_figures(self, synth_mnist_dir, tmp_path, capsys):
        model_path = tmp_path / "model.amlp"
        export_model(random_model(seed=21), model_path)
        csv_path = tmp_path / "sweep.csv"
        code = run_cli(
            [
                "sweep",
                "--model", str(model_path),
                "--mnist-dir", str(synth_mnist_dir),
                "--out", str(csv_path),
                "--no-timestamp",
            ]
        )
        assert code == 0
        assert csv_path.exists()
        assert len(data_lines(csv_path)) == 33
        for suffix in ("savings", "accuracy_power", "tradeoff"):
            assert (tmp_path / f"sweep_{suffix}.png").exists()

    def test_metrics_command(self, tmp_path):
        csv_path = tmp_path / "metrics.csv"
        assert run_cli(["metrics", "--out", str(csv_path), "--no-plots"]) == 0
        assert csv_path.exists()
        assert not (tmp_path / "metrics_error_metrics.png").exists()

    def test_usage_errors_exit_1(self, synth_mnist_dir, tmp_path):
        assert run_cli(["eval", "--model", "x"]) == 1  # missing --mnist-dir
        assert run_cli(["nonsense"]) == 1
        model_path = tmp_path / "model.amlp"
        export_model(random_model(seed=22), model_path)
        code = run_cli(
            ["eval", "--model", str(model_path), "--mnist-dir", str(synth_mnist_dir), "--config", "32"]
        )
        assert code == 1

    def test_data_errors_exit_2(self, synth_mnist_dir, tmp_path, capsys):
        missing = tmp_path / "missing.amlp"
        code = run_cli(
            ["eval", "--model", str(missing), "--mnist-dir", str(synth_mnist_dir)]
        )
        assert code == 2

        corrupt = tmp_path / "corrupt.amlp"
        export_model(random_model(seed=23), corrupt)
        data = bytearray(corrupt.read_bytes())
        data[500] ^= 0x55
        corrupt.write_bytes(bytes(data))
        code = run_cli(
            ["eval", "--model", str(corrupt), "--mnist-dir", str(synth_mnist_dir)]
        )
        assert code == 2
        assert "data error" in capsys.readouterr().err
