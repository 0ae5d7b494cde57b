import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from sbafnet.cli import main
from sbafnet.network import load_network

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def tsv(text):
    lines = text.strip().splitlines()
    header = lines[0].split("\t")
    return header, [line.split("\t") for line in lines[1:]]


@pytest.fixture
def blobs_csv(tmp_path, capsys):
    path = tmp_path / "blobs.csv"
    assert run(capsys, "synth", "--kind", "blobs2", "--n", 40, "--seed", 1, "--out", path)[0] == 0
    return path


class TestSynth:
    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            run(capsys, "synth", "--kind", "habitability3", "--n", 60, "--seed", 3, "--out", p)
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0] == "temperature,flux,class" and len(lines) == 61

    def test_stdout(self, capsys):
        code, out, _ = run(capsys, "synth", "--kind", "blobs2", "--n", 4, "--seed", 0)
        assert code == 0 and out.startswith("x0,x1,class\n")

    def test_too_few_samples(self, capsys):
        code, _, err = run(capsys, "synth", "--kind", "blobs2", "--n", 1)
        assert code != 0 and "at least 2" in err


class TestTrainEval:
    def test_usage_errors(self, capsys, blobs_csv):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--label", "class", "--layers", "2,2"])
        assert exc.value.code != 0
        with pytest.raises(SystemExit) as exc:
            main(["train", "--data", str(blobs_csv), "--label", "class", "--layers", "2,2", "--alpha", "1.5"])
        assert exc.value.code != 0
        assert "--alpha" in capsys.readouterr().err

    def test_width_mismatch(self, capsys, blobs_csv, tmp_path):
        code, _, err = run(capsys, "train", "--data", blobs_csv, "--label", "class", "--layers", "3,2",
                           "--out-dir", tmp_path)
        assert code == 1 and "features" in err

    def test_data_errors_exit_nonzero(self, capsys, tmp_path):
        code, _, err = run(capsys, "train", "--data", tmp_path / "missing.csv", "--label", "class", "--layers", "2,2")
        assert code == 1 and "no such file" in err

    def test_train_then_eval(self, capsys, blobs_csv, tmp_path):
        out_dir = tmp_path / "out"
        args = ["train", "--data", blobs_csv, "--label", "class", "--layers", "2,3,2", "--epochs", 20,
                "--seed", 7, "--out-dir", out_dir]
        code, out, _ = run(capsys, *args)
        assert code == 0
        assert "train_accuracy\t" in out and "validation_accuracy\t" in out
        model = out_dir / "model.sbafnet"
        assert load_network(model).layer_sizes == [2, 3, 2]
        header, rows = tsv((out_dir / "loss_history.tsv").read_text())
        assert header == ["epoch", "mean_loss"] and len(rows) == 20
        assert (out_dir / "model.sbafnet.meta.json").exists()

        first = (model.read_bytes(), (out_dir / "loss_history.tsv").read_bytes())
        run(capsys, *args)
        assert (model.read_bytes(), (out_dir / "loss_history.tsv").read_bytes()) == first

        code, out, _ = run(capsys, "eval", "--model", model, "--data", blobs_csv, "--label", "class")
        assert code == 0 and "accuracy" in out and "confusion" in out
        code, out, _ = run(capsys, "eval", "--model", model, "--data", blobs_csv, "--label", "class", "--tsv")
        header, rows = tsv(out)
        assert header == ["metric", "value"] and rows[0] == ["samples", "40"]

    def test_eval_without_metadata(self, capsys, blobs_csv, tmp_path):
        run(capsys, "train", "--data", blobs_csv, "--label", "class", "--layers", "2,2", "--epochs", 1,
            "--out-dir", tmp_path)
        (tmp_path / "model.sbafnet.meta.json").unlink()
        code, out, err = run(capsys, "eval", "--model", tmp_path / "model.sbafnet", "--data", blobs_csv,
                             "--label", "class")
        assert code == 0 and "samples   40" in out and "no metadata" in err

    def test_full_training_set(self, capsys, blobs_csv, tmp_path):
        code, out, _ = run(capsys, "train", "--data", blobs_csv, "--label", "class", "--layers", "2,2",
                           "--epochs", 2, "--train-fraction", 1, "--out-dir", tmp_path)
        assert code == 0 and "validation_accuracy" not in out

    def test_sigmoid_option(self, capsys, blobs_csv, tmp_path):
        code, _, _ = run(capsys, "train", "--data", blobs_csv, "--label", "class", "--layers", "2,2",
                         "--epochs", 2, "--activation", "sigmoid", "--out-dir", tmp_path)
        assert code == 0
        assert load_network(tmp_path / "model.sbafnet").activation.kind.value == "sigmoid"


class TestGradcheck:
    def test_default_passes(self, capsys):
        code, out, err = run(capsys, "gradcheck")
        assert code == 0
        header, rows = tsv(out)
        assert header == ["param", "analytic", "numeric", "rel_error"] and len(rows) == 12

    def test_flipped_sign_fails(self, capsys):
        code, _, err = run(capsys, "gradcheck", "--flip-sign")
        assert code == 1 and "max_rel_error 2.000e+00" in err

    def test_threshold_respected(self, capsys):
        assert run(capsys, "gradcheck", "--flip-sign", "--threshold", 10)[0] == 0

    def test_deep_network(self, capsys):
        assert run(capsys, "gradcheck", "--layers", "4,8,8,3", "--seed", 3)[0] == 0

    def test_flip_needs_sbaf(self, capsys):
        assert run(capsys, "gradcheck", "--flip-sign", "--activation", "relu")[0] == 1


class TestEmitCurve:
    def test_golden(self, capsys):
        code, out, _ = run(capsys, "emit-curve", "--alpha", 0.5, "--k", 1, "--grid", 11)
        assert code == 0
        assert out == (DATA / "emit_curve_alpha05_k1_grid11.tsv").read_text()

    def test_stationary_row_and_shape(self, capsys):
        _, out, _ = run(capsys, "emit-curve", "--alpha", 0.5, "--k", 1, "--grid", 101)
        header, rows = tsv(out)
        assert header == ["x", "y", "dydx", "d2ydx2"]
        table = np.array(rows, dtype=float)
        mid = table[table[:, 0] == 0.5]
        assert mid.shape[0] == 1
        assert round(mid[0, 1], 6) == 0.666667 and mid[0, 2] == 0.0
        y = table[:, 1]
        i = int(np.argmin(y))
        assert table[i, 0] == 0.5
        assert np.all(np.diff(y[: i + 1]) < 0) and np.all(np.diff(y[i:]) > 0)

    def test_k_zero(self, capsys):
        _, out, _ = run(capsys, "emit-curve", "--k", 0, "--grid", 21)
        assert {row[1] for row in tsv(out)[1]} == {"1"}

    def test_alpha_sweep(self, capsys):
        _, out, _ = run(capsys, "emit-curve", "--alpha-sweep", "0.1:0.9:5", "--grid", 7)
        header, rows = tsv(out)
        assert header == ["alpha", "x", "y"] and len(rows) == 35
        assert sorted({float(r[0]) for r in rows}) == pytest.approx([0.1, 0.3, 0.5, 0.7, 0.9])

    @pytest.mark.parametrize("bad", [["--alpha-sweep", "0.1:2:3"], ["--grid", "1"], ["--k", "-1"], ["--eps", "0.6"]])
    def test_flag_validation(self, bad):
        with pytest.raises(SystemExit) as exc:
            main(["emit-curve", *bad])
        assert exc.value.code != 0


class TestBenchApprox:
    def test_table(self, capsys):
        code, out, _ = run(capsys, "bench-approx", "--eps", 0.01, "--grid", 2001, "--repeats", 1)
        assert code == 0
        header, rows = tsv(out)
        assert header == ["segments", "max_err_g", "max_err_y", "ns_per_eval_exact", "ns_per_eval_approx"]
        table = np.array(rows, dtype=float)
        assert table[:, 0].tolist() == [2.0**i for i in range(11)]
        assert np.all(np.diff(table[:, 1]) <= 0) and np.all(np.diff(table[:, 2]) <= 0)

    def test_grid_of_two(self, capsys):
        _, out, _ = run(capsys, "bench-approx", "--segments", "1,3", "--grid", 2, "--repeats", 1)
        for row in tsv(out)[1]:
            assert float(row[1]) <= 1e-15


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "sbafnet", "gradcheck", "--layers", "3,5,2"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert res.stdout.startswith("param\tanalytic")
