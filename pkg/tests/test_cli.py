"""Command-line surface: artifacts, exit codes, determinism."""
from __future__ import annotations

import json

import pytest

from qhead.cli import main
from qhead.datasets import save_embeddings_binary, synthetic_clusters


@pytest.fixture()
def smoke_data(tmp_path):
    ds = synthetic_clusters(dim=8, n_per_class=20, separation=6.0, seed=1)
    path = tmp_path / "smoke.emb"
    save_embeddings_binary(ds, path)
    return path


def _write_config(tmp_path, dataset, **overrides):
    base = {
        "qubits": 3,
        "encoder_layers": 1,
        "main_layers": 1,
        "reupload_count": 1,
        "epochs": 3,
        "batch_size": 8,
        "learning_rate": 0.02,
        "shots": "inf",
        "dataset": dataset,
        "split_mode": "counts",
        "train_per_class": 10,
        "val_per_class": 4,
        "seed": 7,
    }
    base.update(overrides)
    path = tmp_path / "config.txt"
    path.write_text("".join(f"{k} = {v}\n" for k, v in base.items()), encoding="utf-8")
    return path


class TestTrain:
    def test_artifacts_and_content(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data)
        out = tmp_path / "run"
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 7
        assert report["config"]["dataset"] == str(smoke_data)
        assert report["parameter_count"] == 1 * (1 * 3 + 1) + 3 * (1 + 1) + (3 + 1) * 2
        assert 0.0 <= report["test_accuracy"] <= 1.0
        metrics = (out / "metrics.csv").read_text().splitlines()
        assert any(line.startswith("# dataset =") for line in metrics)
        assert "epoch,loss,val_acc" in metrics
        assert (out / "checkpoint.qhd1").exists()
        assert (out / "timing.json").exists()

    def test_bit_identical_reruns_including_noise(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, shots=128,
                            error_rate_1q=0.001, error_rate_2q=0.01)
        out = tmp_path / "run"
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        first = {
            name: (out / name).read_bytes()
            for name in ("report.json", "metrics.csv", "checkpoint.qhd1")
        }
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        for name, blob in first.items():
            assert (out / name).read_bytes() == blob, name

    def test_seed_override_changes_report(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["train", "--config", str(cfg), "--out", str(out_a)]) == 0
        assert main(["train", "--config", str(cfg), "--out", str(out_b), "--seed", "99"]) == 0
        a = json.loads((out_a / "report.json").read_text())
        b = json.loads((out_b / "report.json").read_text())
        assert a["seed"] == 7 and b["seed"] == 99

    def test_missing_dataset_exit_code_and_message(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, tmp_path / "nope.emb")
        code = main(["train", "--config", str(cfg), "--out", str(tmp_path / "x")])
        assert code == 2
        assert "nope.emb" in capsys.readouterr().err

    def test_invalid_config_field_message(self, tmp_path, smoke_data, capsys):
        cfg = _write_config(tmp_path, smoke_data, connectivity=9)
        code = main(["train", "--config", str(cfg), "--out", str(tmp_path / "x")])
        assert code == 2
        assert "circuit shape" in capsys.readouterr().err

    def test_logistic_model_from_config(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, model="logistic")
        out = tmp_path / "logistic"
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["parameter_count"] == 8 + 1

    def test_reference_ten_qubit_config_reports_353_parameters(self, tmp_path):
        ds = synthetic_clusters(dim=768, n_per_class=18, separation=6.0, seed=2)
        data_path = tmp_path / "wide.emb"
        save_embeddings_binary(ds, data_path)
        cfg = _write_config(
            tmp_path, data_path, qubits=10, encoder_layers=27, main_layers=2,
            reupload_count=4, epochs=2, train_per_class=10, val_per_class=4,
        )
        out = tmp_path / "ten"
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["parameter_count"] == 353


class TestEval:
    def test_checkpoint_eval_matches_train_report(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, shots=256, error_rate_1q=0.001)
        out = tmp_path / "run"
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        out_eval = tmp_path / "eval"
        assert main([
            "eval", "--config", str(cfg), "--checkpoint", str(out / "checkpoint.qhd1"),
            "--split", "test", "--out", str(out_eval),
        ]) == 0
        eval_report = json.loads((out_eval / "eval_report.json").read_text())
        assert eval_report["accuracy"] == report["test_accuracy"]


class TestSweep:
    def test_grid_reports_and_summary(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, qubits="[3, 4]",
                            learning_rate="[0.01, 0.02]", epochs=2)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        points = sorted(p.name for p in out.glob("point_*"))
        assert points == ["point_000", "point_001", "point_002", "point_003"]
        sweep_report = json.loads((out / "sweep_report.json").read_text())
        assert all(row["status"] == "ok" for row in sweep_report["points"])

        summary = [
            line for line in (out / "summary.csv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        assert summary[0] == "qubits,best_val_accuracy,test_accuracy,point"
        rows = [line.split(",") for line in summary[1:]]
        assert [r[0] for r in rows] == ["3", "4"]
        # summary best equals the max over that qubit count's members
        for q in (3, 4):
            members = [
                row["best_val_accuracy"]
                for row in sweep_report["points"]
                if row["qubits"] == q
            ]
            summary_best = float(next(r[1] for r in rows if r[0] == str(q)))
            assert summary_best == max(members)

    def test_parallel_jobs_match_sequential(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, learning_rate="[0.01, 0.02]", epochs=2)
        out_seq, out_par = tmp_path / "seq", tmp_path / "par"
        assert main(["sweep", "--config", str(cfg), "--out", str(out_seq)]) == 0
        assert main(["sweep", "--config", str(cfg), "--out", str(out_par), "--jobs", "2"]) == 0
        for point in ("point_000", "point_001"):
            a = json.loads((out_seq / point / "report.json").read_text())
            b = json.loads((out_par / point / "report.json").read_text())
            a["config"].pop("out_dir")
            b["config"].pop("out_dir")
            assert a == b

    def test_failures_recorded_and_sweep_continues(self, tmp_path, smoke_data):
        # second qubit value is invalid (connectivity >= qubits there)
        cfg = _write_config(tmp_path, smoke_data, qubits="[3, 2]", connectivity=2,
                            encoder_layers=0, epochs=2)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "sweep_report.json").read_text())
        statuses = {row["point"]: row["status"] for row in report["points"]}
        assert statuses["point_000"] == "ok"  # qubits=3, first listed value
        assert statuses["point_001"].startswith("failed")  # qubits=2


class TestAblate:
    @pytest.mark.parametrize("mode", ["nn-encoder", "nn-head", "no-final-linear"])
    def test_modes_train(self, tmp_path, smoke_data, mode):
        cfg = _write_config(tmp_path, smoke_data, epochs=2)
        out = tmp_path / "ablate"
        assert main(["ablate", "--config", str(cfg), "--mode", mode, "--out", str(out)]) == 0
        report = json.loads((out / mode / "report.json").read_text())
        assert 0.0 <= report["test_accuracy"] <= 1.0

    def test_no_final_linear_parameter_delta(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, epochs=2)
        out = tmp_path / "runs"
        assert main(["train", "--config", str(cfg), "--out", str(out / "base")]) == 0
        assert main(["ablate", "--config", str(cfg), "--mode", "no-final-linear",
                     "--out", str(out)]) == 0
        base = json.loads((out / "base" / "report.json").read_text())
        ablated = json.loads((out / "no-final-linear" / "report.json").read_text())
        assert base["parameter_count"] - ablated["parameter_count"] == (3 + 1) * 2


class TestGradcheck:
    def test_small_config_passes(self, tmp_path, smoke_data):
        cfg = _write_config(tmp_path, smoke_data, qubits=3, encoder_layers=1)
        out = tmp_path / "gc"
        assert main(["gradcheck", "--config", str(cfg), "--out", str(out)]) == 0
        payload = json.loads((out / "gradcheck.json").read_text())
        assert payload["passed"] is True
        assert payload["max_deviation"] < 1e-4


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    out = tmp_path / "energy.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "qhead", "energy", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "crossover at 46 qubits" in proc.stdout
    assert out.exists()


class TestEnergy:
    def test_default_crossover_and_curve(self, tmp_path, capsys):
        out = tmp_path / "energy.csv"
        assert main(["energy", "--out", str(out)]) == 0
        assert "crossover at 46 qubits" in capsys.readouterr().out
        lines = [
            line for line in out.read_text().splitlines()
            if line and not line.startswith("#")
        ]
        assert lines[0] == "qubits,e_qpu_kj,e_gpu_kj"
        rows = [line.split(",") for line in lines[1:]]
        diff_signs = [float(r[2]) >= float(r[1]) for r in rows]
        assert sum(1 for a, b in zip(diff_signs, diff_signs[1:]) if a != b) == 1
        gpu = [float(r[2]) for r in rows]
        assert all(b > a for a, b in zip(gpu, gpu[1:]))

    def test_constants_override_moves_crossover(self, tmp_path, capsys):
        out = tmp_path / "energy.csv"
        assert main(["energy", "--out", str(out), "--gpu-flops", "3.4e14"]) == 0
        printed = capsys.readouterr().out
        assert "crossover at 49 qubits" in printed or "crossover at 50 qubits" in printed
