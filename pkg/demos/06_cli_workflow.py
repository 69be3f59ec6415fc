"""The full command-line workflow, driven programmatically.

Writes a small embedding dataset and a flat config file, then runs the same
subcommands the ``qhead`` console script exposes: train, eval on the saved
checkpoint, a gradient check, one ablation, and a two-axis sweep.
"""
import json
import tempfile
from pathlib import Path

from qhead.cli import main
from qhead.datasets import (
    append_anchor_feature,
    make_count_splits,
    pca_project,
    save_embeddings_binary,
    synthetic_clusters,
)

work = Path(tempfile.mkdtemp(prefix="qhead_demo_"))
print(f"working under {work}\n")

raw = synthetic_clusters(dim=768, n_per_class=40, separation=10.0, seed=21)
split = make_count_splits(raw, train_per_class=16, val_per_class=6, seed=21)
data = append_anchor_feature(pca_project(split, 8), value=6.0)
dataset_path = work / "clusters.emb"
save_embeddings_binary(data, dataset_path)

config_path = work / "experiment.txt"
config_path.write_text(f"""\
# hybrid head, 4-qubit register, quick demonstration settings
qubits = 4
encoder_layers = 2
main_layers = 2
reupload_count = 2
reupload_layers = 1
epochs = 20
batch_size = 16
learning_rate = 0.02
shots = 8192
error_rate_1q = 0.0001
error_rate_2q = 0.001
dataset = {dataset_path}
split_mode = counts
train_per_class = 16
val_per_class = 6
seed = 5
""")

run_dir = work / "run"
print(">>> qhead train")
main(["train", "--config", str(config_path), "--out", str(run_dir)])

print("\n>>> qhead eval (saved checkpoint, test split)")
main(["eval", "--config", str(config_path), "--checkpoint", str(run_dir / "checkpoint.qhd1"),
      "--split", "test", "--out", str(work / "eval")])

print("\n>>> qhead gradcheck")
main(["gradcheck", "--config", str(config_path), "--out", str(work / "gradcheck")])

print("\n>>> qhead ablate --mode no-final-linear")
main(["ablate", "--config", str(config_path), "--mode", "no-final-linear",
      "--out", str(work / "ablate")])

sweep_config = work / "sweep.txt"
sweep_config.write_text(
    config_path.read_text().replace("learning_rate = 0.02",
                                    "learning_rate = [0.01, 0.02]")
                           .replace("epochs = 20", "epochs = 8")
)
print("\n>>> qhead sweep (two learning rates)")
main(["sweep", "--config", str(sweep_config), "--out", str(work / "sweep")])

print("\n>>> qhead energy")
main(["energy", "--out", str(work / "energy.csv")])

report = json.loads((run_dir / "report.json").read_text())
print(f"\nartifacts under {work}; train report: "
      f"best_val={report['best_val_accuracy']:.3f} test={report['test_accuracy']:.3f}")
