"""Train the hybrid head end to end on synthetic embeddings, clean and noisy.

Wide embeddings are first projected with train-split PCA so they fit the
amplitude-encoding register, plus a constant anchor feature (expectation
values cannot see a global sign flip of the state, so data that is symmetric
through the origin needs the anchor to become measurable). The same pipeline
then trains once noiselessly and once under gate and shot noise.
"""
import time

from qhead.ansatz import CircuitSpec
from qhead.datasets import (
    append_anchor_feature,
    make_count_splits,
    pca_project,
    synthetic_clusters,
)
from qhead.head import EncoderConfig, build_hybrid_head
from qhead.noise import NoiseModel
from qhead.trainer import TrainConfig, train

# 768-dim clusters, separation 10 along a random axis
raw = synthetic_clusters(dim=768, n_per_class=60, separation=10.0, seed=101)
split = make_count_splits(raw, train_per_class=24, val_per_class=8, seed=101)
data = append_anchor_feature(pca_project(split, 8), value=6.0)
print(f"dataset: {len(data)} samples, {data.dim} features after PCA + anchor, "
      f"train/val/test = {len(data.train_idx)}/{len(data.val_idx)}/{len(data.test_idx)}")

encoder = EncoderConfig(num_encoders=1, encoder_qubits=6, encoder_layers=3)
spec = CircuitSpec(qubits=6, main_layers=2, reupload_count=4, reupload_layers=1)
config = TrainConfig(learning_rate=0.02, batch_size=16, epochs=60, seed=7)

for label, noise in [
    ("noiseless", None),
    ("gate + shot noise", NoiseModel(p1q=1e-4, p2q=1e-3, shots=8192, seed=3)),
]:
    model = build_hybrid_head(encoder, spec, seed=42)
    started = time.perf_counter()
    report, _ = train(model, data, config, noise=noise)
    print(f"\n[{label}] {time.perf_counter() - started:.0f}s, "
          f"{report.parameter_count} parameters")
    print(f"  best val acc {report.best_val_accuracy:.3f} at epoch {report.best_epoch}, "
          f"test acc {report.test_accuracy:.3f}")
    curve = ", ".join(f"{v:.2f}" for v in report.val_accuracy[:10])
    print(f"  first val epochs: {curve}")
