"""Dataset ingestion, split construction, synthetic generation."""
from __future__ import annotations

import numpy as np
import pytest

from qhead.datasets import (
    EmbeddingDataset,
    append_anchor_feature,
    load_embeddings,
    make_count_splits,
    make_benchmark_splits,
    pca_project,
    pool_to_dim,
    save_embeddings_binary,
    save_embeddings_csv,
    synthetic_clusters,
)
from qhead.errors import ConfigurationError, DataError, DataFormatError


def _tiny_dataset():
    vectors = np.array([[1.0, -2.5, 0.125], [3.5, 0.0, -7.25]], dtype=np.float32)
    labels = np.array([1, 0])
    return EmbeddingDataset(vectors, labels)


class TestBinaryFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        ds = _tiny_dataset()
        path = tmp_path / "tiny.emb"
        save_embeddings_binary(ds, path)
        back = load_embeddings(path, "binary")
        np.testing.assert_array_equal(back.vectors, ds.vectors)
        np.testing.assert_array_equal(back.labels, ds.labels)

    def test_handcrafted_bytes(self, tmp_path):
        import struct

        blob = b"EMB1" + struct.pack("<II", 3, 2)
        blob += struct.pack("<6f", 1.0, -2.5, 0.125, 3.5, 0.0, -7.25)
        blob += bytes([1, 0])
        path = tmp_path / "hand.emb"
        path.write_bytes(blob)
        ds = load_embeddings(path, "binary")
        np.testing.assert_array_equal(ds.vectors, _tiny_dataset().vectors)
        np.testing.assert_array_equal(ds.labels, [1, 0])

    def test_bad_magic_names_offset(self, tmp_path):
        path = tmp_path / "bad.emb"
        path.write_bytes(b"XXXX" + b"\x00" * 20)
        with pytest.raises(DataFormatError, match="byte 0"):
            load_embeddings(path, "binary")

    def test_truncated_names_lengths(self, tmp_path):
        path = tmp_path / "trunc.emb"
        save_embeddings_binary(_tiny_dataset(), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-3])
        with pytest.raises(DataFormatError, match=rf"needs {len(blob)} bytes.*has {len(blob) - 3}"):
            load_embeddings(path, "binary")

    def test_dim_mismatch_rejected(self, tmp_path):
        import struct

        # header promises dim=4 but payload carries dim=3 rows
        blob = b"EMB1" + struct.pack("<II", 4, 2)
        blob += struct.pack("<6f", *range(6))
        blob += bytes([0, 1])
        path = tmp_path / "mismatch.emb"
        path.write_bytes(blob)
        with pytest.raises(DataFormatError):
            load_embeddings(path, "binary")

    def test_label_out_of_class_range(self, tmp_path):
        ds = EmbeddingDataset(np.ones((2, 2), dtype=np.float32), np.array([0, 3]))
        path = tmp_path / "labels.emb"
        save_embeddings_binary(ds, path)
        with pytest.raises(DataError, match="label 3"):
            load_embeddings(path, "binary", num_classes=2)


class TestCsvFormat:
    def test_csv_equals_binary(self, tmp_path):
        rng = np.random.default_rng(3)
        ds = EmbeddingDataset(
            rng.standard_normal((5, 4)).astype(np.float32), rng.integers(2, size=5)
        )
        bin_path = tmp_path / "d.emb"
        csv_path = tmp_path / "d.csv"
        save_embeddings_binary(ds, bin_path)
        save_embeddings_csv(ds, csv_path)
        a = load_embeddings(bin_path, "binary")
        b = load_embeddings(csv_path, "csv")
        np.testing.assert_array_equal(a.vectors, b.vectors)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,x0,x1\n0,1.0,2.0\n")
        with pytest.raises(DataFormatError, match="header"):
            load_embeddings(path, "csv")

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("label,f0,f1\n0,1.0,2.0\n1,3.0\n")
        with pytest.raises(DataFormatError, match="line 3"):
            load_embeddings(path, "csv")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_embeddings(tmp_path / "x", "json")


class TestBenchmarkSplits:
    def _corpus(self, n_total=9613, seed=0):
        rng = np.random.default_rng(seed)
        labels = np.zeros(n_total, dtype=np.int64)
        labels[: n_total // 2] = 1
        vectors = rng.standard_normal((n_total, 8)).astype(np.float32)
        return EmbeddingDataset(vectors, labels)

    def test_reference_sizes(self):
        ds = make_benchmark_splits(self._corpus(), seed=1)
        assert len(ds.train_idx) == 436
        assert len(ds.val_idx) == 76
        assert len(ds.test_idx) == 9613 - 512
        assert len(ds.test_idx) == 9101

    def test_train_plus_val_is_512(self):
        ds = make_benchmark_splits(self._corpus(5000), seed=2)
        assert len(ds.train_idx) + len(ds.val_idx) == 512

    def test_stratified_class_balance(self):
        ds = make_benchmark_splits(self._corpus(), seed=3)
        for idx, per_class in ((ds.train_idx, 218), (ds.val_idx, 38)):
            counts = np.bincount(ds.labels[idx], minlength=2)
            np.testing.assert_array_equal(counts, [per_class, per_class])

    def test_disjoint_and_complete(self):
        ds = make_benchmark_splits(self._corpus(2000), seed=4)
        all_idx = np.concatenate([ds.train_idx, ds.val_idx, ds.test_idx])
        assert len(np.unique(all_idx)) == len(all_idx) == 2000

    def test_seed_changes_membership_not_sizes(self):
        a = make_benchmark_splits(self._corpus(), seed=5)
        b = make_benchmark_splits(self._corpus(), seed=6)
        assert len(a.train_idx) == len(b.train_idx)
        assert not np.array_equal(a.train_idx, b.train_idx)

    def test_same_seed_identical(self):
        a = make_benchmark_splits(self._corpus(), seed=7)
        b = make_benchmark_splits(self._corpus(), seed=7)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        np.testing.assert_array_equal(a.val_idx, b.val_idx)

    def test_insufficient_class_count(self):
        rng = np.random.default_rng(1)
        ds = EmbeddingDataset(
            rng.standard_normal((400, 4)).astype(np.float32),
            np.concatenate([np.zeros(300, dtype=np.int64), np.ones(100, dtype=np.int64)]),
        )
        with pytest.raises(DataError, match="class 1"):
            make_benchmark_splits(ds, seed=0)


class TestCountSplits:
    def test_sizes_and_disjointness(self):
        ds = synthetic_clusters(dim=6, n_per_class=50, separation=2.0, seed=1)
        split = make_count_splits(ds, train_per_class=20, val_per_class=10, seed=2)
        assert len(split.train_idx) == 40
        assert len(split.val_idx) == 20
        assert len(split.test_idx) == 40
        combined = np.concatenate([split.train_idx, split.val_idx, split.test_idx])
        assert len(np.unique(combined)) == 100


class TestSyntheticClusters:
    def test_shapes_and_finiteness(self):
        ds = synthetic_clusters(dim=16, n_per_class=25, separation=4.0, seed=9)
        assert ds.vectors.shape == (50, 16)
        assert np.all(np.isfinite(ds.vectors))
        np.testing.assert_array_equal(np.bincount(ds.labels), [25, 25])

    def test_separation_grows_distance(self):
        near = synthetic_clusters(dim=8, n_per_class=200, separation=0.0, seed=3)
        far = synthetic_clusters(dim=8, n_per_class=200, separation=10.0, seed=3)

        def center_gap(ds):
            return np.linalg.norm(
                ds.vectors[ds.labels == 0].mean(axis=0) - ds.vectors[ds.labels == 1].mean(axis=0)
            )

        assert center_gap(near) < 1.0
        assert center_gap(far) == pytest.approx(10.0, abs=1.0)

    def test_negative_separation_rejected(self):
        with pytest.raises(ConfigurationError):
            synthetic_clusters(4, 10, -1.0, 0)

    def test_zero_separation_trains_to_chance(self):
        from qhead.baselines import logistic_train
        from qhead.trainer import TrainConfig

        ds = synthetic_clusters(dim=16, n_per_class=600, separation=0.0, seed=11)
        split = make_count_splits(ds, train_per_class=60, val_per_class=20, seed=11)
        _, report = logistic_train(split, TrainConfig(learning_rate=0.02, epochs=30, seed=1))
        assert abs(report.test_accuracy - 0.5) <= 0.05

    def test_wide_separation_trains_to_ceiling(self):
        from qhead.baselines import logistic_train
        from qhead.trainer import TrainConfig

        ds = synthetic_clusters(dim=768, n_per_class=120, separation=10.0, seed=13)
        split = make_count_splits(ds, train_per_class=50, val_per_class=20, seed=13)
        _, report = logistic_train(split, TrainConfig(learning_rate=0.05, epochs=40, seed=2))
        assert report.test_accuracy >= 0.99


class TestPreprocessing:
    def test_pool_block_means(self):
        ds = EmbeddingDataset(
            np.array([[1.0, 3.0, 2.0, 4.0], [0.0, 2.0, -2.0, 0.0]], dtype=np.float32),
            np.array([0, 1]),
        )
        pooled = pool_to_dim(ds, 2)
        np.testing.assert_allclose(pooled.vectors, [[2.0, 3.0], [1.0, -1.0]])

    def test_pool_requires_even_divisor(self):
        ds = EmbeddingDataset(np.ones((2, 6), dtype=np.float32), np.array([0, 1]))
        with pytest.raises(ConfigurationError):
            pool_to_dim(ds, 4)

    def test_anchor_appends_constant_column(self):
        ds = EmbeddingDataset(np.zeros((3, 2), dtype=np.float32), np.array([0, 1, 0]))
        out = append_anchor_feature(ds, value=2.5)
        assert out.dim == 3
        np.testing.assert_array_equal(out.vectors[:, 2], [2.5, 2.5, 2.5])
        with pytest.raises(ConfigurationError):
            append_anchor_feature(ds, value=0.0)

    def test_pca_recovers_dominant_direction(self):
        # antipodal clusters: the separation axis carries most variance, so
        # the first principal component keeps the full separation
        ds = synthetic_clusters(dim=100, n_per_class=150, separation=10.0, seed=5)
        split = make_count_splits(ds, train_per_class=80, val_per_class=20, seed=5)
        projected = pca_project(split, 4)
        gap = np.abs(
            projected.vectors[projected.labels == 0, 0].mean()
            - projected.vectors[projected.labels == 1, 0].mean()
        )
        assert gap > 8.0

    def test_pca_fit_ignores_test_split(self):
        ds = synthetic_clusters(dim=20, n_per_class=60, separation=4.0, seed=6)
        split = make_count_splits(ds, train_per_class=30, val_per_class=10, seed=6)
        a = pca_project(split, 3)
        mutated = split.vectors.copy()
        mutated[split.test_idx] += 50.0
        b = pca_project(
            EmbeddingDataset(mutated, split.labels, split.train_idx, split.val_idx,
                             split.test_idx),
            3,
        )
        np.testing.assert_allclose(
            a.vectors[split.train_idx], b.vectors[split.train_idx], atol=1e-4
        )

    def test_pca_bounds(self):
        ds = EmbeddingDataset(np.ones((4, 3), dtype=np.float32), np.zeros(4, dtype=np.int64))
        with pytest.raises(ConfigurationError):
            pca_project(ds, 5)
