"""Classical heads, the MLP encoder replacement, and batch-norm behavior."""
from __future__ import annotations

import numpy as np
import pytest

from qhead.ansatz import CircuitSpec
from qhead.baselines import LogisticModel, MlpConfig, MlpEncoder, MlpHead, logistic_train, mlp_head_train
from qhead.datasets import make_count_splits, synthetic_clusters
from qhead.errors import ConfigurationError, UnsupportedModeError
from qhead.head import HybridHead
from qhead.trainer import TrainConfig, count_model_parameters, cross_entropy_loss
from qhead.seeding import PARAM_INIT, stream


class TestMlpConfig:
    def test_hidden_dim_consistency(self):
        MlpConfig(0, 0)
        MlpConfig(1, 48)
        with pytest.raises(ConfigurationError):
            MlpConfig(0, 48)
        with pytest.raises(ConfigurationError):
            MlpConfig(1, 0)
        with pytest.raises(ConfigurationError):
            MlpConfig(2, 48)


class TestParameterCounts:
    def test_logistic_count(self):
        assert count_model_parameters(LogisticModel(768)) == 769

    @pytest.mark.parametrize(
        "config,count",
        [
            (MlpConfig(0, 0), 1_538),
            (MlpConfig(1, 48), 37_010),
            (MlpConfig(1, 96), 74_018),
            (MlpConfig(1, 144), 111_026),
            (MlpConfig(1, 192), 148_034),
        ],
    )
    def test_mlp_head_reference_counts(self, config, count):
        model = MlpHead(768, 2, config, stream(0, PARAM_INIT))
        assert count_model_parameters(model) == count

    def test_batch_norm_adds_two_per_hidden_unit(self):
        plain = MlpHead(768, 2, MlpConfig(1, 48), stream(0, PARAM_INIT))
        with_bn = MlpHead(768, 2, MlpConfig(1, 48, batch_norm=True), stream(0, PARAM_INIT))
        assert count_model_parameters(with_bn) - count_model_parameters(plain) == 96

    def test_mlp_encoder_reference_count(self):
        enc = MlpEncoder(768, 14, MlpConfig(0, 0), stream(0, PARAM_INIT))
        assert sum(a.size for a in enc.parameter_arrays().values()) == 768 * 14 + 14 == 10_766


class TestMlpHeadGradients:
    @pytest.mark.parametrize("config", [MlpConfig(0, 0), MlpConfig(1, 8), MlpConfig(1, 8, True)])
    def test_gradient_matches_finite_differences(self, config):
        rng = np.random.default_rng(7)
        model = MlpHead(5, 3, config, stream(1, PARAM_INIT))
        X = rng.standard_normal((6, 5))
        y = rng.integers(3, size=6)
        _, grads = model.batch_loss_and_gradients(X, y)

        def loss_now():
            # training-mode loss must be probed with frozen batch-norm running
            # stats; recompute through the same path
            logits, _ = model._forward(X, training=True)
            from qhead.trainer import softmax_cross_entropy_batch

            losses, _ = softmax_cross_entropy_batch(logits, y)
            return float(losses.mean())

        if model.bn is not None:
            # freeze running-stat updates so FD probes are side-effect free
            model.bn.updates = 1
            model.bn.running_mean = model.bn.running_mean.copy()
            model.bn.running_var = model.bn.running_var.copy()
        h = 1e-6
        worst = 0.0
        for key, arr in model.parameter_arrays().items():
            flat = arr.reshape(-1)
            gflat = grads[key].reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = loss_now()
                flat[j] = orig - h
                down = loss_now()
                flat[j] = orig
                worst = max(worst, abs((up - down) / (2 * h) - gflat[j]))
        assert worst < 1e-6

    def test_trains_separable_data(self):
        ds = synthetic_clusters(dim=768, n_per_class=80, separation=10.0, seed=3)
        split = make_count_splits(ds, train_per_class=40, val_per_class=15, seed=3)
        _, report = mlp_head_train(
            split, MlpConfig(1, 16), TrainConfig(learning_rate=0.01, epochs=40, seed=5)
        )
        assert report.test_accuracy >= 0.99


class TestBatchNorm:
    def test_eval_before_training_rejected(self):
        model = MlpHead(4, 2, MlpConfig(1, 8, batch_norm=True), stream(2, PARAM_INIT))
        with pytest.raises(UnsupportedModeError):
            model.predict_logits(np.zeros((3, 4)))

    def test_eval_statistics_frozen(self):
        rng = np.random.default_rng(11)
        model = MlpHead(4, 2, MlpConfig(1, 8, batch_norm=True), stream(3, PARAM_INIT))
        X = rng.standard_normal((16, 4))
        y = rng.integers(2, size=16)
        model.batch_loss_and_gradients(X, y)
        mean_before = model.bn.running_mean.copy()
        logits_a = model.predict_logits(X)
        logits_b = model.predict_logits(X[::-1])[::-1]
        np.testing.assert_array_equal(model.bn.running_mean, mean_before)
        np.testing.assert_allclose(logits_a, logits_b, atol=1e-12)

    def test_training_updates_running_stats(self):
        rng = np.random.default_rng(12)
        model = MlpHead(4, 2, MlpConfig(1, 8, batch_norm=True), stream(4, PARAM_INIT))
        before = model.bn.running_mean.copy()
        model.batch_loss_and_gradients(rng.standard_normal((8, 4)) + 3.0, np.zeros(8, dtype=int))
        assert not np.array_equal(model.bn.running_mean, before)


class TestMlpEncoder:
    def test_latent_in_unit_range(self):
        rng = np.random.default_rng(13)
        enc = MlpEncoder(12, 5, MlpConfig(1, 8), stream(5, PARAM_INIT))
        for _ in range(20):
            latent = enc.forward(10 * rng.standard_normal(12))
            assert latent.shape == (5,)
            assert np.all(np.abs(latent) <= 1.0)

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        enc = MlpEncoder(6, 4, MlpConfig(1, 8), stream(6, PARAM_INIT))
        x = rng.standard_normal(6)
        dlatent = rng.standard_normal(4)
        grads = enc.backward(x, dlatent)
        h = 1e-6
        for key, arr in enc.parameter_arrays().items():
            flat = arr.reshape(-1)
            gflat = grads[key].reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = float(dlatent @ enc.forward(x))
                flat[j] = orig - h
                down = float(dlatent @ enc.forward(x))
                flat[j] = orig
                assert gflat[j] == pytest.approx((up - down) / (2 * h), abs=1e-6)

    def test_batch_norm_rejected(self):
        with pytest.raises(ConfigurationError):
            MlpEncoder(6, 4, MlpConfig(1, 8, batch_norm=True), stream(0, PARAM_INIT))

    def test_swaps_into_hybrid_head_with_correct_gradients(self):
        # full differentiability through MLP encoder -> circuit -> linear layer
        rng = np.random.default_rng(15)
        spec = CircuitSpec(qubits=3, main_layers=1, reupload_count=1)
        enc = MlpEncoder(6, 3, MlpConfig(0, 0), stream(7, PARAM_INIT))
        model = HybridHead(enc, spec, num_classes=2, rng=stream(8, PARAM_INIT))
        X = rng.standard_normal((3, 6))
        y = np.array([0, 1, 1])
        _, grads = model.batch_loss_and_gradients(X, y)

        def loss_now():
            logits = model.predict_logits(X)
            return float(
                np.mean([cross_entropy_loss(l, int(t))[0] for l, t in zip(logits, y)])
            )

        h = 1e-5
        worst = 0.0
        for key, arr in model.parameter_arrays().items():
            flat = arr.reshape(-1)
            gflat = grads[key].reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = loss_now()
                flat[j] = orig - h
                down = loss_now()
                flat[j] = orig
                worst = max(worst, abs((up - down) / (2 * h) - gflat[j]))
        assert worst < 1e-4


class TestLogisticBehavior:
    def test_untrained_predicts_first_class(self):
        model = LogisticModel(4)
        logits = model.predict_logits(np.random.default_rng(0).standard_normal((5, 4)))
        assert np.all(np.argmax(logits, axis=1) == 0)

    def test_l2_penalty_shrinks_weights(self):
        ds = synthetic_clusters(dim=8, n_per_class=60, separation=6.0, seed=9)
        split = make_count_splits(ds, train_per_class=30, val_per_class=10, seed=9)
        _, _ = logistic_train(split, TrainConfig(learning_rate=0.05, epochs=30, seed=1))
        plain, _ = logistic_train(split, TrainConfig(learning_rate=0.05, epochs=30, seed=1))
        decayed, _ = logistic_train(
            split, TrainConfig(learning_rate=0.05, epochs=30, weight_decay=0.5, seed=1)
        )
        assert np.linalg.norm(decayed.weights) < np.linalg.norm(plain.weights)