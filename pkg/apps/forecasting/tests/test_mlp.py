"""
Tests for the dense ReLU regressor.

Tests cover:
- Initialisation shapes and seed determinism
- Analytic gradients against central finite differences
- Training: loss decreases, early stopping keeps the best epoch, seeds,
  fitting a straight line
- Input validation and the minimum row count
- JSON round trip of trained weights
"""

from dataclasses import replace

import numpy as np
import pytest

from apps.forecasting.exceptions import DimensionMismatch, TooFewSamples
from apps.forecasting.mlp import (
    Adam,
    TrainedMlp,
    forward,
    grad,
    init,
    loss,
    predict,
    train,
)


@pytest.fixture
def data():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 3))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] ** 2 - X[:, 2]
    return X, y


def numeric_gradient(net, X, y, layer, index, kind, eps=1e-6):
    params = net.weights if kind == "W" else net.biases

    def shifted(delta):
        arrays = [p.copy() for p in params]
        arrays[layer][index] += delta
        field = "weights" if kind == "W" else "biases"
        return loss(replace(net, **{field: tuple(arrays)}), X, y)

    return (shifted(eps) - shifted(-eps)) / (2 * eps)


class TestInit:
    """Tests for weight initialisation."""

    def test_layer_shapes(self, mlp_spec):
        net = init(mlp_spec)

        assert [W.shape for W in net.weights] == [(3, 5), (5, 4), (4, 1)]
        assert all((b == 0).all() for b in net.biases)

    def test_same_seed_same_weights(self, mlp_spec):
        a, b = init(mlp_spec), init(mlp_spec)

        for wa, wb in zip(a.weights, b.weights, strict=True):
            np.testing.assert_array_equal(wa, wb)

    def test_different_seed_different_weights(self, mlp_spec):
        a, b = init(mlp_spec), init(replace(mlp_spec, seed=1))

        assert not np.array_equal(a.weights[0], b.weights[0])

    def test_no_hidden_layers_is_linear(self, mlp_spec):
        net = init(replace(mlp_spec, hidden_units=()))

        assert [W.shape for W in net.weights] == [(3, 1)]


class TestGradient:
    """Analytic gradients against central differences."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_finite_differences(self, mlp_spec, data, seed):
        X, y = data
        net = init(replace(mlp_spec, seed=seed, l1_alpha=0.01))
        batch = slice(0, 16)
        weight_grads, bias_grads = grad(net, X[batch], y[batch])

        rng = np.random.default_rng(seed)
        checked = 0
        for layer, W in enumerate(net.weights):
            for _ in range(5):
                index = tuple(rng.integers(n) for n in W.shape)
                if abs(W[index]) < 1e-4:
                    continue  # |w| kink of the L1 penalty
                numeric = numeric_gradient(net, X[batch], y[batch], layer, index, "W")
                assert weight_grads[layer][index] == pytest.approx(numeric, rel=1e-4, abs=1e-7)
                checked += 1
        for layer, b in enumerate(net.biases):
            index = (int(rng.integers(b.shape[0])),)
            numeric = numeric_gradient(net, X[batch], y[batch], layer, index, "b")
            assert bias_grads[layer][index] == pytest.approx(numeric, rel=1e-4, abs=1e-7)
        assert checked > 0

    def test_agreement_over_many_networks(self, mlp_spec_factory):
        rng = np.random.default_rng(42)
        agreed = total = 0
        for seed in range(60):
            n_hidden = int(rng.integers(0, 3))
            spec = mlp_spec_factory(
                input_dim=int(rng.integers(1, 5)),
                hidden_units=tuple(int(u) for u in rng.integers(1, 6, size=n_hidden)),
                l1_alpha=float(rng.choice([0.0, 1e-3, 1e-2])),
                seed=seed,
            )
            net = init(spec)
            X = rng.normal(size=(8, spec.input_dim))
            y = rng.normal(size=8)
            weight_grads, bias_grads = grad(net, X, y)
            pairs = [("W", net.weights, weight_grads), ("b", net.biases, bias_grads)]

            for kind, params, grads in pairs:
                for layer, array in enumerate(params):
                    for _ in range(3):
                        index = tuple(int(rng.integers(n)) for n in array.shape)
                        numeric = numeric_gradient(net, X, y, layer, index, kind, eps=1e-5)
                        exact = grads[layer][index]
                        tolerance = 1e-4 * max(abs(exact), abs(numeric)) + 1e-7
                        agreed += bool(abs(exact - numeric) <= tolerance)
                        total += 1

        assert total >= 200
        assert agreed / total >= 0.99

    def test_l1_term_is_alpha_times_sign(self, mlp_spec, data):
        X, _ = data
        net = init(replace(mlp_spec, l1_alpha=0.05))
        y = predict(net, X[:16])

        weight_grads, bias_grads = grad(net, X[:16], y)

        for W, g in zip(net.weights, weight_grads, strict=True):
            np.testing.assert_allclose(g, 0.05 * np.sign(W), atol=1e-12)
        for g in bias_grads:
            np.testing.assert_allclose(g, 0.0, atol=1e-12)

    def test_empty_batch_raises(self, mlp_spec):
        net = init(mlp_spec)

        with pytest.raises(TooFewSamples):
            grad(net, np.empty((0, 3)), np.empty(0))


class TestAdam:
    def test_moves_against_the_gradient(self):
        param = np.array([1.0, -1.0])

        Adam(learning_rate=0.1).step([param], [np.array([2.0, -2.0])])

        np.testing.assert_allclose(param, [0.9, -0.9], atol=1e-6)


class TestTrain:
    """Tests for mini-batch training with early stopping."""

    def test_training_reduces_loss(self, mlp_spec, data):
        X, y = data
        net = init(replace(mlp_spec, epochs=60))

        trained = train(net, X, y)

        assert trained.train_loss_history[-1] < trained.train_loss_history[0]
        assert np.sqrt(np.mean((predict(trained, X) - y) ** 2)) < y.std()

    def test_training_is_deterministic(self, mlp_spec, data):
        X, y = data

        a = train(init(mlp_spec), X, y)
        b = train(init(mlp_spec), X, y)

        np.testing.assert_array_equal(predict(a, X), predict(b, X))

    def test_early_stopping_restores_best_epoch(self, mlp_spec, data):
        X, y = data
        spec = replace(mlp_spec, epochs=500, patience=3, learning_rate=0.1)

        trained = train(init(spec), X, y)

        history = trained.val_rmse_history
        assert len(history) == trained.epochs_run
        assert trained.best_val_rmse == min(history)
        assert trained.best_val_rmse <= history[-1]
        assert history[trained.best_epoch - 1] == trained.best_val_rmse
        assert trained.epochs_run - trained.best_epoch <= spec.patience
        if trained.epochs_run < spec.epochs:
            assert trained.epochs_run - trained.best_epoch == spec.patience

    def test_returned_weights_score_the_best_validation_rmse(self, mlp_spec, data):
        X, y = data
        spec = replace(mlp_spec, epochs=200, patience=3, learning_rate=0.1)
        n_val = round(len(y) * spec.val_fraction)

        trained = train(init(spec), X, y)

        tail_rmse = np.sqrt(np.mean((predict(trained, X[-n_val:]) - y[-n_val:]) ** 2))
        assert tail_rmse == pytest.approx(trained.best_val_rmse, rel=1e-9)

    def test_learns_a_line(self, mlp_spec_factory):
        X = np.linspace(-1.0, 1.0, 100)[:, None]
        y = 2.0 * X[:, 0]
        spec = mlp_spec_factory(
            input_dim=1,
            hidden_units=(16,),
            learning_rate=0.01,
            l1_alpha=0.0,
            epochs=500,
            batch_size=16,
            val_fraction=0.0,
        )

        trained = train(init(spec), X, y)

        assert np.sqrt(np.mean((predict(trained, X) - y) ** 2)) < 0.05 * y.std()

    def test_zero_epochs_returns_initial_network(self, mlp_spec, data):
        X, y = data
        net = init(replace(mlp_spec, epochs=0))

        assert train(net, X, y) is net

    def test_needs_more_than_ten_rows(self, mlp_spec, data):
        X, y = data

        with pytest.raises(TooFewSamples):
            train(init(mlp_spec), X[:10], y[:10])

    def test_rejects_wrong_input_width(self, mlp_spec, data):
        X, y = data

        with pytest.raises(DimensionMismatch):
            train(init(mlp_spec), X[:, :2], y)

    def test_forward_matches_predict(self, mlp_spec, data):
        X, y = data
        trained = train(init(mlp_spec), X, y)

        assert forward(trained, X[7]) == pytest.approx(predict(trained, X)[7])


class TestSerialisation:
    def test_json_round_trip(self, mlp_spec, data):
        X, y = data
        trained = train(init(mlp_spec), X, y)

        restored = TrainedMlp.from_json(trained.to_json())

        np.testing.assert_allclose(predict(restored, X), predict(trained, X))
        assert restored.best_epoch == trained.best_epoch
