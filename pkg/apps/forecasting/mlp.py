"""
Dense ReLU regressor trained with Adam on an MSE + L1 objective.

Inputs and targets are standardised with training-row statistics; the
network itself works in standardised units and predictions are mapped back
to millimetres. The loss the optimiser sees is

    mean((f(x̃) - ỹ)²) + l1_alpha · Σ|W|

with the penalty applied to weights only.
"""

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput, TooFewSamples

logger = logging.getLogger(__name__)

MIN_TRAINING_ROWS = 11


# ============================================================================
# Specification
# ============================================================================


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_units: tuple[int, ...]
    learning_rate: float
    l1_alpha: float
    epochs: int
    batch_size: int = 32
    seed: int = 0
    patience: int = 10
    val_fraction: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "hidden_units", tuple(int(u) for u in self.hidden_units))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if any(u < 1 for u in self.hidden_units):
            raise ValueError(f"Hidden layer widths must be positive: {self.hidden_units}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.l1_alpha < 0:
            raise ValueError(f"l1_alpha must be nonnegative, got {self.l1_alpha}")
        if self.epochs < 0 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("epochs ≥ 0, batch_size ≥ 1 and patience ≥ 1 are required")
        if not 0 <= self.val_fraction < 1:
            raise ValueError(f"val_fraction must lie in [0, 1), got {self.val_fraction}")

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        widths = [self.input_dim, *self.hidden_units, 1]
        return list(zip(widths[:-1], widths[1:], strict=True))


@dataclass(frozen=True, eq=False)
class TrainedMlp:
    """Network weights plus the standardisation learned from training rows."""

    spec: MlpSpec
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    input_mean: np.ndarray
    input_scale: np.ndarray
    target_mean: float = 0.0
    target_scale: float = 1.0
    best_val_rmse: float = float("nan")
    best_epoch: int = 0
    epochs_run: int = 0
    train_loss_history: tuple[float, ...] = field(default=(), repr=False)
    val_rmse_history: tuple[float, ...] = field(default=(), repr=False)

    def to_json(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "input_mean": self.input_mean.tolist(),
            "input_scale": self.input_scale.tolist(),
            "target_mean": self.target_mean,
            "target_scale": self.target_scale,
            "best_val_rmse": None if np.isnan(self.best_val_rmse) else self.best_val_rmse,
            "best_epoch": self.best_epoch,
            "epochs_run": self.epochs_run,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "TrainedMlp":
        spec_fields = dict(payload["spec"])
        spec_fields["hidden_units"] = tuple(spec_fields["hidden_units"])
        best = payload.get("best_val_rmse")
        return cls(
            spec=MlpSpec(**spec_fields),
            weights=tuple(np.asarray(w, dtype=float) for w in payload["weights"]),
            biases=tuple(np.asarray(b, dtype=float) for b in payload["biases"]),
            input_mean=np.asarray(payload["input_mean"], dtype=float),
            input_scale=np.asarray(payload["input_scale"], dtype=float),
            target_mean=float(payload["target_mean"]),
            target_scale=float(payload["target_scale"]),
            best_val_rmse=float("nan") if best is None else float(best),
            best_epoch=int(payload.get("best_epoch", 0)),
            epochs_run=int(payload.get("epochs_run", 0)),
        )


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent generators for initialisation and batch shuffling."""
    init_seq, shuffle_seq = np.random.SeedSequence(seed & (2**64 - 1)).spawn(2)
    return np.random.default_rng(init_seq), np.random.default_rng(shuffle_seq)


def init(spec: MlpSpec) -> TrainedMlp:
    """Glorot-uniform weights, zero biases, identity standardisation."""
    rng, _ = _streams(spec.seed)
    weights = []
    for fan_in, fan_out in spec.layer_shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return TrainedMlp(
        spec=spec,
        weights=tuple(weights),
        biases=tuple(np.zeros(fan_out) for _, fan_out in spec.layer_shapes),
        input_mean=np.zeros(spec.input_dim),
        input_scale=np.ones(spec.input_dim),
    )


# ============================================================================
# Forward and backward passes (standardised units)
# ============================================================================


def _forward(weights, biases, Z):
    activations = [Z]
    pre_activations = []
    hidden = Z
    for W, b in zip(weights[:-1], biases[:-1], strict=True):
        a = hidden @ W + b
        pre_activations.append(a)
        hidden = np.maximum(a, 0.0)
        activations.append(hidden)
    output = (hidden @ weights[-1] + biases[-1])[:, 0]
    return output, activations, pre_activations


def _objective(weights, biases, Z, target, alpha) -> float:
    output, _, _ = _forward(weights, biases, Z)
    penalty = sum(np.abs(W).sum() for W in weights)
    return float(np.mean((output - target) ** 2) + alpha * penalty)


def _backward(weights, biases, Z, target, alpha):
    output, activations, pre_activations = _forward(weights, biases, Z)
    delta = (2.0 / target.shape[0]) * (output - target)[:, None]
    weight_grads = [None] * len(weights)
    bias_grads = [None] * len(weights)
    for layer in reversed(range(len(weights))):
        weight_grads[layer] = activations[layer].T @ delta + alpha * np.sign(weights[layer])
        bias_grads[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights[layer].T) * (pre_activations[layer - 1] > 0)
    return weight_grads, bias_grads


def _check_inputs(net: TrainedMlp, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != net.spec.input_dim:
        raise DimensionMismatch(
            f"Network expects {net.spec.input_dim} inputs, got shape {X.shape}"
        )
    return X


def _standardise(net: TrainedMlp, X, y=None):
    Z = (_check_inputs(net, X) - net.input_mean) / net.input_scale
    if y is None:
        return Z
    target = (np.asarray(y, dtype=float) - net.target_mean) / net.target_scale
    return Z, target


def forward(net: TrainedMlp, x) -> float:
    """Prediction for a single input vector, in target units."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.spec.input_dim,):
        raise DimensionMismatch(
            f"Network expects {net.spec.input_dim} inputs, got shape {x.shape}"
        )
    return float(predict(net, x[None, :])[0])


def predict(net: TrainedMlp, X) -> np.ndarray:
    output, _, _ = _forward(net.weights, net.biases, _standardise(net, X))
    return output * net.target_scale + net.target_mean


def loss(net: TrainedMlp, X, y) -> float:
    """Training objective on a batch, in standardised units."""
    Z, target = _standardise(net, X, y)
    return _objective(net.weights, net.biases, Z, target, net.spec.l1_alpha)


def grad(net: TrainedMlp, X, y) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradient of `loss` with respect to weights and biases."""
    Z, target = _standardise(net, X, y)
    if target.shape[0] == 0:
        raise TooFewSamples("Cannot take a gradient over an empty batch")
    return _backward(net.weights, net.biases, Z, target, net.spec.l1_alpha)


# ============================================================================
# Optimiser
# ============================================================================


class Adam:
    """Adam with bias-corrected moments; updates parameter arrays in place."""

    def __init__(self, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = None
        self._v = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.t += 1
        correction1 = 1 - self.beta1**self.t
        correction2 = 1 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self._m, self._v, strict=True):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


# ============================================================================
# Training
# ============================================================================


def _scale(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    scale = values.std(axis=0)
    return mean, np.where(scale > 0, scale, 1.0)


def train(net: TrainedMlp, X, y) -> TrainedMlp:
    """
    Train with seeded mini-batches and early stopping on a chronological tail.

    The last `val_fraction` of rows is held out; the returned network carries
    the weights of the epoch with the lowest validation RMSE.
    """
    X = _check_inputs(net, X)
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(f"Target of shape {y.shape} for {X.shape[0]} rows")
    if X.shape[0] < MIN_TRAINING_ROWS:
        raise TooFewSamples(f"Training needs more than 10 rows, got {X.shape[0]}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFiniteInput("Training data contain NaN or infinite values")
    spec = net.spec
    if spec.epochs == 0:
        return net

    n_val = int(round(X.shape[0] * spec.val_fraction)) if spec.val_fraction else 0
    n_fit = X.shape[0] - n_val
    input_mean, input_scale = _scale(X[:n_fit])
    target_mean, target_scale = _scale(y[:n_fit])
    net = replace(
        net,
        input_mean=input_mean,
        input_scale=input_scale,
        target_mean=float(target_mean),
        target_scale=float(target_scale),
    )
    Z, target = _standardise(net, X, y)
    Z_fit, target_fit = Z[:n_fit], target[:n_fit]
    Z_val, y_val = Z[n_fit:], y[n_fit:]

    weights = [W.copy() for W in net.weights]
    biases = [b.copy() for b in net.biases]
    params = [*weights, *biases]
    optimiser = Adam(spec.learning_rate)
    _, shuffle_rng = _streams(spec.seed)

    best = (float("inf"), [W.copy() for W in weights], [b.copy() for b in biases])
    best_epoch = 0
    history = []
    val_history = []
    stale = 0
    epoch = 0
    for epoch in range(1, spec.epochs + 1):
        order = shuffle_rng.permutation(n_fit)
        for start in range(0, n_fit, spec.batch_size):
            rows = order[start : start + spec.batch_size]
            weight_grads, bias_grads = _backward(
                weights, biases, Z_fit[rows], target_fit[rows], spec.l1_alpha
            )
            optimiser.step(params, [*weight_grads, *bias_grads])
        history.append(_objective(weights, biases, Z_fit, target_fit, spec.l1_alpha))

        if n_val:
            output, _, _ = _forward(weights, biases, Z_val)
            val_rmse = float(np.sqrt(np.mean((output * target_scale + target_mean - y_val) ** 2)))
        else:
            val_rmse = float("nan")
        val_history.append(val_rmse)
        if not n_val or val_rmse < best[0]:
            best = (val_rmse, [W.copy() for W in weights], [b.copy() for b in biases])
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= spec.patience:
                logger.debug(
                    "Early stopping at epoch %d (best validation RMSE %.4f)", epoch, best[0]
                )
                break

    best_rmse, best_weights, best_biases = best
    return replace(
        net,
        weights=tuple(best_weights),
        biases=tuple(best_biases),
        best_val_rmse=best_rmse,
        best_epoch=best_epoch,
        epochs_run=epoch,
        train_loss_history=tuple(history),
        val_rmse_history=tuple(val_history),
    )
