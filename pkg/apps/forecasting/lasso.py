"""
L1-penalised linear regression by cyclic coordinate descent.

Minimises (1/(2N))·||y - b0 - Xb||² + lam·||b||_1 with an unpenalised
intercept. Columns are standardised internally (population SD); coefficients
are reported on the original feature scale.
"""

import logging
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput, NotConvergedWarning, TooFewPoints

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    lam: float
    n_iter: int = 0
    converged: bool = True
    objective_path: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[0]

    def to_json(self, feature_names: Sequence[str] | None = None) -> dict:
        names = feature_names or [f"x{j}" for j in range(self.n_features)]
        if len(names) != self.n_features:
            raise DimensionMismatch(
                f"{len(names)} feature names for {self.n_features} coefficients"
            )
        return {
            "lambda": self.lam,
            "intercept": self.intercept,
            "coefficients": dict(zip(names, self.coefficients.tolist(), strict=True)),
            "converged": self.converged,
            "n_iter": self.n_iter,
        }


def soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def _objective(residual: np.ndarray, beta: np.ndarray, lam: float) -> float:
    n = residual.shape[0]
    return float(residual @ residual / (2 * n) + lam * np.abs(beta).sum())


def fit_lasso(
    X,
    y,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LinearModel:
    """
    Fit the LASSO by cyclic coordinate descent.

    Stops when the largest standardised coefficient change in a sweep falls
    below `tol`; hitting `max_iter` keeps the last iterate and emits
    NotConvergedWarning.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionMismatch(f"Design matrix must be N×P with N, P ≥ 1, got {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(f"Target of shape {y.shape} for {X.shape[0]} rows")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFiniteInput("LASSO inputs contain NaN or infinite values")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")

    n, p = X.shape
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    active = scales > 0
    scales = np.where(active, scales, 1.0)
    Z = (X - means) / scales
    y_mean = y.mean()

    beta = np.zeros(p)
    residual = y - y_mean
    path = [_objective(residual, beta, lam)]
    converged = False
    sweeps = 0
    columns = np.flatnonzero(active)

    for sweeps in range(1, max_iter + 1):
        max_change = 0.0
        for j in columns:
            z = Z[:, j]
            old = beta[j]
            rho = z @ residual / n + old
            new = soft_threshold(rho, lam)
            if new != old:
                residual -= z * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        path.append(_objective(residual, beta, lam))
        if max_change < tol:
            converged = True
            break

    if not converged:
        message = (
            f"Coordinate descent stopped after {max_iter} sweeps "
            f"(lambda={lam:g}, {p} features); keeping the last iterate"
        )
        logger.warning(message)
        warnings.warn(message, NotConvergedWarning, stacklevel=2)

    coefficients = beta / scales
    return LinearModel(
        intercept=float(y_mean - coefficients @ means),
        coefficients=coefficients,
        feature_means=means,
        feature_scales=scales,
        lam=float(lam),
        n_iter=sweeps,
        converged=converged,
        objective_path=tuple(path),
    )


def predict(model: LinearModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise DimensionMismatch(
            f"Model expects {model.n_features} features, got shape {x.shape}"
        )
    return float(model.intercept + model.coefficients @ x)


def predict_many(model: LinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"Model expects {model.n_features} features, got shape {X.shape}"
        )
    return model.intercept + X @ model.coefficients


def fit_ols_slope(y) -> float:
    """Least-squares slope of y against 1..n."""
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        raise TooFewPoints(f"A slope needs at least 2 points, got {y.size}")
    t = np.arange(1, y.size + 1, dtype=float)
    centred = t - t.mean()
    return float(centred @ (y - y.mean()) / (centred @ centred))
