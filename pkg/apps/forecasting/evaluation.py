"""
Forecast metrics, expanding-window cross-validation and holdout reports.

NRMSE is normalised by a population standard deviation whose source depends
on context: the validation block during cross-validation, the training
period for the final holdout evaluation.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import ForecastingError, LengthMismatch, Misalignment, TooShort, ZeroNormalizer
from .forecasters import FORECASTERS, ForecastResult
from .panel import RainfallPanel

logger = logging.getLogger(__name__)


# ============================================================================
# Metrics
# ============================================================================


def _paired(actual, forecast) -> tuple[np.ndarray, np.ndarray]:
    actual = np.asarray(actual, dtype=float)
    forecast = np.asarray(forecast, dtype=float)
    if actual.shape != forecast.shape:
        raise LengthMismatch(f"actual {actual.shape} vs forecast {forecast.shape}")
    if actual.size == 0:
        raise LengthMismatch("Metrics need at least one value")
    return actual, forecast


def smape(actual, forecast) -> float:
    """Symmetric MAPE in percent; a month where both values are 0 contributes 0."""
    actual, forecast = _paired(actual, forecast)
    denominator = (np.abs(forecast) + np.abs(actual)) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(denominator == 0, 0.0, np.abs(forecast - actual) / denominator)
    return float(100.0 * terms.mean())


def rmse(actual, forecast) -> float:
    actual, forecast = _paired(actual, forecast)
    return float(np.sqrt(np.mean((forecast - actual) ** 2)))


def nrmse(actual, forecast, normalizer: float) -> float:
    if not normalizer > 0:
        raise ZeroNormalizer(f"NRMSE normaliser must be positive, got {normalizer}")
    return rmse(actual, forecast) / normalizer


# ============================================================================
# Folds
# ============================================================================


@dataclass(frozen=True)
class Fold:
    """
    One expanding-window fold in 1-based month positions: train on
    1..train_end, validate on val_start..val_end.
    """

    train_end: int
    val_start: int
    val_end: int

    @property
    def train_slice(self) -> slice:
        return slice(0, self.train_end)

    @property
    def val_slice(self) -> slice:
        return slice(self.val_start - 1, self.val_end)


@dataclass(frozen=True)
class FoldPlan:
    n_train: int
    n_folds: int
    val_months: int
    folds: tuple[Fold, ...]


def build_folds(n_train: int, n_folds: int, val_months: int) -> FoldPlan:
    """
    Validation blocks tile the last n_folds·val_months training months;
    fold i starts at month n_train - (n_folds - i + 1)·val_months + 1,
    with folds and months both counted from 1.
    """
    if n_folds < 1 or val_months < 1:
        raise ValueError("Fold count and validation length must be positive")
    if n_train <= n_folds * val_months:
        raise TooShort(
            f"{n_train} training months cannot hold {n_folds} folds of {val_months} months"
        )
    folds = []
    for i in range(1, n_folds + 1):
        start = n_train - n_folds * val_months + (i - 1) * val_months + 1
        folds.append(Fold(train_end=start - 1, val_start=start, val_end=start + val_months - 1))
    return FoldPlan(n_train, n_folds, val_months, tuple(folds))


# ============================================================================
# Cross-validation
# ============================================================================


@dataclass(frozen=True)
class CvScore:
    fold_scores: tuple[float, ...]
    mean: float


def resolve_forecaster(model) -> Callable:
    return FORECASTERS[model] if isinstance(model, str) else model


def fold_score(forecaster, history: RainfallPanel, graph, config, fold: Fold) -> float:
    observed = history.head(fold.train_end)
    forecast = forecaster(observed, graph, config, fold.val_end - fold.train_end)
    actual = history.values[:, fold.val_slice]
    scores = [
        nrmse(actual[d], forecast.values[d], float(actual[d].std()))
        for d in range(history.n_districts)
    ]
    return float(np.mean(scores))


def cv_score(model, history: RainfallPanel, graph, config, plan: FoldPlan) -> CvScore:
    """
    Mean over folds of the mean per-district NRMSE on each validation block.

    `history` holds the training months only. A fold that raises scores +inf
    and so does the configuration's mean.
    """
    forecaster = resolve_forecaster(model)
    scores = []
    for number, fold in enumerate(plan.folds, start=1):
        try:
            score = fold_score(forecaster, history, graph, config, fold)
        except (ForecastingError, ArithmeticError, ValueError) as exc:
            logger.warning("Fold %d failed (%s: %s); scoring +inf", number, type(exc).__name__, exc)
            score = float("inf")
        scores.append(score)
    mean = float(np.mean(scores)) if all(np.isfinite(scores)) else float("inf")
    return CvScore(fold_scores=tuple(scores), mean=mean)


# ============================================================================
# Holdout evaluation
# ============================================================================


@dataclass(frozen=True, eq=False)
class EvalReport:
    districts: tuple[str, ...]
    smape: np.ndarray
    nrmse: np.ndarray
    years: tuple[int, ...]
    yearly_smape: np.ndarray
    normalizer: str = "train"

    @property
    def mean_nrmse(self) -> float:
        return float(self.nrmse.mean())

    @property
    def mean_smape(self) -> float:
        return float(self.smape.mean())

    def metrics_frame(self) -> pd.DataFrame:
        """District table: sMAPE in percent, NRMSE ×100, two decimals."""
        return pd.DataFrame(
            {
                "District": list(self.districts),
                "sMAPE (%)": np.round(self.smape, 2),
                "NRMSE": np.round(self.nrmse * 100, 2),
            }
        )

    def yearly_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            np.round(self.yearly_smape, 2),
            columns=[str(year) for year in self.years],
        )
        frame.insert(0, "District", list(self.districts))
        return frame


def holdout_evaluate(
    forecast: ForecastResult, panel: RainfallPanel, normalizer: str = "train"
) -> EvalReport:
    """
    Score a forecast over the panel's holdout months.

    NRMSE is normalised by each district's training-period SD, or by its
    holdout-period SD with normalizer="validation".
    """
    if forecast.districts != panel.districts:
        raise Misalignment("Forecast districts differ from the panel's districts")
    if forecast.months != panel.holdout_months:
        raise Misalignment(
            f"Forecast covers {forecast.horizon} months from "
            f"{forecast.months[0] if forecast.months else None}, "
            f"holdout has {len(panel.holdout_months)} from {panel.holdout_months[0]}"
        )
    if normalizer not in ("train", "validation"):
        raise ValueError(f"Unknown normalizer {normalizer!r}")

    actual = panel.holdout_values
    reference = panel.train_values if normalizer == "train" else actual
    sigma = reference.std(axis=1)

    years = tuple(sorted({year for year, _ in forecast.months}))
    month_years = np.array([year for year, _ in forecast.months])
    yearly = np.array(
        [
            [
                smape(actual[d, month_years == year], forecast.values[d, month_years == year])
                for year in years
            ]
            for d in range(panel.n_districts)
        ]
    ).reshape(panel.n_districts, len(years))

    return EvalReport(
        districts=panel.districts,
        smape=np.array([smape(actual[d], forecast.values[d]) for d in range(panel.n_districts)]),
        nrmse=np.array(
            [nrmse(actual[d], forecast.values[d], sigma[d]) for d in range(panel.n_districts)]
        ),
        years=years,
        yearly_smape=yearly,
        normalizer=normalizer,
    )


def improvement_table(reference: EvalReport, candidate: EvalReport) -> pd.DataFrame:
    """Percentage reduction 100·(A-B)/A of candidate B against reference A."""
    if reference.districts != candidate.districts:
        raise Misalignment("Reports cover different districts")
    with np.errstate(divide="ignore", invalid="ignore"):
        smape_gain = 100 * (reference.smape - candidate.smape) / reference.smape
        nrmse_gain = 100 * (reference.nrmse - candidate.nrmse) / reference.nrmse
    return pd.DataFrame(
        {
            "District": list(reference.districts),
            "sMAPE": np.round(smape_gain, 2),
            "NRMSE": np.round(nrmse_gain, 2),
        }
    )
