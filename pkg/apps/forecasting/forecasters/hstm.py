"""
Hierarchical spatio-temporal model (HSTM).

Stage 1 forecasts the nine smoothed yearly features of every district with
one LASSO per (feature, district), recursively over whole years. Stage 2 is a
per-district monthly MLP whose input is the STLM lag vector extended with the
nine yearly features of the month's year: smoothed observed features for
training months, Stage-1 forecasts for horizon months.
"""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..exceptions import HistoryTooShort, MissingDistrictConfig, MissingYearlyFeature
from ..features import (
    FEATURE_TYPES,
    N_FEATURES,
    YearlyFeatureTable,
    descriptors_at,
    smooth_cube,
    whole_years,
    yearly_feature_cube,
)
from ..lasso import DEFAULT_MAX_ITER, DEFAULT_TOL, LinearModel, fit_lasso, predict
from ..mlp import TrainedMlp, init, train
from ..mlp import predict as mlp_predict
from ..panel import RainfallPanel, month_range, shift_month
from .base import ForecastResult, aligned_graph, config_hash, district_seed, neighbor_indices
from .recursion import LagLayout, lag_matrix, lag_vector, recursive_joint_forecast
from .stlm import StlmDistrictConfig, district_layout

logger = logging.getLogger(__name__)

N_DESCRIPTORS = 3
MONTHS_PER_YEAR = 12


# ============================================================================
# Configuration
# ============================================================================


@dataclass(frozen=True)
class Stage1FeatureConfig:
    """Smoothing span, lag structure, descriptor window and penalty for one feature."""

    span: int
    p: int
    q: int
    k: int
    L: int
    lam: float

    def __post_init__(self):
        if self.span < 1 or self.p < 1 or self.L < 1:
            raise ValueError("span, p and L must be positive")
        if self.k < 0 or (self.k > 0 and self.q < 1):
            raise ValueError("k must be nonnegative and q ≥ 1 when k > 0")
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")


@dataclass(frozen=True)
class HstmConfig:
    stage1: Mapping[str, Stage1FeatureConfig]
    stage2: Mapping[str, StlmDistrictConfig]
    seed: int = 0

    def __post_init__(self):
        missing = [name for name in FEATURE_TYPES if name not in self.stage1]
        if missing:
            raise ValueError(f"Stage-1 configuration missing features: {', '.join(missing)}")

    @property
    def spans(self) -> tuple[int, ...]:
        return tuple(self.stage1[name].span for name in FEATURE_TYPES)

    def for_district(self, name: str) -> StlmDistrictConfig:
        try:
            return self.stage2[name]
        except KeyError:
            raise MissingDistrictConfig(name) from None


# ============================================================================
# Stage 1
# ============================================================================


def stage1_design(series: np.ndarray, d: int, layout: LagLayout, window: int, start: int, stop: int):
    """Lag columns followed by slope, mean difference and momentum."""
    lags = lag_matrix(series, d, layout, start, stop)
    descriptors = np.array(
        [
            (desc.slope, desc.mean_diff, desc.momentum)
            for desc in (descriptors_at(series[d], t, window) for t in range(start, stop))
        ],
        dtype=float,
    ).reshape(stop - start, N_DESCRIPTORS)
    return np.hstack([lags, descriptors])


def _stage1_step(i: int, layout: LagLayout, model: LinearModel, window: int):
    def step(visible, t):
        return predict(model, stage1_design(visible, i, layout, window, t, t + 1)[0])

    return step


@dataclass(frozen=True, eq=False)
class Stage1Result:
    forecast: np.ndarray  # D × horizon_years × 9
    models: dict  # (feature, district) -> LinearModel


def stage1_fit_forecast(
    smoothed: np.ndarray,
    districts,
    graph,
    stage1: Mapping[str, Stage1FeatureConfig],
    horizon_years: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Stage1Result:
    """
    Fit per-(feature, district) LASSO models and recurse jointly over years.

    Features never enter each other's regressions, so each feature's
    D-district recursion runs on its own; descriptors are recomputed from
    windows that include earlier forecast years. Forecasts are not clipped.
    """
    n_districts, n_years, _ = smoothed.shape
    forecast = np.empty((n_districts, horizon_years, N_FEATURES))
    models: dict[tuple[str, str], LinearModel] = {}

    for f, feature in enumerate(FEATURE_TYPES):
        cfg = stage1[feature]
        series = smoothed[:, :, f]
        layouts = [
            LagLayout(p=cfg.p, neighbors=neighbor_indices(graph, i, cfg.k), q=cfg.q)
            for i in range(n_districts)
        ]
        fitted = []
        for i, layout in enumerate(layouts):
            start = max(layout.first_row, 1)
            if start >= n_years:
                raise HistoryTooShort(
                    f"{feature}: {n_years} training years cannot support p={cfg.p}, q={cfg.q}"
                )
            X = stage1_design(series, i, layout, cfg.L, start, n_years)
            model = fit_lasso(X, series[i, start:], cfg.lam, tol=tol, max_iter=max_iter)
            models[(feature, districts[i])] = model
            fitted.append(model)

        values, _ = recursive_joint_forecast(
            [_stage1_step(i, layouts[i], fitted[i], cfg.L) for i in range(n_districts)],
            series,
            horizon_years,
            clip=False,
        )
        forecast[:, :, f] = values

    return Stage1Result(forecast=forecast, models=models)


# ============================================================================
# Stage 2
# ============================================================================


def stage2_input(
    history: np.ndarray,
    graph,
    cfg: StlmDistrictConfig,
    yearly: np.ndarray,
    d: int,
    t: int,
) -> np.ndarray:
    """
    Lag vector of district `d` at month position `t` plus the nine yearly
    features of that month's year (`yearly` is D × years × 9, year 0 being
    the first year of the history).
    """
    year = t // MONTHS_PER_YEAR
    if not 0 <= year < yearly.shape[1]:
        raise MissingYearlyFeature(f"No yearly features for year index {year}")
    return np.concatenate([lag_vector(history, d, district_layout(graph, d, cfg), t), yearly[d, year]])


def _stage2_design(history, d, layout, yearly, start, stop):
    lags = lag_matrix(history, d, layout, start, stop)
    years = np.arange(start, stop) // MONTHS_PER_YEAR
    if years[-1] >= yearly.shape[1]:
        raise MissingYearlyFeature(f"No yearly features for year index {years[-1]}")
    return np.hstack([lags, yearly[d, years]])


def stage2_fit(observed: RainfallPanel, graph, config: HstmConfig, smoothed: np.ndarray):
    history = observed.values
    layouts = []
    networks: list[TrainedMlp] = []
    for i, name in enumerate(observed.districts):
        cfg = config.for_district(name)
        layout = district_layout(graph, i, cfg)
        start = max(layout.first_row, MONTHS_PER_YEAR)
        if start >= observed.n_months:
            raise HistoryTooShort(
                f"District '{name}' needs more than {start} months of history for Stage 2"
            )
        X = _stage2_design(history, i, layout, smoothed, start, observed.n_months)
        spec = cfg.mlp_spec(layout.dim + N_FEATURES, district_seed(config.seed, name))
        networks.append(train(init(spec), X, history[i, start:]))
        layouts.append(layout)
    return layouts, networks


# ============================================================================
# Composition
# ============================================================================


def hstm_fit_forecast(
    observed: RainfallPanel,
    graph,
    config: HstmConfig,
    horizon: int,
    yearly_override: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ForecastResult:
    """
    Fit both stages on `observed` and forecast `horizon` months.

    With `yearly_override` (D × ceil(H/12) × 9) the Stage-1 forecasts are
    replaced by the given feature vectors, e.g. true smoothed features for an
    oracle comparison.
    """
    graph = aligned_graph(graph, observed.districts)
    years = whole_years(observed.months)
    raw = yearly_feature_cube(observed.values, observed.districts)
    smoothed = smooth_cube(raw, config.spans)
    horizon_years = math.ceil(horizon / MONTHS_PER_YEAR)

    stage1 = stage1_fit_forecast(
        smoothed, observed.districts, graph, config.stage1, horizon_years, tol, max_iter
    )
    future = stage1.forecast
    if yearly_override is not None:
        future = np.asarray(yearly_override, dtype=float)
        if future.shape != stage1.forecast.shape:
            raise MissingYearlyFeature(
                f"Override of shape {future.shape}, expected {stage1.forecast.shape}"
            )
    yearly = np.concatenate([smoothed, future], axis=1)

    layouts, networks = stage2_fit(observed, graph, config, smoothed)

    def predictor(i):
        layout, net = layouts[i], networks[i]

        def step(visible, t):
            x = _stage2_design(visible, i, layout, yearly, t, t + 1)
            return float(mlp_predict(net, x)[0])

        return step

    values, provenance = recursive_joint_forecast(
        [predictor(i) for i in range(observed.n_districts)], observed.values, horizon
    )
    table = YearlyFeatureTable(
        districts=observed.districts,
        years=years,
        raw=raw,
        smoothed=smoothed,
        spans=config.spans,
    )
    forecast_years = tuple(years[-1] + 1 + y for y in range(horizon_years))
    return ForecastResult(
        model_name="hstm",
        districts=observed.districts,
        origin=observed.months[-1],
        months=month_range(shift_month(observed.months[-1], 1), horizon),
        values=values,
        provenance=provenance,
        config_hash=config_hash(config),
        extras={
            "yearly_table": table,
            "stage1_forecast": stage1.forecast,
            "stage1_years": forecast_years,
            "stage1_models": stage1.models,
            "networks": dict(zip(observed.districts, networks, strict=True)),
        },
    )


def oracle_yearly_features(panel: RainfallPanel, config: HstmConfig, horizon: int) -> np.ndarray:
    """
    True smoothed features for the holdout years of a split panel, with the
    EMA run through the training years first. Shaped like a Stage-1 forecast.
    """
    horizon_years = math.ceil(horizon / MONTHS_PER_YEAR)
    n_observed_years = len(whole_years(panel.train_months))
    n_months = MONTHS_PER_YEAR * (n_observed_years + horizon_years)
    if n_months > panel.n_months:
        raise MissingYearlyFeature(
            f"Panel ends before the last of {horizon_years} holdout years"
        )
    raw = yearly_feature_cube(panel.values[:, :n_months], panel.districts)
    return smooth_cube(raw, config.spans)[:, n_observed_years:, :]


def fit_forecast(observed: RainfallPanel, graph, config: HstmConfig, horizon: int) -> ForecastResult:
    return hstm_fit_forecast(observed, graph, config, horizon)
