"""Seasonal naive forecaster: the last observed year, tiled forward."""

import numpy as np

from ..exceptions import HistoryTooShort
from ..panel import RainfallPanel, month_range, shift_month
from .base import OBSERVED, ForecastResult

SEASON = 12


def naive_forecast(observed: RainfallPanel, horizon: int) -> ForecastResult:
    n_observed = observed.n_months
    if n_observed < SEASON:
        raise HistoryTooShort(
            f"Seasonal naive needs {SEASON} observed months, got {n_observed}"
        )
    columns = n_observed - SEASON + np.arange(horizon) % SEASON
    return ForecastResult(
        model_name="naive",
        districts=observed.districts,
        origin=observed.months[-1],
        months=month_range(shift_month(observed.months[-1], 1), horizon),
        values=observed.values[:, columns],
        provenance=(OBSERVED,) * horizon,
    )


def fit_forecast(observed: RainfallPanel, graph, config, horizon: int) -> ForecastResult:
    return naive_forecast(observed, horizon)
