"""
Forecaster registry.

Every forecaster is called as `fit_forecast(observed, graph, config, horizon)`
where `observed` is an unsplit RainfallPanel holding only the months the model
may see.
"""

from . import hstm, naive, stlm
from .base import ForecastResult

FORECASTERS = {
    "naive": naive.fit_forecast,
    "stlm": stlm.fit_forecast,
    "hstm": hstm.fit_forecast,
}

__all__ = ["FORECASTERS", "ForecastResult"]
