"""
File formats for forecasts, Stage-1 feature forecasts and search traces.
"""

import json
from pathlib import Path

import pandas as pd

from .features import FEATURE_TYPES
from .forecasters import ForecastResult
from .panel import month_label, parse_month_label, shift_month

FORECAST_JSON = "forecast.json"


def forecast_frame(result: ForecastResult) -> pd.DataFrame:
    """District rows × `YYYY-MM` columns, the panel CSV layout."""
    return pd.DataFrame(
        result.values,
        index=pd.Index(result.districts, name="district"),
        columns=[month_label(m) for m in result.months],
    )


def read_forecast_csv(path) -> ForecastResult:
    """
    Load a forecast CSV. Model name, provenance and config hash come from a
    forecast.json in the same directory when there is one.
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype={"district": str}).set_index("district")
    months = tuple(parse_month_label(label) for label in frame.columns)
    meta = {}
    sidecar = path.with_name(FORECAST_JSON)
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
    return ForecastResult(
        model_name=meta.get("model", path.stem),
        districts=tuple(frame.index),
        origin=shift_month(months[0], -1),
        months=months,
        values=frame.to_numpy(dtype=float),
        provenance=tuple(meta.get("provenance", ["unknown"] * len(months))),
        config_hash=meta.get("config_hash"),
    )


def stage1_forecast_frame(result: ForecastResult) -> pd.DataFrame:
    """Long format: district, year, feature, forecast."""
    forecast = result.extras["stage1_forecast"]
    years = result.extras["stage1_years"]
    rows = [
        {
            "district": district,
            "year": year,
            "feature": feature,
            "forecast": float(forecast[d, y, f]),
        }
        for d, district in enumerate(result.districts)
        for y, year in enumerate(years)
        for f, feature in enumerate(FEATURE_TYPES)
    ]
    return pd.DataFrame(rows, columns=["district", "year", "feature", "forecast"])


def trace_lines(trace) -> str:
    """One JSON object per candidate, in draw order."""
    return "".join(json.dumps(record.to_json(), sort_keys=True) + "\n" for record in trace)
