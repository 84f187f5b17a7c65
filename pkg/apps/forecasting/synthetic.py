"""
Seeded synthetic rainfall panels.

Districts get a monsoon-shaped monthly climatology, multiplicative log-normal
anomalies that are AR(1) in time and correlated in space (exponential decay
with centroid distance), and a slow drift of the annual total. With `daily`
output the monthly totals are split into station-day readings that the
ingestion path turns back into the same panel (up to rounding).
"""

import calendar
from dataclasses import dataclass

import numpy as np
import pandas as pd
from faker import Faker

from .panel import RainfallPanel, month_range
from .spatial import build_graph

# Rough bounding box of a monsoon-dominated state.
LATITUDE_RANGE = (21.5, 27.2)
LONGITUDE_RANGE = (85.8, 89.9)


@dataclass(frozen=True)
class SyntheticSettings:
    correlation_km: float = 150.0
    ar_coefficient: float = 0.5
    anomaly_sigma: float = 0.35
    drift_range: float = 0.15
    oscillation_years: float = 20.0
    oscillation_amplitude: float = 0.1


def district_names(count: int, seed: int) -> list[str]:
    faker = Faker("en_IN")
    faker.seed_instance(seed)
    return sorted(faker.unique.city().upper() for _ in range(count))


def climatology() -> np.ndarray:
    """Mean mm for months 1..12, peaking in July-August."""
    months = np.arange(1, 13, dtype=float)
    return 15.0 + 320.0 * np.exp(-(((months - 7.5) / 1.6) ** 2))


def generate_panel(
    n_districts: int,
    n_years: int,
    start_year: int = 1960,
    seed: int = 0,
    settings: SyntheticSettings | None = None,
) -> tuple[RainfallPanel, dict[str, tuple[float, float]]]:
    """A D × (12·n_years) panel starting in January of `start_year`, plus centroids."""
    settings = settings or SyntheticSettings()
    rng = np.random.default_rng(seed)
    names = district_names(n_districts, seed)
    centroids = {
        name: (float(rng.uniform(*LATITUDE_RANGE)), float(rng.uniform(*LONGITUDE_RANGE)))
        for name in names
    }
    graph = build_graph(names, centroids)
    covariance = np.exp(-graph.distances / settings.correlation_km)
    chol = np.linalg.cholesky(covariance + 1e-9 * np.eye(n_districts))

    n_months = 12 * n_years
    phi = settings.ar_coefficient
    anomalies = np.empty((n_districts, n_months))
    state = chol @ rng.standard_normal(n_districts)
    for t in range(n_months):
        state = phi * state + np.sqrt(1 - phi**2) * (chol @ rng.standard_normal(n_districts))
        anomalies[:, t] = state

    scale = rng.uniform(0.7, 1.3, size=n_districts)
    drift = rng.uniform(-settings.drift_range, settings.drift_range, size=n_districts)
    years = np.arange(n_years)
    oscillation = settings.oscillation_amplitude * np.sin(2 * np.pi * years / settings.oscillation_years)
    yearly = 1.0 + drift[:, None] * years[None, :] / max(n_years - 1, 1) + oscillation[None, :]
    level = scale[:, None] * np.repeat(yearly, 12, axis=1) * np.tile(climatology(), n_years)

    sigma = settings.anomaly_sigma
    values = np.maximum(level, 0.0) * np.exp(sigma * anomalies - sigma**2 / 2)
    panel = RainfallPanel(
        districts=tuple(names),
        months=month_range((start_year, 1), n_months),
        values=values,
    )
    return panel, centroids


def generate_daily_stations(
    panel: RainfallPanel,
    centroids: dict[str, tuple[float, float]],
    stations_per_district: int = 3,
    seed: int = 0,
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Station-day readings whose district sums reproduce the panel.

    Returns (daily readings, station coordinates), ready to be written as the
    two CSVs `ingest` reads.
    """
    rng = np.random.default_rng(seed)
    frames = []
    stations = []
    for d, district in enumerate(panel.districts):
        ids = [f"{district.replace(' ', '')[:3]}{d:02d}S{s}" for s in range(stations_per_district)]
        lat, lon = centroids[district]
        for station in ids:
            stations.append(
                {
                    "station_id": station,
                    "latitude": round(lat + rng.uniform(-0.2, 0.2), 4),
                    "longitude": round(lon + rng.uniform(-0.2, 0.2), 4),
                }
            )
        for t, (year, month) in enumerate(panel.months):
            n_days = calendar.monthrange(year, month)[1]
            daily = panel.values[d, t] * rng.dirichlet(np.full(n_days, 0.3))
            shares = rng.dirichlet(np.ones(stations_per_district), size=n_days)
            readings = daily[:, None] * shares
            dates = pd.date_range(f"{year:04d}-{month:02d}-01", periods=n_days, freq="D")
            frames.append(
                pd.DataFrame(
                    {
                        "station_id": np.repeat([ids], n_days, axis=0).ravel(),
                        "district": district,
                        "date": np.repeat(dates.strftime("%Y-%m-%d"), stations_per_district),
                        "rainfall_mm": readings.ravel().round(3),
                    }
                )
            )
    return pd.concat(frames, ignore_index=True), pd.DataFrame(stations)
