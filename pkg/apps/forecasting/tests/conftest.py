"""
Pytest fixtures and factories for forecasting tests.

This module provides:
- Factory classes for station records and model configurations, registered
  with pytest-factoryboy
- Small deterministic panels and district graphs
- Helpers that write panels, graphs and configs into tmp_path for command tests
"""

import json
from datetime import date

import factory
import numpy as np
import pytest
from pytest_factoryboy import register

from apps.forecasting.features import FEATURE_TYPES
from apps.forecasting.forecasters.hstm import HstmConfig, Stage1FeatureConfig
from apps.forecasting.forecasters.stlm import StlmConfig, StlmDistrictConfig
from apps.forecasting.mlp import MlpSpec
from apps.forecasting.panel import RainfallPanel, StationRecord, month_range, write_panel_csv
from apps.forecasting.spatial import build_graph
from apps.forecasting.synthetic import generate_panel

# =============================================================================
# Factories
# =============================================================================


class StationRecordFactory(factory.Factory):
    """Factory for one station-day reading inside a single district."""

    class Meta:
        model = StationRecord

    station_id = factory.Sequence(lambda n: f"ST{n:03d}")
    district = "PURI"
    date = factory.Sequence(lambda n: date(2000, 1, 1 + n % 28))
    rainfall_mm = factory.Faker("pyfloat", min_value=0, max_value=80, right_digits=1)
    latitude = 19.8
    longitude = 85.8


class StlmDistrictConfigFactory(factory.Factory):
    """Factory for a small, fast STLM district configuration."""

    class Meta:
        model = StlmDistrictConfig

    p = 12
    k = 1
    q = 3
    hidden_units = (4, 4)
    learning_rate = 0.01
    l1_alpha = 0.0001
    epochs = 5
    batch_size = 32
    patience = 10
    val_fraction = 0.1


class Stage1FeatureConfigFactory(factory.Factory):
    """Factory for one yearly feature's Stage-1 settings."""

    class Meta:
        model = Stage1FeatureConfig

    span = 3
    p = 2
    q = 1
    k = 1
    L = 3
    lam = 0.01


class MlpSpecFactory(factory.Factory):
    """Factory for a tiny network specification."""

    class Meta:
        model = MlpSpec

    input_dim = 3
    hidden_units = (5, 4)
    learning_rate = 0.01
    l1_alpha = 0.001
    epochs = 20
    batch_size = 16
    seed = 0


# =============================================================================
# Register factories with pytest-factoryboy
# =============================================================================

register(StationRecordFactory)
register(StlmDistrictConfigFactory)
register(Stage1FeatureConfigFactory)
register(MlpSpecFactory)


# =============================================================================
# Panels and graphs
# =============================================================================

CENTROIDS = {
    "ANGUL": (20.84, 85.10),
    "BALASORE": (21.49, 86.93),
    "CUTTACK": (20.46, 85.88),
    "PURI": (19.81, 85.83),
}


@pytest.fixture
def centroids():
    """Four districts with fixed coordinates."""
    return dict(CENTROIDS)


@pytest.fixture
def graph(centroids):
    return build_graph(sorted(centroids), centroids)


@pytest.fixture
def seasonal_panel(centroids):
    """
    Four districts × 8 years from 2000, a clean seasonal cycle plus seeded
    noise, split after year 6.
    """
    rng = np.random.default_rng(3)
    districts = tuple(sorted(centroids))
    months = month_range((2000, 1), 96)
    cycle = 20 + 200 * np.exp(-(((np.arange(96) % 12 + 1 - 7.5) / 1.6) ** 2))
    values = cycle[None, :] * rng.uniform(0.8, 1.2, size=(len(districts), 96))
    return RainfallPanel(districts=districts, months=months, values=values, train_end=71)


@pytest.fixture
def synthetic():
    """Seeded (panel, centroids) pair: 3 districts × 12 years."""
    return generate_panel(n_districts=3, n_years=12, start_year=2000, seed=11)


@pytest.fixture
def stlm_config(seasonal_panel):
    """STLM configuration covering every district of seasonal_panel."""
    return StlmConfig(
        districts={name: StlmDistrictConfigFactory() for name in seasonal_panel.districts},
        seed=5,
    )


@pytest.fixture
def hstm_config(seasonal_panel):
    """HSTM configuration with identical small Stage-1 settings for all features."""
    return HstmConfig(
        stage1={name: Stage1FeatureConfigFactory() for name in FEATURE_TYPES},
        stage2={
            name: StlmDistrictConfigFactory(p=12, k=1, q=2)
            for name in seasonal_panel.districts
        },
        seed=5,
    )


# =============================================================================
# Files for command tests
# =============================================================================


@pytest.fixture
def panel_file(tmp_path, seasonal_panel):
    """seasonal_panel written as panel.csv; it spans 2000-01..2007-12."""
    return write_panel_csv(seasonal_panel, tmp_path / "panel.csv")


@pytest.fixture
def graph_file(tmp_path, graph):
    return graph.dump(tmp_path / "graph.json")


@pytest.fixture
def write_json(tmp_path):
    """Write a payload to tmp_path/<name> and return the path."""

    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return write
