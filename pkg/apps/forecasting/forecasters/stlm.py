"""
Spatio-temporal lag model (STLM).

One MLP per district maps its own p most recent months and the q most recent
months of each of its k nearest neighbours to the next month. Forecasts are
produced jointly for all districts and fed back step by step.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..exceptions import HistoryTooShort, MissingDistrictConfig
from ..mlp import MlpSpec, TrainedMlp, init, predict, train
from ..panel import RainfallPanel, month_range, shift_month
from .base import ForecastResult, aligned_graph, config_hash, district_seed, neighbor_indices
from .recursion import LagLayout, lag_matrix, lag_vector, recursive_joint_forecast

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StlmDistrictConfig:
    """Lag structure and network hyperparameters for one district."""

    p: int
    k: int
    q: int
    hidden_units: tuple[int, ...]
    learning_rate: float
    l1_alpha: float
    epochs: int
    batch_size: int = 32
    patience: int = 10
    val_fraction: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "hidden_units", tuple(int(u) for u in self.hidden_units))
        if self.p < 1:
            raise ValueError(f"p must be at least 1, got {self.p}")
        if self.k < 0:
            raise ValueError(f"k must be nonnegative, got {self.k}")
        if self.k > 0 and self.q < 1:
            raise ValueError(f"q must be at least 1 when k > 0, got {self.q}")

    @property
    def input_dim(self) -> int:
        return self.p + self.k * self.q

    def mlp_spec(self, input_dim: int, seed: int) -> MlpSpec:
        return MlpSpec(
            input_dim=input_dim,
            hidden_units=self.hidden_units,
            learning_rate=self.learning_rate,
            l1_alpha=self.l1_alpha,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=seed,
            patience=self.patience,
            val_fraction=self.val_fraction,
        )


@dataclass(frozen=True)
class StlmConfig:
    districts: Mapping[str, StlmDistrictConfig]
    seed: int = 0

    def for_district(self, name: str) -> StlmDistrictConfig:
        try:
            return self.districts[name]
        except KeyError:
            raise MissingDistrictConfig(name) from None


@dataclass(frozen=True, eq=False)
class FittedStlm:
    districts: tuple[str, ...]
    layouts: tuple[LagLayout, ...]
    networks: tuple[TrainedMlp, ...]


def district_layout(graph, i: int, cfg: StlmDistrictConfig) -> LagLayout:
    return LagLayout(p=cfg.p, neighbors=neighbor_indices(graph, i, cfg.k), q=cfg.q)


def stlm_input(history: np.ndarray, graph, cfg: StlmDistrictConfig, d: int, t: int) -> np.ndarray:
    """Input vector for district `d` at position `t` (0-based)."""
    return lag_vector(history, d, district_layout(graph, d, cfg), t)


def stlm_fit(observed: RainfallPanel, graph, config: StlmConfig) -> FittedStlm:
    """Train one network per district on every lag-complete training month."""
    graph = aligned_graph(graph, observed.districts)
    history = observed.values
    layouts = []
    networks = []
    for i, name in enumerate(observed.districts):
        cfg = config.for_district(name)
        layout = district_layout(graph, i, cfg)
        start = layout.first_row
        if start >= observed.n_months:
            raise HistoryTooShort(
                f"District '{name}' needs more than {start} months of history for p={cfg.p}, q={cfg.q}"
            )
        X = lag_matrix(history, i, layout, start, observed.n_months)
        y = history[i, start:]
        spec = cfg.mlp_spec(layout.dim, district_seed(config.seed, name))
        networks.append(train(init(spec), X, y))
        layouts.append(layout)
        logger.debug("Trained STLM network for %s on %d rows", name, len(y))
    return FittedStlm(observed.districts, tuple(layouts), tuple(networks))


def stlm_forecast(fitted: FittedStlm, observed: RainfallPanel, horizon: int):
    def predictor(i):
        layout, net = fitted.layouts[i], fitted.networks[i]
        return lambda visible, t: float(predict(net, lag_vector(visible, i, layout, t)[None, :])[0])

    return recursive_joint_forecast(
        [predictor(i) for i in range(len(fitted.districts))], observed.values, horizon
    )


def fit_forecast(observed: RainfallPanel, graph, config: StlmConfig, horizon: int) -> ForecastResult:
    fitted = stlm_fit(observed, graph, config)
    values, provenance = stlm_forecast(fitted, observed, horizon)
    return ForecastResult(
        model_name="stlm",
        districts=observed.districts,
        origin=observed.months[-1],
        months=month_range(shift_month(observed.months[-1], 1), horizon),
        values=values,
        provenance=provenance,
        config_hash=config_hash(config),
        extras={"networks": dict(zip(observed.districts, fitted.networks, strict=True))},
    )
