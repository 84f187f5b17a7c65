"""
Lag-vector assembly and the joint one-step-ahead recursion.

Training design matrices and forecast-time input vectors are both built by
`lag_matrix`, so the two can never disagree on layout. Positions are 0-based:
the input for position t holds values strictly before t.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import InsufficientHistory
from .base import FED_BACK, OBSERVED


@dataclass(frozen=True)
class LagLayout:
    """Own lags t-1..t-p, then lags t-1..t-q of each neighbour in order."""

    p: int
    neighbors: tuple[int, ...] = ()
    q: int = 1

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be at least 1, got {self.p}")
        if self.neighbors and self.q < 1:
            raise ValueError(f"q must be at least 1 when k > 0, got {self.q}")

    @property
    def dim(self) -> int:
        return self.p + len(self.neighbors) * self.q

    @property
    def first_row(self) -> int:
        """First position with a full set of lags."""
        return max(self.p, self.q if self.neighbors else 0)


def _lags(row: np.ndarray, width: int, start: int, stop: int) -> np.ndarray:
    windows = sliding_window_view(row[: stop - 1], width)
    return windows[start - width : stop - width][:, ::-1]


def lag_matrix(series: np.ndarray, d: int, layout: LagLayout, start: int, stop: int) -> np.ndarray:
    """Input rows for positions start..stop-1 of district `d`."""
    if start < layout.first_row:
        raise InsufficientHistory(
            f"Position {start} needs {layout.first_row} prior values"
        )
    if stop > series.shape[1] + 1 or stop <= start:
        raise InsufficientHistory(
            f"Positions {start}..{stop - 1} are not covered by {series.shape[1]} values"
        )
    blocks = [_lags(series[d], layout.p, start, stop)]
    blocks += [_lags(series[n], layout.q, start, stop) for n in layout.neighbors]
    return np.hstack(blocks)


def lag_vector(series: np.ndarray, d: int, layout: LagLayout, t: int) -> np.ndarray:
    return lag_matrix(series, d, layout, t, t + 1)[0]


type StepPredictor = Callable[[np.ndarray, int], float]


def recursive_joint_forecast(
    predictors: Sequence[StepPredictor],
    history: np.ndarray,
    horizon: int,
    clip: bool = True,
) -> tuple[np.ndarray, tuple[str, ...]]:
    """
    Advance every series one step at a time, feeding forecasts back.

    `predictors[d](augmented, t)` returns district d's value at position t
    and may only read positions < t. All D predictions for a step are made
    before any of them is written back.
    """
    history = np.asarray(history, dtype=float)
    n_series, n_observed = history.shape
    augmented = np.empty((n_series, n_observed + horizon), dtype=float)
    augmented[:, :n_observed] = history
    for step in range(horizon):
        t = n_observed + step
        visible = augmented[:, :t]
        values = np.array([predict(visible, t) for predict in predictors], dtype=float)
        augmented[:, t] = np.maximum(values, 0.0) if clip else values
    provenance = tuple(OBSERVED if step == 0 else FED_BACK for step in range(horizon))
    return augmented[:, n_observed:].copy(), provenance
