"""
Yearly feature construction, EMA smoothing and short-run trajectory descriptors.

Each district-year of twelve monthly totals m_1..m_12 is summarised by nine
features: the annual and June-September totals, the normalised entropy of
the monthly shares, the population SD of the months, the rainfall-weighted
month centroid, the wettest month, and the shares of the first three
quarters.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .exceptions import PartialYear, WindowTooEarly

logger = logging.getLogger(__name__)

FEATURE_TYPES = (
    "Total",
    "MonsoonTotal",
    "Entropy",
    "SD",
    "Centroid",
    "Max",
    "Q1",
    "Q2",
    "Q3",
)
N_FEATURES = len(FEATURE_TYPES)

MONSOON_MONTHS = slice(5, 9)  # June..September
_MONTH_NUMBERS = np.arange(1, 13, dtype=float)
_LOG_12 = math.log(12)


@dataclass(frozen=True, eq=False)
class YearlyFeatureTable:
    """
    Raw (and optionally smoothed) features as D × Y × 9 arrays.

    The last axis follows FEATURE_TYPES.
    """

    districts: tuple[str, ...]
    years: tuple[int, ...]
    raw: np.ndarray
    smoothed: np.ndarray | None = None
    spans: tuple[int, ...] | None = None

    def feature_index(self, name: str) -> int:
        return FEATURE_TYPES.index(name)

    @property
    def n_years(self) -> int:
        return len(self.years)


def whole_years(months: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    """Return the calendar years covered, or raise PartialYear."""
    if not months:
        raise PartialYear("No months to summarise")
    if months[0][1] != 1 or len(months) % 12:
        raise PartialYear(
            f"Series starting {months[0][0]}-{months[0][1]:02d} with {len(months)} "
            "months is not made of whole calendar years"
        )
    return tuple(months[i][0] for i in range(0, len(months), 12))


def yearly_feature_cube(values: np.ndarray, districts: Sequence[str] = ()) -> np.ndarray:
    """
    Compute the D × Y × 9 raw feature cube from a D × (12·Y) monthly array.

    A zero-rain year gets the uniform convention: Entropy 1, Centroid 6.5 and
    quarter shares 0.25.
    """
    values = np.asarray(values, dtype=float)
    n_districts, n_months = values.shape
    if n_months % 12:
        raise PartialYear(f"{n_months} months is not a whole number of years")
    months = values.reshape(n_districts, n_months // 12, 12)

    total = months.sum(axis=-1)
    zero = total == 0
    shares = months / np.where(zero, 1.0, total)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(shares > 0, shares * np.log(shares), 0.0)

    cube = np.empty((n_districts, months.shape[1], N_FEATURES))
    cube[..., 0] = total
    cube[..., 1] = months[..., MONSOON_MONTHS].sum(axis=-1)
    cube[..., 2] = np.where(zero, 1.0, np.clip(-plogp.sum(axis=-1) / _LOG_12, 0.0, 1.0))
    cube[..., 3] = months.std(axis=-1)
    cube[..., 4] = np.where(zero, 6.5, shares @ _MONTH_NUMBERS)
    cube[..., 5] = months.max(axis=-1)
    for q in range(3):
        quarter = shares[..., 3 * q : 3 * q + 3].sum(axis=-1)
        cube[..., 6 + q] = np.where(zero, 0.25, quarter)

    if zero.any():
        for d, y in zip(*np.nonzero(zero), strict=True):
            name = districts[d] if districts else f"#{d}"
            logger.warning(
                "District %s has a zero-rain year (index %d); using uniform shares",
                name,
                y,
            )
    return cube


def compute_yearly_features(panel) -> YearlyFeatureTable:
    """Raw yearly features for every district and whole year of `panel`."""
    years = whole_years(panel.months)
    return YearlyFeatureTable(
        districts=panel.districts,
        years=years,
        raw=yearly_feature_cube(panel.values, panel.districts),
    )


# ============================================================================
# Smoothing
# ============================================================================


def ema_smooth(series, span: int) -> np.ndarray:
    """EMA with alpha = 2/(span+1), seeded with the first value."""
    if span < 1:
        raise ValueError(f"EMA span must be at least 1, got {span}")
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("Cannot smooth an empty series")
    return pd.Series(series).ewm(span=span, adjust=False).mean().to_numpy()


def smooth_cube(raw: np.ndarray, spans: Sequence[int]) -> np.ndarray:
    """Smooth each feature of a D × Y × 9 cube along years with its own span."""
    if len(spans) != N_FEATURES:
        raise ValueError(f"Expected {N_FEATURES} spans, got {len(spans)}")
    smoothed = np.empty_like(raw, dtype=float)
    for f, span in enumerate(spans):
        if span < 1:
            raise ValueError(f"EMA span must be at least 1, got {span}")
        frame = pd.DataFrame(raw[:, :, f].T)
        smoothed[:, :, f] = frame.ewm(span=span, adjust=False).mean().to_numpy().T
    return smoothed


def smooth_features(table: YearlyFeatureTable, spans: Sequence[int]) -> YearlyFeatureTable:
    spans = tuple(int(s) for s in spans)
    return replace(table, smoothed=smooth_cube(table.raw, spans), spans=spans)


def yearly_features_frame(table: YearlyFeatureTable) -> pd.DataFrame:
    """Long-format export: district, year, feature, raw, smoothed."""
    districts, years, features = np.meshgrid(
        np.arange(len(table.districts)),
        np.arange(table.n_years),
        np.arange(N_FEATURES),
        indexing="ij",
    )
    smoothed = table.smoothed if table.smoothed is not None else np.full_like(table.raw, np.nan)
    return pd.DataFrame(
        {
            "district": np.asarray(table.districts, dtype=object)[districts.ravel()],
            "year": np.asarray(table.years)[years.ravel()],
            "feature": np.asarray(FEATURE_TYPES, dtype=object)[features.ravel()],
            "raw": table.raw.ravel(),
            "smoothed": smoothed.ravel(),
        }
    )


# ============================================================================
# Trajectory descriptors
# ============================================================================


@dataclass(frozen=True, slots=True)
class Descriptors:
    slope: float
    mean_diff: float
    momentum: float
    window: int


def descriptors_at(series, t: int, window: int) -> Descriptors:
    """
    Short-run descriptors of `series` seen from position `t` (0-based).

    The window is series[t-L':t] with L' = min(window, t), i.e. the L' values
    strictly before t.
    """
    if t < 1:
        raise WindowTooEarly(f"Descriptors need at least one prior year, got t={t}")
    if window < 1:
        raise ValueError(f"Descriptor window must be positive, got {window}")
    effective = min(window, t)
    values = np.asarray(series[t - effective : t], dtype=float)
    if effective == 1:
        return Descriptors(slope=0.0, mean_diff=0.0, momentum=0.5, window=1)

    positions = np.arange(1, effective + 1, dtype=float)
    centred = positions - positions.mean()
    slope = float(centred @ (values - values.mean()) / (centred @ centred))
    mean_diff = float(values[-1] - values.mean())
    momentum = float(np.count_nonzero(np.diff(values) > 0) / (effective - 1))
    return Descriptors(slope=slope, mean_diff=mean_diff, momentum=momentum, window=effective)
