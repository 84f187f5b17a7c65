"""
Climate analytics over a monthly panel: SPI extreme years, decadal trends,
monsoon shares and the decay of inter-district correlation with distance.

Standard deviations, skewness and kurtosis use population normalisation.
"""

import itertools
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import DegenerateBaseline, OutOfRange, TooFewPoints
from .features import MONSOON_MONTHS, whole_years
from .lasso import fit_ols_slope
from .panel import RainfallPanel

logger = logging.getLogger(__name__)

SPI_THRESHOLD = 1.65

type YearRange = tuple[int, int]


def decade_label(decade: YearRange) -> str:
    return f"{decade[0]}-{decade[1]}"


def yearly_months(panel: RainfallPanel) -> tuple[tuple[int, ...], np.ndarray]:
    """(years, D × Y × 12 monthly values) for a whole-year panel."""
    years = whole_years(panel.months)
    return years, panel.values.reshape(panel.n_districts, len(years), 12)


def annual_totals(panel: RainfallPanel) -> tuple[tuple[int, ...], np.ndarray]:
    years, months = yearly_months(panel)
    return years, months.sum(axis=-1)


def _year_mask(years: Sequence[int], span: YearRange) -> np.ndarray:
    first, last = span
    if first < years[0] or last > years[-1] or first > last:
        raise OutOfRange(
            f"Years {first}-{last} are outside the panel's {years[0]}-{years[-1]}"
        )
    years = np.asarray(years)
    return (years >= first) & (years <= last)


# ============================================================================
# SPI
# ============================================================================


@dataclass(frozen=True, eq=False)
class SpiBaseline:
    districts: tuple[str, ...]
    mean: np.ndarray
    sd: np.ndarray
    years: YearRange


def spi_baseline(panel: RainfallPanel, start_year: int, end_year: int) -> SpiBaseline:
    """Mean and population SD of each district's annual totals over the baseline."""
    years, totals = annual_totals(panel)
    window = totals[:, _year_mask(years, (start_year, end_year))]
    return SpiBaseline(
        districts=panel.districts,
        mean=window.mean(axis=1),
        sd=window.std(axis=1),
        years=(start_year, end_year),
    )


def spi(annual: float, baseline: SpiBaseline, district: str) -> float:
    d = baseline.districts.index(district)
    if not baseline.sd[d] > 0:
        raise DegenerateBaseline(
            f"District '{district}' has zero rainfall variability over "
            f"{decade_label(baseline.years)}"
        )
    return float((annual - baseline.mean[d]) / baseline.sd[d])


def count_extreme_years(
    panel: RainfallPanel,
    baseline: SpiBaseline,
    decade: YearRange,
    threshold: float = SPI_THRESHOLD,
) -> dict[str, tuple[int, int]]:
    """(heavy, light) year counts per district: SPI > threshold / SPI < -threshold."""
    years, totals = annual_totals(panel)
    window = totals[:, _year_mask(years, decade)]
    counts = {}
    for d, district in enumerate(panel.districts):
        values = np.array([spi(x, baseline, district) for x in window[d]])
        counts[district] = (int((values > threshold).sum()), int((values < -threshold).sum()))
    return counts


def extreme_years_frame(
    panel: RainfallPanel,
    baseline: SpiBaseline,
    decades: Sequence[YearRange],
    threshold: float = SPI_THRESHOLD,
) -> pd.DataFrame:
    rows = []
    for decade in decades:
        for district, (heavy, light) in count_extreme_years(
            panel, baseline, decade, threshold
        ).items():
            rows.append(
                {"district": district, "decade": decade_label(decade), "heavy": heavy, "light": light}
            )
    return pd.DataFrame(rows, columns=["district", "decade", "heavy", "light"])


# ============================================================================
# Decadal trends
# ============================================================================


def decadal_slopes(panel: RainfallPanel, decades: Sequence[YearRange]) -> pd.DataFrame:
    """OLS slope (mm/year) of annual totals, district rows × decade columns."""
    years, totals = annual_totals(panel)
    table = {
        decade_label(decade): [
            fit_ols_slope(row) for row in totals[:, _year_mask(years, decade)]
        ]
        for decade in decades
    }
    frame = pd.DataFrame(table, index=pd.Index(panel.districts, name="district"))
    return frame


def decadal_summary(panel: RainfallPanel, decades: Sequence[YearRange]) -> pd.DataFrame:
    """Mean annual and monsoon totals per decade, and the monsoon share."""
    years, months = yearly_months(panel)
    rows = []
    for decade in decades:
        mask = _year_mask(years, decade)
        total = months[:, mask].sum(axis=-1).mean(axis=1)
        monsoon = months[:, mask][..., MONSOON_MONTHS].sum(axis=-1).mean(axis=1)
        for d, district in enumerate(panel.districts):
            rows.append(
                {
                    "district": district,
                    "decade": decade_label(decade),
                    "mean_total": total[d],
                    "mean_monsoon": monsoon[d],
                    "monsoon_share": monsoon[d] / total[d] if total[d] > 0 else np.nan,
                }
            )
    return pd.DataFrame(rows)


# ============================================================================
# Correlation against distance
# ============================================================================


def _standardised_moment(months: np.ndarray, order: int) -> np.ndarray:
    centred = months - months.mean(axis=-1, keepdims=True)
    sd = months.std(axis=-1)
    moment = (centred**order).mean(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(sd > 0, moment / sd**order, 0.0)


METRICS: dict[str, Callable[[RainfallPanel], np.ndarray]] = {
    "monthly": lambda panel: panel.values,
    "yearly_mean": lambda panel: yearly_months(panel)[1].mean(axis=-1),
    "yearly_sd": lambda panel: yearly_months(panel)[1].std(axis=-1),
    "yearly_skewness": lambda panel: _standardised_moment(yearly_months(panel)[1], 3),
    "yearly_kurtosis": lambda panel: _standardised_moment(yearly_months(panel)[1], 4),
    "monsoon_total": lambda panel: yearly_months(panel)[1][..., MONSOON_MONTHS].sum(axis=-1),
}


def pearson(a, b) -> float:
    """Pearson r, or NaN when either series is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.size < 3:
        raise TooFewPoints(f"Correlation needs two series of ≥3 points, got {a.shape}, {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    scale = np.sqrt((da @ da) * (db @ db))
    if scale == 0:
        return float("nan")
    return float(np.clip(da @ db / scale, -1.0, 1.0))


def correlation_vs_distance(panel: RainfallPanel, graph, metric: str = "monthly") -> pd.DataFrame:
    """One row per district pair: distance, Pearson r of the metric series."""
    graph = graph if graph.districts == panel.districts else graph.reindexed(panel.districts)
    series = METRICS[metric](panel)
    rows = []
    for i, j in itertools.combinations(range(panel.n_districts), 2):
        r = pearson(series[i], series[j])
        rows.append(
            {
                "district_a": panel.districts[i],
                "district_b": panel.districts[j],
                "distance_km": float(graph.distances[i, j]),
                "metric": metric,
                "r": r,
                "defined": not np.isnan(r),
            }
        )
    undefined = sum(not row["defined"] for row in rows)
    if undefined:
        logger.warning("%d district pairs have a constant %s series; r left undefined", undefined, metric)
    return pd.DataFrame(rows, columns=["district_a", "district_b", "distance_km", "metric", "r", "defined"])


def correlation_matrix(panel: RainfallPanel) -> pd.DataFrame:
    """D × D Pearson correlation of monthly rainfall."""
    frame = pd.DataFrame(panel.values.T, columns=list(panel.districts))
    return frame.corr(method="pearson")
