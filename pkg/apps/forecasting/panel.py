"""
Station ingestion and the monthly rainfall panel.

Daily station readings are summed into district-daily totals, then into
district-monthly totals on a dense (year, month) axis. The resulting
RainfallPanel is immutable and carries the train/holdout split marker.

Missing station-day readings contribute nothing to a district's daily total;
a district-day with no present reading is 0 mm.
"""

import logging
from dataclasses import dataclass, fields, replace
from datetime import date
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import (
    DimensionMismatch,
    GapInCoverage,
    InvalidPanel,
    MalformedDate,
    MissingColumn,
    NegativeRainfall,
    OutOfRange,
    TooManyRejectedRows,
)

logger = logging.getLogger(__name__)

type Month = tuple[int, int]

DATE_MIN = date(1900, 1, 1)
DATE_MAX = date(2019, 12, 31)

# Individual rejections beyond this many are only counted in the summary line.
_REJECTION_LOG_LIMIT = 20


# ============================================================================
# Month axis helpers
# ============================================================================


def month_label(month: Month) -> str:
    year, mon = month
    return f"{year:04d}-{mon:02d}"


def parse_month_label(label: str) -> Month:
    """Parse a `YYYY-MM` label into a (year, month) pair."""
    try:
        year_text, month_text = str(label).strip().split("-")
        year, mon = int(year_text), int(month_text)
    except ValueError as exc:
        raise MalformedDate(f"Not a YYYY-MM month label: {label!r}") from exc
    if not 1 <= mon <= 12:
        raise MalformedDate(f"Month out of range in label {label!r}")
    return year, mon


def shift_month(month: Month, offset: int) -> Month:
    year, mon = month
    serial = year * 12 + (mon - 1) + offset
    return serial // 12, serial % 12 + 1


def month_range(start: Month, count: int) -> tuple[Month, ...]:
    return tuple(shift_month(start, i) for i in range(count))


def months_between(first: Month, last: Month) -> int:
    """Number of months from first to last, inclusive."""
    return (last[0] - first[0]) * 12 + (last[1] - first[1]) + 1


# ============================================================================
# Station records
# ============================================================================


@dataclass(frozen=True)
class ColumnSchema:
    """Maps the logical station columns onto a CSV header."""

    station_id: str = "station_id"
    district: str = "district"
    date: str = "date"
    rainfall: str = "rainfall_mm"
    latitude: str | None = None
    longitude: str | None = None

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ColumnSchema":
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in mapping.items() if key in known})

    @property
    def has_coordinates(self) -> bool:
        return bool(self.latitude and self.longitude)


@dataclass(frozen=True, slots=True)
class StationRecord:
    station_id: str
    district: str
    date: date
    rainfall_mm: float | None
    latitude: float | None = None
    longitude: float | None = None


@dataclass(frozen=True, slots=True)
class RejectedRow:
    """A CSV row that failed validation. `line` counts the header as line 1."""

    line: int
    error: str
    detail: str


_RECORD_COLUMNS = [f.name for f in fields(StationRecord)]


@dataclass(frozen=True)
class ParsedStations:
    """
    Result of parsing a station CSV.

    The accepted rows are kept as a DataFrame (one column per StationRecord
    field, file order preserved); `records` materialises them as
    StationRecord objects on first access.
    """

    frame: pd.DataFrame
    rejected: tuple[RejectedRow, ...] = ()

    @cached_property
    def records(self) -> list[StationRecord]:
        rows = self.frame[_RECORD_COLUMNS].itertuples(index=False, name=None)
        return [
            StationRecord(
                station_id=station,
                district=district,
                date=day.date(),
                rainfall_mm=None if pd.isna(rain) else float(rain),
                latitude=None if pd.isna(lat) else float(lat),
                longitude=None if pd.isna(lon) else float(lon),
            )
            for station, district, day, rain, lat, lon in rows
        ]

    @property
    def total_rows(self) -> int:
        return len(self.frame) + len(self.rejected)

    def __len__(self) -> int:
        return len(self.frame)


def records_frame(records) -> pd.DataFrame:
    """Return the accepted rows as a DataFrame, whatever carrier they came in."""
    if isinstance(records, ParsedStations):
        return records.frame
    frame = pd.DataFrame(
        [
            (
                r.station_id,
                r.district,
                r.date,
                np.nan if r.rainfall_mm is None else r.rainfall_mm,
                np.nan if r.latitude is None else r.latitude,
                np.nan if r.longitude is None else r.longitude,
            )
            for r in records
        ],
        columns=_RECORD_COLUMNS,
    )
    frame["date"] = pd.to_datetime(frame["date"])
    for column in ("rainfall_mm", "latitude", "longitude"):
        frame[column] = frame[column].astype(float)
    return frame


def parse_station_csv(
    path,
    schema: ColumnSchema | None = None,
    max_rejected_fraction: float = 0.1,
    date_range: tuple[date, date] = (DATE_MIN, DATE_MAX),
) -> ParsedStations:
    """
    Parse a station-level daily rainfall CSV.

    Unparseable rainfall cells become missing readings. Rows with a malformed
    or out-of-range date, a negative reading, or a blank station/district are
    rejected and counted; parsing aborts when the rejected share exceeds
    `max_rejected_fraction`.
    """
    schema = schema or ColumnSchema()
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    raw.columns = [column.strip() for column in raw.columns]

    required = [schema.station_id, schema.district, schema.date, schema.rainfall]
    if schema.has_coordinates:
        required += [schema.latitude, schema.longitude]
    for column in required:
        if column not in raw.columns:
            raise MissingColumn(column, path)

    station = raw[schema.station_id].str.strip()
    district = raw[schema.district].str.strip()
    day = pd.to_datetime(raw[schema.date].str.strip(), format="%Y-%m-%d", errors="coerce")
    rain = pd.to_numeric(raw[schema.rainfall].str.strip(), errors="coerce")
    rain = rain.where(np.isfinite(rain))
    if schema.has_coordinates:
        lat = pd.to_numeric(raw[schema.latitude].str.strip(), errors="coerce")
        lon = pd.to_numeric(raw[schema.longitude].str.strip(), errors="coerce")
    else:
        lat = lon = pd.Series(np.nan, index=raw.index)

    low, high = pd.Timestamp(date_range[0]), pd.Timestamp(date_range[1])
    checks = [
        (
            (station == "") | (district == ""),
            "MalformedRow",
            "blank station id or district",
        ),
        (day.isna(), MalformedDate.__name__, "date is not ISO-8601 (YYYY-MM-DD)"),
        (
            day.notna() & ((day < low) | (day > high)),
            MalformedDate.__name__,
            f"date outside {date_range[0]}..{date_range[1]}",
        ),
        (rain < 0, NegativeRainfall.__name__, "negative rainfall"),
    ]
    bad = pd.Series(False, index=raw.index)
    rejected = []
    for mask, error, detail in checks:
        fresh = mask & ~bad
        rejected.extend(
            RejectedRow(line=int(i) + 2, error=error, detail=detail)
            for i in raw.index[fresh]
        )
        bad |= mask
    rejected.sort(key=lambda row: row.line)

    total = len(raw)
    for row in rejected[:_REJECTION_LOG_LIMIT]:
        logger.warning("Rejected line %d of %s: %s (%s)", row.line, path, row.detail, row.error)
    if rejected:
        logger.warning("%d of %d rows rejected in %s", len(rejected), total, path)
    if total and len(rejected) / total > max_rejected_fraction:
        raise TooManyRejectedRows(len(rejected), total, max_rejected_fraction)

    keep = ~bad
    frame = pd.DataFrame(
        {
            "station_id": station[keep],
            "district": district[keep],
            "date": day[keep],
            "rainfall_mm": rain[keep].astype(float),
            "latitude": lat[keep].astype(float),
            "longitude": lon[keep].astype(float),
        }
    ).reset_index(drop=True)
    return ParsedStations(frame=frame, rejected=tuple(rejected))


def parse_station_coordinates(
    path, station_column="station_id", latitude_column="latitude", longitude_column="longitude"
) -> dict[str, tuple[float, float]]:
    """Read the optional station coordinate CSV into {station_id: (lat, lon)}."""
    raw = pd.read_csv(path, dtype={station_column: str})
    for column in (station_column, latitude_column, longitude_column):
        if column not in raw.columns:
            raise MissingColumn(column, path)
    raw = raw.dropna(subset=[latitude_column, longitude_column])
    return {
        str(station).strip(): (float(lat), float(lon))
        for station, lat, lon in raw[
            [station_column, latitude_column, longitude_column]
        ].itertuples(index=False, name=None)
    }


def attach_coordinates(
    parsed: ParsedStations, coordinates: dict[str, tuple[float, float]]
) -> ParsedStations:
    """Return a copy whose rows carry the coordinates of their station."""
    frame = parsed.frame.copy()
    frame["latitude"] = frame["station_id"].map(
        {station: lat for station, (lat, _) in coordinates.items()}
    ).astype(float)
    frame["longitude"] = frame["station_id"].map(
        {station: lon for station, (_, lon) in coordinates.items()}
    ).astype(float)
    return ParsedStations(frame=frame, rejected=parsed.rejected)


def station_counts(records) -> pd.Series:
    """Number of distinct stations per district, sorted by district name."""
    frame = records_frame(records)
    return frame.groupby("district", sort=True)["station_id"].nunique().rename("stations")


# ============================================================================
# Aggregation
# ============================================================================


def district_daily(records) -> pd.Series:
    """
    Sum present readings per (district, date).

    A district-date whose readings are all missing is 0 mm. Rows are sorted
    on every column before summing, so the float result does not depend on
    the input order.
    """
    frame = records_frame(records)
    if frame.empty:
        raise ValueError("district_daily needs at least one record")
    frame = frame.sort_values(
        ["district", "date", "station_id", "rainfall_mm"],
        kind="mergesort",
        na_position="last",
    )
    daily = frame.groupby(["district", "date"], sort=True)["rainfall_mm"].sum(min_count=0)
    return daily.rename("rainfall_mm")


def monthly_aggregate(daily: pd.Series) -> "RainfallPanel":
    """
    Sum district-daily totals into a dense district × month panel.

    The month axis spans the first to the last covered month over all
    districts; a district with no day at all inside some month of that span
    raises GapInCoverage.
    """
    frame = daily.rename("rainfall_mm").reset_index()
    frame["year"] = frame["date"].dt.year
    frame["month"] = frame["date"].dt.month
    monthly = frame.groupby(["district", "year", "month"], sort=True)["rainfall_mm"].sum()

    keys = monthly.index.droplevel("district")
    first = min(keys)
    last = max(keys)
    months = month_range((int(first[0]), int(first[1])), months_between(first, last))

    table = monthly.unstack(["year", "month"]).reindex(
        columns=pd.MultiIndex.from_tuples(months, names=["year", "month"])
    )
    gaps = table.isna()
    if gaps.to_numpy().any():
        district, (year, mon) = next(
            (d, m) for d, row in gaps.iterrows() for m, missing in row.items() if missing
        )
        raise GapInCoverage(
            f"District '{district}' has no readings for {month_label((year, mon))} "
            f"({int(gaps.to_numpy().sum())} district-months missing in total)"
        )
    return RainfallPanel(
        districts=tuple(str(d) for d in table.index),
        months=months,
        values=table.to_numpy(dtype=float),
    )


# ============================================================================
# Panel
# ============================================================================


@dataclass(frozen=True, eq=False)
class RainfallPanel:
    """
    District × month rainfall matrix (mm/month) on a dense month axis.

    `train_end` is the 0-based index of the last training month, or None for
    an unsplit panel. The values array is a read-only copy.
    """

    districts: tuple[str, ...]
    months: tuple[Month, ...]
    values: np.ndarray
    train_end: int | None = None

    def __post_init__(self):
        districts = tuple(str(d) for d in self.districts)
        months = tuple((int(y), int(m)) for y, m in self.months)
        values = np.array(self.values, dtype=float)
        if values.shape != (len(districts), len(months)):
            raise DimensionMismatch(
                f"values shape {values.shape} does not match "
                f"{len(districts)} districts × {len(months)} months"
            )
        if len(set(districts)) != len(districts):
            raise InvalidPanel("District names must be unique")
        if not np.isfinite(values).all():
            raise InvalidPanel("Panel values must be finite")
        if (values < 0).any():
            raise NegativeRainfall("Panel values must be nonnegative")
        for previous, current in zip(months, months[1:], strict=False):
            if shift_month(previous, 1) != current:
                raise GapInCoverage(
                    f"Month axis jumps from {month_label(previous)} to {month_label(current)}"
                )
        if self.train_end is not None and not 0 < self.train_end < len(months) - 1:
            raise OutOfRange(
                f"train_end {self.train_end} must satisfy 0 < train_end < {len(months) - 1}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "districts", districts)
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "values", values)

    # ------------------------------------------------------------------
    # Shape and lookup
    # ------------------------------------------------------------------

    @property
    def n_districts(self) -> int:
        return len(self.districts)

    @property
    def n_months(self) -> int:
        return len(self.months)

    def index_of(self, month: Month) -> int:
        offset = months_between(self.months[0], month) - 1
        if not 0 <= offset < self.n_months:
            raise OutOfRange(
                f"{month_label(month)} is outside "
                f"{month_label(self.months[0])}..{month_label(self.months[-1])}"
            )
        return offset

    def district_index(self, district: str) -> int:
        try:
            return self.districts.index(district)
        except ValueError as exc:
            raise KeyError(f"Unknown district '{district}'") from exc

    # ------------------------------------------------------------------
    # Train / holdout views
    # ------------------------------------------------------------------

    def _require_split(self) -> int:
        if self.train_end is None:
            raise OutOfRange("Panel has no train/holdout split")
        return self.train_end

    @property
    def n_train(self) -> int:
        return self._require_split() + 1

    @property
    def train_values(self) -> np.ndarray:
        return self.values[:, : self.n_train]

    @property
    def holdout_values(self) -> np.ndarray:
        return self.values[:, self.n_train :]

    @property
    def train_months(self) -> tuple[Month, ...]:
        return self.months[: self.n_train]

    @property
    def holdout_months(self) -> tuple[Month, ...]:
        return self.months[self.n_train :]

    def with_values(self, values) -> "RainfallPanel":
        return replace(self, values=values)

    def head(self, n_months: int) -> "RainfallPanel":
        """The first `n_months` months as an unsplit panel."""
        if not 0 < n_months <= self.n_months:
            raise OutOfRange(f"Cannot take {n_months} of {self.n_months} months")
        return RainfallPanel(
            districts=self.districts,
            months=self.months[:n_months],
            values=self.values[:, :n_months],
        )

    def observed(self) -> "RainfallPanel":
        """The training months only; nothing after `train_end` is carried over."""
        return self.head(self.n_train)


def split_panel(panel: RainfallPanel, train_end_month: Month) -> RainfallPanel:
    """
    Mark `train_end_month` as the last training month.

    The holdout must be nonempty, so splitting at the last month (or before
    the first) raises OutOfRange.
    """
    index = panel.index_of(train_end_month)
    if index == panel.n_months - 1:
        raise OutOfRange(
            f"Splitting at {month_label(train_end_month)} leaves an empty holdout"
        )
    if index == 0:
        raise OutOfRange(
            f"Splitting at {month_label(train_end_month)} leaves a single training month"
        )
    return replace(panel, train_end=index)


# ============================================================================
# Panel CSV
# ============================================================================


def write_panel_csv(panel: RainfallPanel, path) -> Path:
    """Write `district,YYYY-MM,...` with one row per district."""
    path = Path(path)
    frame = pd.DataFrame(
        panel.values,
        index=pd.Index(panel.districts, name="district"),
        columns=[month_label(m) for m in panel.months],
    )
    frame.to_csv(path, lineterminator="\n")
    return path


def read_panel_csv(path, train_end_month: Month | None = None) -> RainfallPanel:
    """Read a panel CSV, applying the split when `train_end_month` is given."""
    frame = pd.read_csv(path, dtype={"district": str})
    if frame.columns[0] != "district":
        raise MissingColumn("district", path)
    months = tuple(parse_month_label(label) for label in frame.columns[1:])
    panel = RainfallPanel(
        districts=tuple(frame["district"]),
        months=months,
        values=frame.iloc[:, 1:].to_numpy(dtype=float),
    )
    if train_end_month is not None:
        panel = split_panel(panel, train_end_month)
    return panel
