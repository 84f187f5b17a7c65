"""
Tests for station ingestion and the monthly panel.

Tests cover:
- parse_station_csv: schema mapping, rejected rows, rejection threshold
- district_daily / monthly_aggregate: missing readings, order independence, gaps
- RainfallPanel: validation, split views, head/observed
- split_panel and the panel CSV round trip
"""

from datetime import date

import numpy as np
import pandas as pd
import pytest

from apps.forecasting.exceptions import (
    GapInCoverage,
    InvalidPanel,
    MalformedDate,
    MissingColumn,
    NegativeRainfall,
    OutOfRange,
    TooManyRejectedRows,
)
from apps.forecasting.panel import (
    ColumnSchema,
    RainfallPanel,
    attach_coordinates,
    district_daily,
    month_label,
    month_range,
    monthly_aggregate,
    parse_month_label,
    parse_station_coordinates,
    parse_station_csv,
    read_panel_csv,
    shift_month,
    split_panel,
    station_counts,
    write_panel_csv,
)

HEADER = "station_id,district,date,rainfall_mm\n"


def write_csv(tmp_path, body, header=HEADER, name="stations.csv"):
    path = tmp_path / name
    path.write_text(header + body)
    return path


class TestMonthHelpers:
    """Tests for the (year, month) axis helpers."""

    def test_label_round_trip(self):
        assert month_label((1987, 3)) == "1987-03"
        assert parse_month_label("1987-03") == (1987, 3)

    def test_shift_crosses_year_boundaries(self):
        assert shift_month((2010, 12), 1) == (2011, 1)
        assert shift_month((2011, 1), -13) == (2009, 12)

    @pytest.mark.parametrize("label", ["2010", "2010-13", "abc-01", ""])
    def test_malformed_labels_raise(self, label):
        with pytest.raises(MalformedDate):
            parse_month_label(label)


class TestParseStationCsv:
    """Tests for reading station daily CSVs."""

    def test_reads_valid_rows(self, tmp_path):
        path = write_csv(tmp_path, "S1,PURI,2000-01-01,3.5\nS2,PURI,2000-01-01,1.0\n")

        parsed = parse_station_csv(path)

        assert len(parsed) == 2
        assert parsed.rejected == ()
        assert parsed.records[0].rainfall_mm == 3.5
        assert parsed.records[0].date == date(2000, 1, 1)

    def test_custom_schema(self, tmp_path):
        path = write_csv(
            tmp_path,
            "S1,PURI,2000-01-01,3.5\n",
            header="gauge,zone,obs_date,rain\n",
        )
        schema = ColumnSchema(station_id="gauge", district="zone", date="obs_date", rainfall="rain")

        parsed = parse_station_csv(path, schema)

        assert parsed.records[0].station_id == "S1"

    def test_missing_column_raises(self, tmp_path):
        path = write_csv(tmp_path, "S1,PURI,2000-01-01\n", header="station_id,district,date\n")

        with pytest.raises(MissingColumn) as exc_info:
            parse_station_csv(path)

        assert exc_info.value.column == "rainfall_mm"

    def test_bad_rows_are_rejected_with_line_numbers(self, tmp_path):
        body = "".join(f"S1,PURI,2000-01-{day:02d},1.0\n" for day in range(1, 21))
        body += "S1,PURI,2000-02-30,1.0\nS1,PURI,2000-01-21,-4\n"
        path = write_csv(tmp_path, body)

        parsed = parse_station_csv(path, max_rejected_fraction=0.2)

        assert len(parsed) == 20
        assert [(row.line, row.error) for row in parsed.rejected] == [
            (22, MalformedDate.__name__),
            (23, NegativeRainfall.__name__),
        ]

    def test_dates_outside_range_are_rejected(self, tmp_path):
        body = "S1,PURI,1899-12-31,1.0\n" + "S1,PURI,2000-01-01,1.0\n" * 9
        path = write_csv(tmp_path, body)

        parsed = parse_station_csv(path)

        assert len(parsed.rejected) == 1
        assert parsed.total_rows == 10

    def test_unparseable_rainfall_is_a_missing_reading(self, tmp_path):
        path = write_csv(tmp_path, "S1,PURI,2000-01-01,NA\n")

        parsed = parse_station_csv(path)

        assert parsed.rejected == ()
        assert parsed.records[0].rainfall_mm is None

    def test_too_many_rejections_abort(self, tmp_path):
        path = write_csv(tmp_path, "S1,PURI,not-a-date,1.0\nS1,PURI,2000-01-01,1.0\n")

        with pytest.raises(TooManyRejectedRows):
            parse_station_csv(path, max_rejected_fraction=0.1)

    def test_inline_coordinates(self, tmp_path):
        path = write_csv(
            tmp_path,
            "S1,PURI,2000-01-01,1.0,19.8,85.8\n",
            header="station_id,district,date,rainfall_mm,latitude,longitude\n",
        )
        schema = ColumnSchema(latitude="latitude", longitude="longitude")

        parsed = parse_station_csv(path, schema)

        assert (parsed.records[0].latitude, parsed.records[0].longitude) == (19.8, 85.8)

    def test_coordinates_from_separate_file(self, tmp_path):
        stations = write_csv(tmp_path, "S1,PURI,2000-01-01,1.0\n")
        coords = tmp_path / "coords.csv"
        coords.write_text("station_id,latitude,longitude\nS1,19.8,85.8\n")

        parsed = attach_coordinates(parse_station_csv(stations), parse_station_coordinates(coords))

        assert parsed.records[0].latitude == 19.8


class TestAggregation:
    """Tests for daily and monthly aggregation."""

    def test_missing_readings_contribute_nothing(self, station_record_factory):
        records = [
            station_record_factory(station_id="A", date=date(2000, 1, 1), rainfall_mm=2.0),
            station_record_factory(station_id="B", date=date(2000, 1, 1), rainfall_mm=None),
            station_record_factory(station_id="B", date=date(2000, 1, 2), rainfall_mm=None),
        ]

        daily = district_daily(records)

        assert daily.loc[("PURI", pd.Timestamp("2000-01-01"))] == 2.0
        assert daily.loc[("PURI", pd.Timestamp("2000-01-02"))] == 0.0

    def test_monthly_totals_ignore_record_order(self, station_record_factory):
        records = [
            station_record_factory(date=date(2000, month, day), rainfall_mm=0.1 * day + month)
            for month in (1, 2)
            for day in range(1, 11)
        ]

        forward = monthly_aggregate(district_daily(records))
        backward = monthly_aggregate(district_daily(records[::-1]))

        assert forward.months == ((2000, 1), (2000, 2))
        np.testing.assert_array_equal(forward.values, backward.values)
        assert forward.values[0, 0] == pytest.approx(sum(0.1 * d + 1 for d in range(1, 11)))

    def test_gap_in_coverage_raises(self, station_record_factory):
        records = [
            station_record_factory(district="PURI", date=date(2000, 1, 5)),
            station_record_factory(district="PURI", date=date(2000, 3, 5)),
            station_record_factory(district="ANGUL", date=date(2000, 2, 5)),
        ]

        with pytest.raises(GapInCoverage):
            monthly_aggregate(district_daily(records))

    def test_station_counts(self, station_record_factory):
        records = [
            station_record_factory(station_id="A"),
            station_record_factory(station_id="A"),
            station_record_factory(station_id="B"),
        ]

        assert station_counts(records).to_dict() == {"PURI": 2}


class TestRainfallPanel:
    """Tests for panel validation and split views."""

    def test_values_are_read_only(self, seasonal_panel):
        with pytest.raises(ValueError):
            seasonal_panel.values[0, 0] = 1.0

    def test_rejects_negative_values(self):
        with pytest.raises(NegativeRainfall):
            RainfallPanel(("A",), month_range((2000, 1), 2), [[1.0, -1.0]])

    def test_rejects_duplicate_districts(self):
        with pytest.raises(InvalidPanel):
            RainfallPanel(("A", "A"), month_range((2000, 1), 2), np.ones((2, 2)))

    def test_rejects_month_jumps(self):
        with pytest.raises(GapInCoverage):
            RainfallPanel(("A",), ((2000, 1), (2000, 3)), [[1.0, 1.0]])

    def test_split_views(self, seasonal_panel):
        assert seasonal_panel.n_train == 72
        assert seasonal_panel.train_months[-1] == (2005, 12)
        assert seasonal_panel.holdout_months[0] == (2006, 1)
        assert seasonal_panel.holdout_values.shape == (4, 24)

    def test_observed_drops_holdout(self, seasonal_panel):
        observed = seasonal_panel.observed()

        assert observed.n_months == 72
        assert observed.train_end is None
        np.testing.assert_array_equal(observed.values, seasonal_panel.train_values)

    def test_split_at_last_month_raises(self, seasonal_panel):
        with pytest.raises(OutOfRange):
            split_panel(seasonal_panel, (2007, 12))

    def test_split_outside_axis_raises(self, seasonal_panel):
        with pytest.raises(OutOfRange):
            split_panel(seasonal_panel, (1999, 12))

    @pytest.mark.parametrize("train_end", [0, 4, 9])
    def test_train_end_bound_is_stated_exactly(self, train_end):
        with pytest.raises(OutOfRange, match=r"0 < train_end < 4$"):
            RainfallPanel(("A",), month_range((2000, 1), 5), np.ones((1, 5)), train_end=train_end)

    def test_train_end_just_inside_the_bound(self):
        panel = RainfallPanel(("A",), month_range((2000, 1), 5), np.ones((1, 5)), train_end=3)

        assert panel.holdout_values.shape == (1, 1)


class TestPanelCsv:
    """Tests for the panel CSV format."""

    def test_write_then_read_with_split(self, tmp_path, seasonal_panel):
        path = write_panel_csv(seasonal_panel, tmp_path / "panel.csv")

        loaded = read_panel_csv(path, (2005, 12))

        assert path.read_text().startswith("district,2000-01,2000-02")
        assert loaded.districts == seasonal_panel.districts
        assert loaded.train_end == 71
        np.testing.assert_allclose(loaded.values, seasonal_panel.values)
