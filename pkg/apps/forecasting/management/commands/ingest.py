"""
Turn station-level daily rainfall into a district × month panel.

Usage:
    # Station CSV with its own latitude/longitude columns
    python manage.py ingest --stations data/stations.csv --train-end 2010-12

    # Coordinates in a separate station CSV, custom output directory
    python manage.py ingest --stations data/daily.csv --coordinates data/coords.csv \\
        --out var/runs/ingest-2024

    # Non-default headers
    python manage.py ingest --stations raw.csv --date-column obs_date --rainfall-column rain

Outputs:
    panel.csv           district, YYYY-MM, ... (one row per district)
    station_counts.csv  distinct stations per district
    rejected_rows.csv   line, error, detail (only when rows were rejected)
    graph.json          centroids and distance matrix (when coordinates exist)
    manifest.json

Notes:
    - Rows with bad dates, negative rainfall or blank ids are skipped and
      counted; more than --max-rejected of them aborts the run.
    - The split month is validated against the panel and recorded in the
      manifest; panel.csv itself holds every month.
"""

from dataclasses import asdict
from datetime import date

from django.conf import settings

import pandas as pd

from apps.forecasting.panel import (
    ColumnSchema,
    attach_coordinates,
    district_daily,
    monthly_aggregate,
    parse_month_label,
    parse_station_coordinates,
    parse_station_csv,
    split_panel,
    station_counts,
    write_panel_csv,
)
from apps.forecasting.spatial import build_graph, district_centroids

from ._base import ForecastingCommand


class Command(ForecastingCommand):
    help = "Aggregate station daily rainfall into a monthly district panel"
    command_name = "ingest"

    def add_arguments(self, parser):
        columns = settings.FORECASTING["STATION_COLUMNS"]
        parser.add_argument("--stations", required=True, help="Station daily CSV")
        parser.add_argument("--coordinates", default=None, help="Station coordinate CSV")
        parser.add_argument("--station-column", default=columns["station_id"])
        parser.add_argument("--district-column", default=columns["district"])
        parser.add_argument("--date-column", default=columns["date"])
        parser.add_argument("--rainfall-column", default=columns["rainfall"])
        parser.add_argument("--latitude-column", default=columns["latitude"])
        parser.add_argument("--longitude-column", default=columns["longitude"])
        parser.add_argument(
            "--train-end",
            default=settings.FORECASTING["TRAIN_END"],
            help="Last training month, YYYY-MM (default: %(default)s)",
        )
        parser.add_argument(
            "--max-rejected",
            type=float,
            default=settings.FORECASTING["MAX_REJECTED_FRACTION"],
            help="Abort when more than this share of rows is rejected",
        )
        self.add_output_argument(parser)

    def run(self, outputs, **options):
        header = pd.read_csv(options["stations"], nrows=0).columns.str.strip()
        inline = (
            options["coordinates"] is None
            and options["latitude_column"] in header
            and options["longitude_column"] in header
        )
        schema = ColumnSchema(
            station_id=options["station_column"],
            district=options["district_column"],
            date=options["date_column"],
            rainfall=options["rainfall_column"],
            latitude=options["latitude_column"] if inline else None,
            longitude=options["longitude_column"] if inline else None,
        )
        low, high = settings.FORECASTING["DATE_RANGE"]
        parsed = parse_station_csv(
            options["stations"],
            schema,
            max_rejected_fraction=options["max_rejected"],
            date_range=(date.fromisoformat(low), date.fromisoformat(high)),
        )
        if options["coordinates"]:
            parsed = attach_coordinates(
                parsed, parse_station_coordinates(options["coordinates"], options["station_column"])
            )

        panel = monthly_aggregate(district_daily(parsed))
        split = split_panel(panel, parse_month_label(options["train_end"]))
        outputs.manifest.inputs = {"stations": str(options["stations"]), "schema": asdict(schema)}
        if options["coordinates"]:
            outputs.manifest.inputs["coordinates"] = str(options["coordinates"])
        outputs.manifest.options["train_end_index"] = split.train_end

        write_panel_csv(panel, outputs.path("panel.csv"))
        outputs.write_frame("station_counts.csv", station_counts(parsed).reset_index())
        if parsed.rejected:
            outputs.write_frame(
                "rejected_rows.csv", pd.DataFrame([asdict(row) for row in parsed.rejected])
            )
        if inline or options["coordinates"]:
            graph = build_graph(panel.districts, district_centroids(parsed))
            outputs.write_json("graph.json", graph.to_json())

        self.stdout.write(
            f"{panel.n_districts} districts × {panel.n_months} months; "
            f"{split.n_train} training, {len(split.holdout_months)} holdout; "
            f"{len(parsed.rejected)} of {parsed.total_rows} rows rejected"
        )
