"""
Climate analytics tables for a panel.

Usage:
    python manage.py analytics --panel var/runs/ingest/panel.csv \\
        --graph var/runs/ingest/graph.json

    # Custom SPI baseline and decades
    python manage.py analytics --panel panel.csv --baseline 1960-1990 \\
        --decades 1991-2000,2001-2010

Outputs:
    extreme_years.csv         district, decade, heavy, light (|SPI| > threshold)
    decadal_slopes.csv        OLS slope of annual totals, district × decade
    decadal_summary.csv       mean annual/monsoon totals and monsoon share
    correlation_matrix.csv    D × D Pearson correlation of monthly rainfall
    distance_correlation.csv  pair, distance, metric, r   (needs --graph)
    manifest.json
"""

from django.conf import settings
from django.core.management.base import CommandError

import pandas as pd

from apps.forecasting.analytics import (
    METRICS,
    correlation_matrix,
    correlation_vs_distance,
    decadal_slopes,
    decadal_summary,
    extreme_years_frame,
    spi_baseline,
)

from ._base import ForecastingCommand


def year_range(text: str) -> tuple[int, int]:
    try:
        first, last = (int(part) for part in text.strip().split("-"))
    except ValueError as exc:
        raise CommandError(f"Expected a year range like 1971-1980, got {text!r}") from exc
    return first, last


class Command(ForecastingCommand):
    help = "Compute SPI extremes, decadal trends and distance-correlation tables"
    command_name = "analytics"

    def add_arguments(self, parser):
        baseline = settings.FORECASTING["SPI_BASELINE"]
        decades = settings.FORECASTING["DECADES"]
        self.add_panel_arguments(parser, split=False)
        parser.add_argument("--baseline", default=f"{baseline[0]}-{baseline[1]}")
        parser.add_argument(
            "--decades", default=",".join(f"{a}-{b}" for a, b in decades)
        )
        parser.add_argument(
            "--threshold", type=float, default=settings.FORECASTING["SPI_THRESHOLD"]
        )
        parser.add_argument(
            "--metrics",
            default=",".join(METRICS),
            help="Series compared in the distance-correlation table",
        )
        self.add_output_argument(parser)

    def run(self, outputs, **options):
        panel = self.load_panel(options, split=False)
        graph = self.load_graph(options, panel)
        baseline_years = year_range(options["baseline"])
        decades = [year_range(text) for text in options["decades"].split(",")]
        metrics = [name.strip() for name in options["metrics"].split(",")]
        unknown = [name for name in metrics if name not in METRICS]
        if unknown:
            raise CommandError(f"Unknown metrics: {', '.join(unknown)}")

        baseline = spi_baseline(panel, *baseline_years)
        outputs.write_frame(
            "extreme_years.csv",
            extreme_years_frame(panel, baseline, decades, options["threshold"]),
        )
        outputs.write_frame("decadal_slopes.csv", decadal_slopes(panel, decades), index=True)
        outputs.write_frame("decadal_summary.csv", decadal_summary(panel, decades))
        outputs.write_frame(
            "correlation_matrix.csv", correlation_matrix(panel), index=True, index_label="district"
        )
        if graph is not None:
            outputs.write_frame(
                "distance_correlation.csv",
                pd.concat(
                    [correlation_vs_distance(panel, graph, metric) for metric in metrics],
                    ignore_index=True,
                ),
            )
        else:
            self.stdout.write("No --graph given; skipping distance-correlation table")
