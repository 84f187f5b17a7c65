"""
Generate a seeded synthetic panel for trials and acceptance runs.

Usage:
    # 6 districts, 60 years from 1960
    python manage.py synth --seed 42

    # Also emit station-level daily readings for `ingest`
    python manage.py synth --seed 42 --districts 4 --years 12 --daily

Outputs:
    panel.csv, graph.json, manifest.json
    stations.csv, coordinates.csv   (with --daily)
"""

from apps.forecasting.panel import write_panel_csv
from apps.forecasting.spatial import build_graph
from apps.forecasting.synthetic import generate_daily_stations, generate_panel

from ._base import ForecastingCommand


class Command(ForecastingCommand):
    help = "Generate a synthetic monthly rainfall panel"
    command_name = "synth"

    def add_arguments(self, parser):
        parser.add_argument("--seed", type=int, required=True)
        parser.add_argument("--districts", type=int, default=6)
        parser.add_argument("--years", type=int, default=60)
        parser.add_argument("--start-year", type=int, default=1960)
        parser.add_argument(
            "--daily", action="store_true", help="Also write station daily CSVs"
        )
        parser.add_argument("--stations-per-district", type=int, default=3)
        self.add_output_argument(parser)

    def run(self, outputs, **options):
        panel, centroids = generate_panel(
            n_districts=options["districts"],
            n_years=options["years"],
            start_year=options["start_year"],
            seed=options["seed"],
        )
        write_panel_csv(panel, outputs.path("panel.csv"))
        outputs.write_json("graph.json", build_graph(panel.districts, centroids).to_json())
        if options["daily"]:
            stations, coordinates = generate_daily_stations(
                panel,
                centroids,
                stations_per_district=options["stations_per_district"],
                seed=options["seed"],
            )
            outputs.write_frame("stations.csv", stations)
            outputs.write_frame("coordinates.csv", coordinates)
        self.stdout.write(f"{panel.n_districts} districts × {panel.n_months} months")
