"""
Shared plumbing for the forecasting management commands.

Each command writes into one output directory through RunOutputs, finishes
with a manifest.json, and turns engine errors and bad arguments into
CommandError (nonzero exit, message on stderr) after removing what it wrote.
"""

import json
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from rest_framework.exceptions import ValidationError

from apps.forecasting.exceptions import ForecastingError
from apps.forecasting.manifest import RunManifest, RunOutputs
from apps.forecasting.panel import parse_month_label, read_panel_csv
from apps.forecasting.spatial import DistrictGraph

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).resolve().parents[2] / "fixtures"


class ForecastingCommand(BaseCommand):
    """Base class: subclasses implement `run(outputs, **options)`."""

    command_name = ""

    def add_output_argument(self, parser):
        parser.add_argument(
            "--out",
            type=Path,
            default=None,
            help="Output directory (default: $RAINWAYS_OUTPUT_DIR/<command>)",
        )

    def add_panel_arguments(self, parser, graph=True, split=True):
        parser.add_argument("--panel", type=Path, required=True, help="Panel CSV")
        if graph:
            parser.add_argument("--graph", type=Path, default=None, help="District graph JSON")
        if split:
            parser.add_argument(
                "--train-end",
                default=settings.FORECASTING["TRAIN_END"],
                help="Last training month, YYYY-MM (default: %(default)s)",
            )

    def output_dir(self, options) -> Path:
        return options.get("out") or settings.FORECASTING["OUTPUT_DIR"] / self.command_name

    def load_panel(self, options, split=True):
        train_end = parse_month_label(options["train_end"]) if split else None
        return read_panel_csv(options["panel"], train_end)

    def load_graph(self, options, panel):
        if not options.get("graph"):
            return None
        return DistrictGraph.load(options["graph"]).reindexed(panel.districts)

    def load_json(self, path):
        return json.loads(Path(path).read_text())

    def manifest(self, options, **fields) -> RunManifest:
        recorded = {
            key: str(value) if isinstance(value, Path) else value
            for key, value in options.items()
            if key not in {"verbosity", "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks"}
        }
        return RunManifest(command=self.command_name, options=recorded, **fields)

    def handle(self, *args, **options):
        out = self.output_dir(options)
        logger.info("Starting %s into %s", self.command_name, out)
        manifest = self.manifest(options, seed=options.get("seed"))
        try:
            with RunOutputs(out, manifest) as outputs:
                self.run(outputs, **options)
                outputs.finish()
        except ValidationError as exc:
            raise CommandError(f"Invalid configuration: {exc.detail}") from exc
        except (ForecastingError, FileNotFoundError, ValueError) as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}") from exc
        logger.info("Finished %s", self.command_name)
        self.stdout.write(self.style.SUCCESS(f"{self.command_name}: outputs written to {out}"))

    def run(self, outputs: RunOutputs, **options):
        raise NotImplementedError
