"""
Score a forecast against the holdout months of a panel.

Usage:
    python manage.py evaluate --forecast var/runs/forecast/forecast.csv --panel panel.csv

    # Percentage improvement over the seasonal naive run
    python manage.py evaluate --forecast hstm/forecast.csv --panel panel.csv \\
        --baseline naive/forecast.csv

Outputs:
    district_metrics.csv  District, sMAPE (%), NRMSE (×100)
    yearly_smape.csv      District × holdout year sMAPE (%)
    improvement.csv       District, sMAPE, NRMSE reduction in %   (with --baseline)
    manifest.json

Notes:
    - --normalizer train divides RMSE by each district's training SD,
      validation by its holdout SD.
"""

from apps.forecasting.evaluation import holdout_evaluate, improvement_table
from apps.forecasting.reports import read_forecast_csv

from ._base import ForecastingCommand


class Command(ForecastingCommand):
    help = "Compute sMAPE and NRMSE tables for a forecast"
    command_name = "evaluate"

    def add_arguments(self, parser):
        parser.add_argument("--forecast", required=True, help="Forecast CSV")
        self.add_panel_arguments(parser, graph=False)
        parser.add_argument(
            "--normalizer", choices=["train", "validation"], default="train"
        )
        parser.add_argument("--baseline", default=None, help="Reference forecast CSV")
        self.add_output_argument(parser)

    def run(self, outputs, **options):
        panel = self.load_panel(options)
        forecast = read_forecast_csv(options["forecast"])
        report = holdout_evaluate(forecast, panel, options["normalizer"])
        outputs.manifest.config_hash = forecast.config_hash
        outputs.manifest.inputs = {
            "forecast": str(options["forecast"]),
            "panel": str(options["panel"]),
        }

        outputs.write_frame("district_metrics.csv", report.metrics_frame())
        outputs.write_frame("yearly_smape.csv", report.yearly_frame())
        if options["baseline"]:
            baseline = read_forecast_csv(options["baseline"])
            reference = holdout_evaluate(baseline, panel, options["normalizer"])
            outputs.manifest.inputs["baseline"] = str(options["baseline"])
            outputs.write_frame("improvement.csv", improvement_table(reference, report))
            self.stdout.write(
                f"{baseline.model_name} baseline: mean NRMSE {reference.mean_nrmse:.4f}"
            )

        self.stdout.write(
            f"{forecast.model_name}: mean sMAPE {report.mean_smape:.2f}%, "
            f"mean NRMSE {report.mean_nrmse:.4f}"
        )
