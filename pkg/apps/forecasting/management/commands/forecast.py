"""
Fit a forecaster on the training months and forecast forward.

Usage:
    # Seasonal naive baseline over the holdout period
    python manage.py forecast --model naive --panel panel.csv --seed 0

    # STLM from a tuned configuration
    python manage.py forecast --model stlm --panel panel.csv --graph graph.json \\
        --config var/runs/tune/best_config.json --seed 7

    # HSTM with the true holdout-year features instead of Stage-1 forecasts
    python manage.py forecast --model hstm --panel panel.csv --graph graph.json \\
        --config hstm.json --seed 7 --oracle-features

Outputs:
    forecast.csv          district, YYYY-MM, ... (the panel layout)
    forecast.json         model, origin, months, provenance, config and hash
    yearly_features.csv   district, year, feature, raw, smoothed   (hstm)
    stage1_forecast.csv   district, year, feature, forecast        (hstm)
    manifest.json

Notes:
    - --seed replaces the seed stored in --config.
    - --horizon defaults to the number of holdout months.
"""

import dataclasses

from django.conf import settings
from django.core.management.base import CommandError

from apps.forecasting.features import yearly_features_frame
from apps.forecasting.forecasters import FORECASTERS
from apps.forecasting.forecasters.hstm import hstm_fit_forecast, oracle_yearly_features
from apps.forecasting.panel import month_label
from apps.forecasting.reports import FORECAST_JSON, forecast_frame, stage1_forecast_frame
from apps.forecasting.serializers import load_config, render_config

from ._base import ForecastingCommand


class Command(ForecastingCommand):
    help = "Forecast monthly district rainfall with naive, STLM or HSTM"
    command_name = "forecast"

    def add_arguments(self, parser):
        parser.add_argument("--model", choices=sorted(FORECASTERS), required=True)
        self.add_panel_arguments(parser)
        parser.add_argument("--config", default=None, help="Model configuration JSON")
        parser.add_argument("--horizon", type=int, default=None, help="Months to forecast")
        parser.add_argument("--seed", type=int, required=True)
        parser.add_argument(
            "--oracle-features",
            action="store_true",
            help="HSTM only: use true smoothed features for the holdout years",
        )
        self.add_output_argument(parser)

    def load_model_config(self, options):
        model = options["model"]
        if model == "naive":
            return None
        if not options["config"]:
            raise CommandError(f"--config is required for --model {model}")
        config = load_config(model, self.load_json(options["config"]))
        return dataclasses.replace(config, seed=options["seed"])

    def run(self, outputs, **options):
        model = options["model"]
        if options["oracle_features"] and model != "hstm":
            raise CommandError("--oracle-features only applies to --model hstm")

        panel = self.load_panel(options)
        graph = self.load_graph(options, panel)
        config = self.load_model_config(options)
        horizon = options["horizon"] or len(panel.holdout_months)
        if horizon < 1:
            raise CommandError("Nothing to forecast: the horizon is empty")

        observed = panel.observed()
        if model == "hstm":
            oracle = options["oracle_features"]
            result = hstm_fit_forecast(
                observed,
                graph,
                config,
                horizon,
                yearly_override=oracle_yearly_features(panel, config, horizon) if oracle else None,
                tol=settings.FORECASTING["LASSO_TOL"],
                max_iter=settings.FORECASTING["LASSO_MAX_ITER"],
            )
        else:
            result = FORECASTERS[model](observed, graph, config, horizon)

        rendered = render_config(config) if config is not None else None
        outputs.manifest.config_path = options["config"]
        outputs.manifest.config_hash = result.config_hash
        outputs.manifest.inputs = {"panel": str(options["panel"]), "graph": str(options["graph"])}

        outputs.write_frame("forecast.csv", forecast_frame(result), index=True)
        outputs.write_json(FORECAST_JSON, {**result.to_json(), "config": rendered})
        if model == "hstm":
            outputs.write_frame(
                "yearly_features.csv", yearly_features_frame(result.extras["yearly_table"])
            )
            outputs.write_frame("stage1_forecast.csv", stage1_forecast_frame(result))

        fed_back = result.provenance.count("fed_back")
        self.stdout.write(
            f"{model}: {result.horizon} months × {len(result.districts)} districts "
            f"from {month_label(result.months[0])} "
            f"({fed_back} steps used fed-back forecasts)"
        )
