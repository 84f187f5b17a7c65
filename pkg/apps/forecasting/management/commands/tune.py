"""
Randomized hyperparameter search with expanding-window cross-validation.

Usage:
    # STLM over the shipped search space
    python manage.py tune --model stlm --panel panel.csv --graph graph.json --seed 7

    # HSTM, 50 candidates, 3 folds of 24 months, 4 workers
    python manage.py tune --model hstm --panel panel.csv --graph graph.json \\
        --samples 50 --folds 3 --val-months 24 --jobs 4 --seed 7

Outputs:
    best_config.json   the winning configuration (feed it to `forecast`)
    trace.jsonl        one record per candidate in draw order:
                       index, config_hash, config, fold_scores, mean
    manifest.json

Notes:
    - Only training months (up to --train-end) are read.
    - A candidate whose fold fails scores +inf (null in the trace).
    - HSTM works on whole years, so --val-months must be a multiple of 12.
    - --stage1 fixes the Stage-1 settings, e.g. to the shipped
      fixtures/hstm_stage1_reference.json, and searches Stage 2 only.
    - Results are identical for any --jobs.
"""

from django.conf import settings
from django.core.management.base import CommandError

from apps.forecasting.evaluation import build_folds
from apps.forecasting.reports import trace_lines
from apps.forecasting.search import random_search
from apps.forecasting.serializers import load_search_space, load_stage1_table, render_config

from ._base import FIXTURES_DIR, ForecastingCommand

DEFAULT_SPACES = {
    "stlm": FIXTURES_DIR / "stlm_search_space.json",
    "hstm": FIXTURES_DIR / "hstm_search_space.json",
}


class Command(ForecastingCommand):
    help = "Tune STLM or HSTM hyperparameters by randomized search"
    command_name = "tune"

    def add_arguments(self, parser):
        defaults = settings.FORECASTING
        parser.add_argument("--model", choices=["stlm", "hstm"], required=True)
        self.add_panel_arguments(parser)
        parser.add_argument("--space", default=None, help="Search space JSON")
        parser.add_argument(
            "--stage1",
            default=None,
            help="HSTM only: fixed Stage-1 table; only Stage 2 is searched",
        )
        parser.add_argument("--samples", type=int, default=defaults["SEARCH_SAMPLES"])
        parser.add_argument("--folds", type=int, default=defaults["CV_FOLDS"])
        parser.add_argument("--val-months", type=int, default=defaults["CV_VAL_MONTHS"])
        parser.add_argument("--seed", type=int, required=True)
        parser.add_argument("--jobs", type=int, default=1, help="Parallel workers")
        self.add_output_argument(parser)

    def run(self, outputs, **options):
        model = options["model"]
        if model == "hstm" and options["val_months"] % 12:
            raise CommandError("HSTM needs --val-months to be a multiple of 12")
        if options["samples"] < 1:
            raise CommandError("--samples must be at least 1")

        panel = self.load_panel(options)
        graph = self.load_graph(options, panel)
        space_path = options["space"] or DEFAULT_SPACES[model]
        space = load_search_space(model, self.load_json(space_path))
        if options["stage1"]:
            if model != "hstm":
                raise CommandError("--stage1 only applies to --model hstm")
            space = space.with_fixed_stage1(load_stage1_table(self.load_json(options["stage1"])))
        history = panel.observed()
        plan = build_folds(history.n_months, options["folds"], options["val_months"])

        result = random_search(
            model,
            space,
            n_samples=options["samples"],
            seed=options["seed"],
            history=history,
            graph=graph,
            plan=plan,
            n_jobs=options["jobs"],
        )
        outputs.manifest.config_path = str(space_path)
        outputs.manifest.config_hash = result.trace[result.best_index].config_hash
        outputs.manifest.inputs = {"panel": str(options["panel"]), "graph": str(options["graph"])}
        outputs.write_json("best_config.json", render_config(result.best_config))
        outputs.write_text("trace.jsonl", trace_lines(result.trace))

        self.stdout.write(
            f"Best of {len(result.trace)} candidates: #{result.best_index} "
            f"(mean CV NRMSE {result.best_score:.4f})"
        )
