"""
Tests for the randomized hyperparameter search.

Tests cover:
- CandidateSpace: axis flattening, configuration assembly, distinct draws
- SpaceExhausted and full enumeration
- Search-space restriction to the panel's district count
- random_search: seed determinism, n_jobs independence, trace order, tie-breaking
- A planted optimum is returned whenever the sample contains it
"""

import json
from dataclasses import replace

import numpy as np
import pytest

from apps.forecasting.evaluation import build_folds
from apps.forecasting.exceptions import EmptySearchSpace, SpaceExhausted
from apps.forecasting.features import FEATURE_TYPES
from apps.forecasting.forecasters import FORECASTERS
from apps.forecasting.forecasters.hstm import HstmConfig
from apps.forecasting.forecasters.naive import naive_forecast
from apps.forecasting.forecasters.stlm import StlmConfig
from apps.forecasting.panel import RainfallPanel
from apps.forecasting.search import (
    CandidateSpace,
    HstmSearchSpace,
    Stage1SearchSpace,
    StlmSearchSpace,
    random_search,
)


@pytest.fixture
def stlm_space():
    return StlmSearchSpace(
        p=(12, 13),
        k=(0, 1, 5),
        q=(2,),
        hidden_units=(2, 3),
        learning_rate=(0.01,),
        l1_alpha=(0.001,),
        epochs=(2,),
        hidden_layers=1,
    )


@pytest.fixture
def hstm_space(stlm_space):
    stage1 = Stage1SearchSpace(
        span=(2, 3), p=(1, 2), q=(1,), k=(0, 1), L=(2, 3), lam=(0.01,)
    )
    return HstmSearchSpace(stage1=stage1, stage2=stlm_space)


class TestCandidateSpace:
    """Tests for flattening and drawing candidates."""

    def test_stlm_axes_per_district(self, stlm_space):
        space = CandidateSpace("stlm", ("A", "B"), stlm_space, seed=0)

        assert len(space.axes) == 2 * 8
        assert space.size == (2 * 3 * 2) ** 2

    def test_config_assembly(self, stlm_space):
        space = CandidateSpace("stlm", ("A", "B"), stlm_space, seed=4)

        config = space.config([1, 2, 0, 1, 0, 0, 0, 0] + [0] * 8)

        assert isinstance(config, StlmConfig)
        assert config.seed == 4
        assert config.districts["A"].p == 13
        assert config.districts["A"].k == 5
        assert config.districts["A"].hidden_units == (3,)
        assert config.districts["B"].p == 12

    def test_hstm_config_assembly(self, hstm_space):
        space = CandidateSpace("hstm", ("A", "B"), hstm_space, seed=0)

        config = space.config([0] * len(space.axes))

        assert isinstance(config, HstmConfig)
        assert set(config.stage1) == set(FEATURE_TYPES)
        assert set(config.stage2) == {"A", "B"}

    def test_fixed_stage1_only_searches_stage2(self, hstm_space, stage1_feature_config):
        table = {name: stage1_feature_config for name in FEATURE_TYPES}
        space = CandidateSpace("hstm", ("A",), hstm_space.with_fixed_stage1(table), seed=0)

        config = space.config([0] * len(space.axes))

        assert len(space.axes) == 8
        assert config.stage1["Total"] == stage1_feature_config

    def test_draws_are_distinct(self, stlm_space):
        space = CandidateSpace("stlm", ("A", "B"), stlm_space, seed=0)

        drawn = space.draw(100, np.random.default_rng(1))

        assert len(set(drawn)) == 100

    def test_asking_for_too_many_raises(self, stlm_space):
        space = CandidateSpace("stlm", ("A",), stlm_space, seed=0)

        with pytest.raises(SpaceExhausted):
            space.draw(13, np.random.default_rng(0))
        assert len(space.enumerate_all()) == 12


class TestRestriction:
    def test_drops_k_values_the_panel_cannot_supply(self, stlm_space):
        assert stlm_space.restricted(3).k == (0, 1)

    def test_nothing_left_raises(self, stlm_space):
        with pytest.raises(EmptySearchSpace):
            replace(stlm_space, k=(5,)).restricted(3)


class TestRandomSearch:
    """Tests for the search loop."""

    @pytest.fixture
    def search_inputs(self, seasonal_panel, graph):
        history = seasonal_panel.observed()
        return {
            "history": history,
            "graph": graph,
            "plan": build_folds(history.n_months, 2, 12),
        }

    def test_same_seed_same_trace(self, stlm_space, search_inputs):
        a = random_search("stlm", stlm_space, 3, seed=8, **search_inputs)
        b = random_search("stlm", stlm_space, 3, seed=8, **search_inputs)

        assert [r.to_json() for r in a.trace] == [r.to_json() for r in b.trace]
        assert a.best_index == b.best_index

    def test_parallel_matches_serial(self, stlm_space, search_inputs):
        serial = random_search("stlm", stlm_space, 3, seed=2, n_jobs=1, **search_inputs)
        parallel = random_search("stlm", stlm_space, 3, seed=2, n_jobs=2, **search_inputs)

        assert [r.to_json() for r in serial.trace] == [r.to_json() for r in parallel.trace]

    def test_best_is_first_minimum(self, stlm_space, search_inputs):
        result = random_search("stlm", stlm_space, 4, seed=3, **search_inputs)

        means = [record.mean for record in result.trace]
        assert result.best_index == means.index(min(means))
        assert result.best_score == min(means)
        assert [record.index for record in result.trace] == [0, 1, 2, 3]

    def test_oversized_request_enumerates_space(self, search_inputs):
        small = StlmSearchSpace(
            p=(12,), k=(0,), q=(1,), hidden_units=(2,), learning_rate=(0.01,),
            l1_alpha=(0.0,), epochs=(1,), hidden_layers=1,
        )

        result = random_search("stlm", small, 5, seed=0, **search_inputs)

        assert len(result.trace) == 1

    def test_trace_serialises_infinite_scores_as_null(self, search_inputs):
        space = StlmSearchSpace(
            p=(80,), k=(0,), q=(1,), hidden_units=(2,), learning_rate=(0.01,),
            l1_alpha=(0.0,), epochs=(1,), hidden_layers=1,
        )

        result = random_search("stlm", space, 1, seed=0, **search_inputs)

        payload = json.loads(json.dumps(result.trace[0].to_json()))
        assert payload["mean"] is None
        assert payload["fold_scores"] == [None, None]


class TestPlantedOptimum:
    """A forecaster whose CV error is zero for exactly one grid point."""

    @pytest.fixture
    def history(self, seasonal_panel):
        observed = seasonal_panel.observed()
        return RainfallPanel(observed.districts[:1], observed.months, observed.values[:1])

    @pytest.fixture
    def space(self):
        return StlmSearchSpace(
            p=(11, 12, 13, 14, 15), k=(0,), q=(1,), hidden_units=(2,),
            learning_rate=(0.01,), l1_alpha=(0.0,), epochs=(1,), hidden_layers=1,
        )

    @pytest.fixture(autouse=True)
    def planted(self, monkeypatch, history):
        name = history.districts[0]

        def forecaster(observed, graph, config, horizon):
            start = observed.n_months
            actual = history.values[:, start : start + horizon]
            offset = 10.0 * abs(config.for_district(name).p - 13)
            return replace(naive_forecast(observed, horizon), values=actual + offset)

        monkeypatch.setitem(FORECASTERS, "stlm", forecaster)

    def sampled_p(self, result, name):
        return [record.config["districts"][name]["p"] for record in result.trace]

    def test_exhaustive_search_finds_it(self, history, space):
        plan = build_folds(history.n_months, 2, 12)

        result = random_search("stlm", space, 5, seed=0, history=history, graph=None, plan=plan)

        assert result.best_config.for_district(history.districts[0]).p == 13
        assert result.best_score == 0.0

    @pytest.mark.parametrize("seed", range(8))
    def test_found_whenever_sampled(self, history, space, seed):
        name = history.districts[0]
        plan = build_folds(history.n_months, 2, 12)

        result = random_search("stlm", space, 2, seed=seed, history=history, graph=None, plan=plan)

        best_p = result.best_config.for_district(name).p
        if 13 in self.sampled_p(result, name):
            assert best_p == 13
            assert result.best_score == 0.0
        else:
            assert best_p == min(self.sampled_p(result, name), key=lambda p: abs(p - 13))
