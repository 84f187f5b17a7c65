"""
Seeded randomized hyperparameter search scored by expanding-window CV.

A search space is flattened into independent choice axes (one per
hyperparameter per district, plus one per Stage-1 hyperparameter per feature
for HSTM). A candidate is a tuple of axis indices; drawing without
replacement is done on those tuples, so every candidate in a search is a
distinct full configuration.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .evaluation import CvScore, FoldPlan, cv_score
from .exceptions import EmptySearchSpace, SpaceExhausted
from .features import FEATURE_TYPES
from .forecasters.base import config_hash, config_payload
from .forecasters.hstm import HstmConfig, Stage1FeatureConfig
from .forecasters.stlm import StlmConfig, StlmDistrictConfig
from .panel import RainfallPanel

logger = logging.getLogger(__name__)

# Spaces up to this size are sampled exactly with rng.choice; larger ones by
# redrawing on collision.
_EXACT_SAMPLING_LIMIT = 1_000_000


# ============================================================================
# Search spaces
# ============================================================================


@dataclass(frozen=True)
class StlmSearchSpace:
    """Per-district grids; each hidden layer's width is drawn independently."""

    p: tuple[int, ...]
    k: tuple[int, ...]
    q: tuple[int, ...]
    hidden_units: tuple[int, ...]
    learning_rate: tuple[float, ...]
    l1_alpha: tuple[float, ...]
    epochs: tuple[int, ...]
    batch_size: tuple[int, ...] = (32,)
    hidden_layers: int = 2
    patience: int = 10
    val_fraction: float = 0.1

    def restricted(self, n_districts: int) -> "StlmSearchSpace":
        """Drop neighbour counts the panel cannot supply."""
        allowed = tuple(k for k in self.k if k <= n_districts - 1)
        dropped = sorted(set(self.k) - set(allowed))
        if dropped:
            logger.info("Dropping k values %s: only %d districts", dropped, n_districts)
        if not allowed:
            raise EmptySearchSpace(f"No k value in {self.k} fits a {n_districts}-district panel")
        return replace(self, k=allowed)

    def axes(self) -> list[tuple]:
        return [
            self.p,
            self.k,
            self.q,
            *([self.hidden_units] * self.hidden_layers),
            self.learning_rate,
            self.l1_alpha,
            self.epochs,
            self.batch_size,
        ]

    def build(self, values: Sequence) -> StlmDistrictConfig:
        p, k, q, *rest = values
        units = tuple(rest[: self.hidden_layers])
        learning_rate, l1_alpha, epochs, batch_size = rest[self.hidden_layers :]
        return StlmDistrictConfig(
            p=p,
            k=k,
            q=q,
            hidden_units=units,
            learning_rate=learning_rate,
            l1_alpha=l1_alpha,
            epochs=epochs,
            batch_size=batch_size,
            patience=self.patience,
            val_fraction=self.val_fraction,
        )


@dataclass(frozen=True)
class Stage1SearchSpace:
    span: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    k: tuple[int, ...]
    L: tuple[int, ...]
    lam: tuple[float, ...]

    def axes(self) -> list[tuple]:
        return [self.span, self.p, self.q, self.k, self.L, self.lam]

    def build(self, values: Sequence) -> Stage1FeatureConfig:
        span, p, q, k, window, lam = values
        return Stage1FeatureConfig(span=span, p=p, q=q, k=k, L=window, lam=lam)


@dataclass(frozen=True)
class HstmSearchSpace:
    """
    Stage-1 grids shared by all nine features plus Stage-2 district grids.

    With `fixed_stage1` the Stage-1 settings are taken as given and only
    Stage 2 is searched.
    """

    stage1: Stage1SearchSpace
    stage2: StlmSearchSpace
    fixed_stage1: dict[str, Stage1FeatureConfig] | None = None

    def with_fixed_stage1(self, table: dict[str, Stage1FeatureConfig]) -> "HstmSearchSpace":
        return replace(self, fixed_stage1=dict(table))

    def restricted(self, n_districts: int) -> "HstmSearchSpace":
        allowed = tuple(k for k in self.stage1.k if k <= n_districts - 1)
        if not allowed:
            raise EmptySearchSpace(f"No Stage-1 k in {self.stage1.k} fits {n_districts} districts")
        return replace(
            self,
            stage1=replace(self.stage1, k=allowed),
            stage2=self.stage2.restricted(n_districts),
        )


# ============================================================================
# Candidates
# ============================================================================


@dataclass(frozen=True)
class CandidateSpace:
    """A search space unrolled over the panel's districts."""

    model: str
    districts: tuple[str, ...]
    space: StlmSearchSpace | HstmSearchSpace
    seed: int
    axes: tuple[tuple, ...] = field(init=False)

    def __post_init__(self):
        if self.model == "stlm":
            axes = [axis for _ in self.districts for axis in self.space.axes()]
        elif self.model == "hstm":
            axes = []
            if self.space.fixed_stage1 is None:
                axes += [axis for _ in FEATURE_TYPES for axis in self.space.stage1.axes()]
            axes += [axis for _ in self.districts for axis in self.space.stage2.axes()]
        else:
            raise ValueError(f"No search space for model '{self.model}'")
        object.__setattr__(self, "axes", tuple(tuple(axis) for axis in axes))

    @property
    def size(self) -> int:
        return math.prod(len(axis) for axis in self.axes)

    def _district_configs(self, space: StlmSearchSpace, values: list) -> dict:
        width = len(space.axes())
        return {
            name: space.build(values[i * width : (i + 1) * width])
            for i, name in enumerate(self.districts)
        }

    def config(self, indices: Sequence[int]):
        values = [axis[i] for axis, i in zip(self.axes, indices, strict=True)]
        if self.model == "stlm":
            return StlmConfig(districts=self._district_configs(self.space, values), seed=self.seed)
        if self.space.fixed_stage1 is not None:
            stage1 = {feature: self.space.fixed_stage1[feature] for feature in FEATURE_TYPES}
            offset = 0
        else:
            width = len(self.space.stage1.axes())
            stage1 = {
                feature: self.space.stage1.build(values[f * width : (f + 1) * width])
                for f, feature in enumerate(FEATURE_TYPES)
            }
            offset = len(FEATURE_TYPES) * width
        stage2 = self._district_configs(self.space.stage2, values[offset:])
        return HstmConfig(stage1=stage1, stage2=stage2, seed=self.seed)

    def draw(self, n_samples: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
        """
        Draw distinct candidates. Raises SpaceExhausted when more are asked
        for than the space holds.
        """
        shape = tuple(len(axis) for axis in self.axes)
        size = self.size
        if n_samples > size:
            raise SpaceExhausted(f"{n_samples} samples requested from a space of {size}")
        if size <= _EXACT_SAMPLING_LIMIT:
            flat = rng.choice(size, size=n_samples, replace=False)
            return [tuple(int(i) for i in np.unravel_index(f, shape)) for f in flat]
        seen = set()
        drawn = []
        while len(drawn) < n_samples:
            candidate = tuple(int(rng.integers(n)) for n in shape)
            if candidate not in seen:
                seen.add(candidate)
                drawn.append(candidate)
        return drawn

    def enumerate_all(self) -> list[tuple[int, ...]]:
        shape = tuple(len(axis) for axis in self.axes)
        return [tuple(int(i) for i in np.unravel_index(f, shape)) for f in range(self.size)]


# ============================================================================
# Search
# ============================================================================


@dataclass(frozen=True)
class TraceRecord:
    index: int
    config_hash: str
    config: dict
    fold_scores: tuple[float, ...]
    mean: float

    def to_json(self) -> dict:
        def finite(value):
            return value if math.isfinite(value) else None

        return {
            "index": self.index,
            "config_hash": self.config_hash,
            "config": self.config,
            "fold_scores": [finite(s) for s in self.fold_scores],
            "mean": finite(self.mean),
        }


@dataclass(frozen=True)
class SearchResult:
    best_config: object
    best_score: float
    best_index: int
    trace: tuple[TraceRecord, ...]


def _evaluate(model: str, history: RainfallPanel, graph, config, plan: FoldPlan) -> CvScore:
    return cv_score(model, history, graph, config, plan)


def random_search(
    model: str,
    space: StlmSearchSpace | HstmSearchSpace,
    n_samples: int,
    seed: int,
    history: RainfallPanel,
    graph,
    plan: FoldPlan,
    n_jobs: int = 1,
) -> SearchResult:
    """
    Score `n_samples` distinct configurations and return the best.

    Candidates are drawn up front from a generator seeded with `seed` and
    scored in parallel; the trace keeps draw order, and ties go to the
    earliest draw, so the outcome does not depend on `n_jobs`.
    """
    if n_samples < 1:
        raise ValueError(f"At least one sample is required, got {n_samples}")
    candidates = CandidateSpace(
        model=model,
        districts=history.districts,
        space=space.restricted(history.n_districts),
        seed=seed,
    )
    try:
        drawn = candidates.draw(n_samples, np.random.default_rng(seed))
    except SpaceExhausted as exc:
        logger.warning("%s; evaluating all %d configurations", exc, candidates.size)
        drawn = candidates.enumerate_all()

    configs = [candidates.config(indices) for indices in drawn]
    logger.info("Scoring %d %s candidates with %d job(s)", len(configs), model, n_jobs)
    scores = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate)(model, history, graph, config, plan) for config in configs
    )

    trace = []
    best_index = 0
    for index, (config, score) in enumerate(zip(configs, scores, strict=True)):
        trace.append(
            TraceRecord(
                index=index,
                config_hash=config_hash(config),
                config=config_payload(config),
                fold_scores=score.fold_scores,
                mean=score.mean,
            )
        )
        logger.info("Candidate %d: mean NRMSE %.4f", index, score.mean)
        if score.mean < scores[best_index].mean:
            best_index = index

    return SearchResult(
        best_config=configs[best_index],
        best_score=scores[best_index].mean,
        best_index=best_index,
        trace=tuple(trace),
    )
