"""
Shared forecaster plumbing: the result type, configuration hashing and seeds.
"""

import hashlib
import json
import zlib
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from ..exceptions import KTooLarge
from ..panel import Month, month_label

OBSERVED = "observed"
FED_BACK = "fed_back"


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """
    D × H nonnegative forecasts starting the month after `origin`.

    `provenance[h]` says whether step h used only observed inputs or also
    earlier forecasts fed back into the history.
    """

    model_name: str
    districts: tuple[str, ...]
    origin: Month
    months: tuple[Month, ...]
    values: np.ndarray
    provenance: tuple[str, ...]
    config_hash: str | None = None
    extras: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return len(self.months)

    def to_json(self) -> dict:
        return {
            "model": self.model_name,
            "origin": month_label(self.origin),
            "config_hash": self.config_hash,
            "months": [month_label(m) for m in self.months],
            "provenance": list(self.provenance),
            "forecasts": {
                name: row.tolist()
                for name, row in zip(self.districts, self.values, strict=True)
            },
        }


def config_payload(config) -> dict:
    return asdict(config) if is_dataclass(config) else dict(config or {})


def config_hash(config) -> str:
    """sha256 over the canonical JSON of every hyperparameter."""
    canonical = json.dumps(config_payload(config), sort_keys=True, default=list)
    return hashlib.sha256(canonical.encode()).hexdigest()


def district_seed(seed: int, district: str) -> int:
    """Seed for one district's model, independent of the panel it sits in."""
    return (int(seed) << 32) | zlib.crc32(district.encode("utf-8"))


def neighbor_indices(graph, i: int, k: int) -> tuple[int, ...]:
    if k == 0:
        return ()
    if graph is None:
        raise KTooLarge(f"k={k} neighbours requested, but no district graph was given")
    return graph.neighbor_indices(i, k)


def aligned_graph(graph, districts):
    if graph is None or graph.districts == tuple(districts):
        return graph
    return graph.reindexed(districts)
