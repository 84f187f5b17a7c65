"""
District centroids, great-circle distances and nearest-neighbour lists.
"""

import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import KTooLarge, NoStations
from .panel import records_frame

EARTH_RADIUS_KM = 6371.0088

type Coordinate = tuple[float, float]


def haversine_km(a: Coordinate, b: Coordinate) -> float:
    """Great-circle distance in kilometres between two (lat, lon) points in degrees."""
    lat1, lon1, lat2, lon2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def district_centroids(records) -> dict[str, Coordinate]:
    """
    Mean latitude and longitude of each district's stations.

    Each station counts once, however many daily rows it has. Every district
    present in `records` must have at least one station with coordinates.
    """
    frame = records_frame(records)
    located = frame.dropna(subset=["latitude", "longitude"]).drop_duplicates("station_id")
    centroids = located.groupby("district", sort=True)[["latitude", "longitude"]].mean()
    for district in sorted(frame["district"].unique()):
        if district not in centroids.index:
            raise NoStations(district)
    return {
        str(district): (float(row.latitude), float(row.longitude))
        for district, row in centroids.iterrows()
    }


@dataclass(frozen=True, eq=False)
class DistrictGraph:
    """
    Distance matrix and sorted neighbour lists over a fixed district order.

    `neighbor_lists[i]` holds the indices of every other district in
    ascending distance, ties broken by district name.
    """

    districts: tuple[str, ...]
    centroids: tuple[Coordinate, ...]
    distances: np.ndarray
    neighbor_lists: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.districts)

    def index(self, district: str) -> int:
        try:
            return self.districts.index(district)
        except ValueError as exc:
            raise KeyError(f"District '{district}' is not in the graph") from exc

    def neighbor_indices(self, i: int, k: int) -> tuple[int, ...]:
        if not 0 <= k <= len(self.districts) - 1:
            raise KTooLarge(
                f"k={k} neighbours requested, but the graph has {len(self.districts)} districts"
            )
        return self.neighbor_lists[i][:k]

    def reindexed(self, districts: Sequence[str]) -> "DistrictGraph":
        """Rebuild the graph over `districts`, which must all be present."""
        missing = [name for name in districts if name not in self.districts]
        if missing:
            raise NoStations(missing[0])
        order = [self.index(name) for name in districts]
        return _assemble(
            tuple(districts),
            tuple(self.centroids[i] for i in order),
            self.distances[np.ix_(order, order)].copy(),
        )

    def to_json(self) -> dict:
        return {
            "districts": list(self.districts),
            "centroids": {
                name: {"latitude": lat, "longitude": lon}
                for name, (lat, lon) in zip(self.districts, self.centroids, strict=True)
            },
            "distances_km": self.distances.tolist(),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "DistrictGraph":
        districts = payload["districts"]
        centroids = {
            name: (float(c["latitude"]), float(c["longitude"]))
            for name, c in payload["centroids"].items()
        }
        return build_graph(districts, centroids)

    def dump(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "DistrictGraph":
        return cls.from_json(json.loads(Path(path).read_text()))


def build_graph(
    districts: Sequence[str],
    centroids: dict[str, Coordinate],
    distance: Callable[[Coordinate, Coordinate], float] = haversine_km,
) -> DistrictGraph:
    names = tuple(districts)
    missing = [name for name in names if name not in centroids]
    if missing:
        raise NoStations(missing[0])
    points = tuple(tuple(map(float, centroids[name])) for name in names)

    size = len(names)
    distances = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1, size):
            distances[i, j] = distances[j, i] = distance(points[i], points[j])
    return _assemble(names, points, distances)


def _assemble(names, points, distances) -> DistrictGraph:
    size = len(names)
    distances.setflags(write=False)
    neighbor_lists = tuple(
        tuple(
            sorted(
                (j for j in range(size) if j != i),
                key=lambda j, i=i: (distances[i, j], names[j]),
            )
        )
        for i in range(size)
    )
    return DistrictGraph(
        districts=names,
        centroids=points,
        distances=distances,
        neighbor_lists=neighbor_lists,
    )


def knn(graph: DistrictGraph, district: str, k: int) -> list[str]:
    """The k nearest districts to `district`, nearest first."""
    indices = graph.neighbor_indices(graph.index(district), k)
    return [graph.districts[j] for j in indices]
