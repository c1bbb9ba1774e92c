# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import logging
from dataclasses import dataclass
from math import floor
from typing import Annotated, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from celerity.common import GeographicCoordinate
from pydantic import BaseModel, ConfigDict, Field
from shapely import prepare
from shapely.geometry import MultiPolygon, Point, Polygon
from shapely.geometry.base import BaseGeometry

from .common import BoundingBox
from .constants import NUMBER_OF_SES_CLASSES
from .models import SesRegion

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************


def get_region_geometry(region: SesRegion) -> BaseGeometry:
    """
    Build the (multi)polygon geometry of a region from its rings.

    The first ring of each polygon is its exterior; any further rings are holes.
    """
    polygons = [
        Polygon(shell=rings[0], holes=rings[1:] or None) for rings in region.polygons
    ]

    return polygons[0] if len(polygons) == 1 else MultiPolygon(polygons)


# **************************************************************************************


@dataclass(frozen=True)
class SpatialIndex:
    """
    A uniform lon/lat grid over the bounding box of an SES map.

    Each occupied cell lists, in file order, the regions whose bounding boxes
    intersect it; the candidate lists are therefore supersets of true containment.
    """

    regions: Tuple[SesRegion, ...]

    geometries: Tuple[BaseGeometry, ...]

    bounds: BoundingBox

    cells_per_axis: int

    cells: Dict[Tuple[int, int], Tuple[int, ...]]

    @property
    def cell_width(self) -> float:
        return (
            self.bounds["max_lon"] - self.bounds["min_lon"]
        ) / self.cells_per_axis or 1.0

    @property
    def cell_height(self) -> float:
        return (
            self.bounds["max_lat"] - self.bounds["min_lat"]
        ) / self.cells_per_axis or 1.0

    def get_cell(self, lon: float, lat: float) -> Tuple[int, int]:
        """
        Get the (column, row) of the cell holding a point, clipped to the grid.
        """
        column = floor((lon - self.bounds["min_lon"]) / self.cell_width)
        row = floor((lat - self.bounds["min_lat"]) / self.cell_height)

        last = self.cells_per_axis - 1

        return min(max(column, 0), last), min(max(row, 0), last)

    def get_candidates(self, lon: float, lat: float) -> Tuple[int, ...]:
        """
        Get the file-order indices of regions that may contain the point.
        """
        if not (
            self.bounds["min_lon"] <= lon <= self.bounds["max_lon"]
            and self.bounds["min_lat"] <= lat <= self.bounds["max_lat"]
        ):
            return ()

        return self.cells.get(self.get_cell(lon, lat), ())


# **************************************************************************************


def build_index(regions: Sequence[SesRegion], cells_per_axis: int = 256) -> SpatialIndex:
    """
    Build a uniform grid index over the bounding box of the SES regions.

    Args:
        regions (Sequence[SesRegion]): The regions, in file order.
        cells_per_axis (int): The number of grid cells along each axis.

    Raises:
        ValueError: If there are no regions or cells_per_axis is not positive.

    Returns:
        SpatialIndex: The immutable index.
    """
    if not regions:
        raise ValueError("Cannot build a spatial index over zero regions")

    if cells_per_axis < 1:
        raise ValueError("cells_per_axis must be at least 1")

    geometries = tuple(get_region_geometry(region) for region in regions)

    # Prepared geometries make repeated containment queries considerably faster:
    for geometry in geometries:
        prepare(geometry)

    extents = np.array([geometry.bounds for geometry in geometries])

    bounds = BoundingBox(
        min_lon=float(extents[:, 0].min()),
        min_lat=float(extents[:, 1].min()),
        max_lon=float(extents[:, 2].max()),
        max_lat=float(extents[:, 3].max()),
    )

    index = SpatialIndex(
        regions=tuple(regions),
        geometries=geometries,
        bounds=bounds,
        cells_per_axis=cells_per_axis,
        cells={},
    )

    cells: Dict[Tuple[int, int], List[int]] = {}

    for position, (min_lon, min_lat, max_lon, max_lat) in enumerate(extents):
        first_column, first_row = index.get_cell(min_lon, min_lat)
        last_column, last_row = index.get_cell(max_lon, max_lat)

        for column in range(first_column, last_column + 1):
            for row in range(first_row, last_row + 1):
                cells.setdefault((column, row), []).append(position)

    # Regions are appended in file order, so every candidate list is already sorted:
    index.cells.update({cell: tuple(members) for cell, members in cells.items()})

    logger.debug(
        "Built a %dx%d spatial index over %d regions (%d occupied cells)",
        cells_per_axis,
        cells_per_axis,
        len(regions),
        len(cells),
    )

    return index


# **************************************************************************************


def locate_point(index: SpatialIndex, lon: float, lat: float) -> Optional[str]:
    """
    Find the region containing a point.

    Points on a region's boundary count as inside it, so a point on an edge shared
    by several regions resolves to the first of them in file order.

    Args:
        index (SpatialIndex): The spatial index.
        lon (float): The longitude of the point (in degrees).
        lat (float): The latitude of the point (in degrees).

    Returns:
        Optional[str]: The region_id, or None if the point lies outside all regions.
    """
    candidates = index.get_candidates(lon, lat)

    if not candidates:
        return None

    point = Point(lon, lat)

    for position in candidates:
        if index.geometries[position].covers(point):
            return index.regions[position].region_id

    return None


# **************************************************************************************


def locate_coordinate(
    index: SpatialIndex, coordinate: GeographicCoordinate
) -> Optional[str]:
    return locate_point(index, lon=coordinate["lon"], lat=coordinate["lat"])


# **************************************************************************************


class DecileAssignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    classes: Annotated[
        Dict[str, int],
        Field(
            description="Mapping of region_id to its SES class (1 = poorest)",
        ),
    ]

    edges: Annotated[
        List[float],
        Field(
            description="The n_classes + 1 income cut points, from the minimum to the maximum income",
        ),
    ]

    weighted: Annotated[
        bool,
        Field(
            default=False,
            description="Whether classes hold equal weight (e.g., users) rather than equal region counts",
        ),
    ]

    @property
    def n_classes(self) -> int:
        return len(self.edges) - 1

    def get_class(self, region_id: str) -> int:
        """
        Get the SES class of a region.

        Raises:
            ValueError: If the region has no class, e.g., it lacks income data.
        """
        try:
            return self.classes[region_id]
        except KeyError:
            raise ValueError(f"Region {region_id} has no SES class") from None

    def get_class_counts(self) -> List[int]:
        counts = [0] * self.n_classes

        for label in self.classes.values():
            counts[label - 1] += 1

        return counts


# **************************************************************************************


def get_class_edges(
    ordered: Sequence[SesRegion], classes: Mapping[str, int], n_classes: int
) -> List[float]:
    incomes = [region.income for region in ordered]

    edges = [incomes[0]]

    # Each interior edge is the lowest income of the first region in a higher class:
    for label in range(1, n_classes):
        edges.append(
            next(
                (
                    region.income
                    for region in ordered
                    if classes[region.region_id] > label
                ),
                incomes[-1],
            )
        )

    edges.append(incomes[-1])

    return edges


# **************************************************************************************


def assign_deciles(
    regions: Sequence[SesRegion],
    weights: Optional[Mapping[str, float]] = None,
    n_classes: int = NUMBER_OF_SES_CLASSES,
) -> DecileAssignment:
    """
    Bin regions into equally populated socioeconomic classes, 1 (poorest) to
    n_classes (richest).

    Without weights, regions sorted by (income, region_id) are split into
    n_classes contiguous blocks whose sizes differ by at most one, the remainder
    going to the first blocks. With weights (e.g., the number of users homed in each
    region), every distinct income is placed at the weighted quantile of its
    midpoint, so each class holds approximately 1 / n_classes of the total weight
    and equal incomes always share a class.

    Args:
        regions (Sequence[SesRegion]): The regions to classify.
        weights (Optional[Mapping[str, float]]): Optional non-negative weight per
            region_id; regions absent from the mapping have zero weight.
        n_classes (int): The number of classes.

    Raises:
        ValueError: If there are fewer regions than classes (unweighted), the total
            weight is below n_classes (weighted), or a weight is negative.

    Returns:
        DecileAssignment: The classes and income edges.
    """
    if n_classes < 2:
        raise ValueError("At least two classes are required")

    ordered = sorted(regions, key=lambda region: (region.income, region.region_id))

    if weights is None:
        if len(ordered) < n_classes:
            raise ValueError(
                f"At least {n_classes} regions are required, got {len(ordered)}"
            )

        size, remainder = divmod(len(ordered), n_classes)

        classes: Dict[str, int] = {}

        position = 0

        for label in range(1, n_classes + 1):
            block = size + (1 if label <= remainder else 0)
            for region in ordered[position : position + block]:
                classes[region.region_id] = label
            position += block

        return DecileAssignment(
            classes=classes,
            edges=get_class_edges(ordered, classes, n_classes),
            weighted=False,
        )

    if not ordered:
        raise ValueError("At least one region is required")

    w = np.array([float(weights.get(region.region_id, 0.0)) for region in ordered])

    if (w < 0).any():
        raise ValueError("Region weights must be non-negative")

    total = float(w.sum())

    if total < n_classes:
        raise ValueError(
            f"Total weight must be at least {n_classes} for weighted classes, got {total}"
        )

    incomes = np.array([region.income for region in ordered])

    # Group regions sharing an income, so that equal incomes land in one class:
    unique, group = np.unique(incomes, return_inverse=True)

    group_weight = np.bincount(group, weights=w, minlength=len(unique))

    before = np.cumsum(group_weight) - group_weight

    labels = np.floor(n_classes * (before + group_weight / 2.0) / total).astype(int) + 1

    labels = np.clip(labels, 1, n_classes)

    classes = {
        region.region_id: int(labels[group[position]])
        for position, region in enumerate(ordered)
    }

    return DecileAssignment(
        classes=classes,
        edges=get_class_edges(ordered, classes, n_classes),
        weighted=True,
    )


# **************************************************************************************
