# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from .common import TripShare
from .constants import NUMBER_OF_SES_CLASSES
from .inference import Visit, VisitKind
from .segmentation import Period

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************


class EmptyNetworkError(ValueError):
    """
    Raised when an operation needs visits but the network holds none.
    """


# **************************************************************************************


class FilterKind(Enum):
    ALL = "all"
    EXCLUDE_HOME_REGION = "exclude_home_region"
    POI_ONLY = "poi_only"
    INTRA_REGION = "intra_region"
    INTER_REGION = "inter_region"


# **************************************************************************************


@dataclass(frozen=True)
class VisitFilter:
    """
    A rule selecting which visits enter a network.

    The textual forms are "all", "exclude_home_region", "poi_only",
    "intra_region:<district>" and "inter_region:<district>|<district>", where
    districts are the coarser areas (e.g., boroughs) carried by the SES map.
    """

    kind: FilterKind

    districts: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        expected = {FilterKind.INTRA_REGION: 1, FilterKind.INTER_REGION: 2}.get(
            self.kind, 0
        )

        if len(self.districts) != expected:
            raise ValueError(
                f"Filter {self.kind.value} takes {expected} district(s), got {len(self.districts)}"
            )

        if self.kind is FilterKind.INTER_REGION and self.districts[0] == self.districts[1]:
            raise ValueError("inter_region needs two different districts")

    @classmethod
    def parse(cls, text: str) -> "VisitFilter":
        """
        Parse the textual form of a filter, e.g., "inter_region:Manhattan|Bronx".

        Raises:
            ValueError: If the filter is unknown or has the wrong district count.
        """
        name, _, argument = text.strip().partition(":")

        try:
            kind = FilterKind(name.strip())
        except ValueError:
            raise ValueError(f"Unknown visit filter {text!r}") from None

        districts = tuple(
            district.strip() for district in argument.split("|") if district.strip()
        )

        return cls(kind=kind, districts=districts)

    @property
    def needs_districts(self) -> bool:
        return self.kind in (FilterKind.INTRA_REGION, FilterKind.INTER_REGION)

    def __str__(self) -> str:
        if not self.districts:
            return self.kind.value

        return f"{self.kind.value}:{'|'.join(self.districts)}"

    def accepts(
        self,
        visit: Visit,
        districts: Optional[Mapping[str, Optional[str]]] = None,
    ) -> bool:
        """
        Whether a visit passes the filter.

        Args:
            visit (Visit): The visit.
            districts (Optional[Mapping[str, Optional[str]]]): The district of each
                region_id; required by the intra/inter-region filters.

        Raises:
            ValueError: If a district filter is applied without a district mapping.
        """
        if self.kind is FilterKind.ALL:
            return True

        if self.kind is FilterKind.EXCLUDE_HOME_REGION:
            return visit.kind is not VisitKind.HOME

        if self.kind is FilterKind.POI_ONLY:
            return visit.kind is VisitKind.POI

        if districts is None:
            raise ValueError(f"Filter {self} requires region districts")

        origin = districts.get(visit.home_region) if visit.home_region else None

        destination = districts.get(visit.region_id)

        if self.kind is FilterKind.INTRA_REGION:
            return origin == destination == self.districts[0]

        return {origin, destination} == set(self.districts)


# **************************************************************************************


@dataclass
class VisitNetwork:
    """
    The weighted bipartite network of users and visited place-regions of one period.

    weights[(user_id, region_id)] counts the user's visits to the region.
    """

    period: Optional[str]

    filter: str

    weights: Counter[Tuple[str, str]] = field(default_factory=Counter)

    user_classes: Dict[str, int] = field(default_factory=dict)

    place_classes: Dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.weights.values())

    @property
    def is_empty(self) -> bool:
        return not self.weights

    def add(self, visit: Visit) -> None:
        if visit.class_user is None or visit.class_place is None:
            raise ValueError(
                f"Visit of user {visit.user_id} to region {visit.region_id} has no SES classes"
            )

        self.weights[(visit.user_id, visit.region_id)] += 1
        self.user_classes[visit.user_id] = visit.class_user
        self.place_classes[visit.region_id] = visit.class_place

    def merge(self, other: "VisitNetwork") -> "VisitNetwork":
        """
        Combine two partial networks (e.g., from different user shards).

        Raises:
            ValueError: If the networks belong to different periods or filters.
        """
        if (self.period, self.filter) != (other.period, other.filter):
            raise ValueError("Only networks of the same period and filter can be merged")

        return VisitNetwork(
            period=self.period,
            filter=self.filter,
            weights=self.weights + other.weights,
            user_classes={**self.user_classes, **other.user_classes},
            place_classes={**self.place_classes, **other.place_classes},
        )

    def get_class_counts(self, n_classes: int = NUMBER_OF_SES_CLASSES) -> NDArray[np.float64]:
        """
        Aggregate the weights into a class-count matrix with rows = place class and
        columns = people class.
        """
        counts = np.zeros((n_classes, n_classes), dtype=np.float64)

        for (user_id, region_id), weight in self.weights.items():
            counts[self.place_classes[region_id] - 1, self.user_classes[user_id] - 1] += weight

        return counts


# **************************************************************************************


def build_network(
    visits: Iterable[Visit],
    period: Period,
    filter: VisitFilter,
    districts: Optional[Mapping[str, Optional[str]]] = None,
) -> VisitNetwork:
    """
    Aggregate the labelled visits inside a period that pass a filter into a
    visit network.

    An empty result is not an error here; it is signalled by VisitNetwork.is_empty
    and downstream matrix operations raise EmptyNetworkError.

    Args:
        visits (Iterable[Visit]): Visits labelled with people and place classes.
        period (Period): The period whose days are kept.
        filter (VisitFilter): The visit filter.
        districts (Optional[Mapping[str, Optional[str]]]): The district of each
            region_id, for the intra/inter-region filters.

    Returns:
        VisitNetwork: The aggregated network.
    """
    network = VisitNetwork(period=period.label, filter=str(filter))

    for visit in visits:
        if period.contains(visit.day) and filter.accepts(visit, districts):
            network.add(visit)

    if network.is_empty:
        logger.debug("No visits in period %s pass filter %s", period.label, filter)

    return network


# **************************************************************************************


def get_daily_class_counts(
    visits: Iterable[Visit],
    start: date,
    end: date,
    filter: VisitFilter,
    districts: Optional[Mapping[str, Optional[str]]] = None,
    n_classes: int = NUMBER_OF_SES_CLASSES,
) -> NDArray[np.int64]:
    """
    Count filtered visits per local day and class pair.

    Returns:
        NDArray[np.int64]: An array of shape (days, n_classes, n_classes) whose
        [d, j - 1, i - 1] entry counts visits on day start + d by class-i people to
        class-j places.
    """
    days = (end - start).days + 1

    if days < 1:
        raise ValueError("The end date must not precede the start date")

    counts = np.zeros((days, n_classes, n_classes), dtype=np.int64)

    for visit in visits:
        offset = (visit.day - start).days

        if not 0 <= offset < days or not filter.accepts(visit, districts):
            continue

        if visit.class_user is None or visit.class_place is None:
            raise ValueError(
                f"Visit of user {visit.user_id} to region {visit.region_id} has no SES classes"
            )

        counts[offset, visit.class_place - 1, visit.class_user - 1] += 1

    return counts


# **************************************************************************************


def trip_composition(
    visits: Iterable[Visit],
    districts: Mapping[str, Optional[str]],
) -> List[TripShare]:
    """
    Break visits down by the district of the visitor's home and the district of
    the visited place.

    Intra-district flows have origin == destination. Visits whose home or place
    has no district are left out of the composition.

    Returns:
        List[TripShare]: One entry per (origin, destination) pair, sorted.
    """
    flows: Counter[Tuple[str, str]] = Counter()

    for visit in visits:
        origin = districts.get(visit.home_region) if visit.home_region else None
        destination = districts.get(visit.region_id)

        if origin is None or destination is None:
            continue

        flows[(origin, destination)] += 1

    total = sum(flows.values())

    return [
        TripShare(
            origin=origin,
            destination=destination,
            visits=count,
            share=count / total,
        )
        for (origin, destination), count in sorted(flows.items())
    ]


# **************************************************************************************
