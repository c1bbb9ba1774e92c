# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from typing import (
    Annotated,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

from pydantic import BaseModel, ConfigDict, Field

from .config import RunConfig
from .constants import SECONDS_PER_HOUR, STAY_COALESCE_GAP_SECONDS
from .models import TrajectoryRecord
from .spatial import DecileAssignment, SpatialIndex, locate_point
from .temporal import (
    convert_epoch_to_local_date,
    get_clock_window_intersections,
    is_weekday,
)

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************


class VisitKind(Enum):
    HOME = "home"
    POI = "poi"
    OTHER = "other"


# **************************************************************************************


@dataclass(frozen=True, slots=True)
class LocatedStay:
    region_id: Optional[str]
    start_ts: int
    end_ts: int


# **************************************************************************************


@dataclass(frozen=True, slots=True)
class Visit:
    """
    One stay of one user in one SES region: the edge e(u, p) of the visit network.
    """

    user_id: str
    region_id: str
    home_region: Optional[str]
    kind: VisitKind
    # The UTC epoch start of the stay (in seconds):
    timestamp: int
    # The local calendar date the stay started on:
    day: date
    class_user: Optional[int] = None
    class_place: Optional[int] = None


# **************************************************************************************


class HomeAssignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    user_id: Annotated[
        str,
        Field(description="The user the home was inferred for"),
    ]

    home_region: Annotated[
        str,
        Field(description="The region_id of the inferred home"),
    ]

    night_hours: Annotated[
        float,
        Field(
            ge=0,
            description="Total qualifying night-window presence in the home region (in hours)",
        ),
    ]

    nights: Annotated[
        int,
        Field(
            ge=1,
            description="Number of distinct nights with a qualifying stay in the home region",
        ),
    ]

    tie_broken: Annotated[
        bool,
        Field(
            default=False,
            description="Whether another region had the same qualifying night presence",
        ),
    ]


# **************************************************************************************


class InferenceReport(BaseModel):
    users: Annotated[
        int,
        Field(default=0, ge=0, description="Number of users processed"),
    ]

    homes: Annotated[
        int,
        Field(default=0, ge=0, description="Number of users with an inferred home"),
    ]

    tie_breaks: Annotated[
        int,
        Field(default=0, ge=0, description="Number of homes decided by a tie-break"),
    ]

    visits: Annotated[
        int,
        Field(default=0, ge=0, description="Number of visits extracted"),
    ]

    dropped_visits: Annotated[
        int,
        Field(
            default=0,
            ge=0,
            description="Number of stays dropped for lying outside every SES region",
        ),
    ]

    filtered_visits: Annotated[
        int,
        Field(
            default=0,
            ge=0,
            description="Number of visits removed by the configured visit kinds",
        ),
    ]

    @property
    def home_yield(self) -> float:
        """
        The fraction of users for whom a home was inferred.
        """
        return self.homes / self.users if self.users else 0.0

    def merge(self, other: "InferenceReport") -> "InferenceReport":
        return InferenceReport(
            users=self.users + other.users,
            homes=self.homes + other.homes,
            tie_breaks=self.tie_breaks + other.tie_breaks,
            visits=self.visits + other.visits,
            dropped_visits=self.dropped_visits + other.dropped_visits,
            filtered_visits=self.filtered_visits + other.filtered_visits,
        )


# **************************************************************************************


def sort_stays(stays: Iterable[TrajectoryRecord]) -> List[TrajectoryRecord]:
    # A total order over every field, so that shuffled input sorts identically:
    return sorted(
        stays,
        key=lambda stay: (stay.start_ts, stay.end_ts, stay.lat, stay.lon),
    )


# **************************************************************************************


def locate_stays(
    stays: Iterable[TrajectoryRecord], index: SpatialIndex
) -> List[LocatedStay]:
    return [
        LocatedStay(
            region_id=locate_point(index, lon=stay.lon, lat=stay.lat),
            start_ts=stay.start_ts,
            end_ts=stay.end_ts,
        )
        for stay in sort_stays(stays)
    ]


# **************************************************************************************


def coalesce_stays(
    stays: Sequence[LocatedStay],
    gap: int = STAY_COALESCE_GAP_SECONDS,
) -> List[LocatedStay]:
    """
    Merge consecutive stays in the same region separated by at most `gap` seconds.

    Providers often split one physical stay into several touching records; merged,
    they count as one uninterrupted stay for home detection.

    Args:
        stays (Sequence[LocatedStay]): Located stays sorted by start time.
        gap (int): The maximum gap between two records of one stay (in seconds).

    Returns:
        List[LocatedStay]: The coalesced stays, in order.
    """
    coalesced: List[LocatedStay] = []

    for stay in stays:
        previous = coalesced[-1] if coalesced else None

        if (
            previous is not None
            and stay.region_id is not None
            and stay.region_id == previous.region_id
            and stay.start_ts - previous.end_ts <= gap
        ):
            coalesced[-1] = replace(previous, end_ts=max(previous.end_ts, stay.end_ts))
            continue

        coalesced.append(stay)

    return coalesced


# **************************************************************************************


def infer_home(
    stays: Sequence[TrajectoryRecord],
    config: RunConfig,
    index: SpatialIndex,
) -> Optional[HomeAssignment]:
    """
    Infer a user's home region from their night-time stays.

    Only stays (after coalescing touching records) whose intersection with a single
    local night window lasts at least config.min_home_hours qualify. The home is the
    region with the greatest qualifying night presence; ties are broken by the
    greater number of distinct nights, then by the lexicographically smallest
    region_id.

    Args:
        stays (Sequence[TrajectoryRecord]): All records of one user, in any order.
        config (RunConfig): Supplies the night window, the threshold and UTC offset.
        index (SpatialIndex): The spatial index of the SES map.

    Returns:
        Optional[HomeAssignment]: The home, or None if no stay qualifies.
    """
    if not stays:
        return None

    threshold = config.min_home_hours * SECONDS_PER_HOUR

    seconds: Dict[str, int] = defaultdict(int)

    nights: Dict[str, Set[date]] = defaultdict(set)

    for stay in coalesce_stays(locate_stays(stays, index)):
        if stay.region_id is None:
            continue

        for intersection in get_clock_window_intersections(
            stay.start_ts,
            stay.end_ts,
            config.night_window,
            config.utc_offset_minutes,
        ):
            if intersection["seconds"] >= threshold:
                seconds[stay.region_id] += intersection["seconds"]
                nights[stay.region_id].add(intersection["day"])

    if not seconds:
        return None

    ranked = sorted(
        seconds,
        key=lambda region: (-seconds[region], -len(nights[region]), region),
    )

    home = ranked[0]

    return HomeAssignment(
        user_id=stays[0].user_id,
        home_region=home,
        night_hours=seconds[home] / SECONDS_PER_HOUR,
        nights=len(nights[home]),
        tie_broken=sum(1 for value in seconds.values() if value == seconds[home]) > 1,
    )


# **************************************************************************************


def classify_visit(
    stay: LocatedStay,
    home: Optional[HomeAssignment],
    config: RunConfig,
) -> VisitKind:
    if home is not None and stay.region_id == home.home_region:
        return VisitKind.HOME

    if any(
        is_weekday(intersection["day"])
        for intersection in get_clock_window_intersections(
            stay.start_ts,
            stay.end_ts,
            config.poi_window,
            config.utc_offset_minutes,
        )
    ):
        return VisitKind.POI

    return VisitKind.OTHER


# **************************************************************************************


def extract_visits(
    stays: Sequence[TrajectoryRecord],
    home: Optional[HomeAssignment],
    index: SpatialIndex,
    config: RunConfig,
    report: Optional[InferenceReport] = None,
) -> List[Visit]:
    """
    Turn one user's stays into visits, one per stay record.

    Stays in the home region are home visits. Other stays overlapping the local
    weekday POI window (09:00 to 15:00 by default) are POI visits, and the rest
    are "other" visits. Stays outside every region are dropped and counted on the
    report. When config.visit_kinds is "poi_only", "other" visits are dropped too.

    Args:
        stays (Sequence[TrajectoryRecord]): All records of one user.
        home (Optional[HomeAssignment]): The user's home, if one was inferred.
        index (SpatialIndex): The spatial index of the SES map.
        config (RunConfig): Supplies the POI window, UTC offset and visit kinds.
        report (Optional[InferenceReport]): Report updated with visit counts.

    Returns:
        List[Visit]: The visits in chronological order.
    """
    visits: List[Visit] = []

    dropped = filtered = 0

    for stay in locate_stays(stays, index):
        if stay.region_id is None:
            dropped += 1
            continue

        kind = classify_visit(stay, home, config)

        if config.visit_kinds == "poi_only" and kind is VisitKind.OTHER:
            filtered += 1
            continue

        visits.append(
            Visit(
                user_id=stays[0].user_id,
                region_id=stay.region_id,
                home_region=home.home_region if home else None,
                kind=kind,
                timestamp=stay.start_ts,
                day=convert_epoch_to_local_date(
                    stay.start_ts, config.utc_offset_minutes
                ),
            )
        )

    if report is not None:
        report.visits += len(visits)
        report.dropped_visits += dropped
        report.filtered_visits += filtered

    return visits


# **************************************************************************************


def process_user(
    stays: Sequence[TrajectoryRecord],
    config: RunConfig,
    index: SpatialIndex,
) -> Tuple[Optional[HomeAssignment], List[Visit], InferenceReport]:
    """
    Infer the home of one user and extract their visits.

    Users without a home yield no visits, since they cannot be given a class.
    """
    report = InferenceReport(users=1)

    home = infer_home(stays, config, index)

    if home is None:
        return None, [], report

    report.homes = 1
    report.tie_breaks = int(home.tie_broken)

    return home, extract_visits(stays, home, index, config, report), report


# **************************************************************************************


def count_homes(homes: Iterable[Optional[HomeAssignment]]) -> Dict[str, int]:
    """
    Count the users homed in each region, the weights of user-weighted deciles.
    """
    counts: Dict[str, int] = defaultdict(int)

    for home in homes:
        if home is not None:
            counts[home.home_region] += 1

    return dict(counts)


# **************************************************************************************


class PopulationLabels(BaseModel):
    model_config = ConfigDict(frozen=True)

    user_classes: Annotated[
        Dict[str, int],
        Field(description="SES class of each user with a home (by home region)"),
    ]

    place_classes: Annotated[
        Dict[str, int],
        Field(description="SES class of each region as a visited place"),
    ]

    excluded: Annotated[
        int,
        Field(default=0, ge=0, description="Number of users excluded for lacking a home"),
    ]

    def get_class_histogram(self, n_classes: int) -> List[int]:
        histogram = [0] * n_classes

        for label in self.user_classes.values():
            histogram[label - 1] += 1

        return histogram


# **************************************************************************************


def label_population(
    homes: Mapping[str, Optional[HomeAssignment]],
    deciles_people: DecileAssignment,
    deciles_places: DecileAssignment,
) -> PopulationLabels:
    """
    Assign an SES class to every user with a home and to every place.

    A user's class is the class of their home region under the people deciles; a
    place's class is the class of its region under the place deciles.

    Args:
        homes (Mapping[str, Optional[HomeAssignment]]): The home of each user, or
            None for users without one.
        deciles_people (DecileAssignment): The classes used for users.
        deciles_places (DecileAssignment): The classes used for places.

    Raises:
        ValueError: If a home region has no class under the people deciles.

    Returns:
        PopulationLabels: The user and place class tables.
    """
    missing = sorted(
        {
            home.home_region
            for home in homes.values()
            if home is not None and home.home_region not in deciles_people.classes
        }
    )

    if missing:
        raise ValueError(f"Home regions lack SES data: {', '.join(missing)}")

    user_classes = {
        user_id: deciles_people.classes[home.home_region]
        for user_id, home in sorted(homes.items())
        if home is not None
    }

    labels = PopulationLabels(
        user_classes=user_classes,
        place_classes=dict(deciles_places.classes),
        excluded=len(homes) - len(user_classes),
    )

    logger.info(
        "Labelled %d users (%d excluded without a home)",
        len(user_classes),
        labels.excluded,
    )

    return labels


# **************************************************************************************


def label_visits(visits: Iterable[Visit], labels: PopulationLabels) -> List[Visit]:
    """
    Attach the visitor's and the place's SES class to each visit.

    Visits by unlabelled users are skipped.

    Raises:
        ValueError: If a visited region has no place class.
    """
    labelled: List[Visit] = []

    for visit in visits:
        class_user = labels.user_classes.get(visit.user_id)

        if class_user is None:
            continue

        class_place = labels.place_classes.get(visit.region_id)

        if class_place is None:
            raise ValueError(f"Visited region {visit.region_id} has no SES class")

        labelled.append(replace(visit, class_user=class_user, class_place=class_place))

    return labelled


# **************************************************************************************
