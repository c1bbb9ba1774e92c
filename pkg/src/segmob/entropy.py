# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from collections import Counter, defaultdict
from datetime import date
from enum import Enum
from math import log2
from typing import (
    Annotated,
    Dict,
    Hashable,
    Iterable,
    List,
    Literal,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from .constants import ENTROPY_HISTOGRAM_BINS, NUMBER_OF_SES_CLASSES
from .inference import Visit
from .network import VisitFilter
from .segmentation import Period, Window

# **************************************************************************************


class EntropyAxis(Enum):
    SPATIAL = "spatial"
    SES = "ses"


# **************************************************************************************


def get_normalised_entropy(labels: Iterable[Hashable], alphabet: int) -> float:
    counts = list(Counter(labels).values())

    if not counts:
        raise ValueError("Entropy is undefined for zero visits")

    if alphabet <= 1:
        return 0.0

    # scipy treats 0 * log(0) as 0, so the entropy is always finite:
    h = float(stats.entropy(counts, base=2)) / log2(alphabet)

    return min(1.0, max(0.0, h))


# **************************************************************************************


def spatial_entropy(locations: Iterable[str], n_locations: Optional[int] = None) -> float:
    """
    Compute the normalised spatial entropy of one user's visits in one period.

    The raw Shannon entropy (in bits) of the empirical distribution over visited
    region_ids is divided by log2(k), where k is the user's number of distinct
    locations, or n_locations when normalising by a period-wide alphabet. A user
    with a single location has entropy 0.

    Args:
        locations (Iterable[str]): The region_id of every visit.
        n_locations (Optional[int]): Optional alphabet size to normalise by instead of
            the user's own distinct-location count.

    Raises:
        ValueError: If there are no visits.

    Returns:
        float: The entropy in [0, 1].
    """
    locations = list(locations)

    k = n_locations if n_locations is not None else len(set(locations))

    return get_normalised_entropy(locations, k)


# **************************************************************************************


def ses_entropy(classes: Iterable[int], n_classes: int = NUMBER_OF_SES_CLASSES) -> float:
    """
    Compute the normalised SES entropy of one user's visits in one period: the
    Shannon entropy of the visited place classes divided by log2(n_classes).

    Raises:
        ValueError: If there are no visits.
    """
    return get_normalised_entropy(classes, n_classes)


# **************************************************************************************


class EntropySummary(BaseModel):
    count: Annotated[
        int,
        Field(ge=0, description="Number of users summarised"),
    ]

    mean: Annotated[
        float,
        Field(description="Population mean of the entropies (μ)"),
    ]

    std: Annotated[
        float,
        Field(ge=0, description="Population standard deviation of the entropies (σ)"),
    ]

    histogram: Annotated[
        List[int],
        Field(description="Counts in equal-width bins over [0, 1]"),
    ]

    @property
    def edges(self) -> List[float]:
        return np.linspace(0.0, 1.0, len(self.histogram) + 1).tolist()


# **************************************************************************************


class EntropyAccumulator:
    """
    Associative partial summary of entropy values (count, mean, sum of squared
    deviations and histogram), so that shards can be summarised separately and
    merged.
    """

    def __init__(self, bins: int = ENTROPY_HISTOGRAM_BINS) -> None:
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.histogram = np.zeros(bins, dtype=np.int64)

    def add(self, values: Sequence[float]) -> "EntropyAccumulator":
        batch = np.asarray(values, dtype=np.float64)

        if batch.size == 0:
            return self

        other = EntropyAccumulator(bins=self.histogram.size)
        other.count = int(batch.size)
        other.mean = float(batch.mean())
        other.m2 = float(np.sum((batch - other.mean) ** 2))
        other.histogram, _ = np.histogram(batch, bins=self.histogram.size, range=(0.0, 1.0))

        merged = self.merge(other)

        self.count, self.mean, self.m2, self.histogram = (
            merged.count,
            merged.mean,
            merged.m2,
            merged.histogram,
        )

        return self

    def merge(self, other: "EntropyAccumulator") -> "EntropyAccumulator":
        if self.histogram.size != other.histogram.size:
            raise ValueError("Cannot merge accumulators with different bin counts")

        merged = EntropyAccumulator(bins=self.histogram.size)

        merged.histogram = self.histogram + other.histogram

        merged.count = self.count + other.count

        if merged.count == 0:
            return merged

        if self.count == 0 or other.count == 0:
            source = self if self.count else other
            merged.mean, merged.m2 = source.mean, source.m2
            return merged

        # Chan et al.'s pairwise update of the mean and sum of squared deviations:
        delta = other.mean - self.mean
        merged.mean = self.mean + delta * other.count / merged.count
        merged.m2 = (
            self.m2 + other.m2 + delta**2 * self.count * other.count / merged.count
        )

        return merged

    def summary(self) -> EntropySummary:
        if self.count == 0:
            raise ValueError("Cannot summarise an empty population")

        return EntropySummary(
            count=self.count,
            mean=self.mean,
            std=float(np.sqrt(max(self.m2, 0.0) / self.count)),
            histogram=[int(value) for value in self.histogram],
        )


# **************************************************************************************


def summarize(values: Sequence[float]) -> EntropySummary:
    """
    Summarise per-user entropies: mean, population standard deviation and a
    fixed 50-bin histogram over [0, 1].

    Raises:
        ValueError: If there are no values.
    """
    return EntropyAccumulator().add(values).summary()


# **************************************************************************************


class EntropyDistribution(BaseModel):
    period: Annotated[
        str,
        Field(description="The period (or window anchor) label"),
    ]

    axis: Annotated[
        EntropyAxis,
        Field(description="Spatial or SES entropy"),
    ]

    values: Annotated[
        Dict[str, float],
        Field(description="Per-user entropy h in [0, 1] of users meeting the visit threshold"),
    ]

    summary: Annotated[
        EntropySummary,
        Field(description="The summary of the values"),
    ]

    min_visits: Annotated[
        int,
        Field(ge=1, description="Minimum visits for a user to be included"),
    ]

    normalisation: Annotated[
        Literal["user", "global"],
        Field(description="Normalisation alphabet of the spatial axis"),
    ]

    alternative: Annotated[
        Optional[EntropySummary],
        Field(
            default=None,
            description="Spatial summary under the other normalisation (None on the SES axis)",
        ),
    ]

    filter: Annotated[
        str,
        Field(default="all", description="The visit filter applied before computing entropies"),
    ]

    excluded: Annotated[
        int,
        Field(ge=0, description="Users with visits but fewer than min_visits"),
    ]


# **************************************************************************************


def get_user_entropies(
    visits: Iterable[Visit],
    axis: EntropyAxis,
    min_visits: int,
    normalisation: Literal["user", "global"],
    n_classes: int,
    alphabet: Optional[int] = None,
    filter: Optional[VisitFilter] = None,
    districts: Optional[Mapping[str, Optional[str]]] = None,
) -> Tuple[Dict[str, float], int]:
    labels: Dict[str, List[Hashable]] = defaultdict(list)

    for visit in visits:
        if filter is not None and not filter.accepts(visit, districts):
            continue

        if axis is EntropyAxis.SES:
            if visit.class_place is None:
                raise ValueError(
                    f"Visit of user {visit.user_id} to region {visit.region_id} has no place class"
                )
            labels[visit.user_id].append(visit.class_place)
        else:
            labels[visit.user_id].append(visit.region_id)

    if axis is EntropyAxis.SPATIAL and normalisation == "global" and alphabet is None:
        alphabet = len({label for values in labels.values() for label in values})

    if axis is EntropyAxis.SPATIAL and normalisation == "user":
        alphabet = None

    eligible = sorted(
        (user_id, values)
        for user_id, values in labels.items()
        if len(values) >= min_visits
    )

    entropies = {
        user_id: (
            ses_entropy(values, n_classes)  # type: ignore[arg-type]
            if axis is EntropyAxis.SES
            else spatial_entropy(values, alphabet)  # type: ignore[arg-type]
        )
        for user_id, values in eligible
    }

    return entropies, len(labels) - len(eligible)


# **************************************************************************************


def compute_entropy_distribution(
    visits: Iterable[Visit],
    period: Period,
    axis: EntropyAxis,
    min_visits: int = 5,
    normalisation: Literal["user", "global"] = "user",
    n_classes: int = NUMBER_OF_SES_CLASSES,
    alphabet: Optional[int] = None,
    filter: Optional[VisitFilter] = None,
    districts: Optional[Mapping[str, Optional[str]]] = None,
) -> EntropyDistribution:
    """
    Compute the per-user entropy distribution of one period.

    Users with fewer than min_visits visits in the period are excluded from the
    values and counted. With "global" normalisation the spatial axis is divided by
    log2 of the number of distinct locations visited in the period (or of
    alphabet, when the caller knows it across shards); the SES axis always uses
    log2(n_classes). On the spatial axis the summary under the other normalisation
    is reported as the alternative.

    Args:
        visits (Iterable[Visit]): Labelled visits; those outside the period are
            ignored.
        period (Period): The period.
        axis (EntropyAxis): Spatial or SES entropy.
        min_visits (int): Minimum visits in the period for a user to be included.
        normalisation (Literal["user", "global"]): The spatial normalisation.
        n_classes (int): The number of SES classes.
        alphabet (Optional[int]): The period-wide location count for "global"
            normalisation.
        filter (Optional[VisitFilter]): Keep only the visits passing this filter,
            e.g., exclude_home_region.
        districts (Optional[Mapping[str, Optional[str]]]): The district of each
            region_id, for the intra/inter-region filters.

    Raises:
        ValueError: If no user meets the visit threshold.

    Returns:
        EntropyDistribution: The per-user values and their summary.
    """
    within = [visit for visit in visits if period.contains(visit.day)]

    entropies, excluded = get_user_entropies(
        within, axis, min_visits, normalisation, n_classes, alphabet, filter, districts
    )

    if not entropies:
        raise ValueError(
            f"No user has at least {min_visits} visits in period {period.label}"
        )

    alternative: Optional[EntropySummary] = None

    if axis is EntropyAxis.SPATIAL:
        other: Literal["user", "global"] = "global" if normalisation == "user" else "user"
        values, _ = get_user_entropies(
            within, axis, min_visits, other, n_classes, alphabet, filter, districts
        )
        alternative = summarize(list(values.values()))

    return EntropyDistribution(
        period=period.label,
        axis=axis,
        values=entropies,
        summary=summarize(list(entropies.values())),
        min_visits=min_visits,
        normalisation=normalisation,
        excluded=excluded,
        alternative=alternative,
        filter=str(filter) if filter is not None else "all",
    )


# **************************************************************************************


def get_window_accumulators(
    visits: Iterable[Visit],
    windows: Sequence[Window],
    axis: EntropyAxis,
    min_visits: int = 5,
    normalisation: Literal["user", "global"] = "user",
    n_classes: int = NUMBER_OF_SES_CLASSES,
    alphabets: Optional[Mapping[date, int]] = None,
    filter: Optional[VisitFilter] = None,
    districts: Optional[Mapping[str, Optional[str]]] = None,
) -> Dict[date, EntropyAccumulator]:
    """
    Accumulate the per-user entropies of every window, keyed by window anchor.

    The accumulators of disjoint user shards can be merged into those of the whole
    population; with "global" normalisation, pass the population-wide location count
    of every window anchor as alphabets so that all shards share it. Windows in which
    no user meets the visit threshold are omitted.
    """
    by_day: Dict[date, List[Visit]] = defaultdict(list)

    for visit in visits:
        if filter is None or filter.accepts(visit, districts):
            by_day[visit.day].append(visit)

    accumulators: Dict[date, EntropyAccumulator] = {}

    for window in windows:
        days = (window.start.toordinal() + offset for offset in range(window.days))

        entropies, _ = get_user_entropies(
            (
                visit
                for ordinal in days
                for visit in by_day.get(date.fromordinal(ordinal), ())
            ),
            axis,
            min_visits,
            normalisation,
            n_classes,
            alphabets.get(window.anchor) if alphabets is not None else None,
        )

        if entropies:
            accumulators[window.anchor] = EntropyAccumulator().add(
                list(entropies.values())
            )

    return accumulators


# **************************************************************************************


def get_window_alphabets(
    visits: Iterable[Visit],
    windows: Sequence[Window],
    filter: Optional[VisitFilter] = None,
    districts: Optional[Mapping[str, Optional[str]]] = None,
) -> Dict[date, Set[str]]:
    """
    Collect the distinct locations visited in every window, keyed by window anchor;
    the union over user shards gives the "global" spatial normalisation alphabet.
    """
    by_day: Dict[date, Set[str]] = defaultdict(set)

    for visit in visits:
        if filter is None or filter.accepts(visit, districts):
            by_day[visit.day].add(visit.region_id)

    return {
        window.anchor: set().union(
            *(
                by_day.get(date.fromordinal(window.start.toordinal() + offset), set())
                for offset in range(window.days)
            )
        )
        for window in windows
    }


# **************************************************************************************


def entropy_series(
    visits: Iterable[Visit],
    windows: Sequence[Window],
    axis: EntropyAxis,
    min_visits: int = 5,
    normalisation: Literal["user", "global"] = "user",
    n_classes: int = NUMBER_OF_SES_CLASSES,
    filter: Optional[VisitFilter] = None,
    districts: Optional[Mapping[str, Optional[str]]] = None,
) -> Dict[date, float]:
    """
    Compute the population mean entropy of every window, keyed by window anchor:
    the dependent series of the stringency regression.
    """
    return {
        anchor: accumulator.mean
        for anchor, accumulator in get_window_accumulators(
            visits,
            windows,
            axis,
            min_visits,
            normalisation,
            n_classes,
            filter=filter,
            districts=districts,
        ).items()
    }


# **************************************************************************************
