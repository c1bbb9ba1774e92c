# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from bisect import bisect_right
from datetime import date, timedelta
from typing import TYPE_CHECKING, Annotated, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .models import StringencyRecord

if TYPE_CHECKING:
    from .config import RunConfig

# **************************************************************************************


class Period(BaseModel):
    """
    A labelled intervention period, e.g., before lockdown (BL), lockdown (L1) or
    reopening (R1), with inclusive start and end dates.
    """

    model_config = ConfigDict(frozen=True)

    label: Annotated[
        str,
        Field(
            min_length=1,
            description="The period label, e.g., BL, L1, R1, L2, R2",
        ),
    ]

    start: Annotated[
        date,
        Field(
            description="The first local calendar day of the period (inclusive)",
        ),
    ]

    end: Annotated[
        date,
        Field(
            description="The last local calendar day of the period (inclusive)",
        ),
    ]

    @model_validator(mode="after")
    def validate_span(self) -> "Period":
        if self.end < self.start:
            raise ValueError(f"Period {self.label} ends before it starts")
        return self

    @property
    def days(self) -> int:
        return (self.end - self.start).days + 1

    def contains(self, day: date) -> bool:
        return self.start <= day <= self.end


# **************************************************************************************


class Window(BaseModel):
    model_config = ConfigDict(frozen=True)

    start: Annotated[
        date,
        Field(
            description="The first day of the sliding window (inclusive)",
        ),
    ]

    end: Annotated[
        date,
        Field(
            description="The last day of the sliding window (inclusive)",
        ),
    ]

    @property
    def anchor(self) -> date:
        """
        The date the window is anchored at, i.e., its end date.
        """
        return self.end

    @property
    def days(self) -> int:
        return (self.end - self.start).days + 1

    def contains(self, day: date) -> bool:
        return self.start <= day <= self.end


# **************************************************************************************


def validate_periods(periods: Sequence[Period]) -> List[Period]:
    """
    Check that periods are non-empty, chronologically ordered and pairwise disjoint.

    Raises:
        ValueError: If there are no periods, duplicate labels, or periods that are
        unordered or overlap.
    """
    if not periods:
        raise ValueError("At least one period is required")

    labels = [period.label for period in periods]

    if len(set(labels)) != len(labels):
        raise ValueError(f"Period labels must be unique, got {labels}")

    for previous, current in zip(periods, periods[1:]):
        if current.start <= previous.end:
            raise ValueError(
                f"Periods {previous.label} and {current.label} overlap or are out of order"
            )

    return list(periods)


# **************************************************************************************


def segment(config: "RunConfig") -> List[Period]:
    """
    Partition the timeline into the validated, ordered intervention periods of the
    run configuration.

    Args:
        config (RunConfig): The run configuration.

    Returns:
        List[Period]: The ordered periods; every date belongs to at most one of them.
    """
    return validate_periods(config.periods)


# **************************************************************************************


def period_of(day: date, periods: Sequence[Period]) -> Optional[Period]:
    """
    Find the period a date belongs to, if any.

    Args:
        day (date): The local calendar date.
        periods (Sequence[Period]): Validated, ordered, disjoint periods.

    Returns:
        Optional[Period]: The containing period, or None if the date falls outside all.
    """
    index = bisect_right([period.start for period in periods], day) - 1

    if index < 0:
        return None

    period = periods[index]

    return period if period.contains(day) else None


# **************************************************************************************


def windows(
    start: date,
    end: date,
    window_days: int,
    slide_days: int,
) -> List[Window]:
    """
    Enumerate the maximal set of sliding windows fully contained in [start, end].

    The first window ends on start + window_days - 1 and each following window is
    shifted by slide_days, so there are floor((L - window_days) / slide_days) + 1
    windows for a range of L days.

    Args:
        start (date): The first day of the range (inclusive).
        end (date): The last day of the range (inclusive).
        window_days (int): The length of each window (in days).
        slide_days (int): The step between consecutive window anchors (in days).

    Raises:
        ValueError: If window_days or slide_days is not positive, or the range is
        shorter than a single window.

    Returns:
        List[Window]: The windows, ordered by anchor date.
    """
    if window_days < 1 or slide_days < 1:
        raise ValueError("window_days and slide_days must both be at least 1")

    length = (end - start).days + 1

    if length < window_days:
        raise ValueError(
            f"Range of {length} days is shorter than the {window_days} day window"
        )

    count = (length - window_days) // slide_days + 1

    return [
        Window(
            start=start + timedelta(days=i * slide_days),
            end=start + timedelta(days=i * slide_days + window_days - 1),
        )
        for i in range(count)
    ]


# **************************************************************************************


def suggest_breakpoints(
    stringency: Sequence[StringencyRecord],
    min_jump: float = 1.0,
) -> List[date]:
    """
    Suggest candidate period boundaries: the dates on which any restriction level
    changes by at least min_jump relative to the previous record.

    This is advisory only; periods are always supplied by the run configuration.
    """
    records = sorted(stringency, key=lambda record: record.date)

    breakpoints: List[date] = []

    for previous, current in zip(records, records[1:]):
        if any(
            abs(current.levels[code] - previous.levels[code]) >= min_jump
            for code in current.levels
        ):
            breakpoints.append(current.date)

    return breakpoints


# **************************************************************************************
