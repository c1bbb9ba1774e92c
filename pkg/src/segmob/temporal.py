# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import re
from datetime import date, datetime, timedelta, timezone
from typing import Final, List

from .common import ClockWindow, WindowIntersection
from .constants import SECONDS_PER_DAY, SECONDS_PER_HOUR, SECONDS_PER_MINUTE

# **************************************************************************************

UNIX_EPOCH_AS_DATE: Final[date] = date(1970, 1, 1)

# **************************************************************************************

clock_regex = re.compile(r"^(?P<hours>\d{1,2}):(?P<minutes>\d{2})$")

# **************************************************************************************


def get_local_seconds(ts: int, utc_offset_minutes: int) -> int:
    """
    Shift a UTC epoch timestamp into "local epoch seconds" for a fixed UTC offset.

    Args:
        ts (int): The UTC epoch timestamp (in seconds).
        utc_offset_minutes (int): The fixed offset of local time from UTC.

    Returns:
        int: Seconds since 1970-01-01T00:00 local wall-clock time.
    """
    return ts + utc_offset_minutes * SECONDS_PER_MINUTE


# **************************************************************************************


def convert_epoch_to_local_datetime(ts: int, utc_offset_minutes: int) -> datetime:
    """
    Convert a UTC epoch timestamp to an aware datetime in the fixed local offset.
    """
    return datetime.fromtimestamp(
        ts, tz=timezone(timedelta(minutes=utc_offset_minutes))
    )


# **************************************************************************************


def convert_epoch_to_local_date(ts: int, utc_offset_minutes: int) -> date:
    """
    Convert a UTC epoch timestamp to the local calendar date it falls on.

    Args:
        ts (int): The UTC epoch timestamp (in seconds).
        utc_offset_minutes (int): The fixed offset of local time from UTC.

    Returns:
        date: The local calendar date.
    """
    days = get_local_seconds(ts, utc_offset_minutes) // SECONDS_PER_DAY
    return UNIX_EPOCH_AS_DATE + timedelta(days=days)


# **************************************************************************************


def convert_local_date_to_epoch(day: date, utc_offset_minutes: int) -> int:
    """
    Convert a local calendar date to the UTC epoch timestamp of its local midnight.
    """
    local = (day - UNIX_EPOCH_AS_DATE).days * SECONDS_PER_DAY
    return local - utc_offset_minutes * SECONDS_PER_MINUTE


# **************************************************************************************


def parse_clock_time(value: str) -> int:
    """
    Parse a 24-hour "HH:MM" clock time into seconds after midnight.

    Raises:
        ValueError: If the value is not a valid clock time.
    """
    match = clock_regex.match(value.strip())

    if not match:
        raise ValueError(f"Invalid clock time {value!r}, expected HH:MM")

    hours, minutes = int(match.group("hours")), int(match.group("minutes"))

    if hours > 24 or minutes > 59 or (hours == 24 and minutes > 0):
        raise ValueError(f"Invalid clock time {value!r}")

    return hours * SECONDS_PER_HOUR + minutes * SECONDS_PER_MINUTE


# **************************************************************************************


def parse_clock_window(value: str) -> ClockWindow:
    """
    Parse a "HH:MM-HH:MM" daily clock window, e.g., "21:00-06:00".

    "24:00" is only valid as the end of a window, where it means the end of the day,
    so "00:00-24:00" spans the whole day.
    """
    parts = value.split("-")

    if len(parts) != 2:
        raise ValueError(f"Invalid clock window {value!r}, expected HH:MM-HH:MM")

    start, end = parse_clock_time(parts[0]), parse_clock_time(parts[1])

    if start == SECONDS_PER_DAY:
        raise ValueError(f"Clock window {value!r} cannot open at 24:00")

    if start == end:
        raise ValueError(f"Clock window {value!r} has zero length")

    return ClockWindow(start=start, end=end)


# **************************************************************************************


def format_clock_window(window: ClockWindow) -> str:
    def fmt(seconds: int) -> str:
        return f"{seconds // SECONDS_PER_HOUR:02d}:{(seconds % SECONDS_PER_HOUR) // SECONDS_PER_MINUTE:02d}"

    return f"{fmt(window['start'])}-{fmt(window['end'])}"


# **************************************************************************************


def get_clock_window_intersections(
    start_ts: int,
    end_ts: int,
    window: ClockWindow,
    utc_offset_minutes: int,
) -> List[WindowIntersection]:
    """
    Intersect a stay with every daily occurrence of a local clock window.

    A window that crosses midnight (e.g., 21:00 to 06:00) is attributed to the local
    calendar date on which it opens.

    Args:
        start_ts (int): The UTC epoch start of the stay (in seconds).
        end_ts (int): The UTC epoch end of the stay (in seconds).
        window (ClockWindow): The daily window in local clock time.
        utc_offset_minutes (int): The fixed offset of local time from UTC.

    Returns:
        List[WindowIntersection]: One entry per window occurrence with a non-zero
        overlap, in chronological order.
    """
    start = get_local_seconds(start_ts, utc_offset_minutes)
    end = get_local_seconds(end_ts, utc_offset_minutes)

    # The window length, accounting for windows that wrap past midnight:
    length = (window["end"] - window["start"]) % SECONDS_PER_DAY or SECONDS_PER_DAY

    intersections: List[WindowIntersection] = []

    # A window opening on the day before the stay starts can still overlap it:
    for day in range(start // SECONDS_PER_DAY - 1, end // SECONDS_PER_DAY + 1):
        opens = day * SECONDS_PER_DAY + window["start"]
        closes = opens + length

        overlap = min(end, closes) - max(start, opens)

        if overlap > 0:
            intersections.append(
                WindowIntersection(
                    day=UNIX_EPOCH_AS_DATE + timedelta(days=day),
                    seconds=overlap,
                )
            )

    return intersections


# **************************************************************************************


def is_weekday(day: date) -> bool:
    """
    Whether the date falls on Monday to Friday.
    """
    return day.weekday() < 5


# **************************************************************************************
