# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from datetime import date
from typing import Optional, TypedDict

# **************************************************************************************


class BoundingBox(TypedDict):
    """
    Typed dictionary for an axis-aligned lon/lat bounding box (in degrees).
    """

    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float


# **************************************************************************************


class ClockWindow(TypedDict):
    """
    Typed dictionary for a daily local clock window, e.g., 21:00 to 06:00.
    """

    # Seconds after local midnight at which the window opens:
    start: int
    # Seconds after local midnight at which the window closes; a value less than or
    # equal to start means the window crosses midnight:
    end: int


# **************************************************************************************


class WindowIntersection(TypedDict):
    # The local calendar date on which the intersected window opened:
    day: date
    # The overlap between the stay and the window (in seconds):
    seconds: int


# **************************************************************************************


class SeriesPoint(TypedDict):
    # The end date of the sliding window:
    anchor: date
    # The assortativity of the window, or None when the window is degenerate:
    r: Optional[float]


# **************************************************************************************


class ResidualIsolation(TypedDict):
    # Mean diagonal excess of in-class visiting (the negated trace over n classes):
    mu_re: float
    # The raw signed trace of the adjustment matrix:
    trace: float


# **************************************************************************************


class TripShare(TypedDict):
    # The district of the visitors' homes:
    origin: str
    # The district of the visited places:
    destination: str
    # The number of visits flowing from origin to destination:
    visits: int
    # The fraction of all district-resolved visits:
    share: float


# **************************************************************************************
