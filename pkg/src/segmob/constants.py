# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from typing import Final, Tuple

# **************************************************************************************

# The number of socioeconomic classes (deciles) people and places are binned into:
NUMBER_OF_SES_CLASSES: Final[int] = 10

# **************************************************************************************

# The nine OxCGRT restriction codes, in the order they appear in a stringency file:
RESTRICTION_CODES: Final[Tuple[str, ...]] = (
    "C1",  # School closing
    "C2",  # Workplace closing
    "C3",  # Cancel public events
    "C4",  # Restrictions on gatherings
    "C5",  # Close public transport
    "C6",  # Stay at home requirements
    "C7",  # Restrictions on internal movement
    "C8",  # International travel controls
    "H1",  # Public information campaigns
)

# **************************************************************************************

SECONDS_PER_MINUTE: Final[int] = 60

# **************************************************************************************

SECONDS_PER_HOUR: Final[int] = 3600

# **************************************************************************************

SECONDS_PER_DAY: Final[int] = 86400

# **************************************************************************************

# The maximum gap (in seconds) between consecutive stays in the same region for them
# to be treated as one uninterrupted stay:
STAY_COALESCE_GAP_SECONDS: Final[int] = 300

# **************************************************************************************

# The number of equal-width bins used for entropy histograms over [0, 1]:
ENTROPY_HISTOGRAM_BINS: Final[int] = 50

# **************************************************************************************

TRAJECTORY_CSV_HEADER: Final[Tuple[str, ...]] = (
    "user_id",
    "lat",
    "lon",
    "start_ts",
    "end_ts",
)

# **************************************************************************************

STRINGENCY_CSV_HEADER: Final[Tuple[str, ...]] = ("date",) + RESTRICTION_CODES

# **************************************************************************************
