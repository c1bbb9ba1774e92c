# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from configparser import ConfigParser
from datetime import date
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .common import ClockWindow
from .constants import NUMBER_OF_SES_CLASSES
from .segmentation import Period, validate_periods
from .temporal import parse_clock_window

# **************************************************************************************

PERIOD_SECTION_PREFIX = "period."

# **************************************************************************************

# Maps each INI section to the RunConfig fields it may set:
SECTION_KEYS: Dict[str, Dict[str, str]] = {
    "run": {
        "utc_offset_minutes": "utc_offset_minutes",
        "window_days": "window_days",
        "slide_days": "slide_days",
        "night_window": "night_window",
        "poi_window": "poi_window",
        "min_home_hours": "min_home_hours",
        "n_classes": "n_classes",
        "invert_income": "invert_income",
        "people_deciles": "people_deciles",
        "place_deciles": "place_deciles",
        "visit_kinds": "visit_kinds",
        "filters": "filters",
        "output": "output",
        "shards": "shards",
    },
    "inputs": {
        "trajectories": "trajectories",
        "ses_map": "ses_map",
        "stringency": "stringency",
    },
    "spatial": {
        "cells_per_axis": "cells_per_axis",
    },
    "entropy": {
        "min_visits": "entropy_min_visits",
        "spatial_normalisation": "spatial_normalisation",
        "filter": "entropy_filter",
    },
    "stats": {
        "regression_mode": "regression_mode",
        "alpha": "alpha",
    },
}

# **************************************************************************************


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    utc_offset_minutes: Annotated[
        int,
        Field(
            default=0,
            ge=-14 * 60,
            le=14 * 60,
            description="Fixed offset of the city's local time from UTC (in minutes)",
        ),
    ]

    periods: Annotated[
        List[Period],
        Field(
            min_length=1,
            description="Ordered, non-overlapping intervention periods",
        ),
    ]

    window_days: Annotated[
        int,
        Field(
            default=14,
            ge=1,
            description="Length of the sliding windows (in days)",
        ),
    ]

    slide_days: Annotated[
        int,
        Field(
            default=1,
            ge=1,
            description="Step between consecutive sliding windows (in days)",
        ),
    ]

    night_window: Annotated[
        ClockWindow,
        Field(
            default=ClockWindow(start=21 * 3600, end=6 * 3600),
            description="Local clock window used for home detection",
        ),
    ]

    poi_window: Annotated[
        ClockWindow,
        Field(
            default=ClockWindow(start=9 * 3600, end=15 * 3600),
            description="Local weekday clock window for work-like places of interest",
        ),
    ]

    min_home_hours: Annotated[
        float,
        Field(
            default=6.0,
            gt=0,
            le=24,
            description="Minimum uninterrupted night presence for a home candidate (in hours)",
        ),
    ]

    n_classes: Annotated[
        int,
        Field(
            default=NUMBER_OF_SES_CLASSES,
            ge=2,
            description="Number of equally populated socioeconomic classes",
        ),
    ]

    invert_income: Annotated[
        bool,
        Field(
            default=False,
            description="Negate the SES metric at load, e.g., for poverty indices",
        ),
    ]

    people_deciles: Annotated[
        Literal["weighted", "regions"],
        Field(
            default="weighted",
            description="Bin people by home-count weighted quantiles or by region rank",
        ),
    ]

    place_deciles: Annotated[
        Literal["weighted", "regions"],
        Field(
            default="regions",
            description="Bin places by home-count weighted quantiles or by region rank",
        ),
    ]

    visit_kinds: Annotated[
        Literal["all", "poi_only"],
        Field(
            default="all",
            description="Keep all visits, or drop non-home visits outside the POI rule",
        ),
    ]

    filters: Annotated[
        List[str],
        Field(
            default_factory=lambda: ["all", "exclude_home_region"],
            min_length=1,
            description="Visit filters to compute matrices for, e.g., intra_region:Manhattan",
        ),
    ]

    cells_per_axis: Annotated[
        int,
        Field(
            default=256,
            ge=1,
            description="Resolution of the uniform spatial grid index",
        ),
    ]

    entropy_min_visits: Annotated[
        int,
        Field(
            default=5,
            ge=1,
            description="Minimum visits in a period for a user to enter entropy summaries",
        ),
    ]

    spatial_normalisation: Annotated[
        Literal["user", "global"],
        Field(
            default="user",
            description="Normalise spatial entropy by the user's or the period's location count",
        ),
    ]

    entropy_filter: Annotated[
        str,
        Field(
            default="all",
            description="Visit filter applied before computing entropies, e.g., exclude_home_region",
        ),
    ]

    regression_mode: Annotated[
        Literal["sliding", "daily"],
        Field(
            default="sliding",
            description="Regress on sliding-window anchors or on disjoint single days",
        ),
    ]

    alpha: Annotated[
        float,
        Field(
            default=0.05,
            gt=0,
            lt=1,
            description="Significance level for the Kruskal-Wallis period comparisons",
        ),
    ]

    shards: Annotated[
        int,
        Field(
            default=16,
            ge=1,
            description="Number of user-hash shards the trajectory stream is split into",
        ),
    ]

    trajectories: Annotated[
        Optional[Path],
        Field(default=None, description="Path to the trajectory CSV"),
    ]

    ses_map: Annotated[
        Optional[Path],
        Field(default=None, description="Path to the SES GeoJSON"),
    ]

    stringency: Annotated[
        Optional[Path],
        Field(default=None, description="Path to the stringency CSV"),
    ]

    output: Annotated[
        Optional[Path],
        Field(default=None, description="Output directory for the pipeline"),
    ]

    @field_validator("periods")
    def check_periods(cls, value: List[Period]) -> List[Period]:
        return validate_periods(value)

    @property
    def start(self) -> date:
        return self.periods[0].start

    @property
    def end(self) -> date:
        return self.periods[-1].end


# **************************************************************************************


def parse_bool(value: str) -> bool:
    normalised = value.strip().lower()

    if normalised in {"1", "true", "yes", "on"}:
        return True

    if normalised in {"0", "false", "no", "off"}:
        return False

    raise ValueError(f"Invalid boolean {value!r}")


# **************************************************************************************


def parse_config_text(text: str, base: Optional[Path] = None) -> RunConfig:
    """
    Parse the text of a run configuration file into a validated RunConfig.

    Args:
        text (str): The INI-style configuration text.
        base (Optional[Path]): Directory relative input/output paths are resolved
            against; defaults to the current working directory.

    Raises:
        ValueError: If a section or key is unknown or any value is invalid.

    Returns:
        RunConfig: The validated configuration.
    """
    parser = ConfigParser(interpolation=None, delimiters=("=",))
    parser.read_string(text)

    base = base or Path.cwd()

    values: Dict[str, Any] = {}

    periods: List[Dict[str, Any]] = []

    for section in parser.sections():
        if section.startswith(PERIOD_SECTION_PREFIX):
            label = section[len(PERIOD_SECTION_PREFIX) :]
            entries = dict(parser.items(section))
            if set(entries) != {"start", "end"}:
                raise ValueError(
                    f"Section [{section}] must define exactly 'start' and 'end'"
                )
            periods.append(
                {
                    "label": label,
                    "start": date.fromisoformat(entries["start"].strip()),
                    "end": date.fromisoformat(entries["end"].strip()),
                }
            )
            continue

        # The synthetic city parameters are read separately by the synth module:
        if section == "synth":
            continue

        if section not in SECTION_KEYS:
            raise ValueError(f"Unknown configuration section [{section}]")

        for key, raw in parser.items(section):
            if key not in SECTION_KEYS[section]:
                raise ValueError(f"Unknown key '{key}' in section [{section}]")
            values[SECTION_KEYS[section][key]] = raw.strip()

    for key in ("night_window", "poi_window"):
        if key in values:
            values[key] = parse_clock_window(values[key])

    if "invert_income" in values:
        values["invert_income"] = parse_bool(values["invert_income"])

    if "filters" in values:
        values["filters"] = [
            entry.strip() for entry in values["filters"].split(",") if entry.strip()
        ]

    for key in ("trajectories", "ses_map", "stringency", "output"):
        if key in values:
            path = Path(values[key]).expanduser()
            values[key] = path if path.is_absolute() else base / path

    # Periods keep their file order so unordered sections are reported as errors:
    values["periods"] = periods

    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ValueError(f"Invalid run configuration: {e}") from e


# **************************************************************************************


def load_config(path: Path) -> RunConfig:
    """
    Load and validate a run configuration file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the configuration is invalid.
    """
    path = Path(path)

    if not path.is_file():
        raise FileNotFoundError(f"Configuration file not found: {path}")

    return parse_config_text(path.read_text(encoding="utf-8"), base=path.parent)


# **************************************************************************************
