# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import datetime
from math import isfinite
from typing import Annotated, Dict, List, Optional, Tuple

from celerity.common import GeographicCoordinate
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import RESTRICTION_CODES

# **************************************************************************************

# A ring is a closed sequence of (lon, lat) vertices:
Ring = List[Tuple[float, float]]

# **************************************************************************************

# A polygon is an exterior ring followed by zero or more interior rings (holes):
PolygonRings = List[Ring]

# **************************************************************************************


class TrajectoryRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    user_id: Annotated[
        str,
        Field(
            min_length=1,
            description="Opaque, anonymous token identifying the device or user",
        ),
    ]

    lat: Annotated[
        float,
        Field(
            ge=-90.0,
            le=90.0,
            description="Latitude of the stay (in degrees, WGS84)",
        ),
    ]

    lon: Annotated[
        float,
        Field(
            ge=-180.0,
            le=180.0,
            description="Longitude of the stay (in degrees, WGS84)",
        ),
    ]

    start_ts: Annotated[
        int,
        Field(
            description="Start of the stay as UTC epoch seconds",
        ),
    ]

    end_ts: Annotated[
        int,
        Field(
            description="End of the stay as UTC epoch seconds",
        ),
    ]

    @model_validator(mode="after")
    def validate_interval(self) -> "TrajectoryRecord":
        if self.end_ts < self.start_ts:
            raise ValueError(
                f"end_ts ({self.end_ts}) is before start_ts ({self.start_ts})"
            )
        return self

    @property
    def duration(self) -> int:
        """
        The duration of the stay (in seconds).
        """
        return self.end_ts - self.start_ts

    @property
    def coordinate(self) -> GeographicCoordinate:
        return GeographicCoordinate(lat=self.lat, lon=self.lon)


# **************************************************************************************


class SesRegion(BaseModel):
    model_config = ConfigDict(frozen=True)

    region_id: Annotated[
        str,
        Field(
            min_length=1,
            description="Opaque identifier of the spatial unit, e.g., a census tract",
        ),
    ]

    polygons: Annotated[
        List[PolygonRings],
        Field(
            min_length=1,
            description="One or more polygons of (lon, lat) rings; the first ring of each polygon is its exterior",
        ),
    ]

    income: Annotated[
        float,
        Field(
            description="Welfare metric of the unit, normalised so that higher means richer",
        ),
    ]

    district: Annotated[
        Optional[str],
        Field(
            default=None,
            description="Optional coarser district (e.g., borough) the unit belongs to",
        ),
    ]

    @field_validator("income")
    def validate_income(cls, value: float) -> float:
        if not isfinite(value):
            raise ValueError("Income must be a finite number")
        return value


# **************************************************************************************


class StringencyRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    date: Annotated[
        datetime.date,
        Field(
            description="The calendar day the restriction levels apply to",
        ),
    ]

    levels: Annotated[
        Dict[str, float],
        Field(
            description="Stringency level for each of the nine restriction codes C1..C8, H1",
        ),
    ]

    @field_validator("levels")
    def validate_levels(cls, value: Dict[str, float]) -> Dict[str, float]:
        missing = [code for code in RESTRICTION_CODES if code not in value]

        if missing:
            raise ValueError(f"Missing restriction codes: {missing}")

        unknown = sorted(set(value) - set(RESTRICTION_CODES))

        if unknown:
            raise ValueError(f"Unknown restriction codes: {unknown}")

        for code, level in value.items():
            if not isfinite(level) or level < 0:
                raise ValueError(
                    f"Stringency level for {code} must be finite and non-negative"
                )

        # Keep the canonical code order regardless of the input order:
        return {code: float(value[code]) for code in RESTRICTION_CODES}


# **************************************************************************************
