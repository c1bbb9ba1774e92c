# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import json
import logging
from configparser import ConfigParser
from dataclasses import dataclass
from datetime import date, timedelta
from math import ceil, sqrt
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .constants import (
    NUMBER_OF_SES_CLASSES,
    RESTRICTION_CODES,
    SECONDS_PER_HOUR,
    SECONDS_PER_MINUTE,
)
from .ingest import write_ses_map, write_stringency, write_trajectories
from .matrix import StratificationMatrix
from .models import SesRegion, StringencyRecord, TrajectoryRecord
from .spatial import assign_deciles
from .temporal import convert_local_date_to_epoch

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************

# The side of every square synthetic region (in degrees):
REGION_SIZE = 0.01

# **************************************************************************************

# The maximum ordinal level of each restriction code:
MAXIMUM_STRINGENCY: Dict[str, int] = {
    "C1": 3,
    "C2": 3,
    "C3": 2,
    "C4": 4,
    "C5": 2,
    "C6": 3,
    "C7": 2,
    "C8": 4,
    "H1": 2,
}

# **************************************************************************************


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_users: Annotated[
        int,
        Field(default=1000, ge=1, description="Number of synthetic users"),
    ]

    n_regions: Annotated[
        int,
        Field(
            default=100,
            ge=1,
            description="Number of square regions, laid out on a grid with income = region index",
        ),
    ]

    n_classes: Annotated[
        int,
        Field(default=NUMBER_OF_SES_CLASSES, ge=2, description="Number of SES classes"),
    ]

    p: Annotated[
        float,
        Field(
            default=0.3,
            ge=0.0,
            le=1.0,
            description="Baseline mixing parameter: probability a visit stays in-class",
        ),
    ]

    visits_per_day: Annotated[
        float,
        Field(
            default=0.7,
            gt=0.0,
            description="Mean number of daytime visits per user per day (λ)",
        ),
    ]

    home_fidelity: Annotated[
        float,
        Field(
            default=0.95,
            ge=0.0,
            le=1.0,
            description="Fraction of nights spent at home (φ)",
        ),
    ]

    start: Annotated[
        date,
        Field(default=date(2020, 3, 1), description="The first simulated local day"),
    ]

    days: Annotated[
        int,
        Field(default=30, ge=1, description="Number of simulated days"),
    ]

    schedule: Annotated[
        Dict[date, Annotated[float, Field(ge=0.0, le=1.0)]],
        Field(
            default_factory=dict,
            description="Intervention schedule: the mixing parameter in force from each date on",
        ),
    ]

    class_balance: Annotated[
        Literal["equal", "skewed"],
        Field(
            default="equal",
            description="Equal class populations, or homes skewed towards richer classes",
        ),
    ]

    utc_offset_minutes: Annotated[
        int,
        Field(default=0, ge=-14 * 60, le=14 * 60, description="Local time offset"),
    ]

    window_days: Annotated[
        int,
        Field(default=7, ge=1, description="Sliding window of the generated run configuration"),
    ]

    origin_lon: Annotated[
        float,
        Field(default=-0.25, ge=-180.0, le=170.0, description="Longitude of the grid's corner"),
    ]

    origin_lat: Annotated[
        float,
        Field(default=51.40, ge=-80.0, le=80.0, description="Latitude of the grid's corner"),
    ]

    seed: Annotated[
        int,
        Field(default=0, ge=0, description="Seed fixing the full output"),
    ]

    @model_validator(mode="after")
    def validate_feasibility(self) -> "SynthSpec":
        if self.n_regions < self.n_classes:
            raise ValueError(
                f"Infeasible city: {self.n_regions} regions cannot fill {self.n_classes} classes"
            )

        end = self.start + timedelta(days=self.days - 1)

        outside = [day for day in self.schedule if not self.start < day <= end]

        if outside:
            raise ValueError(
                f"Schedule dates must fall after the first day and within the span: {outside}"
            )

        return self

    @property
    def end(self) -> date:
        return self.start + timedelta(days=self.days - 1)

    def get_segments(self) -> List[Tuple[date, date, float]]:
        """
        The (start, end, p) runs of constant mixing parameter over the span.
        """
        changes = sorted(self.schedule)

        starts = [self.start] + changes

        ends = [day - timedelta(days=1) for day in changes] + [self.end]

        values = [self.p] + [self.schedule[day] for day in changes]

        return list(zip(starts, ends, values))

    def get_mixing(self, day: date) -> float:
        p = self.p

        for change in sorted(self.schedule):
            if day >= change:
                p = self.schedule[change]

        return p


# **************************************************************************************


class GroundTruth(BaseModel):
    spec: Annotated[
        SynthSpec,
        Field(description="The scenario parameters the city was generated from"),
    ]

    homes: Annotated[
        Dict[str, str],
        Field(description="The planted home region of every user"),
    ]

    user_classes: Annotated[
        Dict[str, int],
        Field(description="The planted SES class of every user"),
    ]

    region_classes: Annotated[
        Dict[str, int],
        Field(description="The SES class of every region"),
    ]

    segments: Annotated[
        List[Dict[str, Any]],
        Field(description="The mixing parameter (and expected r) of every schedule run"),
    ]


# **************************************************************************************


@dataclass(frozen=True)
class SyntheticCity:
    regions: List[SesRegion]
    records: List[TrajectoryRecord]
    stringency: List[StringencyRecord]
    truth: GroundTruth


# **************************************************************************************


def get_region_id(index: int) -> str:
    return f"R{index:04d}"


# **************************************************************************************


def get_grid_regions(spec: SynthSpec) -> List[SesRegion]:
    """
    Lay the regions out row by row on a square-ish grid; region k has income k.
    """
    columns = ceil(sqrt(spec.n_regions))

    regions: List[SesRegion] = []

    for k in range(spec.n_regions):
        row, column = divmod(k, columns)

        x = spec.origin_lon + column * REGION_SIZE
        y = spec.origin_lat + row * REGION_SIZE

        ring = [
            (x, y),
            (x + REGION_SIZE, y),
            (x + REGION_SIZE, y + REGION_SIZE),
            (x, y + REGION_SIZE),
            (x, y),
        ]

        regions.append(
            SesRegion(region_id=get_region_id(k), polygons=[[ring]], income=float(k))
        )

    return regions


# **************************************************************************************


def draw_place_classes(
    rng: np.random.Generator,
    user_classes: ArrayLike,
    p: Union[float, ArrayLike],
    n_classes: int = NUMBER_OF_SES_CLASSES,
) -> NDArray[np.int64]:
    """
    Draw the place class of a visit for each entry of user_classes.

    With probability p a visit stays in the visitor's class; otherwise its class is
    uniform over all n_classes (including the visitor's own), so the own class is
    drawn with probability p + (1 - p) / n_classes.

    Args:
        rng (np.random.Generator): The random generator.
        user_classes (ArrayLike): The 1-based class of each visitor.
        p (Union[float, ArrayLike]): The mixing parameter, scalar or per visit.
        n_classes (int): The number of classes.

    Returns:
        NDArray[np.int64]: The 1-based place class of each visit.
    """
    classes = np.asarray(user_classes, dtype=np.int64)

    stay = rng.random(classes.shape) < np.asarray(p, dtype=np.float64)

    uniform = rng.integers(1, n_classes + 1, size=classes.shape)

    return np.where(stay, classes, uniform)


# **************************************************************************************


def expected_matrix(
    p: float, n_classes: int = NUMBER_OF_SES_CLASSES
) -> Tuple[StratificationMatrix, float]:
    """
    The expected stratification matrix M = p I + (1 - p) J / n of the mixing rule,
    and its assortativity, which equals p when classes are equally populated.

    Raises:
        ValueError: If p is outside [0, 1].
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Mixing parameter must be within [0, 1], got {p}")

    M = p * np.eye(n_classes) + (1.0 - p) / n_classes * np.ones((n_classes, n_classes))

    return StratificationMatrix.from_counts(M), p


# **************************************************************************************


def get_home_regions(spec: SynthSpec, rng: np.random.Generator) -> NDArray[np.int64]:
    if spec.class_balance == "equal":
        # Users cycle through a random permutation, so every region hosts the same
        # number of users (up to one):
        permutation = rng.permutation(spec.n_regions)
        return permutation[np.arange(spec.n_users) % spec.n_regions]

    weights = np.arange(1, spec.n_regions + 1, dtype=np.float64)

    return rng.choice(spec.n_regions, size=spec.n_users, p=weights / weights.sum())


# **************************************************************************************


def simulate_stringency(spec: SynthSpec, rng: np.random.Generator) -> List[StringencyRecord]:
    """
    A step series in which each restriction rises to a random level on its own day.
    """
    first, last = spec.days // 3, max(spec.days // 3, spec.days - 2)

    candidates = np.arange(first, last + 1)

    breakpoints = rng.choice(
        candidates,
        size=len(RESTRICTION_CODES),
        replace=len(candidates) < len(RESTRICTION_CODES),
    )

    levels = {
        code: int(rng.integers(1, MAXIMUM_STRINGENCY[code] + 1))
        for code in RESTRICTION_CODES
    }

    return [
        StringencyRecord(
            date=spec.start + timedelta(days=d),
            levels={
                code: float(levels[code] if d >= breakpoint else 0)
                for code, breakpoint in zip(RESTRICTION_CODES, breakpoints)
            },
        )
        for d in range(spec.days)
    ]


# **************************************************************************************


def simulate_user(
    spec: SynthSpec,
    user: int,
    home: int,
    region_class: NDArray[np.int64],
    pools: Dict[int, NDArray[np.int64]],
    regions: List[SesRegion],
    mixing: NDArray[np.float64],
) -> List[TrajectoryRecord]:
    rng = np.random.default_rng([spec.seed, user])

    user_id = f"u{user:05d}"

    user_class = int(region_class[home])

    def pick_region(place_class: int) -> int:
        pool = pools[place_class]
        pool = pool[pool != home] if pool.size > 1 else pool
        return int(pool[rng.integers(0, pool.size)])

    def locate(region: int) -> Tuple[float, float]:
        (x0, y0), _, (x1, y1) = regions[region].polygons[0][0][:3]
        u, v = rng.uniform(0.1, 0.9, size=2)
        return x0 + u * (x1 - x0), y0 + v * (y1 - y0)

    at_home = rng.random(spec.days) < spec.home_fidelity

    night_classes = draw_place_classes(
        rng, np.full(spec.days, user_class), mixing, spec.n_classes
    )

    counts = rng.poisson(spec.visits_per_day, size=spec.days)

    visit_days = np.repeat(np.arange(spec.days), counts)

    visit_classes = draw_place_classes(
        rng, np.full(visit_days.size, user_class), mixing[visit_days], spec.n_classes
    )

    starts = rng.integers(8 * 60, 20 * 60, size=visit_days.size)

    durations = rng.integers(30, 61, size=visit_days.size)

    # (day, start, end, region) of every stay, with start and end in local seconds
    # after that day's midnight:
    stays: List[Tuple[int, int, int, int]] = []

    for d in range(spec.days):
        region = home if at_home[d] else pick_region(int(night_classes[d]))
        stays.append((d, 22 * SECONDS_PER_HOUR, 31 * SECONDS_PER_HOUR, region))

    for d, place_class, start, duration in zip(
        visit_days, visit_classes, starts, durations
    ):
        stays.append(
            (
                int(d),
                int(start) * SECONDS_PER_MINUTE,
                (int(start) + int(duration)) * SECONDS_PER_MINUTE,
                pick_region(int(place_class)),
            )
        )

    records: List[TrajectoryRecord] = []

    for d, start, end, region in stays:
        midnight = convert_local_date_to_epoch(
            spec.start + timedelta(days=d), spec.utc_offset_minutes
        )
        lon, lat = locate(region)
        records.append(
            TrajectoryRecord(
                user_id=user_id,
                lat=lat,
                lon=lon,
                start_ts=midnight + start,
                end_ts=midnight + end,
            )
        )

    return sorted(records, key=lambda record: (record.start_ts, record.end_ts))


# **************************************************************************************


def simulate_city(spec: SynthSpec) -> SyntheticCity:
    """
    Generate a synthetic city with planted homes and a planted mixing parameter.

    Every user spends each night (22:00 to 07:00 local) at home with probability
    home_fidelity and otherwise in a region drawn by the mixing rule. On each day
    they make Poisson(visits_per_day) daytime visits of 30 to 60 minutes starting
    between 08:00 and 20:00, whose class follows draw_place_classes and whose
    region is uniform within that class, excluding the home region. Each user has
    their own generator seeded from (seed, user index).

    Args:
        spec (SynthSpec): The city specification.

    Returns:
        SyntheticCity: Regions, trajectory records, stringency and ground truth.
    """
    rng = np.random.default_rng(spec.seed)

    regions = get_grid_regions(spec)

    deciles = assign_deciles(regions, n_classes=spec.n_classes)

    region_class = np.array(
        [deciles.classes[region.region_id] for region in regions], dtype=np.int64
    )

    pools = {
        label: np.flatnonzero(region_class == label)
        for label in range(1, spec.n_classes + 1)
    }

    homes = get_home_regions(spec, rng)

    stringency = simulate_stringency(spec, rng)

    mixing = np.array(
        [spec.get_mixing(spec.start + timedelta(days=d)) for d in range(spec.days)]
    )

    records: List[TrajectoryRecord] = []

    for user, home in enumerate(homes):
        records.extend(
            simulate_user(spec, user, int(home), region_class, pools, regions, mixing)
        )

    truth = GroundTruth(
        spec=spec,
        homes={f"u{user:05d}": get_region_id(int(home)) for user, home in enumerate(homes)},
        user_classes={
            f"u{user:05d}": int(region_class[home]) for user, home in enumerate(homes)
        },
        region_classes=dict(deciles.classes),
        segments=[
            {
                "start": start.isoformat(),
                "end": end.isoformat(),
                "p": p,
                "expected_r": expected_matrix(p, spec.n_classes)[1],
            }
            for start, end, p in spec.get_segments()
        ],
    )

    logger.info(
        "Simulated %d users over %d days: %d stay records",
        spec.n_users,
        spec.days,
        len(records),
    )

    return SyntheticCity(
        regions=regions, records=records, stringency=stringency, truth=truth
    )


# **************************************************************************************


def get_period_labels(count: int) -> List[str]:
    """
    Label schedule runs as BL, L, R (or BL, L1, R1, L2, R2, ... for longer schedules).
    """
    labels = ["BL"]

    for k in range(count - 1):
        kind = "L" if k % 2 == 0 else "R"
        labels.append(kind if count <= 3 else f"{kind}{k // 2 + 1}")

    return labels


# **************************************************************************************


def write_run_config(path: Path, spec: SynthSpec, files: Dict[str, Path]) -> None:
    parser = ConfigParser(interpolation=None, delimiters=("=",))

    parser["run"] = {
        "utc_offset_minutes": str(spec.utc_offset_minutes),
        "window_days": str(spec.window_days),
        "slide_days": "1",
        "n_classes": str(spec.n_classes),
        "filters": "all, exclude_home_region",
    }

    parser["inputs"] = {
        "trajectories": files["trajectories"].name,
        "ses_map": files["ses_map"].name,
        "stringency": files["stringency"].name,
    }

    segments = spec.get_segments()

    for label, (start, end, _) in zip(get_period_labels(len(segments)), segments):
        parser[f"period.{label}"] = {"start": start.isoformat(), "end": end.isoformat()}

    with open(path, "w", encoding="utf-8") as f:
        parser.write(f)


# **************************************************************************************


def write_city(city: SyntheticCity, directory: Path) -> Dict[str, Path]:
    """
    Write a synthetic city in the ingest file formats, with its ground truth and a
    run configuration that analyses it.

    Returns:
        Dict[str, Path]: The written files, keyed by role.
    """
    directory = Path(directory)

    directory.mkdir(parents=True, exist_ok=True)

    files = {
        "trajectories": directory / "trajectories.csv",
        "ses_map": directory / "ses_map.geojson",
        "stringency": directory / "stringency.csv",
        "truth": directory / "ground_truth.json",
        "config": directory / "run.ini",
    }

    write_trajectories(files["trajectories"], city.records)

    write_ses_map(files["ses_map"], city.regions)

    write_stringency(files["stringency"], city.stringency)

    with open(files["truth"], "w", encoding="utf-8") as f:
        json.dump(city.truth.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")

    write_run_config(files["config"], city.truth.spec, files)

    return files


# **************************************************************************************


def generate_city(spec: SynthSpec, directory: Path) -> Dict[str, Path]:
    """
    Simulate a synthetic city and write it to a directory.
    """
    return write_city(simulate_city(spec), directory)


# **************************************************************************************


def parse_schedule(value: str) -> Dict[date, float]:
    """
    Parse an intervention schedule such as "2020-03-11=0.7, 2020-03-21=0.5".
    """
    schedule: Dict[date, float] = {}

    for entry in value.split(","):
        if not entry.strip():
            continue

        day, separator, p = entry.partition("=")

        if not separator:
            raise ValueError(f"Invalid schedule entry {entry.strip()!r}, expected DATE=P")

        schedule[date.fromisoformat(day.strip())] = float(p)

    return schedule


# **************************************************************************************


def load_synth_spec(path: Path, seed: Optional[int] = None) -> SynthSpec:
    """
    Load the [synth] section of a scenario file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the section is missing or invalid.
    """
    path = Path(path)

    if not path.is_file():
        raise FileNotFoundError(f"Scenario file not found: {path}")

    parser = ConfigParser(interpolation=None, delimiters=("=",))

    parser.read(path, encoding="utf-8")

    if not parser.has_section("synth"):
        raise ValueError(f"Scenario file {path} has no [synth] section")

    values: Dict[str, Any] = {key: raw.strip() for key, raw in parser.items("synth")}

    unknown = sorted(set(values) - set(SynthSpec.model_fields))

    if unknown:
        raise ValueError(f"Unknown key(s) in section [synth]: {', '.join(unknown)}")

    if "schedule" in values:
        values["schedule"] = parse_schedule(values["schedule"])

    if seed is not None:
        values["seed"] = seed

    try:
        return SynthSpec(**values)
    except ValidationError as e:
        raise ValueError(f"Invalid synthetic city scenario: {e}") from e


# **************************************************************************************
