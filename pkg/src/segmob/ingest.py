# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import csv
import json
import logging
from datetime import date, timedelta
from itertools import islice
from pathlib import Path
from typing import Annotated, Any, Dict, Iterable, Iterator, List, Optional, Set
from warnings import warn

from pydantic import BaseModel, Field, ValidationError

from .constants import (
    RESTRICTION_CODES,
    STRINGENCY_CSV_HEADER,
    TRAJECTORY_CSV_HEADER,
)
from .models import SesRegion, StringencyRecord, TrajectoryRecord

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************

# The number of rejection messages retained on a report; the count is always exact:
MAXIMUM_REPORTED_ERRORS = 100

# **************************************************************************************


class IngestReport(BaseModel):
    path: Annotated[
        str,
        Field(description="The file the report describes"),
    ]

    accepted: Annotated[
        int,
        Field(default=0, ge=0, description="Number of data rows accepted"),
    ]

    rejected: Annotated[
        int,
        Field(default=0, ge=0, description="Number of data rows rejected"),
    ]

    errors: Annotated[
        List[str],
        Field(
            default_factory=list,
            description="Rejection messages (line number and reason), truncated",
        ),
    ]

    @property
    def rows(self) -> int:
        return self.accepted + self.rejected

    def reject(self, message: str) -> None:
        self.rejected += 1
        if len(self.errors) < MAXIMUM_REPORTED_ERRORS:
            self.errors.append(message)


# **************************************************************************************


def format_validation_error(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in e['loc']) or 'record'}: {e['msg']}"
        for e in error.errors()
    )


# **************************************************************************************


def parse_trajectory_row(row: List[str]) -> TrajectoryRecord:
    """
    Parse a single trajectory CSV row into a validated record.

    Raises:
        ValueError: If the row has the wrong number of fields or any field is invalid.
    """
    if len(row) != len(TRAJECTORY_CSV_HEADER):
        raise ValueError(
            f"expected {len(TRAJECTORY_CSV_HEADER)} fields, got {len(row)}"
        )

    for field in row:
        try:
            field.encode("utf-8")
        except UnicodeEncodeError:
            raise ValueError("row contains bytes that are not valid UTF-8") from None

    user_id, lat, lon, start_ts, end_ts = (field.strip() for field in row)

    try:
        return TrajectoryRecord(
            user_id=user_id,
            lat=lat,  # type: ignore[arg-type]
            lon=lon,  # type: ignore[arg-type]
            start_ts=start_ts,  # type: ignore[arg-type]
            end_ts=end_ts,  # type: ignore[arg-type]
        )
    except ValidationError as e:
        raise ValueError(format_validation_error(e)) from e


# **************************************************************************************


def load_trajectories(
    path: Path,
    lenient: bool = False,
    report: Optional[IngestReport] = None,
) -> Iterator[TrajectoryRecord]:
    """
    Stream validated trajectory records from a CSV file in file order.

    The file must have the header `user_id,lat,lon,start_ts,end_ts`. Rows are parsed
    lazily, so files larger than memory can be consumed batch by batch.

    Args:
        path (Path): The trajectory CSV file.
        lenient (bool): Skip malformed rows (counting them on the report) instead of
            failing on the first one.
        report (Optional[IngestReport]): Report updated with accepted/rejected counts
            as the stream is consumed.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the header is wrong, or (unless lenient) a row is malformed;
            row errors carry the line number.

    Returns:
        Iterator[TrajectoryRecord]: The validated records.
    """
    path = Path(path)

    if not path.is_file():
        raise FileNotFoundError(f"Trajectory file not found: {path}")

    # The header is checked up front so that a wrong file fails before iteration:
    with open(path, newline="", encoding="utf-8", errors="surrogateescape") as f:
        header = [field.strip() for field in next(csv.reader(f), [])]

    if tuple(header) != TRAJECTORY_CSV_HEADER:
        raise ValueError(
            f"Invalid trajectory header in {path}: expected "
            f"{','.join(TRAJECTORY_CSV_HEADER)}, got {','.join(header)}"
        )

    report = report if report is not None else IngestReport(path=str(path))

    def reject(line: int, error: Exception) -> None:
        message = f"{path}:{line}: {error}"

        if not lenient:
            raise ValueError(message) from error

        report.reject(message)

    def iterate() -> Iterator[TrajectoryRecord]:
        # Undecodable bytes are kept as surrogates and rejected row by row:
        with open(path, newline="", encoding="utf-8", errors="surrogateescape") as f:
            reader = csv.reader(f)

            next(reader, None)

            while True:
                try:
                    row = next(reader)
                except StopIteration:
                    break
                except csv.Error as e:
                    reject(reader.line_num, e)
                    continue

                # Blank lines are not data rows:
                if not row:
                    continue

                try:
                    record = parse_trajectory_row(row)
                except ValueError as e:
                    reject(reader.line_num, e)
                    continue

                report.accepted += 1

                yield record

        logger.debug(
            "Loaded %d trajectory records from %s (%d rejected)",
            report.accepted,
            path,
            report.rejected,
        )

    return iterate()


# **************************************************************************************


def batched(
    records: Iterable[TrajectoryRecord], batch_size: int
) -> Iterator[List[TrajectoryRecord]]:
    """
    Group a record stream into lists of at most batch_size records.
    """
    if batch_size < 1:
        raise ValueError("Batch size must be at least 1")

    iterator = iter(records)

    while batch := list(islice(iterator, batch_size)):
        yield batch


# **************************************************************************************


def write_trajectories(path: Path, records: Iterable[TrajectoryRecord]) -> int:
    """
    Write trajectory records in the format read by load_trajectories.

    Coordinates are written with repr() so they reload to the identical float.

    Returns:
        int: The number of records written.
    """
    count = 0

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRAJECTORY_CSV_HEADER)
        for record in records:
            writer.writerow(
                [
                    record.user_id,
                    repr(record.lat),
                    repr(record.lon),
                    record.start_ts,
                    record.end_ts,
                ]
            )
            count += 1

    return count


# **************************************************************************************


def parse_geometry(region_id: str, geometry: Any) -> List[List[List[List[float]]]]:
    if not isinstance(geometry, dict):
        raise ValueError(f"Region {region_id} has no geometry")

    kind = geometry.get("type")

    coordinates = geometry.get("coordinates")

    if kind == "Polygon":
        return [coordinates]

    if kind == "MultiPolygon":
        return list(coordinates)

    raise ValueError(
        f"Region {region_id} has a {kind} geometry; only Polygon and MultiPolygon are supported"
    )


# **************************************************************************************


def load_ses_map(path: Path, invert: bool = False) -> List[SesRegion]:
    """
    Load socioeconomic regions from a GeoJSON FeatureCollection.

    Each feature needs `region_id` and `income` properties and a Polygon or
    MultiPolygon geometry; an optional `district` property names the coarser area
    (e.g., a borough) used by intra/inter-district filters.

    Args:
        path (Path): The GeoJSON file.
        invert (bool): Negate every income, so that indices where higher means
            poorer (e.g., poverty rates) follow the "higher = richer" convention.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the collection is empty, a property is missing, a region id is
            duplicated, or a geometry is not polygonal.

    Returns:
        List[SesRegion]: The regions in file order.
    """
    path = Path(path)

    if not path.is_file():
        raise FileNotFoundError(f"SES map not found: {path}")

    with open(path, encoding="utf-8") as f:
        collection = json.load(f)

    if not isinstance(collection, dict) or collection.get("type") != "FeatureCollection":
        raise ValueError(f"{path} is not a GeoJSON FeatureCollection")

    features = collection.get("features") or []

    if not features:
        raise ValueError(f"{path} contains no features")

    regions: List[SesRegion] = []

    seen: Set[str] = set()

    for position, feature in enumerate(features):
        properties = feature.get("properties") or {}

        if properties.get("region_id") is None:
            raise ValueError(f"Feature {position} in {path} lacks a region_id property")

        region_id = str(properties["region_id"])

        if region_id in seen:
            raise ValueError(f"Duplicate region_id {region_id} in {path}")

        seen.add(region_id)

        income = properties.get("income")

        if isinstance(income, bool) or not isinstance(income, (int, float)):
            raise ValueError(f"Region {region_id} lacks a numeric income property")

        district = properties.get("district")

        try:
            region = SesRegion(
                region_id=region_id,
                polygons=parse_geometry(region_id, feature.get("geometry")),
                income=-float(income) if invert else float(income),
                district=None if district is None else str(district),
            )
        except ValidationError as e:
            raise ValueError(
                f"Region {region_id}: {format_validation_error(e)}"
            ) from e

        regions.append(region)

    logger.debug("Loaded %d SES regions from %s", len(regions), path)

    return regions


# **************************************************************************************


def write_ses_map(path: Path, regions: Iterable[SesRegion]) -> int:
    """
    Write regions as a GeoJSON FeatureCollection readable by load_ses_map.

    Returns:
        int: The number of features written.
    """
    features: List[Dict[str, Any]] = []

    for region in regions:
        properties: Dict[str, Any] = {
            "region_id": region.region_id,
            "income": region.income,
        }

        if region.district is not None:
            properties["district"] = region.district

        polygons = [
            [[list(vertex) for vertex in ring] for ring in polygon]
            for polygon in region.polygons
        ]

        geometry = (
            {"type": "Polygon", "coordinates": polygons[0]}
            if len(polygons) == 1
            else {"type": "MultiPolygon", "coordinates": polygons}
        )

        features.append(
            {"type": "Feature", "properties": properties, "geometry": geometry}
        )

    with open(path, "w", encoding="utf-8") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f, indent=2)
        f.write("\n")

    return len(features)


# **************************************************************************************


def find_stringency_gaps(records: Iterable[StringencyRecord]) -> List[date]:
    """
    List the calendar days missing between the first and last stringency record.
    """
    days = sorted(record.date for record in records)

    gaps: List[date] = []

    for previous, current in zip(days, days[1:]):
        gaps.extend(
            previous + timedelta(days=offset)
            for offset in range(1, (current - previous).days)
        )

    return gaps


# **************************************************************************************


def load_stringency(path: Path) -> List[StringencyRecord]:
    """
    Load a daily stringency series with header `date,C1,...,C8,H1`.

    Missing days are reported with a warning (see find_stringency_gaps) rather than
    treated as errors.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If a column is missing, a date is duplicated, or a date or level
            cannot be parsed; row errors carry the line number.

    Returns:
        List[StringencyRecord]: One record per day, sorted by date.
    """
    path = Path(path)

    if not path.is_file():
        raise FileNotFoundError(f"Stringency file not found: {path}")

    records: Dict[date, StringencyRecord] = {}

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)

        fields = [field.strip() for field in reader.fieldnames or []]

        missing = [column for column in STRINGENCY_CSV_HEADER if column not in fields]

        if missing:
            raise ValueError(f"Stringency file {path} is missing columns {missing}")

        reader.fieldnames = fields

        for row in reader:
            line = reader.line_num

            try:
                day = date.fromisoformat((row["date"] or "").strip())
                levels = {
                    code: float((row[code] or "").strip()) for code in RESTRICTION_CODES
                }
                record = StringencyRecord(date=day, levels=levels)
            except ValidationError as e:
                raise ValueError(
                    f"{path}:{line}: {format_validation_error(e)}"
                ) from e
            except (TypeError, ValueError) as e:
                raise ValueError(f"{path}:{line}: {e}") from e

            if day in records:
                raise ValueError(f"{path}:{line}: duplicate date {day.isoformat()}")

            records[day] = record

    ordered = [records[day] for day in sorted(records)]

    gaps = find_stringency_gaps(ordered)

    if gaps:
        warn(
            f"Stringency series {path} has {len(gaps)} missing day(s): "
            f"{', '.join(day.isoformat() for day in gaps[:10])}"
            f"{' ...' if len(gaps) > 10 else ''}",
            stacklevel=2,
        )

    return ordered


# **************************************************************************************


def write_stringency(path: Path, records: Iterable[StringencyRecord]) -> int:
    """
    Write a stringency series in the format read by load_stringency.

    Returns:
        int: The number of records written.
    """
    count = 0

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(STRINGENCY_CSV_HEADER)
        for record in sorted(records, key=lambda record: record.date):
            writer.writerow(
                [record.date.isoformat()]
                + [repr(record.levels[code]) for code in RESTRICTION_CODES]
            )
            count += 1

    return count


# **************************************************************************************
