# **************************************************************************************
#
# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts
#
# **************************************************************************************

import shutil
import tempfile
import unittest
from datetime import date
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from segmob.constants import RESTRICTION_CODES
from segmob.models import SesRegion, StringencyRecord, TrajectoryRecord
from segmob.temporal import convert_local_date_to_epoch

# **************************************************************************************


def get_square(lon: float, lat: float, size: float = 1.0) -> List[List[List[float]]]:
    """
    A single-polygon ring list for the axis-aligned square with its south-west
    corner at (lon, lat).
    """
    return [
        [
            [lon, lat],
            [lon + size, lat],
            [lon + size, lat + size],
            [lon, lat + size],
            [lon, lat],
        ]
    ]


# **************************************************************************************


def get_square_region(
    region_id: str,
    lon: float,
    lat: float,
    income: float,
    size: float = 1.0,
    district: Optional[str] = None,
) -> SesRegion:
    return SesRegion(
        region_id=region_id,
        polygons=[get_square(lon, lat, size)],  # type: ignore[list-item]
        income=income,
        district=district,
    )


# **************************************************************************************


def get_row_regions(count: int, district: Optional[str] = None) -> List[SesRegion]:
    """
    A row of unit squares R0, R1, ... along the equator with income equal to the
    index, so R0 is the poorest.
    """
    return [
        get_square_region(f"R{k}", float(k), 0.0, float(k), district=district)
        for k in range(count)
    ]


# **************************************************************************************


def get_stay(
    user_id: str,
    lon: float,
    lat: float,
    day: date,
    start_hour: float,
    hours: float,
) -> TrajectoryRecord:
    """
    A stay starting at a UTC clock hour of a day and lasting a number of hours.
    """
    start = convert_local_date_to_epoch(day, 0) + int(start_hour * 3600)

    return TrajectoryRecord(
        user_id=user_id,
        lat=lat,
        lon=lon,
        start_ts=start,
        end_ts=start + int(hours * 3600),
    )


# **************************************************************************************


def get_stringency_record(day: date, level: float = 0.0, **levels: float) -> StringencyRecord:
    values = {code: level for code in RESTRICTION_CODES}
    values.update(levels)
    return StringencyRecord(date=day, levels=values)


# **************************************************************************************


class SegmobTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self.directory = Path(tempfile.mkdtemp(prefix="segmob-"))

    def tearDown(self) -> None:
        shutil.rmtree(self.directory, ignore_errors=True)

    def write_text(self, name: str, text: str) -> Path:
        path = self.directory / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    def assertMatrixAlmostEqual(
        self,
        expected: ArrayLike,
        actual: ArrayLike,
        atol: float = 1e-12,
    ) -> None:
        expected = np.asarray(expected, dtype=float)
        actual = np.asarray(actual, dtype=float)
        self.assertEqual(expected.shape, actual.shape)
        np.testing.assert_allclose(actual, expected, rtol=0, atol=atol)

    def assertColumnsSumToOne(
        self,
        values: ArrayLike,
        active: Sequence[bool],
        atol: float = 1e-12,
    ) -> None:
        sums = np.asarray(values, dtype=float).sum(axis=0)
        for column, is_active in enumerate(active):
            self.assertAlmostEqual(sums[column], 1.0 if is_active else 0.0, delta=atol)


# **************************************************************************************
