# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import unittest
from datetime import date

from pydantic import ValidationError

from segmob.constants import RESTRICTION_CODES
from segmob.models import SesRegion, StringencyRecord, TrajectoryRecord

from .utils import get_square

# **************************************************************************************


class TestTrajectoryRecord(unittest.TestCase):
    def test_duration_and_coordinate(self) -> None:
        record = TrajectoryRecord(user_id="u1", lat=40.7, lon=-74.0, start_ts=100, end_ts=460)

        self.assertEqual(record.duration, 360)
        self.assertEqual(record.coordinate["lat"], 40.7)
        self.assertEqual(record.coordinate["lon"], -74.0)

    def test_instantaneous_stay(self) -> None:
        record = TrajectoryRecord(user_id="u1", lat=0.0, lon=0.0, start_ts=5, end_ts=5)
        self.assertEqual(record.duration, 0)

    def test_end_before_start(self) -> None:
        with self.assertRaisesRegex(ValidationError, "is before start_ts"):
            TrajectoryRecord(user_id="u1", lat=0.0, lon=0.0, start_ts=9, end_ts=3)

    def test_coordinate_ranges(self) -> None:
        with self.assertRaises(ValidationError):
            TrajectoryRecord(user_id="u1", lat=91.0, lon=0.0, start_ts=0, end_ts=1)

        with self.assertRaises(ValidationError):
            TrajectoryRecord(user_id="u1", lat=0.0, lon=-180.5, start_ts=0, end_ts=1)

    def test_empty_user(self) -> None:
        with self.assertRaises(ValidationError):
            TrajectoryRecord(user_id="", lat=0.0, lon=0.0, start_ts=0, end_ts=1)

    def test_frozen(self) -> None:
        record = TrajectoryRecord(user_id="u1", lat=0.0, lon=0.0, start_ts=0, end_ts=1)

        with self.assertRaises(ValidationError):
            record.user_id = "u2"  # type: ignore[misc]


# **************************************************************************************


class TestSesRegion(unittest.TestCase):
    def test_district_is_optional(self) -> None:
        region = SesRegion(region_id="R0", polygons=[get_square(0.0, 0.0)], income=1.0)  # type: ignore[list-item]
        self.assertIsNone(region.district)

    def test_requires_a_polygon(self) -> None:
        with self.assertRaises(ValidationError):
            SesRegion(region_id="R0", polygons=[], income=1.0)

    def test_income_must_be_finite(self) -> None:
        with self.assertRaisesRegex(ValidationError, "finite"):
            SesRegion(region_id="R0", polygons=[get_square(0.0, 0.0)], income=float("nan"))  # type: ignore[list-item]


# **************************************************************************************


class TestStringencyRecord(unittest.TestCase):
    def test_canonical_code_order(self) -> None:
        levels = {code: float(k) for k, code in enumerate(reversed(RESTRICTION_CODES))}

        record = StringencyRecord(date=date(2020, 3, 1), levels=levels)

        self.assertEqual(list(record.levels), list(RESTRICTION_CODES))
        self.assertEqual(record.levels["H1"], 0.0)

    def test_missing_code(self) -> None:
        levels = {code: 0.0 for code in RESTRICTION_CODES if code != "C3"}

        with self.assertRaisesRegex(ValidationError, "Missing restriction codes"):
            StringencyRecord(date=date(2020, 3, 1), levels=levels)

    def test_unknown_code(self) -> None:
        levels = {code: 0.0 for code in RESTRICTION_CODES}
        levels["E1"] = 1.0

        with self.assertRaisesRegex(ValidationError, "Unknown restriction codes"):
            StringencyRecord(date=date(2020, 3, 1), levels=levels)

    def test_negative_level(self) -> None:
        levels = {code: 0.0 for code in RESTRICTION_CODES}
        levels["C1"] = -1.0

        with self.assertRaisesRegex(ValidationError, "non-negative"):
            StringencyRecord(date=date(2020, 3, 1), levels=levels)


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
