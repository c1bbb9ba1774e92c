# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import unittest

from segmob.constants import (
    ENTROPY_HISTOGRAM_BINS,
    NUMBER_OF_SES_CLASSES,
    RESTRICTION_CODES,
    SECONDS_PER_DAY,
    SECONDS_PER_HOUR,
    SECONDS_PER_MINUTE,
    STAY_COALESCE_GAP_SECONDS,
    STRINGENCY_CSV_HEADER,
    TRAJECTORY_CSV_HEADER,
)

# **************************************************************************************


class TestConstants(unittest.TestCase):
    def test_number_of_ses_classes(self) -> None:
        self.assertEqual(NUMBER_OF_SES_CLASSES, 10)

    def test_restriction_codes(self) -> None:
        self.assertEqual(
            RESTRICTION_CODES,
            ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "H1"),
        )

    def test_seconds(self) -> None:
        self.assertEqual(SECONDS_PER_HOUR, 60 * SECONDS_PER_MINUTE)
        self.assertEqual(SECONDS_PER_DAY, 24 * SECONDS_PER_HOUR)

    def test_coalesce_gap_is_five_minutes(self) -> None:
        self.assertEqual(STAY_COALESCE_GAP_SECONDS, 5 * SECONDS_PER_MINUTE)

    def test_entropy_histogram_bins(self) -> None:
        self.assertEqual(ENTROPY_HISTOGRAM_BINS, 50)

    def test_csv_headers(self) -> None:
        self.assertEqual(
            TRAJECTORY_CSV_HEADER, ("user_id", "lat", "lon", "start_ts", "end_ts")
        )
        self.assertEqual(STRINGENCY_CSV_HEADER[0], "date")
        self.assertEqual(STRINGENCY_CSV_HEADER[1:], RESTRICTION_CODES)


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
