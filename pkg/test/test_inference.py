# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import unittest
from datetime import date, timedelta

from segmob.config import RunConfig
from segmob.inference import (
    HomeAssignment,
    InferenceReport,
    LocatedStay,
    Visit,
    VisitKind,
    coalesce_stays,
    count_homes,
    extract_visits,
    infer_home,
    label_population,
    label_visits,
    process_user,
)
from segmob.segmentation import Period
from segmob.spatial import assign_deciles, build_index

from .utils import get_row_regions, get_stay

# **************************************************************************************

# Monday:
MONDAY = date(2020, 3, 2)

# **************************************************************************************

CONFIG = RunConfig(
    periods=[Period(label="BL", start=date(2020, 3, 1), end=date(2020, 3, 31))]
)

# **************************************************************************************


def get_home(user_id: str, home_region: str) -> HomeAssignment:
    return HomeAssignment(user_id=user_id, home_region=home_region, night_hours=8.0, nights=1)


# **************************************************************************************


class TestCoalesceStays(unittest.TestCase):
    def test_merges_touching_records(self) -> None:
        stays = [
            LocatedStay(region_id="A", start_ts=0, end_ts=100),
            LocatedStay(region_id="A", start_ts=400, end_ts=500),
            LocatedStay(region_id="B", start_ts=500, end_ts=600),
        ]
        self.assertEqual(
            coalesce_stays(stays),
            [
                LocatedStay(region_id="A", start_ts=0, end_ts=500),
                LocatedStay(region_id="B", start_ts=500, end_ts=600),
            ],
        )

    def test_keeps_distant_records_apart(self) -> None:
        stays = [
            LocatedStay(region_id="A", start_ts=0, end_ts=100),
            LocatedStay(region_id="A", start_ts=401, end_ts=500),
        ]
        self.assertEqual(len(coalesce_stays(stays)), 2)

    def test_unlocated_stays_never_merge(self) -> None:
        stays = [
            LocatedStay(region_id=None, start_ts=0, end_ts=100),
            LocatedStay(region_id=None, start_ts=100, end_ts=200),
        ]
        self.assertEqual(len(coalesce_stays(stays)), 2)


# **************************************************************************************


class TestInferHome(unittest.TestCase):
    def setUp(self) -> None:
        self.index = build_index(get_row_regions(4))

    def test_single_night(self) -> None:
        home = infer_home([get_stay("u", 1.5, 0.5, MONDAY, 22, 8)], CONFIG, self.index)
        assert home is not None
        self.assertEqual(home.user_id, "u")
        self.assertEqual(home.home_region, "R1")
        self.assertEqual(home.night_hours, 8.0)
        self.assertEqual(home.nights, 1)
        self.assertFalse(home.tie_broken)

    def test_short_stay_does_not_qualify(self) -> None:
        self.assertIsNone(
            infer_home([get_stay("u", 1.5, 0.5, MONDAY, 22, 5)], CONFIG, self.index)
        )

    def test_no_stays(self) -> None:
        self.assertIsNone(infer_home([], CONFIG, self.index))

    def test_daytime_stays_never_make_a_home(self) -> None:
        stays = [
            get_stay("u", 1.5, 0.5, MONDAY + timedelta(days=offset), 7, 14)
            for offset in range(7)
        ]
        self.assertIsNone(infer_home(stays, CONFIG, self.index))

    def test_stays_outside_every_region(self) -> None:
        self.assertIsNone(
            infer_home([get_stay("u", 50.0, 50.0, MONDAY, 22, 8)], CONFIG, self.index)
        )

    def test_split_records_are_coalesced(self) -> None:
        stays = [
            get_stay("u", 1.5, 0.5, MONDAY, 22, 4),
            get_stay("u", 1.5, 0.5, date(2020, 3, 3), 2 + 2 / 60, 4.5),
        ]
        home = infer_home(stays, CONFIG, self.index)
        assert home is not None
        self.assertEqual(home.home_region, "R1")

    def test_greatest_presence_wins(self) -> None:
        stays = [
            get_stay("u", 0.5, 0.5, MONDAY, 22, 7),
            get_stay("u", 2.5, 0.5, date(2020, 3, 3), 21, 9),
        ]
        home = infer_home(stays, CONFIG, self.index)
        assert home is not None
        self.assertEqual(home.home_region, "R2")
        self.assertEqual(home.night_hours, 9.0)

    def test_tie_broken_by_region_id(self) -> None:
        stays = [
            get_stay("u", 2.5, 0.5, date(2020, 3, 3), 22, 8),
            get_stay("u", 1.5, 0.5, MONDAY, 22, 8),
        ]
        home = infer_home(stays, CONFIG, self.index)
        assert home is not None
        self.assertEqual(home.home_region, "R1")
        self.assertTrue(home.tie_broken)

    def test_tie_broken_by_nights(self) -> None:
        # 3 x 6h in R2 against 2 x 9h in R1:
        stays = [
            get_stay("u", 2.5, 0.5, date(2020, 3, day), 21, 6) for day in (2, 3, 4)
        ] + [get_stay("u", 1.5, 0.5, date(2020, 3, day), 21, 9) for day in (5, 6)]
        home = infer_home(stays, CONFIG, self.index)
        assert home is not None
        self.assertEqual(home.home_region, "R2")
        self.assertEqual(home.nights, 3)
        self.assertTrue(home.tie_broken)

    def test_utc_offset(self) -> None:
        # 03:00 to 11:00 UTC is 22:00 to 06:00 at UTC-5:
        stays = [get_stay("u", 1.5, 0.5, date(2020, 3, 3), 3, 8)]
        self.assertIsNone(infer_home(stays, CONFIG, self.index))

        local = CONFIG.model_copy(update={"utc_offset_minutes": -300})
        home = infer_home(stays, local, self.index)
        assert home is not None
        self.assertEqual(home.home_region, "R1")

    def test_input_order_is_irrelevant(self) -> None:
        stays = [
            get_stay("u", 2.5, 0.5, date(2020, 3, day), 21, 6) for day in (2, 3, 4)
        ] + [get_stay("u", 1.5, 0.5, date(2020, 3, day), 21, 9) for day in (5, 6)]
        self.assertEqual(
            infer_home(stays, CONFIG, self.index),
            infer_home(list(reversed(stays)), CONFIG, self.index),
        )


# **************************************************************************************


class TestExtractVisits(unittest.TestCase):
    def setUp(self) -> None:
        self.index = build_index(get_row_regions(4))

        self.home = get_home("u", "R1")

        self.stays = [
            get_stay("u", 1.5, 0.5, MONDAY, 22, 8),
            # Tuesday morning at work:
            get_stay("u", 3.5, 0.5, date(2020, 3, 3), 10, 2),
            # Tuesday evening:
            get_stay("u", 0.5, 0.5, date(2020, 3, 3), 17, 1),
            # Saturday morning:
            get_stay("u", 2.5, 0.5, date(2020, 3, 7), 10, 2),
            # Off the map:
            get_stay("u", 40.0, 0.5, date(2020, 3, 7), 12, 1),
        ]

    def test_kinds(self) -> None:
        report = InferenceReport()
        visits = extract_visits(self.stays, self.home, self.index, CONFIG, report)
        self.assertEqual(
            [(visit.region_id, visit.kind) for visit in visits],
            [
                ("R1", VisitKind.HOME),
                ("R3", VisitKind.POI),
                ("R0", VisitKind.OTHER),
                ("R2", VisitKind.OTHER),
            ],
        )
        self.assertEqual(report.visits, 4)
        self.assertEqual(report.dropped_visits, 1)
        self.assertEqual(report.filtered_visits, 0)

    def test_visit_fields(self) -> None:
        visit = extract_visits(self.stays, self.home, self.index, CONFIG)[1]
        self.assertEqual(visit.user_id, "u")
        self.assertEqual(visit.home_region, "R1")
        self.assertEqual(visit.day, date(2020, 3, 3))
        self.assertEqual(visit.timestamp, self.stays[1].start_ts)
        self.assertIsNone(visit.class_user)

    def test_poi_only(self) -> None:
        config = CONFIG.model_copy(update={"visit_kinds": "poi_only"})
        report = InferenceReport()
        visits = extract_visits(self.stays, self.home, self.index, config, report)
        self.assertEqual(
            [visit.kind for visit in visits], [VisitKind.HOME, VisitKind.POI]
        )
        self.assertEqual(report.filtered_visits, 2)

    def test_process_user(self) -> None:
        home, visits, report = process_user(self.stays, CONFIG, self.index)
        assert home is not None
        self.assertEqual(home.home_region, "R1")
        self.assertEqual(len(visits), 4)
        self.assertEqual(report.users, 1)
        self.assertEqual(report.homes, 1)

    def test_process_user_without_home(self) -> None:
        home, visits, report = process_user(self.stays[1:], CONFIG, self.index)
        self.assertIsNone(home)
        self.assertEqual(visits, [])
        self.assertEqual(report.users, 1)
        self.assertEqual(report.homes, 0)
        self.assertEqual(report.home_yield, 0.0)


# **************************************************************************************


class TestInferenceReport(unittest.TestCase):
    def test_merge(self) -> None:
        merged = InferenceReport(users=3, homes=2, visits=10).merge(
            InferenceReport(users=1, homes=1, tie_breaks=1, dropped_visits=4)
        )
        self.assertEqual(merged.users, 4)
        self.assertEqual(merged.homes, 3)
        self.assertEqual(merged.tie_breaks, 1)
        self.assertEqual(merged.visits, 10)
        self.assertEqual(merged.dropped_visits, 4)
        self.assertEqual(merged.home_yield, 0.75)

    def test_empty_yield(self) -> None:
        self.assertEqual(InferenceReport().home_yield, 0.0)


# **************************************************************************************


class TestLabelPopulation(unittest.TestCase):
    def setUp(self) -> None:
        self.deciles = assign_deciles(get_row_regions(4), n_classes=2)

    def test_count_homes(self) -> None:
        homes = [get_home("a", "R1"), None, get_home("b", "R1"), get_home("c", "R3")]
        self.assertEqual(count_homes(homes), {"R1": 2, "R3": 1})

    def test_label_population(self) -> None:
        labels = label_population(
            {"a": get_home("a", "R1"), "b": None, "c": get_home("c", "R3")},
            self.deciles,
            self.deciles,
        )
        self.assertEqual(labels.user_classes, {"a": 1, "c": 2})
        self.assertEqual(labels.place_classes, {"R0": 1, "R1": 1, "R2": 2, "R3": 2})
        self.assertEqual(labels.excluded, 1)
        self.assertEqual(labels.get_class_histogram(2), [1, 1])

    def test_home_without_ses(self) -> None:
        with self.assertRaisesRegex(ValueError, "Home regions lack SES data: R9"):
            label_population({"a": get_home("a", "R9")}, self.deciles, self.deciles)

    def test_label_visits(self) -> None:
        labels = label_population({"a": get_home("a", "R1")}, self.deciles, self.deciles)
        visits = [
            Visit("a", "R3", "R1", VisitKind.POI, 0, MONDAY),
            Visit("stranger", "R0", None, VisitKind.OTHER, 0, MONDAY),
        ]
        labelled = label_visits(visits, labels)
        self.assertEqual(len(labelled), 1)
        self.assertEqual(labelled[0].class_user, 1)
        self.assertEqual(labelled[0].class_place, 2)

    def test_label_visits_unknown_place(self) -> None:
        labels = label_population({"a": get_home("a", "R1")}, self.deciles, self.deciles)
        with self.assertRaisesRegex(ValueError, "R7"):
            label_visits([Visit("a", "R7", "R1", VisitKind.POI, 0, MONDAY)], labels)


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
