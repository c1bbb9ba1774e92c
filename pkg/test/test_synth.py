# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import json
import unittest
from collections import Counter
from datetime import date, timedelta
from typing import List

import numpy as np

from segmob.config import RunConfig, load_config
from segmob.constants import RESTRICTION_CODES
from segmob.entropy import ses_entropy
from segmob.inference import Visit, VisitKind, infer_home
from segmob.ingest import load_ses_map, load_stringency, load_trajectories
from segmob.matrix import StratificationMatrix
from segmob.network import VisitFilter, build_network
from segmob.segmentation import Period, windows
from segmob.spatial import build_index, locate_point
from segmob.stratify import (
    adjustment_matrix,
    assortativity,
    assortativity_series,
    residual_isolation,
    stratification_matrix,
)
from segmob.synth import (
    SynthSpec,
    SyntheticCity,
    draw_place_classes,
    expected_matrix,
    generate_city,
    get_period_labels,
    load_synth_spec,
    parse_schedule,
    simulate_city,
)
from segmob.temporal import convert_epoch_to_local_date

from .utils import SegmobTestCase

# **************************************************************************************

SCHEDULE = {date(2020, 3, 11): 0.7, date(2020, 3, 21): 0.5}

# **************************************************************************************


def get_small_spec(**overrides: object) -> SynthSpec:
    values: dict = {
        "n_users": 40,
        "n_regions": 20,
        "days": 12,
        "visits_per_day": 1.0,
        "seed": 5,
    }
    values.update(overrides)
    return SynthSpec(**values)


# **************************************************************************************


def get_labelled_visits(city: SyntheticCity) -> List[Visit]:
    """
    Label every stay of a synthetic city with its planted classes, marking stays in
    the planted home region as home visits.
    """
    index = build_index(city.regions)

    truth = city.truth

    visits: List[Visit] = []

    for record in city.records:
        region_id = locate_point(index, lon=record.lon, lat=record.lat)
        assert region_id is not None
        home = truth.homes[record.user_id]
        visits.append(
            Visit(
                user_id=record.user_id,
                region_id=region_id,
                home_region=home,
                kind=VisitKind.HOME if region_id == home else VisitKind.OTHER,
                timestamp=record.start_ts,
                day=convert_epoch_to_local_date(record.start_ts, truth.spec.utc_offset_minutes),
                class_user=truth.user_classes[record.user_id],
                class_place=truth.region_classes[region_id],
            )
        )

    return visits


# **************************************************************************************


class TestMixingRule(unittest.TestCase):
    def test_assortativity_recovers_p(self) -> None:
        rng = np.random.default_rng(0)

        for p in (0.0, 0.3, 0.7):
            users = np.repeat(np.arange(1, 11), 20_000)
            places = draw_place_classes(rng, users, p)

            counts = np.zeros((10, 10))
            np.add.at(counts, (places - 1, users - 1), 1)

            r = assortativity(StratificationMatrix.from_counts(counts))

            self.assertAlmostEqual(r, p, delta=0.01)

    def test_full_segregation(self) -> None:
        users = np.arange(1, 11)
        places = draw_place_classes(np.random.default_rng(1), users, 1.0)
        np.testing.assert_array_equal(places, users)

    def test_classes_in_range(self) -> None:
        places = draw_place_classes(np.random.default_rng(2), np.ones(1000, dtype=int), 0.0, n_classes=4)
        self.assertGreaterEqual(int(places.min()), 1)
        self.assertLessEqual(int(places.max()), 4)

    def test_expected_matrix(self) -> None:
        M, r = expected_matrix(0.3)
        self.assertEqual(r, 0.3)
        self.assertAlmostEqual(assortativity(M), 0.3)
        self.assertAlmostEqual(float(M.values[0, 0]), 0.37)
        self.assertAlmostEqual(float(M.values[1, 0]), 0.07)

    def test_expected_matrix_range(self) -> None:
        with self.assertRaises(ValueError):
            expected_matrix(1.5)

    def test_matrix_matches_expected(self) -> None:
        rng = np.random.default_rng(8)

        users = np.repeat(np.arange(1, 11), 50_000)

        for p in (0.3, 0.6, 0.9):
            places = draw_place_classes(rng, users, p)

            counts = np.zeros((10, 10))
            np.add.at(counts, (places - 1, users - 1), 1)

            m = StratificationMatrix.from_counts(counts)

            expected, r = expected_matrix(p)

            np.testing.assert_allclose(m.values, expected.values, rtol=0, atol=0.01)
            self.assertAlmostEqual(assortativity(m), r, delta=0.01)

    def test_ses_entropy_falls_as_p_rises(self) -> None:
        rng = np.random.default_rng(9)

        # 10,000 users in ten equal classes, 20 visits each:
        users = np.repeat(np.arange(1, 11), 20_000)

        means = []

        for p in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
            places = draw_place_classes(rng, users, p).reshape(10_000, 20)
            means.append(float(np.mean([ses_entropy(row.tolist()) for row in places])))

        for before, after in zip(means, means[1:]):
            self.assertGreater(before, after)


# **************************************************************************************


class TestSynthSpec(unittest.TestCase):
    def test_segments(self) -> None:
        spec = SynthSpec(schedule=SCHEDULE)
        self.assertEqual(
            spec.get_segments(),
            [
                (date(2020, 3, 1), date(2020, 3, 10), 0.3),
                (date(2020, 3, 11), date(2020, 3, 20), 0.7),
                (date(2020, 3, 21), date(2020, 3, 30), 0.5),
            ],
        )
        self.assertEqual(spec.end, date(2020, 3, 30))

    def test_mixing(self) -> None:
        spec = SynthSpec(schedule=SCHEDULE)
        self.assertEqual(spec.get_mixing(date(2020, 3, 10)), 0.3)
        self.assertEqual(spec.get_mixing(date(2020, 3, 11)), 0.7)
        self.assertEqual(spec.get_mixing(date(2020, 3, 30)), 0.5)

    def test_infeasible(self) -> None:
        with self.assertRaisesRegex(ValueError, "Infeasible"):
            SynthSpec(n_regions=5, n_classes=10)

    def test_schedule_outside_span(self) -> None:
        with self.assertRaises(ValueError):
            SynthSpec(schedule={date(2020, 3, 1): 0.5})
        with self.assertRaises(ValueError):
            SynthSpec(schedule={date(2020, 4, 30): 0.5})

    def test_period_labels(self) -> None:
        self.assertEqual(get_period_labels(1), ["BL"])
        self.assertEqual(get_period_labels(3), ["BL", "L", "R"])
        self.assertEqual(get_period_labels(5), ["BL", "L1", "R1", "L2", "R2"])

    def test_parse_schedule(self) -> None:
        self.assertEqual(parse_schedule(" 2020-03-11=0.7, 2020-03-21=0.5 ,"), SCHEDULE)
        with self.assertRaises(ValueError):
            parse_schedule("2020-03-11:0.7")


# **************************************************************************************


class TestSimulateCity(unittest.TestCase):
    def test_deterministic(self) -> None:
        first = simulate_city(get_small_spec())
        second = simulate_city(get_small_spec())
        self.assertEqual(first.records, second.records)
        self.assertEqual(first.stringency, second.stringency)
        self.assertEqual(first.truth, second.truth)

    def test_seed_changes_output(self) -> None:
        self.assertNotEqual(
            simulate_city(get_small_spec()).records,
            simulate_city(get_small_spec(seed=6)).records,
        )

    def test_equal_classes(self) -> None:
        city = simulate_city(get_small_spec())
        self.assertEqual(len(city.regions), 20)
        self.assertEqual(len(city.truth.homes), 40)
        self.assertEqual(sorted(Counter(city.truth.user_classes.values()).values()), [4] * 10)

    def test_planted_homes_are_recovered(self) -> None:
        spec = get_small_spec(home_fidelity=1.0)

        city = simulate_city(spec)

        config = RunConfig(periods=[Period(label="BL", start=spec.start, end=spec.end)])

        index = build_index(city.regions)

        stays: dict = {}
        for record in city.records:
            stays.setdefault(record.user_id, []).append(record)

        for user_id, records in stays.items():
            home = infer_home(records, config, index)
            assert home is not None
            self.assertEqual(home.home_region, city.truth.homes[user_id])

    def test_stringency(self) -> None:
        city = simulate_city(get_small_spec())
        self.assertEqual(len(city.stringency), 12)
        self.assertTrue(all(level == 0.0 for level in city.stringency[0].levels.values()))
        for code in RESTRICTION_CODES:
            levels = [record.levels[code] for record in city.stringency]
            self.assertEqual(levels, sorted(levels))
            self.assertGreater(levels[-1], 0.0)

    def test_segments_in_truth(self) -> None:
        city = simulate_city(get_small_spec(schedule={date(2020, 3, 7): 0.9}))
        self.assertEqual([segment["p"] for segment in city.truth.segments], [0.3, 0.9])
        self.assertEqual([segment["expected_r"] for segment in city.truth.segments], [0.3, 0.9])


# **************************************************************************************


class TestPlantedStructure(unittest.TestCase):
    def test_homes_are_recovered_at_scale(self) -> None:
        spec = SynthSpec(n_users=1000, n_regions=100, days=14, home_fidelity=0.95, seed=13)

        city = simulate_city(spec)

        config = RunConfig(periods=[Period(label="BL", start=spec.start, end=spec.end)])

        index = build_index(city.regions)

        stays: dict = {}
        for record in city.records:
            stays.setdefault(record.user_id, []).append(record)

        matches = 0
        for user_id, records in stays.items():
            home = infer_home(records, config, index)
            if home is not None and home.home_region == city.truth.homes[user_id]:
                matches += 1

        self.assertEqual(len(stays), 1000)
        self.assertGreaterEqual(matches, 990)

    def test_planted_shock_is_recovered(self) -> None:
        shock = date(2020, 4, 30)

        spec = SynthSpec(
            n_users=300,
            n_regions=50,
            days=120,
            visits_per_day=1.5,
            p=0.3,
            schedule={shock: 0.7},
            window_days=7,
            seed=21,
        )

        visits = get_labelled_visits(simulate_city(spec))

        f = VisitFilter.parse("exclude_home_region")

        sliding = windows(spec.start, spec.end, 7, 1)

        series = assortativity_series(visits, sliding, f)

        before = [point["r"] for window, point in zip(sliding, series) if window.end < shock]
        after = [point["r"] for window, point in zip(sliding, series) if window.start >= shock]

        self.assertTrue(before and after)
        self.assertTrue(all(r is not None for r in before + after))

        step = float(np.mean(after)) - float(np.mean(before))  # type: ignore[arg-type]

        self.assertAlmostEqual(step, 0.4, delta=0.03)
        self.assertLess(max(before), min(after))  # type: ignore[type-var]

        baseline = Period(label="BL", start=spec.start, end=shock - timedelta(days=1))
        lockdown = Period(label="L", start=shock, end=spec.end)

        s = adjustment_matrix(
            stratification_matrix(build_network(visits, baseline, f)),
            stratification_matrix(build_network(visits, lockdown, f)),
        )

        self.assertGreater(residual_isolation(s)["mu_re"], 0.0)


# **************************************************************************************


class TestGenerateCity(SegmobTestCase):
    def test_files(self) -> None:
        spec = get_small_spec(schedule={date(2020, 3, 5): 0.8, date(2020, 3, 9): 0.4})

        files = generate_city(spec, self.directory / "city")

        self.assertEqual(set(files), {"trajectories", "ses_map", "stringency", "truth", "config"})
        self.assertTrue(all(path.is_file() for path in files.values()))

        city = simulate_city(spec)

        self.assertEqual(list(load_trajectories(files["trajectories"])), city.records)
        self.assertEqual(load_ses_map(files["ses_map"]), city.regions)
        self.assertEqual(load_stringency(files["stringency"]), city.stringency)

        truth = json.loads(files["truth"].read_text(encoding="utf-8"))
        self.assertEqual(truth["homes"], city.truth.homes)

    def test_run_config(self) -> None:
        spec = get_small_spec(schedule={date(2020, 3, 5): 0.8, date(2020, 3, 9): 0.4})

        files = generate_city(spec, self.directory / "city")

        config = load_config(files["config"])

        self.assertEqual([period.label for period in config.periods], ["BL", "L", "R"])
        self.assertEqual(config.start, date(2020, 3, 1))
        self.assertEqual(config.end, date(2020, 3, 12))
        self.assertEqual(config.window_days, 7)
        self.assertEqual(config.filters, ["all", "exclude_home_region"])
        self.assertEqual(config.trajectories, files["trajectories"])
        self.assertEqual(config.ses_map, files["ses_map"])


# **************************************************************************************


class TestLoadSynthSpec(SegmobTestCase):
    def test_load(self) -> None:
        path = self.write_text(
            "city.ini",
            "[synth]\nn_users = 10\nn_regions = 10\np = 0.2\n"
            "schedule = 2020-03-11=0.7\nclass_balance = skewed\nseed = 3\n",
        )

        spec = load_synth_spec(path)

        self.assertEqual(spec.n_users, 10)
        self.assertEqual(spec.p, 0.2)
        self.assertEqual(spec.schedule, {date(2020, 3, 11): 0.7})
        self.assertEqual(spec.class_balance, "skewed")
        self.assertEqual(spec.seed, 3)
        self.assertEqual(load_synth_spec(path, seed=9).seed, 9)

    def test_run_sections_are_ignored(self) -> None:
        path = self.write_text("city.ini", "[run]\nwindow_days = 3\n\n[synth]\nn_users = 10\n")
        self.assertEqual(load_synth_spec(path).n_users, 10)

    def test_missing_section(self) -> None:
        path = self.write_text("city.ini", "[run]\nwindow_days = 3\n")
        with self.assertRaisesRegex(ValueError, r"no \[synth\] section"):
            load_synth_spec(path)

    def test_unknown_key(self) -> None:
        path = self.write_text("city.ini", "[synth]\nn_cities = 3\n")
        with self.assertRaisesRegex(ValueError, "n_cities"):
            load_synth_spec(path)

    def test_invalid_value(self) -> None:
        path = self.write_text("city.ini", "[synth]\np = 1.5\n")
        with self.assertRaisesRegex(ValueError, "Invalid synthetic city"):
            load_synth_spec(path)

    def test_missing_file(self) -> None:
        with self.assertRaises(FileNotFoundError):
            load_synth_spec(self.directory / "missing.ini")


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
