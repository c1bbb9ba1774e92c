# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import shutil
import tempfile
import unittest
from datetime import date
from pathlib import Path
from typing import List

from segmob.pipeline import STAGE_MARKER, read_csv, run
from segmob.plots import emit_plots, require_artifact
from segmob.synth import SynthSpec, generate_city

# **************************************************************************************


class TestEmitPlots(unittest.TestCase):
    directory: Path

    output: Path

    paths: List[Path]

    @classmethod
    def setUpClass(cls) -> None:
        cls.directory = Path(tempfile.mkdtemp(prefix="segmob-plots-"))

        files = generate_city(
            SynthSpec(
                n_users=40,
                n_regions=20,
                days=24,
                schedule={date(2020, 3, 13): 0.8},
                window_days=5,
                seed=4,
            ),
            cls.directory / "city",
        )

        cls.output = run(files["config"])

        cls.paths = emit_plots(cls.output)

    @classmethod
    def tearDownClass(cls) -> None:
        shutil.rmtree(cls.directory, ignore_errors=True)

    def test_written_files(self) -> None:
        names = sorted(path.name for path in self.paths)

        self.assertEqual(
            names,
            [
                "entropy_histograms.csv",
                "entropy_summary.csv",
                "heatmap_all.csv",
                "heatmap_exclude_home_region.csv",
                "kruskal.csv",
                "r_series_all.csv",
                "r_series_exclude_home_region.csv",
                "regression_coefficients.csv",
                "regression_summary.csv",
            ],
        )

        self.assertTrue(all(path.parent == self.output / "plots" for path in self.paths))

    def test_heatmap_has_every_cell(self) -> None:
        rows = read_csv(self.output / "plots" / "heatmap_all.csv")

        self.assertEqual(len(rows), 2 * 100)

        for period in ("BL", "L"):
            cells = [row for row in rows if row["period"] == period]
            self.assertEqual(len(cells), 100)
            self.assertEqual({int(row["place_class"]) for row in cells}, set(range(1, 11)))
            self.assertEqual({int(row["people_class"]) for row in cells}, set(range(1, 11)))

    def test_entropy_tables(self) -> None:
        histograms = read_csv(self.output / "plots" / "entropy_histograms.csv")
        self.assertEqual(len(histograms), 2 * 2 * 50)
        self.assertEqual(float(histograms[0]["bin_start"]), 0.0)
        self.assertAlmostEqual(float(histograms[0]["bin_end"]), 0.02)

        summary = read_csv(self.output / "plots" / "entropy_summary.csv")
        self.assertEqual(len(summary), 4)

        for row in summary:
            if row["axis"] == "spatial":
                self.assertNotEqual(row["alternative_mean"], "")
            else:
                self.assertEqual(row["alternative_mean"], "")

    def test_regression_summary_has_ratio_row(self) -> None:
        rows = read_csv(self.output / "plots" / "regression_summary.csv")
        self.assertEqual([row["axis"] for row in rows], ["ses", "spatial", "ratio"])

    def test_series(self) -> None:
        rows = read_csv(self.output / "plots" / "r_series_all.csv")
        self.assertEqual(len(rows), 24 - 5 + 1)
        self.assertEqual(rows[0]["anchor"], "2020-03-05")


# **************************************************************************************


class TestMissingArtifacts(unittest.TestCase):
    def setUp(self) -> None:
        self.directory = Path(tempfile.mkdtemp(prefix="segmob-plots-"))

    def tearDown(self) -> None:
        shutil.rmtree(self.directory, ignore_errors=True)

    def test_missing_stage_is_named(self) -> None:
        for stage in ("matrices", "stats"):
            (self.directory / stage).mkdir()
            (self.directory / stage / STAGE_MARKER).write_text("{}", encoding="utf-8")

        with self.assertRaisesRegex(FileNotFoundError, "'entropy'"):
            emit_plots(self.directory)

    def test_require_artifact(self) -> None:
        path = self.directory / "stats" / "regression.json"
        with self.assertRaisesRegex(FileNotFoundError, "run the pipeline stage 'stats' first"):
            require_artifact(path)


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
