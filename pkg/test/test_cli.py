# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import io
import os
import unittest
from contextlib import redirect_stdout
from datetime import date
from pathlib import Path
from typing import List, Tuple
from unittest import mock

from segmob.cli import (
    OUTPUT_ENVIRONMENT_VARIABLE,
    get_output_root,
    get_parser,
    main,
)
from segmob.ingest import write_stringency
from segmob.pipeline import STAGE_MARKER

from .utils import SegmobTestCase, get_stringency_record

# **************************************************************************************

SCENARIO = """
[synth]
n_users = 20
n_regions = 10
days = 10
schedule = 2020-03-06=0.8
window_days = 3
seed = 1
"""

# **************************************************************************************


def invoke(argv: List[str]) -> Tuple[int, str]:
    stdout = io.StringIO()

    with redirect_stdout(stdout):
        status = main(argv)

    return status, stdout.getvalue()


# **************************************************************************************


class TestParser(unittest.TestCase):
    def test_run_defaults(self) -> None:
        args = get_parser().parse_args(["run", "--config", "run.ini"])
        self.assertEqual(args.stage, "all")
        self.assertEqual(args.threads, 1)
        self.assertFalse(args.lenient)
        self.assertFalse(args.force)
        self.assertIsNone(args.out)

    def test_unknown_stage_is_rejected(self) -> None:
        with redirect_stdout(io.StringIO()), mock.patch("sys.stderr", io.StringIO()):
            with self.assertRaises(SystemExit):
                get_parser().parse_args(["run", "--config", "run.ini", "--stage", "plots"])

    def test_command_is_required(self) -> None:
        with mock.patch("sys.stderr", io.StringIO()):
            with self.assertRaises(SystemExit):
                get_parser().parse_args([])

    def test_output_root(self) -> None:
        with mock.patch.dict(os.environ, {OUTPUT_ENVIRONMENT_VARIABLE: "/tmp/env"}):
            self.assertEqual(get_output_root("/tmp/flag"), Path("/tmp/flag"))
            self.assertEqual(get_output_root(None), Path("/tmp/env"))

        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertIsNone(get_output_root(None))


# **************************************************************************************


class TestCommands(SegmobTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.scenario = self.write_text("city.ini", SCENARIO)

    def test_synth_then_run_then_plots(self) -> None:
        status, stdout = invoke(["synth", "--config", str(self.scenario)])

        self.assertEqual(status, 0)
        self.assertIn("trajectories:", stdout)

        config = self.directory / "city" / "run.ini"
        self.assertTrue(config.is_file())

        output = self.directory / "out"

        status, stdout = invoke(["run", "--config", str(config), "--out", str(output)])

        self.assertEqual(status, 0)
        self.assertEqual(stdout.strip(), str(output))
        self.assertTrue((output / "stats" / STAGE_MARKER).is_file())

        status, stdout = invoke(["emit-plots", "--out", str(output)])

        self.assertEqual(status, 0)
        self.assertTrue((output / "plots" / "kruskal.csv").is_file())
        self.assertIn("heatmap_all.csv", stdout)

    def test_synth_seed_override(self) -> None:
        invoke(["synth", "--config", str(self.scenario), "--out", str(self.directory / "a")])
        invoke(["synth", "--config", str(self.scenario), "--out", str(self.directory / "b"), "--seed", "2"])

        self.assertNotEqual(
            (self.directory / "a" / "trajectories.csv").read_text(encoding="utf-8"),
            (self.directory / "b" / "trajectories.csv").read_text(encoding="utf-8"),
        )

    def test_output_from_environment(self) -> None:
        invoke(["synth", "--config", str(self.scenario)])

        output = self.directory / "env"

        with mock.patch.dict(os.environ, {OUTPUT_ENVIRONMENT_VARIABLE: str(output)}):
            status, _ = invoke(
                ["run", "--config", str(self.directory / "city" / "run.ini"), "--stage", "ingest"]
            )

        self.assertEqual(status, 0)
        self.assertTrue((output / "ingest" / STAGE_MARKER).is_file())

    def test_stage_failure_exits_one(self) -> None:
        invoke(["synth", "--config", str(self.scenario)])

        status, _ = invoke(
            [
                "run",
                "--config",
                str(self.directory / "city" / "run.ini"),
                "--stage",
                "entropy",
                "--out",
                str(self.directory / "fresh"),
            ]
        )

        self.assertEqual(status, 1)

    def test_invalid_threads_exits_two(self) -> None:
        status, _ = invoke(["run", "--config", "run.ini", "--threads", "0"])
        self.assertEqual(status, 2)

    def test_missing_scenario_exits_two(self) -> None:
        status, _ = invoke(["synth", "--config", str(self.directory / "missing.ini")])
        self.assertEqual(status, 2)

    def test_emit_plots_needs_an_output(self) -> None:
        with mock.patch.dict(os.environ, {}, clear=True):
            status, _ = invoke(["emit-plots"])
        self.assertEqual(status, 2)

    def test_emit_plots_before_run_exits_two(self) -> None:
        status, _ = invoke(["emit-plots", "--out", str(self.directory / "nothing")])
        self.assertEqual(status, 2)

    def test_suggest_breakpoints(self) -> None:
        path = self.directory / "stringency.csv"

        write_stringency(
            path,
            [
                get_stringency_record(date(2020, 3, 1)),
                get_stringency_record(date(2020, 3, 2)),
                get_stringency_record(date(2020, 3, 3), C6=2.0),
                get_stringency_record(date(2020, 3, 4), C6=2.5),
                get_stringency_record(date(2020, 3, 5), C6=2.5, H1=1.0),
            ],
        )

        status, stdout = invoke(["suggest-breakpoints", "--stringency", str(path)])

        self.assertEqual(status, 0)
        self.assertEqual(stdout.split(), ["2020-03-03", "2020-03-05"])

        status, stdout = invoke(
            ["suggest-breakpoints", "--stringency", str(path), "--min-jump", "0.5"]
        )

        self.assertEqual(stdout.split(), ["2020-03-03", "2020-03-04", "2020-03-05"])

    def test_suggest_breakpoints_needs_an_input(self) -> None:
        status, _ = invoke(["suggest-breakpoints"])
        self.assertEqual(status, 2)


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
