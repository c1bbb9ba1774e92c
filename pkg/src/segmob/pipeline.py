# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import csv
import json
import logging
import re
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass, field
from datetime import date
from importlib import metadata
from pathlib import Path
from typing import (
    Annotated,
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Literal,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np
from pydantic import BaseModel, Field

from .checksum import compute_file_digest, compute_payload_digest, get_user_shard
from .config import RunConfig, load_config
from .entropy import (
    EntropyAccumulator,
    EntropyAxis,
    get_user_entropies,
    get_window_alphabets,
    get_window_accumulators,
)
from .inference import (
    HomeAssignment,
    InferenceReport,
    PopulationLabels,
    Visit,
    VisitKind,
    count_homes,
    label_population,
    label_visits,
    process_user,
)
from .ingest import IngestReport, load_ses_map, load_stringency, load_trajectories
from .kruskal import Selector, compare_periods, get_comparison_pairs
from .matrix import StratificationMatrix
from .models import SesRegion, TrajectoryRecord
from .network import (
    EmptyNetworkError,
    VisitFilter,
    VisitNetwork,
    build_network,
    get_daily_class_counts,
)
from .regression import RegressionResult, align_series, covariate_ratio, ols_fit, r2_ratio
from .segmentation import Period, segment, windows
from .spatial import assign_deciles, build_index
from .stratify import (
    DegenerateMatrixError,
    adjustment_matrix,
    assortativity,
    get_daily_series,
    residual_isolation,
    stratification_matrix,
)

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************

STAGES: Tuple[str, ...] = ("ingest", "infer", "label", "matrices", "entropy", "stats")

# **************************************************************************************

STAGE_MARKER = "stage.json"

# **************************************************************************************

MANIFEST = "manifest.json"

# **************************************************************************************

SELECTORS: Tuple[Selector, ...] = ("all", "diagonal")

# **************************************************************************************

DEPENDENCIES: Tuple[str, ...] = ("celerity", "numpy", "pydantic", "scipy", "shapely")

# **************************************************************************************

KRUSKAL_CSV_HEADER: Tuple[str, ...] = (
    "filter",
    "selector",
    "first",
    "second",
    "statistic",
    "df",
    "p_value",
    "significant",
    "degenerate",
)

# **************************************************************************************

VISIT_CSV_HEADER: Tuple[str, ...] = (
    "user_id",
    "region_id",
    "home_region",
    "kind",
    "timestamp",
    "day",
)

# **************************************************************************************


class StageError(RuntimeError):
    """
    Raised when a pipeline stage fails; the message names the stage.
    """


# **************************************************************************************


class StageRecord(BaseModel):
    rows: Annotated[
        int,
        Field(ge=0, description="Number of rows the stage produced"),
    ]

    seconds: Annotated[
        float,
        Field(ge=0, description="Wall-clock duration of the stage"),
    ]


# **************************************************************************************


class PipelineManifest(BaseModel):
    version: Annotated[
        str,
        Field(description="The segmob version that produced the outputs"),
    ]

    config_hash: Annotated[
        str,
        Field(description="Digest of the run configuration"),
    ]

    modules: Annotated[
        Dict[str, str],
        Field(description="Installed versions of the numerical dependencies"),
    ]

    inputs: Annotated[
        Dict[str, str],
        Field(description="Digest of each input file"),
    ]

    lenient: Annotated[
        bool,
        Field(default=False, description="Whether malformed trajectory rows were skipped"),
    ]

    periods: Annotated[
        List[Dict[str, str]],
        Field(description="The analysed periods"),
    ]

    stages: Annotated[
        Dict[str, StageRecord],
        Field(default_factory=dict, description="Row count and timing of each stage"),
    ]

    @property
    def provenance(self) -> Dict[str, Any]:
        """
        The timing-free part of the manifest, embedded in every artifact.
        """
        return self.model_dump(mode="json", exclude={"stages"})


# **************************************************************************************


def get_module_versions() -> Dict[str, str]:
    versions: Dict[str, str] = {}

    for name in DEPENDENCIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"

    return versions


# **************************************************************************************


def write_json(path: Path, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


# **************************************************************************************


def read_json(path: Path) -> Any:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


# **************************************************************************************


def format_cell(value: Any) -> Any:
    if value is None:
        return ""

    if isinstance(value, bool):
        return int(value)

    # numpy scalars subclass float, but their repr is not a plain number:
    if isinstance(value, float):
        return repr(float(value))

    return value


# **************************************************************************************


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    count = 0

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])
            count += 1

    return count


# **************************************************************************************


def read_csv(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


# **************************************************************************************


def get_filter_slug(text: str) -> str:
    """
    A file-name-safe form of a visit filter, e.g., "inter_region-Manhattan+Bronx".
    """
    return re.sub(r"[^A-Za-z0-9_.+-]", "_", text.replace(":", "-").replace("|", "+"))


# **************************************************************************************


def write_visits(path: Path, visits: Iterable[Visit]) -> int:
    return write_csv(
        path,
        VISIT_CSV_HEADER,
        (
            (
                visit.user_id,
                visit.region_id,
                visit.home_region or "",
                visit.kind.value,
                visit.timestamp,
                visit.day.isoformat(),
            )
            for visit in visits
        ),
    )


# **************************************************************************************


def read_visits(path: Path) -> Iterator[Visit]:
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            yield Visit(
                user_id=row["user_id"],
                region_id=row["region_id"],
                home_region=row["home_region"] or None,
                kind=VisitKind(row["kind"]),
                timestamp=int(row["timestamp"]),
                day=date.fromisoformat(row["day"]),
            )


# **************************************************************************************


def infer_shard(
    path: Path,
    config: RunConfig,
    regions: Sequence[SesRegion],
) -> Tuple[List[Tuple[str, Optional[HomeAssignment]]], List[Visit], InferenceReport]:
    """
    Infer homes and extract visits for every user of one trajectory shard.

    Module-level so that it can run in a worker process.
    """
    index = build_index(regions, config.cells_per_axis)

    users: Dict[str, List[TrajectoryRecord]] = defaultdict(list)

    for record in load_trajectories(path):
        users[record.user_id].append(record)

    homes: List[Tuple[str, Optional[HomeAssignment]]] = []

    visits: List[Visit] = []

    report = InferenceReport()

    for user_id in sorted(users):
        home, user_visits, user_report = process_user(users[user_id], config, index)
        homes.append((user_id, home))
        visits.extend(user_visits)
        report = report.merge(user_report)

    return homes, visits, report


# **************************************************************************************


@dataclass
class Pipeline:
    """
    The staged pipeline: ingest, infer, label, matrices, entropy and stats.

    Every stage writes its artifacts into its own directory under the output root,
    then a stage.json marker carrying the run's provenance. A stage is skipped on
    rerun when its marker matches the current provenance, so interrupted runs
    resume where they stopped.
    """

    config: RunConfig

    output: Path

    lenient: bool = False

    threads: int = 1

    manifest: PipelineManifest = field(init=False)

    periods: List[Period] = field(init=False)

    filters: List[VisitFilter] = field(init=False)

    entropy_filter: VisitFilter = field(init=False)

    def __post_init__(self) -> None:
        from . import __version__

        for key in ("trajectories", "ses_map", "stringency"):
            path = getattr(self.config, key)
            if path is None:
                raise StageError(f"Stage ingest failed: the [inputs] {key} path is not set")
            if not Path(path).is_file():
                raise StageError(f"Stage ingest failed: input file not found: {path}")

        self.output = Path(self.output)

        self.periods = segment(self.config)

        self.filters = [VisitFilter.parse(text) for text in self.config.filters]

        self.entropy_filter = VisitFilter.parse(self.config.entropy_filter)

        self.manifest = PipelineManifest(
            version=__version__,
            modules=get_module_versions(),
            config_hash=compute_payload_digest(
                self.config.model_dump(mode="json", exclude={"output"})
            ),
            inputs={
                key: compute_file_digest(getattr(self.config, key))
                for key in ("trajectories", "ses_map", "stringency")
            },
            lenient=self.lenient,
            periods=[
                {
                    "label": period.label,
                    "start": period.start.isoformat(),
                    "end": period.end.isoformat(),
                }
                for period in self.periods
            ],
        )

        existing = self.output / MANIFEST

        if existing.is_file():
            previous = PipelineManifest.model_validate(read_json(existing))
            if previous.provenance == self.manifest.provenance:
                self.manifest.stages.update(previous.stages)

    def get_stage_directory(self, stage: str) -> Path:
        return self.output / stage

    def is_complete(self, stage: str) -> bool:
        marker = self.get_stage_directory(stage) / STAGE_MARKER

        if not marker.is_file():
            return False

        return read_json(marker).get("provenance") == self.manifest.provenance

    def require(self, stage: str) -> None:
        for prerequisite in STAGES[: STAGES.index(stage)]:
            if not self.is_complete(prerequisite):
                raise StageError(
                    f"Stage {stage} requires the outputs of stage {prerequisite}; "
                    f"run it first"
                )

    def run(self, stage: str = "all", force: bool = False) -> Path:
        """
        Run one stage, or every stage in order ("all").

        Raises:
            StageError: If a stage fails or a prerequisite stage is incomplete.
        """
        if stage != "all" and stage not in STAGES:
            raise StageError(f"Unknown stage {stage!r}; expected one of {', '.join(STAGES)}")

        self.output.mkdir(parents=True, exist_ok=True)

        selected = STAGES if stage == "all" else (stage,)

        rerun = force or stage != "all"

        for name in selected:
            if not rerun and self.is_complete(name):
                logger.info("Stage %s is up to date; skipping", name)
                continue

            self.require(name)

            # Once a stage reruns, every later stage must rerun too:
            rerun = True

            self.run_stage(name)

        return self.output

    def run_stage(self, name: str) -> None:
        directory = self.get_stage_directory(name)

        directory.mkdir(parents=True, exist_ok=True)

        (directory / STAGE_MARKER).unlink(missing_ok=True)

        stage: Callable[[Path], int] = getattr(self, f"run_{name}")

        logger.info("Running stage %s", name)

        started = time.perf_counter()

        try:
            rows = stage(directory)
        except StageError:
            raise
        except (ValueError, OSError, KeyError, csv.Error) as e:
            raise StageError(f"Stage {name} failed: {e}") from e

        seconds = time.perf_counter() - started

        write_json(
            directory / STAGE_MARKER,
            {"stage": name, "rows": rows, "provenance": self.manifest.provenance},
        )

        self.manifest.stages[name] = StageRecord(rows=rows, seconds=seconds)

        write_json(self.output / MANIFEST, self.manifest.model_dump(mode="json"))

        logger.info("Stage %s produced %d rows in %.2f s", name, rows, seconds)

    def get_shards(self, stage: str, prefix: str) -> List[Path]:
        return [
            self.get_stage_directory(stage) / f"{prefix}-{shard:03d}.csv"
            for shard in range(self.config.shards)
        ]

    def load_regions(self) -> List[SesRegion]:
        assert self.config.ses_map is not None
        return load_ses_map(self.config.ses_map, invert=self.config.invert_income)

    def get_districts(self) -> Dict[str, Optional[str]]:
        return {
            row["region_id"]: row["district"] or None
            for row in read_csv(self.get_stage_directory("label") / "regions.csv")
        }

    def load_labels(self) -> PopulationLabels:
        directory = self.get_stage_directory("label")

        return PopulationLabels(
            user_classes={
                row["user_id"]: int(row["class"])
                for row in read_csv(directory / "users.csv")
            },
            place_classes={
                row["region_id"]: int(row["class_place"])
                for row in read_csv(directory / "regions.csv")
            },
            excluded=read_json(directory / "labels.json")["excluded"],
        )

    def iterate_labelled_shards(self) -> Iterator[List[Visit]]:
        labels = self.load_labels()

        for path in self.get_shards("infer", "visits"):
            yield label_visits(read_visits(path), labels)

    def run_ingest(self, directory: Path) -> int:
        assert self.config.trajectories is not None

        report = IngestReport(path=str(self.config.trajectories))

        paths = self.get_shards("ingest", "trajectories")

        with ExitStack() as stack:
            writers = []

            for path in paths:
                f = stack.enter_context(open(path, "w", newline="", encoding="utf-8"))
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(("user_id", "lat", "lon", "start_ts", "end_ts"))
                writers.append(writer)

            for record in load_trajectories(
                self.config.trajectories, lenient=self.lenient, report=report
            ):
                writers[get_user_shard(record.user_id, self.config.shards)].writerow(
                    (
                        record.user_id,
                        repr(record.lat),
                        repr(record.lon),
                        record.start_ts,
                        record.end_ts,
                    )
                )

        write_json(directory / "report.json", report.model_dump(mode="json"))

        logger.info(
            "Ingested %d records (%d rejected) into %d shards",
            report.accepted,
            report.rejected,
            len(paths),
        )

        return report.accepted

    def run_infer(self, directory: Path) -> int:
        regions = self.load_regions()

        paths = self.get_shards("ingest", "trajectories")

        if self.threads > 1:
            with ProcessPoolExecutor(max_workers=self.threads) as executor:
                results = list(
                    executor.map(
                        infer_shard,
                        paths,
                        [self.config] * len(paths),
                        [regions] * len(paths),
                    )
                )
        else:
            results = [infer_shard(path, self.config, regions) for path in paths]

        report = InferenceReport()

        homes: List[Tuple[str, Optional[HomeAssignment]]] = []

        for path, (shard_homes, visits, shard_report) in zip(
            self.get_shards("infer", "visits"), results
        ):
            write_visits(path, visits)
            homes.extend(shard_homes)
            report = report.merge(shard_report)

        write_csv(
            directory / "homes.csv",
            ("user_id", "home_region", "night_hours", "nights", "tie_broken"),
            (
                (
                    user_id,
                    home.home_region if home else "",
                    home.night_hours if home else "",
                    home.nights if home else "",
                    int(home.tie_broken) if home else "",
                )
                for user_id, home in sorted(homes, key=lambda entry: entry[0])
            ),
        )

        write_json(
            directory / "report.json",
            {**report.model_dump(mode="json"), "home_yield": report.home_yield},
        )

        logger.info(
            "Inferred homes for %d of %d users (yield %.1f%%); %d visits, %d dropped",
            report.homes,
            report.users,
            100 * report.home_yield,
            report.visits,
            report.dropped_visits,
        )

        return report.visits

    def run_label(self, directory: Path) -> int:
        regions = self.load_regions()

        homes: Dict[str, Optional[HomeAssignment]] = {}

        for row in read_csv(self.get_stage_directory("infer") / "homes.csv"):
            homes[row["user_id"]] = (
                HomeAssignment(
                    user_id=row["user_id"],
                    home_region=row["home_region"],
                    night_hours=float(row["night_hours"]),
                    nights=int(row["nights"]),
                    tie_broken=bool(int(row["tie_broken"])),
                )
                if row["home_region"]
                else None
            )

        weights = count_homes(homes.values())

        n = self.config.n_classes

        deciles_people = assign_deciles(
            regions, weights if self.config.people_deciles == "weighted" else None, n
        )

        deciles_places = assign_deciles(
            regions, weights if self.config.place_deciles == "weighted" else None, n
        )

        labels = label_population(homes, deciles_people, deciles_places)

        write_csv(
            directory / "regions.csv",
            ("region_id", "income", "district", "class_people", "class_place", "homes"),
            (
                (
                    region.region_id,
                    region.income,
                    region.district or "",
                    deciles_people.classes[region.region_id],
                    deciles_places.classes[region.region_id],
                    weights.get(region.region_id, 0),
                )
                for region in regions
            ),
        )

        rows = write_csv(
            directory / "users.csv",
            ("user_id", "class"),
            sorted(labels.user_classes.items()),
        )

        write_json(
            directory / "labels.json",
            {
                "excluded": labels.excluded,
                "histogram": labels.get_class_histogram(n),
                "people_deciles": {
                    "mode": self.config.people_deciles,
                    "edges": deciles_people.edges,
                },
                "place_deciles": {
                    "mode": self.config.place_deciles,
                    "edges": deciles_places.edges,
                },
                "provenance": self.manifest.provenance,
            },
        )

        return rows

    def run_matrices(self, directory: Path) -> int:
        districts = self.get_districts()

        n = self.config.n_classes

        networks: Dict[Tuple[str, str], VisitNetwork] = {}

        daily: Dict[str, np.ndarray] = {
            str(f): np.zeros(((self.config.end - self.config.start).days + 1, n, n), dtype=np.int64)
            for f in self.filters
        }

        # Networks and daily counts are reduced shard by shard:
        for visits in self.iterate_labelled_shards():
            for f in self.filters:
                daily[str(f)] += get_daily_class_counts(
                    visits, self.config.start, self.config.end, f, districts, n
                )
                for period in self.periods:
                    shard = build_network(visits, period, f, districts)
                    key = (str(f), period.label)
                    networks[key] = networks[key].merge(shard) if key in networks else shard

        rows = 0

        summary: Dict[str, Any] = {"provenance": self.manifest.provenance, "filters": {}}

        for f in self.filters:
            text = str(f)

            slug = get_filter_slug(text)

            matrices: Dict[str, StratificationMatrix] = {}

            for period in self.periods:
                try:
                    matrices[period.label] = stratification_matrix(
                        networks[(text, period.label)], n
                    )
                except EmptyNetworkError as e:
                    logger.warning("%s", e)

            entries: Dict[str, Any] = {}

            baseline = self.periods[0].label

            for label, m in matrices.items():
                rows += write_csv(
                    directory / f"matrix_{label}_{slug}.csv",
                    ["place_class"] + [str(i) for i in range(1, n + 1)],
                    (
                        [j + 1] + [float(value) for value in m.values[j]]
                        for j in range(n)
                    ),
                )

                try:
                    r: Optional[float] = assortativity(m)
                except DegenerateMatrixError:
                    r = None

                isolation = (
                    residual_isolation(adjustment_matrix(matrices[baseline], m))
                    if baseline in matrices and label != baseline
                    else None
                )

                entries[label] = {
                    "period": label,
                    "filter": text,
                    "r": r,
                    "mu_re": isolation["mu_re"] if isolation else None,
                    "trace": isolation["trace"] if isolation else None,
                    "active_columns": m.active_columns,
                    "visits": m.total_visits,
                }

                write_json(
                    directory / f"matrix_{label}_{slug}.json",
                    {**entries[label], "provenance": self.manifest.provenance},
                )

            labels = [period.label for period in self.periods if period.label in matrices]

            for t1, t2 in get_comparison_pairs(labels):
                s = adjustment_matrix(matrices[t1], matrices[t2])
                write_csv(
                    directory / f"adjustment_{t1}-{t2}_{slug}.csv",
                    ["place_class"] + [str(i) for i in range(1, n + 1)],
                    ([j + 1] + [float(value) for value in s.values[j]] for j in range(n)),
                )

            series = get_daily_series(
                daily[text],
                self.config.start,
                windows(
                    self.config.start,
                    self.config.end,
                    self.config.window_days,
                    self.config.slide_days,
                ),
            )

            rows += write_csv(
                directory / f"series_{slug}.csv",
                ("anchor", "r"),
                ((point["anchor"].isoformat(), point["r"]) for point in series),
            )

            summary["filters"][text] = {"slug": slug, "periods": entries}

        write_json(directory / "summary.json", summary)

        return rows

    def run_entropy(self, directory: Path) -> int:
        config = self.config

        axes = (EntropyAxis.SPATIAL, EntropyAxis.SES)

        daily = config.regression_mode == "daily"

        series_windows = windows(
            config.start,
            config.end,
            1 if daily else config.window_days,
            1 if daily else config.slide_days,
        )

        f = self.entropy_filter

        districts = self.get_districts() if f.needs_districts else None

        selected = config.spatial_normalisation

        alternative: Literal["user", "global"] = "global" if selected == "user" else "user"

        window_alphabets: Optional[Dict[date, int]] = None

        # Population-wide location counts of the filtered visits come first:
        locations: Dict[str, Set[str]] = defaultdict(set)
        window_locations: Dict[date, Set[str]] = defaultdict(set)

        for visits in self.iterate_labelled_shards():
            kept = [visit for visit in visits if f.accepts(visit, districts)]
            for period in self.periods:
                locations[period.label].update(
                    visit.region_id for visit in kept if period.contains(visit.day)
                )
            if selected == "global":
                for anchor, values in get_window_alphabets(kept, series_windows).items():
                    window_locations[anchor].update(values)

        alphabets = {label: len(values) for label, values in locations.items()}

        if selected == "global":
            window_alphabets = {anchor: len(values) for anchor, values in window_locations.items()}

        accumulators: Dict[Tuple[str, EntropyAxis], EntropyAccumulator] = defaultdict(
            EntropyAccumulator
        )

        alternatives: Dict[str, EntropyAccumulator] = defaultdict(EntropyAccumulator)

        excluded: Dict[Tuple[str, EntropyAxis], int] = defaultdict(int)

        series: Dict[Tuple[date, EntropyAxis], EntropyAccumulator] = defaultdict(
            EntropyAccumulator
        )

        rows: List[Tuple[str, str, str, float]] = []

        for visits in self.iterate_labelled_shards():
            kept = [visit for visit in visits if f.accepts(visit, districts)]

            for period in self.periods:
                within = [visit for visit in kept if period.contains(visit.day)]
                for axis in axes:
                    entropies, skipped = get_user_entropies(
                        within,
                        axis,
                        config.entropy_min_visits,
                        selected,
                        config.n_classes,
                        alphabets.get(period.label),
                    )
                    key = (period.label, axis)
                    accumulators[key].add(list(entropies.values()))
                    excluded[key] += skipped
                    rows.extend(
                        (period.label, axis.value, user_id, h)
                        for user_id, h in entropies.items()
                    )

                others, _ = get_user_entropies(
                    within,
                    EntropyAxis.SPATIAL,
                    config.entropy_min_visits,
                    alternative,
                    config.n_classes,
                    alphabets.get(period.label),
                )
                alternatives[period.label].add(list(others.values()))

            for axis in axes:
                for anchor, accumulator in get_window_accumulators(
                    kept,
                    series_windows,
                    axis,
                    config.entropy_min_visits,
                    selected,
                    config.n_classes,
                    window_alphabets,
                ).items():
                    series[(anchor, axis)] = series[(anchor, axis)].merge(accumulator)

        order = {period.label: k for k, period in enumerate(self.periods)}

        rows.sort(key=lambda row: (order[row[0]], row[1], row[2]))

        count = write_csv(directory / "entropy.csv", ("period", "axis", "user_id", "h"), rows)

        summaries: List[Dict[str, Any]] = []

        for period in self.periods:
            for axis in axes:
                key = (period.label, axis)
                if key not in accumulators or accumulators[key].count == 0:
                    continue
                summary = accumulators[key].summary()
                other: Optional[Dict[str, Any]] = None
                if axis is EntropyAxis.SPATIAL and alternatives[period.label].count:
                    values = alternatives[period.label].summary()
                    other = {
                        "normalisation": alternative,
                        "count": values.count,
                        "mean": values.mean,
                        "std": values.std,
                        "histogram": values.histogram,
                    }
                summaries.append(
                    {
                        "period": period.label,
                        "axis": axis.value,
                        "normalisation": selected if axis is EntropyAxis.SPATIAL else None,
                        "count": summary.count,
                        "mean": summary.mean,
                        "std": summary.std,
                        "histogram": summary.histogram,
                        "excluded": excluded[key],
                        "alternative": other,
                    }
                )

        write_json(
            directory / "summary.json",
            {
                "min_visits": config.entropy_min_visits,
                "filter": str(f),
                "spatial_normalisation": selected,
                "alternative_normalisation": alternative,
                "summaries": summaries,
                "provenance": self.manifest.provenance,
            },
        )

        write_csv(
            directory / "series.csv",
            ("anchor", "axis", "mean", "users"),
            (
                (anchor.isoformat(), axis.value, accumulator.mean, accumulator.count)
                for (anchor, axis), accumulator in sorted(
                    series.items(), key=lambda item: (item[0][0], item[0][1].value)
                )
                if accumulator.count
            ),
        )

        return count

    def run_stats(self, directory: Path) -> int:
        assert self.config.stringency is not None

        stringency = load_stringency(self.config.stringency)

        dependent: Dict[str, Dict[date, float]] = defaultdict(dict)

        for row in read_csv(self.get_stage_directory("entropy") / "series.csv"):
            dependent[row["axis"]][date.fromisoformat(row["anchor"])] = float(row["mean"])

        fits: Dict[str, Optional[RegressionResult]] = {}

        errors: Dict[str, str] = {}

        for axis in (EntropyAxis.SPATIAL, EntropyAxis.SES):
            y, X = align_series(dependent.get(axis.value, {}), stringency)
            try:
                fits[axis.value] = ols_fit(y, X)
            except ValueError as e:
                logger.warning("Regression of %s entropy failed: %s", axis.value, e)
                fits[axis.value] = None
                errors[axis.value] = str(e)

        spatial, ses = fits["spatial"], fits["ses"]

        ratios: Dict[str, Optional[float]] = {}

        r2: Optional[float] = None

        if spatial is not None and ses is not None:
            for code in spatial.coefficients:
                try:
                    ratios[code] = covariate_ratio(spatial, ses, code)
                except ValueError:
                    ratios[code] = None
            try:
                r2 = r2_ratio(spatial, ses)
            except ValueError:
                r2 = None

        write_json(
            directory / "regression.json",
            {
                "dependent": "population mean entropy per "
                + ("day" if self.config.regression_mode == "daily" else "sliding-window anchor"),
                "regression_mode": self.config.regression_mode,
                "fits": {
                    axis: fit.model_dump(mode="json") if fit else None
                    for axis, fit in fits.items()
                },
                "errors": errors,
                "covariate_ratios": ratios,
                "r2_ratio": r2,
                "provenance": self.manifest.provenance,
            },
        )

        comparisons: List[Dict[str, Any]] = []

        for f in self.filters:
            slug = get_filter_slug(str(f))
            matrices: Dict[str, StratificationMatrix] = {}
            for period in self.periods:
                path = self.get_stage_directory("matrices") / f"matrix_{period.label}_{slug}.csv"
                if path.is_file():
                    matrices[period.label] = load_matrix(path)
            if len(matrices) < 2:
                continue
            for selector in SELECTORS:
                for comparison in compare_periods(matrices, selector, self.config.alpha):
                    comparisons.append(
                        {
                            "filter": str(f),
                            "selector": selector,
                            "first": comparison.first,
                            "second": comparison.second,
                            "statistic": comparison.result.statistic,
                            "df": comparison.result.df,
                            "p_value": comparison.result.p_value,
                            "significant": comparison.significant,
                            "degenerate": comparison.result.degenerate,
                        }
                    )

        rows = write_csv(
            directory / "kruskal.csv",
            KRUSKAL_CSV_HEADER,
            ([entry[column] for column in KRUSKAL_CSV_HEADER] for entry in comparisons),
        )

        write_json(
            directory / "kruskal.json",
            {
                "alpha": self.config.alpha,
                "comparisons": comparisons,
                "provenance": self.manifest.provenance,
            },
        )

        return rows + len([fit for fit in fits.values() if fit is not None])


# **************************************************************************************


def load_matrix(path: Path) -> StratificationMatrix:
    """
    Load a stratification matrix written by the matrices stage.
    """
    rows = read_csv(path)

    values = np.array(
        [[float(row[column]) for column in list(row)[1:]] for row in rows]
    )

    return StratificationMatrix(
        values=values,
        active=values.sum(axis=0) > 0,
        counts=values,
    )


# **************************************************************************************


def run(
    config_path: Path,
    stage: str = "all",
    output: Optional[Path] = None,
    lenient: bool = False,
    threads: int = 1,
    force: bool = False,
) -> Path:
    """
    Run the pipeline described by a configuration file.

    Args:
        config_path (Path): The run configuration.
        stage (str): A single stage to run, or "all".
        output (Optional[Path]): The output root; defaults to the configuration's
            output, then "output" next to the configuration file.
        lenient (bool): Skip malformed trajectory rows instead of failing.
        threads (int): The maximum number of worker processes.
        force (bool): Rerun stages even when their outputs are up to date.

    Raises:
        StageError: If the configuration is invalid or any stage fails.

    Returns:
        Path: The output directory.
    """
    try:
        config = load_config(config_path)
    except (ValueError, OSError) as e:
        raise StageError(f"Stage ingest failed: invalid configuration: {e}") from e

    root = output or config.output or Path(config_path).parent / "output"

    pipeline = Pipeline(config=config, output=root, lenient=lenient, threads=threads)

    return pipeline.run(stage=stage, force=force)


# **************************************************************************************
