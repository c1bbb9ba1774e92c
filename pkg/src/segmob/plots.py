# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from .pipeline import KRUSKAL_CSV_HEADER, STAGE_MARKER, read_csv, read_json, write_csv

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************


def require_artifact(path: Path) -> Path:
    if not path.is_file():
        raise FileNotFoundError(
            f"Missing upstream artifact {path}; run the pipeline stage "
            f"{path.parent.name!r} first"
        )

    return path


# **************************************************************************************


def emit_heatmaps(output: Path, plots: Path) -> List[Path]:
    """
    Write one long-format heatmap table per visit filter, with one row per
    (period, place class, people class) cell.
    """
    summary = read_json(require_artifact(output / "matrices" / "summary.json"))

    paths: List[Path] = []

    for text, entry in sorted(summary["filters"].items()):
        slug = entry["slug"]

        rows: List[List[Any]] = []

        for label in entry["periods"]:
            matrix = read_csv(
                require_artifact(output / "matrices" / f"matrix_{label}_{slug}.csv")
            )
            for row in matrix:
                place_class = int(row["place_class"])
                rows.extend(
                    [text, label, place_class, int(column), float(value)]
                    for column, value in row.items()
                    if column != "place_class"
                )

        path = plots / f"heatmap_{slug}.csv"

        write_csv(path, ("filter", "period", "place_class", "people_class", "value"), rows)

        paths.append(path)

    return paths


# **************************************************************************************


def emit_assortativity_series(output: Path, plots: Path) -> List[Path]:
    summary = read_json(require_artifact(output / "matrices" / "summary.json"))

    paths: List[Path] = []

    for text, entry in sorted(summary["filters"].items()):
        slug = entry["slug"]

        series = read_csv(require_artifact(output / "matrices" / f"series_{slug}.csv"))

        path = plots / f"r_series_{slug}.csv"

        write_csv(
            path,
            ("filter", "anchor", "r"),
            (
                [text, point["anchor"], float(point["r"]) if point["r"] else None]
                for point in series
            ),
        )

        paths.append(path)

    return paths


# **************************************************************************************


def emit_entropy(output: Path, plots: Path) -> List[Path]:
    """
    Write the entropy histograms (one row per bin) and the mean / standard
    deviation table of every period and axis.
    """
    summary = read_json(require_artifact(output / "entropy" / "summary.json"))

    histograms: List[List[Any]] = []

    table: List[List[Any]] = []

    for entry in summary["summaries"]:
        alternative = entry.get("alternative") or {}

        edges = np.linspace(0.0, 1.0, len(entry["histogram"]) + 1)

        histograms.extend(
            [entry["period"], entry["axis"], float(edges[k]), float(edges[k + 1]), count]
            for k, count in enumerate(entry["histogram"])
        )

        table.append(
            [
                entry["period"],
                entry["axis"],
                entry["count"],
                entry["mean"],
                entry["std"],
                entry["excluded"],
                alternative.get("mean"),
                alternative.get("std"),
            ]
        )

    histogram_path = plots / "entropy_histograms.csv"

    write_csv(histogram_path, ("period", "axis", "bin_start", "bin_end", "count"), histograms)

    summary_path = plots / "entropy_summary.csv"

    write_csv(
        summary_path,
        ("period", "axis", "users", "mean", "std", "excluded", "alternative_mean", "alternative_std"),
        table,
    )

    return [histogram_path, summary_path]


# **************************************************************************************


def emit_regression(output: Path, plots: Path) -> List[Path]:
    """
    Write the regression coefficient table (β and standardized β per axis and
    restriction, with the spatial/SES β ratio) and the per-axis fit summary with
    the R² ratio.
    """
    regression = read_json(require_artifact(output / "stats" / "regression.json"))

    fits: Dict[str, Any] = regression["fits"]

    ratios: Dict[str, Any] = regression["covariate_ratios"]

    coefficients: List[List[Any]] = []

    summaries: List[List[Any]] = []

    for axis, fit in sorted(fits.items()):
        if fit is None:
            summaries.append([axis, None, None, None, None, regression["errors"].get(axis)])
            continue

        coefficients.extend(
            [axis, code, beta, fit["standardized"][code], ratios.get(code)]
            for code, beta in fit["coefficients"].items()
        )

        summaries.append(
            [
                axis,
                fit["intercept"],
                fit["r2"],
                fit["observations"],
                fit["condition_number"],
                None,
            ]
        )

    coefficients_path = plots / "regression_coefficients.csv"

    write_csv(
        coefficients_path,
        ("axis", "restriction", "beta", "standardized_beta", "beta_ratio"),
        coefficients,
    )

    summary_path = plots / "regression_summary.csv"

    write_csv(
        summary_path,
        ("axis", "intercept", "r2", "observations", "condition_number", "error"),
        summaries + [["ratio", None, regression["r2_ratio"], None, None, None]],
    )

    return [coefficients_path, summary_path]


# **************************************************************************************


def emit_kruskal(output: Path, plots: Path) -> List[Path]:
    comparisons = read_csv(require_artifact(output / "stats" / "kruskal.csv"))

    path = plots / "kruskal.csv"

    write_csv(
        path,
        KRUSKAL_CSV_HEADER,
        ([row[column] for column in KRUSKAL_CSV_HEADER] for row in comparisons),
    )

    return [path]


# **************************************************************************************


def emit_plots(output: Path) -> List[Path]:
    """
    Emit the plot-ready tables of a completed pipeline run into output/plots.

    Five families are written: matrix heatmaps per period and filter, the
    assortativity series, entropy histograms with their mean / standard deviation
    table, the regression coefficient tables with β and R² ratios, and the
    Kruskal-Wallis test table.

    Args:
        output (Path): The pipeline output directory.

    Raises:
        FileNotFoundError: If an upstream artifact is missing; the message names
            the stage that produces it.

    Returns:
        List[Path]: The written files.
    """
    output = Path(output)

    for stage in ("matrices", "entropy", "stats"):
        require_artifact(output / stage / STAGE_MARKER)

    plots = output / "plots"

    plots.mkdir(parents=True, exist_ok=True)

    paths = (
        emit_heatmaps(output, plots)
        + emit_assortativity_series(output, plots)
        + emit_entropy(output, plots)
        + emit_regression(output, plots)
        + emit_kruskal(output, plots)
    )

    logger.info("Wrote %d plot tables to %s", len(paths), plots)

    return paths


# **************************************************************************************
