# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import logging
from datetime import date
from typing import Iterable, List, Mapping, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .common import ResidualIsolation, SeriesPoint
from .constants import NUMBER_OF_SES_CLASSES
from .inference import Visit
from .matrix import AdjustmentMatrix, StratificationMatrix
from .network import (
    EmptyNetworkError,
    VisitFilter,
    VisitNetwork,
    get_daily_class_counts,
)
from .segmentation import Window

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************


class DegenerateMatrixError(ValueError):
    """
    Raised when a correlation is undefined because all visit mass lies in a single
    row or a single column.
    """


# **************************************************************************************


def stratification_matrix(
    net: VisitNetwork, n_classes: int = NUMBER_OF_SES_CLASSES
) -> StratificationMatrix:
    """
    Build the column-normalised stratification matrix M of a visit network.

    The (j, i) element sums the weights of class-i users to class-j places and each
    column i is divided by its total, so it gives the probability that a visit by a
    class-i person lands in a class-j place.

    Args:
        net (VisitNetwork): The visit network.
        n_classes (int): The number of SES classes.

    Raises:
        EmptyNetworkError: If the network holds no visits.

    Returns:
        StratificationMatrix: The matrix; columns without visits are all-zero and
        flagged inactive.
    """
    if net.is_empty:
        raise EmptyNetworkError(
            f"The network of period {net.period} with filter {net.filter} has no visits"
        )

    return StratificationMatrix.from_counts(
        net.get_class_counts(n_classes),
        period=net.period,
        filter=net.filter,
    )


# **************************************************************************************


def get_mass_assortativity(mass: ArrayLike) -> float:
    """
    Compute the Pearson correlation between people class and place class under a
    joint mass distribution over class pairs.

    Classes are scored 1..n. The mass is rescaled to a total of one, so any
    non-negative matrix (rows = place class, columns = people class) is accepted.

    Raises:
        ValueError: If the matrix is not square, has negative entries or no mass.
        DegenerateMatrixError: If either marginal distribution has zero variance.
    """
    values = np.asarray(mass, dtype=np.float64)

    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"Mass matrix must be square, got {values.shape}")

    if (values < 0).any():
        raise ValueError("Mass matrix entries must be non-negative")

    total = values.sum()

    if not total > 0:
        raise DegenerateMatrixError("Mass matrix has no mass")

    N = values / total

    scores = np.arange(1, N.shape[0] + 1, dtype=np.float64)

    # Marginals over people classes (columns) and place classes (rows):
    people = N.sum(axis=0)
    places = N.sum(axis=1)

    dx = scores - scores @ people
    dy = scores - scores @ places

    variance_people = float(people @ dx**2)
    variance_places = float(places @ dy**2)

    if not (variance_people > 0 and variance_places > 0):
        raise DegenerateMatrixError(
            "Correlation is undefined: all visit mass lies in one row or one column"
        )

    covariance = float(dy @ N @ dx)

    r = covariance / np.sqrt(variance_people * variance_places)

    return float(min(1.0, max(-1.0, r)))


# **************************************************************************************


def assortativity(m: StratificationMatrix) -> float:
    """
    Compute the assortativity r of a stratification matrix: the Pearson correlation
    of people and place class indices under the matrix rescaled to total mass one.

    r = 1 means fully in-class visiting, 0 fully mixed, and -1 fully cross-class.

    Raises:
        DegenerateMatrixError: If all mass lies in one row or one column.
    """
    return get_mass_assortativity(m.values)


# **************************************************************************************


def adjustment_matrix(
    m1: StratificationMatrix, m2: StratificationMatrix
) -> AdjustmentMatrix:
    """
    Compute the adjustment matrix S = M(t1) - M(t2) of two periods.

    Raises:
        ValueError: If the matrices have different class counts.
    """
    if m1.values.shape != m2.values.shape:
        raise ValueError(
            f"Cannot difference matrices of shapes {m1.values.shape} and {m2.values.shape}"
        )

    if m1.filter != m2.filter:
        logger.warning(
            "Differencing matrices with different filters (%s, %s)", m1.filter, m2.filter
        )

    return AdjustmentMatrix(
        values=m1.values - m2.values,
        t1=m1.period,
        t2=m2.period,
        filter=m1.filter,
        active=m1.active & m2.active,
    )


# **************************************************************************************


def residual_isolation(s: AdjustmentMatrix) -> ResidualIsolation:
    """
    Compute the residual isolation of an adjustment matrix S(t1 - t2).

    mu_re is the negated trace divided by the number of classes, so that a positive
    value on S(BL - X) means more in-class visiting in period X than at baseline.
    The raw signed trace is reported alongside.
    """
    trace = s.trace

    return ResidualIsolation(mu_re=-trace / s.n_classes, trace=trace)


# **************************************************************************************


def get_daily_series(
    daily: NDArray[np.int64],
    start: date,
    windows: Sequence[Window],
) -> List[SeriesPoint]:
    """
    Compute the assortativity of every window from per-day class counts, where
    daily[d] holds the counts of day start + d. Windows without visits, or whose
    matrix is degenerate, yield a gap (r = None).
    """
    # Prefix sums over days turn every window into a difference of two slices:
    cumulative = np.concatenate([np.zeros_like(daily[:1]), np.cumsum(daily, axis=0)])

    series: List[SeriesPoint] = []

    for window in windows:
        first = (window.start - start).days
        last = (window.end - start).days + 1

        counts = cumulative[last] - cumulative[first]

        r: Optional[float] = None

        if counts.sum() > 0:
            try:
                r = assortativity(StratificationMatrix.from_counts(counts))
            except DegenerateMatrixError:
                r = None

        series.append(SeriesPoint(anchor=window.anchor, r=r))

    gaps = sum(1 for point in series if point["r"] is None)

    if gaps:
        logger.info("Assortativity series has %d gap(s) of %d windows", gaps, len(series))

    return series


# **************************************************************************************


def assortativity_series(
    visits: Iterable[Visit],
    windows: Sequence[Window],
    filter: VisitFilter,
    districts: Optional[Mapping[str, Optional[str]]] = None,
    n_classes: int = NUMBER_OF_SES_CLASSES,
) -> List[SeriesPoint]:
    """
    Compute the assortativity of every sliding window.

    Windows without visits, or whose matrix is degenerate, yield a gap (r = None)
    rather than a value.

    Args:
        visits (Iterable[Visit]): Labelled visits.
        windows (Sequence[Window]): The sliding windows.
        filter (VisitFilter): The visit filter.
        districts (Optional[Mapping[str, Optional[str]]]): Region districts, for
            the intra/inter-region filters.
        n_classes (int): The number of SES classes.

    Returns:
        List[SeriesPoint]: One (anchor, r) point per window, in window order.
    """
    if not windows:
        return []

    start = min(window.start for window in windows)
    end = max(window.end for window in windows)

    daily = get_daily_class_counts(visits, start, end, filter, districts, n_classes)

    return get_daily_series(daily, start, windows)


# **************************************************************************************


def get_relative_change(base: float, value: float) -> float:
    """
    Get the percentage change of a value relative to its baseline, e.g., a change of
    r from 0.416 to 0.608 is a 46% increase.

    Raises:
        ValueError: If the baseline is zero.
    """
    if base == 0:
        raise ValueError("Relative change is undefined for a zero baseline")

    return 100.0 * (value - base) / abs(base)


# **************************************************************************************


def get_homophily_change(m_base: StratificationMatrix, m_x: StratificationMatrix) -> float:
    """
    Get the percentage change of the mean in-class visit share between a baseline
    and another period, over the columns active in both.

    Raises:
        ValueError: If the shapes differ, no column is active in both, or the
            baseline in-class share is zero.
    """
    if m_base.values.shape != m_x.values.shape:
        raise ValueError("Matrices must have the same number of classes")

    active = m_base.active & m_x.active

    if not active.any():
        raise ValueError("No column is active in both matrices")

    base = float(np.diag(m_base.values)[active].mean())

    value = float(np.diag(m_x.values)[active].mean())

    return get_relative_change(base, value)


# **************************************************************************************
