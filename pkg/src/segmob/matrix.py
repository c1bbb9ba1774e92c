# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

# **************************************************************************************

# The tolerance within which active columns of a stratification matrix sum to one:
COLUMN_SUM_TOLERANCE = 1e-12

# **************************************************************************************


def freeze(values: ArrayLike) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


# **************************************************************************************


@dataclass(frozen=True)
class StratificationMatrix:
    """
    The column-normalised visit matrix M of one period and visit filter.

    Rows are place classes j and columns are people classes i (both 1-based in the
    domain, 0-based in the array), so values[j - 1, i - 1] is the probability that
    a visit made by a class-i person lands in a class-j place. Columns without any
    underlying visits stay all-zero and are flagged inactive.
    """

    values: NDArray[np.float64]

    active: NDArray[np.bool_]

    # The raw visit counts the matrix was normalised from:
    counts: NDArray[np.float64]

    period: Optional[str] = None

    filter: Optional[str] = None

    def __post_init__(self) -> None:
        values = freeze(self.values)

        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"Stratification matrix must be square, got {values.shape}")

        object.__setattr__(self, "values", values)

        active = np.array(self.active, dtype=bool)
        active.setflags(write=False)
        object.__setattr__(self, "active", active)

        object.__setattr__(self, "counts", freeze(self.counts))

    @classmethod
    def from_counts(
        cls,
        counts: ArrayLike,
        period: Optional[str] = None,
        filter: Optional[str] = None,
    ) -> "StratificationMatrix":
        """
        Column-normalise a class-count matrix (rows = place class, columns = people
        class) into a stratification matrix.
        """
        raw = np.array(counts, dtype=np.float64)

        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise ValueError(f"Class counts must be a square matrix, got {raw.shape}")

        if (raw < 0).any():
            raise ValueError("Class counts must be non-negative")

        totals = raw.sum(axis=0)

        active = totals > 0

        values = np.zeros_like(raw)

        values[:, active] = raw[:, active] / totals[active]

        return cls(
            values=values,
            active=active,
            counts=raw,
            period=period,
            filter=filter,
        )

    @property
    def n_classes(self) -> int:
        return int(self.values.shape[0])

    @property
    def active_columns(self) -> List[int]:
        """
        The 1-based people classes with at least one underlying visit.
        """
        return [int(i) + 1 for i in np.flatnonzero(self.active)]

    @property
    def total_visits(self) -> int:
        return int(round(float(self.counts.sum())))

    def get_column_sums(self) -> NDArray[np.float64]:
        return self.values.sum(axis=0)

    def get_diagonal_share(self) -> float:
        """
        The mean in-class visit probability over the active columns.
        """
        if not self.active.any():
            return 0.0

        return float(np.diag(self.values)[self.active].mean())


# **************************************************************************************


@dataclass(frozen=True)
class AdjustmentMatrix:
    """
    The elementwise difference S = M(t1) - M(t2) of two stratification matrices.
    """

    values: NDArray[np.float64]

    t1: Optional[str] = None

    t2: Optional[str] = None

    filter: Optional[str] = None

    # Columns active in both source matrices:
    active: NDArray[np.bool_] = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self) -> None:
        values = freeze(self.values)

        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"Adjustment matrix must be square, got {values.shape}")

        object.__setattr__(self, "values", values)

        active = np.array(self.active, dtype=bool)

        if active.size == 0:
            active = np.ones(values.shape[1], dtype=bool)

        active.setflags(write=False)

        object.__setattr__(self, "active", active)

    @property
    def n_classes(self) -> int:
        return int(self.values.shape[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.values))


# **************************************************************************************
