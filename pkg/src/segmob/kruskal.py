# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from typing import Annotated, List, Literal, Mapping, Sequence, Tuple, Union
from warnings import warn

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import chi2, rankdata, tiecorrect

from .matrix import AdjustmentMatrix, StratificationMatrix

# **************************************************************************************

Selector = Literal["all", "diagonal"]

# **************************************************************************************


class KruskalResult(BaseModel):
    statistic: Annotated[
        float,
        Field(ge=0, description="The tie-corrected H statistic"),
    ]

    df: Annotated[
        int,
        Field(ge=1, description="Degrees of freedom (number of groups - 1)"),
    ]

    p_value: Annotated[
        float,
        Field(ge=0, le=1, description="Chi-square p-value of H"),
    ]

    sizes: Annotated[
        List[int],
        Field(description="The size of each group"),
    ]

    tie_correction: Annotated[
        float,
        Field(ge=0, le=1, description="The tie-correction factor (1 without ties)"),
    ]

    degenerate: Annotated[
        bool,
        Field(
            default=False,
            description="Whether all values were identical, so H := 0 and p := 1",
        ),
    ]


# **************************************************************************************


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> KruskalResult:
    """
    Run the Kruskal-Wallis H test that all groups share the same median.

    Pooled values are ranked with midranks for ties, H is divided by the tie
    correction, and the p-value uses the chi-square approximation with
    (groups - 1) degrees of freedom. If every value is identical the test is
    undefined; H = 0 and p = 1 are returned with the degenerate flag set.

    Args:
        groups (Sequence[Sequence[float]]): Two or more samples.

    Raises:
        ValueError: If there are fewer than two groups, an empty group, or fewer
            than three values in total.

    Returns:
        KruskalResult: The statistic, p-value and diagnostics.
    """
    if len(groups) < 2:
        raise ValueError("At least two groups are required")

    sizes = [len(group) for group in groups]

    if min(sizes) < 1:
        raise ValueError("Every group must hold at least one value")

    n = sum(sizes)

    if n < 3:
        raise ValueError("At least three values are required in total")

    df = len(groups) - 1

    pooled = np.concatenate([np.asarray(group, dtype=np.float64) for group in groups])

    ranks = rankdata(pooled)

    correction = float(tiecorrect(ranks))

    if correction == 0:
        warn(
            "All values are identical; the Kruskal-Wallis test is undefined",
            stacklevel=2,
        )
        return KruskalResult(
            statistic=0.0,
            df=df,
            p_value=1.0,
            sizes=sizes,
            tie_correction=correction,
            degenerate=True,
        )

    boundaries = np.cumsum([0] + sizes)

    total = sum(
        ranks[start:end].sum() ** 2 / (end - start)
        for start, end in zip(boundaries[:-1], boundaries[1:])
    )

    h = (12.0 / (n * (n + 1)) * total - 3 * (n + 1)) / correction

    h = max(0.0, float(h))

    return KruskalResult(
        statistic=h,
        df=df,
        p_value=float(min(1.0, chi2.sf(h, df))),
        sizes=sizes,
        tie_correction=correction,
    )


# **************************************************************************************


def select_matrix_elements(
    m: Union[StratificationMatrix, AdjustmentMatrix],
    selector: Selector = "all",
) -> List[float]:
    """
    Select the matrix elements a period comparison is run on: all n x n elements
    or the n diagonal (in-class) elements.
    """
    if selector == "all":
        return m.values.ravel().tolist()

    if selector == "diagonal":
        return np.diag(m.values).tolist()

    raise ValueError(f"Unknown element selector {selector!r}")


# **************************************************************************************


class PeriodComparison(BaseModel):
    first: Annotated[
        str,
        Field(description="The label of the earlier period"),
    ]

    second: Annotated[
        str,
        Field(description="The label of the later period"),
    ]

    selector: Annotated[
        Selector,
        Field(description="The matrix elements compared"),
    ]

    result: Annotated[
        KruskalResult,
        Field(description="The test result"),
    ]

    significant: Annotated[
        bool,
        Field(description="Whether p < alpha"),
    ]


# **************************************************************************************


def get_comparison_pairs(labels: Sequence[str]) -> List[Tuple[str, str]]:
    """
    List the period pairs compared: every consecutive pair, then the baseline
    against every later non-consecutive period.
    """
    pairs = list(zip(labels, labels[1:]))

    pairs.extend((labels[0], label) for label in labels[2:])

    return pairs


# **************************************************************************************


def compare_periods(
    matrices: Mapping[str, StratificationMatrix],
    selector: Selector = "all",
    alpha: float = 0.05,
) -> List[PeriodComparison]:
    """
    Test whether the stratification matrices of pairs of periods differ.

    Args:
        matrices (Mapping[str, StratificationMatrix]): Matrices keyed by period
            label, in chronological order; the first is the baseline.
        selector (Selector): Compare "all" elements or the "diagonal" only.
        alpha (float): The significance level.

    Returns:
        List[PeriodComparison]: One comparison per period pair.
    """
    labels = list(matrices)

    comparisons: List[PeriodComparison] = []

    for first, second in get_comparison_pairs(labels):
        result = kruskal_wallis(
            [
                select_matrix_elements(matrices[first], selector),
                select_matrix_elements(matrices[second], selector),
            ]
        )

        comparisons.append(
            PeriodComparison(
                first=first,
                second=second,
                selector=selector,
                result=result,
                significant=result.p_value < alpha,
            )
        )

    return comparisons


# **************************************************************************************
