# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import logging
from datetime import date
from typing import Annotated, Dict, List, Mapping, Sequence, Tuple
from warnings import warn

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import qr, solve_triangular

from .models import StringencyRecord

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************

# The minimum number of observations for a fit over nine restrictions and an intercept:
MINIMUM_OBSERVATIONS = 11

# **************************************************************************************


class RankDeficiencyError(ValueError):
    """
    Raised when the design matrix has perfectly collinear columns.
    """


# **************************************************************************************


class RegressionResult(BaseModel):
    coefficients: Annotated[
        Dict[str, float],
        Field(
            description="Coefficient β of every predictor (0 for dropped zero-variance predictors)",
        ),
    ]

    intercept: Annotated[
        float,
        Field(description="The fitted intercept"),
    ]

    r2: Annotated[
        float,
        Field(le=1.0, description="Coefficient of determination R²"),
    ]

    residual_variance: Annotated[
        float,
        Field(
            description="Residual variance (sum of squares over residual dof); nan without residual dof",
        ),
    ]

    condition_number: Annotated[
        float,
        Field(description="2-norm condition number of the design (with intercept)"),
    ]

    standardized: Annotated[
        Dict[str, float],
        Field(description="Coefficients scaled by std(x) / std(y), for diagnostics"),
    ]

    dropped: Annotated[
        List[str],
        Field(default_factory=list, description="Zero-variance predictors left out of the fit"),
    ]

    observations: Annotated[
        int,
        Field(ge=1, description="Number of dated observations"),
    ]


# **************************************************************************************


def ols_fit(
    y: Mapping[date, float],
    X: Mapping[date, Mapping[str, float]],
) -> RegressionResult:
    """
    Fit y ~ intercept + X by ordinary least squares.

    The fit uses a column-pivoted QR decomposition of the design rather than the
    normal equations. Predictors that never vary are dropped with a warning and
    reported with a zero coefficient.

    Args:
        y (Mapping[date, float]): The dependent series, e.g., mean entropy per
            window anchor date.
        X (Mapping[date, Mapping[str, float]]): The predictor values per date, e.g.,
            the nine restriction levels; every date must carry the same predictors.

    Raises:
        ValueError: If the dates of y and X differ, the predictors differ between
            dates, or there are fewer than 11 observations.
        RankDeficiencyError: If predictors are perfectly collinear; the message names
            the dependent columns.

    Returns:
        RegressionResult: The coefficients and diagnostics.
    """
    if set(y) != set(X):
        missing = sorted(set(y) ^ set(X))
        raise ValueError(
            "Dependent and predictor series are misaligned on "
            f"{len(missing)} date(s), e.g., {missing[0].isoformat()}"
        )

    dates = sorted(y)

    if len(dates) < MINIMUM_OBSERVATIONS:
        raise ValueError(
            f"At least {MINIMUM_OBSERVATIONS} observations are required, got {len(dates)}"
        )

    columns = list(X[dates[0]])

    if any(set(X[day]) != set(columns) for day in dates):
        raise ValueError("Every date must carry the same predictors")

    A = np.array([[X[day][column] for column in columns] for day in dates], dtype=float)

    b = np.array([y[day] for day in dates], dtype=float)

    variable = [bool(np.ptp(A[:, k]) > 0) for k in range(len(columns))]

    dropped = [column for column, keep in zip(columns, variable) if not keep]

    if dropped:
        warn(
            f"Dropping zero-variance predictors from the regression: {', '.join(dropped)}",
            stacklevel=2,
        )

    kept = [column for column, keep in zip(columns, variable) if keep]

    names = ["intercept"] + kept

    design = np.column_stack([np.ones(len(dates)), A[:, variable]])

    Q, R, pivots = qr(design, mode="economic", pivoting=True)

    diagonal = np.abs(np.diag(R))

    tolerance = diagonal[0] * max(design.shape) * np.finfo(float).eps

    rank = int(np.sum(diagonal > tolerance))

    if rank < design.shape[1]:
        dependent = [names[k] for k in pivots[rank:]]
        raise RankDeficiencyError(
            f"The design is rank deficient ({rank} of {design.shape[1]}); "
            f"linearly dependent column(s): {', '.join(dependent)}"
        )

    beta = np.empty(design.shape[1])

    beta[pivots] = solve_triangular(R, Q.T @ b)

    residuals = b - design @ beta

    ss_res = float(residuals @ residuals)

    ss_tot = float(np.sum((b - b.mean()) ** 2))

    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        warn("The dependent series is constant; R² is reported as 0", stacklevel=2)
        r2 = 0.0

    dof = len(dates) - design.shape[1]

    if dof > 0:
        residual_variance = ss_res / dof
    else:
        warn(
            "The fit has no residual degrees of freedom; residual variance is nan",
            stacklevel=2,
        )
        residual_variance = float("nan")

    coefficients = {column: 0.0 for column in columns}

    coefficients.update(zip(kept, (float(value) for value in beta[1:])))

    std_y = float(b.std())

    standardized = {
        column: (
            coefficients[column] * float(A[:, k].std()) / std_y if std_y > 0 else 0.0
        )
        for k, column in enumerate(columns)
    }

    logger.debug(
        "OLS fit over %d observations and %d predictors: R² = %.4f",
        len(dates),
        len(kept),
        r2,
    )

    return RegressionResult(
        coefficients=coefficients,
        intercept=float(beta[0]),
        r2=min(r2, 1.0),
        residual_variance=residual_variance,
        condition_number=float(np.linalg.cond(design)),
        standardized=standardized,
        dropped=dropped,
        observations=len(dates),
    )


# **************************************************************************************


def covariate_ratio(fit_m: RegressionResult, fit_s: RegressionResult, k: str) -> float:
    """
    Get the covariate ratio β(m) / β(s) of restriction k between two fits over the
    same design, e.g., spatial over SES entropy.

    Raises:
        ValueError: If the fits have different predictors, k is not one of them, or
            β(s) is zero.
    """
    if set(fit_m.coefficients) != set(fit_s.coefficients):
        raise ValueError("Both fits must share the same predictors")

    if k not in fit_s.coefficients:
        raise ValueError(f"Unknown predictor {k}")

    denominator = fit_s.coefficients[k]

    if denominator == 0:
        raise ValueError(f"The coefficient of {k} in the denominator fit is zero")

    return fit_m.coefficients[k] / denominator


# **************************************************************************************


def r2_ratio(fit_m: RegressionResult, fit_s: RegressionResult) -> float:
    """
    Get the ratio R²(m) / R²(s) of two fits.

    Raises:
        ValueError: If R²(s) is not positive.
    """
    if fit_s.r2 <= 0:
        raise ValueError(f"The denominator R² must be positive, got {fit_s.r2}")

    return fit_m.r2 / fit_s.r2


# **************************************************************************************


def align_series(
    series: Mapping[date, float],
    stringency: Sequence[StringencyRecord],
) -> Tuple[Dict[date, float], Dict[date, Dict[str, float]]]:
    """
    Restrict a dependent series and the stringency levels to their common dates.
    """
    levels = {record.date: dict(record.levels) for record in stringency}

    common = sorted(set(series) & set(levels))

    return (
        {day: series[day] for day in common},
        {day: levels[day] for day in common},
    )


# **************************************************************************************
