"""Exponent and growth-model fitting for experiment output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_powerlaw(points: Sequence[Tuple[float, float]]) -> FitResult:
    """Ordinary least squares of log(value) on log(X).

    Needs at least 3 points with positive X and value; the slope estimates
    the growth exponent.
    """
    pts = [(float(x), float(v)) for x, v in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(x <= 0 or v <= 0 for x, v in pts):
        raise ValueError("log-log fit requires positive X and values")
    lx = np.log([x for x, _ in pts])
    ly = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(resid @ resid)
    centered = ly - ly.mean()
    ss_tot = float(centered @ centered)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), min(1.0, max(0.0, r2)), len(pts))


def fit_segre(points: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least squares for the sixth-moment growth model
    value ~ a*X^3 + b*X^2*(ln X)^5; returns (a, b, max relative residual).

    Needs at least 4 points, all with X >= 20 (the model separates the two
    terms poorly below that).
    """
    pts = [(float(x), float(v)) for x, v in points]
    if len(pts) < 4:
        raise ValueError("need at least 4 points")
    if any(x < 20 for x, _ in pts):
        raise ValueError("all X must be >= 20")
    x = np.array([p for p, _ in pts])
    y = np.array([v for _, v in pts])
    design = np.column_stack([x ** 3, x ** 2 * np.log(x) ** 5])
    if np.linalg.matrix_rank(design) < 2:
        raise ValueError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    residual = float(np.max(np.abs(fitted - y) / np.abs(y)))
    return float(coef[0]), float(coef[1]), residual
