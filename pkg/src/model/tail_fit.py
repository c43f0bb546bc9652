"""
Exponential fit of tail profiles: log f(r) = log A - r / xi.

Usage
-----
    from src.model.tail_fit import fit_exponential
    fit = fit_exponential([1, 2, 3], [0.5, 0.25, 0.125])   # fit.xi ~ 1.4427
"""
from __future__ import annotations

import logging
import math
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

logger = logging.getLogger(__name__)

FLOOR = 1e-14


class TailFit(NamedTuple):
    amplitude: float
    xi: float
    r_squared: float
    n_points: int


def fit_exponential(radii: Sequence[int], f_values: Sequence[float], floor: float = FLOOR) -> TailFit:
    """Least squares on log f over points with f > floor. Fewer than two points -> nan fit."""
    r = np.asarray(radii, dtype=float)
    f = np.asarray(f_values, dtype=float)
    mask = f > floor
    if mask.sum() < 2:
        return TailFit(float("nan"), float("nan"), float("nan"), int(mask.sum()))
    X = r[mask].reshape(-1, 1)
    y = np.log(f[mask])
    reg = LinearRegression().fit(X, y)
    slope = float(reg.coef_[0])
    xi = -1.0 / slope if slope < 0 else math.inf
    r2 = float(r2_score(y, reg.predict(X))) if mask.sum() > 2 else 1.0
    logger.debug("tail fit: slope %.4g, xi %.4g, R^2 %.4f on %d points", slope, xi, r2, int(mask.sum()))
    return TailFit(float(math.exp(reg.intercept_)), xi, r2, int(mask.sum()))
