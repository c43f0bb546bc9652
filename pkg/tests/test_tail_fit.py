import math

import numpy as np
import pytest

from src.model.tail_fit import fit_exponential


def test_pure_exponential():
    r = np.arange(1, 8)
    fit = fit_exponential(r, 0.3 * np.exp(-r / 2.5))
    assert fit.xi == pytest.approx(2.5, rel=1e-9)
    assert fit.amplitude == pytest.approx(0.3, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_points == 7


def test_halving_profile():
    fit = fit_exponential([1, 2, 3], [0.5, 0.25, 0.125])
    assert fit.xi == pytest.approx(1 / math.log(2))


def test_values_below_floor_are_dropped():
    fit = fit_exponential([1, 2, 3, 4], [0.5, 0.25, 0.0, 1e-20])
    assert fit.n_points == 2
    assert fit.xi == pytest.approx(1 / math.log(2))


def test_too_few_points():
    fit = fit_exponential([1, 2], [0.5, 0.0])
    assert math.isnan(fit.xi) and fit.n_points == 1


def test_growing_profile_has_infinite_length():
    assert fit_exponential([1, 2, 3], [0.1, 0.2, 0.4]).xi == math.inf
