"""Shared helpers: grid-ladder calibration and order fitting.

Tolerances follow the package-wide convention: the constant C of a
C * h**p bound is measured on the coarsest rung and enforced with a
factor 1.5 slack on finer rungs, plus an epsilon-scale rounding floor.
"""

import math

import numpy as np
import pytest


EPS = float(np.finfo(float).eps)


def fitted_order(hs, residuals):
    hs = np.asarray(hs, float)
    rs = np.asarray(residuals, float)
    assert np.all(rs > 0), "cannot fit an order to vanishing residuals"
    return float(np.polyfit(np.log(hs), np.log(rs), 1)[0])


def assert_calibrated_decay(hs, residuals, p=2.0, slack=1.5, scale=1.0):
    """residual(h) <= 1.5 * C * h**p with C from the coarsest rung."""
    floor = 100.0 * EPS * max(scale, 1.0)
    C = max(residuals[0], floor) / hs[0] ** p
    for h, r in zip(hs[1:], residuals[1:]):
        tol = slack * C * h**p + floor
        assert r <= tol, f"residual {r:.3e} exceeds calibrated {tol:.3e} at h={h:g}"


def assert_order_window(hs, residuals, lo=1.7, hi=2.3):
    slope = fitted_order(hs, residuals)
    assert lo <= slope <= hi, f"fitted order {slope:.2f} outside [{lo}, {hi}]"
    return slope


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
