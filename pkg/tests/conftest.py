"""Shared helpers for the test suite."""

import math

import numpy as np

from llt_lab.inversion import Axis, Grid

# Evaluation grid used for oracle comparisons: 101 points, step 0.1, offset
# so that x*sqrt(n) stays at least ~5e-3 away from the integer lattice for
# every n in the test schedules.  Uniform-source mixtures have genuine jump
# discontinuities on that lattice, where a one-sided density value and the
# Fourier midpoint value legitimately differ.
OFFSET_LO = -5.0391


def offset_grid_1d(points: int = 101, step: float = 0.1) -> Grid:
    return Grid((Axis(OFFSET_LO, step, points),))


def offset_points(points: int = 101, step: float = 0.1) -> np.ndarray:
    return OFFSET_LO + step * np.arange(points)


def theta_sum(fun, terms: int = 60) -> float:
    """Direct symmetric lattice sum used as an independent oracle."""
    return fun(0) + sum(fun(m) + fun(-m) for m in range(1, terms + 1))


def phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
