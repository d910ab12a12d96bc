"""Locating extrema of sampled signals.

Trajectories live on uniform grids; extrema are found on the grid and, when
a callable is available, polished by repeated three-point parabolic
interpolation with a shrinking stencil.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def local_maxima(y, rtol: float = 1e-12) -> np.ndarray:
    """Indices of strict interior local maxima.

    Bumps smaller than ``rtol * max|y|`` are treated as flat (rounding noise).
    """
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        return np.array([], dtype=int)
    tol = rtol * float(np.max(np.abs(y)))
    mid = y[1:-1]
    idx = np.nonzero((mid > y[:-2] + tol) & (mid >= y[2:] + tol))[0] + 1
    return idx


def local_minima(y, rtol: float = 1e-12) -> np.ndarray:
    return local_maxima(-np.asarray(y, dtype=float), rtol)


def parabolic_vertex(t0: float, h: float, ym: float, y0: float, yp: float) -> float:
    """Abscissa of the parabola through ``(t0-h, ym), (t0, y0), (t0+h, yp)``."""
    denom = ym - 2.0 * y0 + yp
    if denom == 0.0:
        return t0
    return t0 + 0.5 * h * (ym - yp) / denom


def grid_vertex(t, y, i: int) -> float:
    """Parabolic refinement of a grid extremum at interior index ``i``."""
    return parabolic_vertex(t[i], t[i + 1] - t[i], y[i - 1], y[i], y[i + 1])


def refine_extremum(f: Callable[[float], float], t0: float, h: float, iterations: int = 5, shrink: float = 10.0) -> float:
    """Polish an extremum of ``f`` near ``t0`` by iterated parabolic fits."""
    t = t0
    for _ in range(iterations):
        t = parabolic_vertex(t, h, f(t - h), f(t), f(t + h))
        h /= shrink
    return t
