"""Second-order finite-difference stencils on uniform grids.

Array arguments are differentiated along ``axis``; trailing axes (e.g. the
2x2 matrix axes of frame stacks) ride along.  Central stencils shrink the
output: the first derivative loses one sample at each end, the third loses
two.  One-sided second-order stencils are provided for endpoint use.
"""

from __future__ import annotations

import numpy as np


def _mov(y, axis):
    return np.moveaxis(np.asarray(y, dtype=float), axis, 0)


def d1_central(y, h: float, axis: int = 0):
    """(y[i+1] - y[i-1]) / 2h on the interior; output length n - 2."""
    y = _mov(y, axis)
    out = (y[2:] - y[:-2]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def d1_staggered(y, h: float, axis: int = 0):
    """(y[i+1] - y[i]) / h: the centred derivative at midpoints, length n - 1."""
    y = _mov(y, axis)
    out = (y[1:] - y[:-1]) / h
    return np.moveaxis(out, 0, axis)


def d2_central(y, h: float, axis: int = 0):
    """(y[i+1] - 2 y[i] + y[i-1]) / h^2 on the interior; length n - 2."""
    y = _mov(y, axis)
    out = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / (h * h)
    return np.moveaxis(out, 0, axis)


def d3_central(y, h: float, axis: int = 0):
    """Five-point third derivative (-1/2, 1, 0, -1, 1/2) / h^3; length n - 4."""
    y = _mov(y, axis)
    out = (-0.5 * y[:-4] + y[1:-3] - y[3:-1] + 0.5 * y[4:]) / h**3
    return np.moveaxis(out, 0, axis)


def d1_onesided(y0, y1, y2, h: float, sign: int = +1):
    """Second-order one-sided first derivative at y0, stepping towards y2."""
    return sign * (-1.5 * y0 + 2.0 * y1 - 0.5 * y2) / h


def d2_onesided(y0, y1, y2, y3, h: float):
    """Second-order one-sided second derivative at y0."""
    return (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3) / (h * h)


def cross2(a, b):
    """det(a, b) for stacks of plane vectors: a_x b_y - a_y b_x."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
