"""Solid-torus chart of SL(2,R) used for all 3-d exports.

SL(2,R) is diffeomorphic to an open solid torus; the chart below maps a
unimodular matrix [[a, b], [c, d]] through the split coordinates

    x1 = (a + d)/2,  x2 = (b - c)/2,  x3 = (b + c)/2,  x4 = (a - d)/2,

which satisfy x1^2 + x2^2 - x3^2 - x4^2 = det = 1.  The angle theta =
atan2(x2, x1) picks the meridian disc and (u, v) = (x3, x4)/sqrt(1 + x3^2 +
x4^2) the point strictly inside it; the image is the torus swept by the unit
disc of the Oxz-plane centred at (2, 0, 0), rotating around Oz.  The chart
is one continuous identification among many; it is a visualization
convention, with the identity landing at the disc centre (2, 0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sl2 import det2


@dataclass(frozen=True)
class TorusPoint:
    x: float
    y: float
    z: float


def torus_coords(m) -> np.ndarray:
    """Chart coordinates for a (..., 2, 2) stack; returns shape (..., 3)."""
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(det2(m) - 1.0) > 1e-6):
        raise ValueError("torus chart requires unimodular matrices (|det - 1| <= 1e-6)")
    x1 = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    x2 = 0.5 * (m[..., 0, 1] - m[..., 1, 0])
    x3 = 0.5 * (m[..., 0, 1] + m[..., 1, 0])
    x4 = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    theta = np.arctan2(x2, x1)
    denom = np.sqrt(1.0 + x3 * x3 + x4 * x4)
    u = x3 / denom
    v = x4 / denom
    return np.stack([(2.0 + u) * np.cos(theta), (2.0 + u) * np.sin(theta), v],
                    axis=-1)


def torus_embed(m) -> TorusPoint:
    """Chart image of a single unimodular matrix."""
    p = torus_coords(np.asarray(m, dtype=float))
    if p.shape != (3,):
        raise ValueError("torus_embed takes a single 2x2 matrix; "
                         "use torus_coords for stacks")
    return TorusPoint(float(p[0]), float(p[1]), float(p[2]))
