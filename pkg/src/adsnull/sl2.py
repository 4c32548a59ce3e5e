"""Linear algebra of the split-signature space of 2x2 real matrices.

The ambient space is R^{2,2}: real 2x2 matrices carrying the quadratic form
q(X) = -det(X) of signature (-,-,+,+).  The unit pseudosphere q = -1 is the
special linear group SL(2,R), the model of anti-de Sitter 3-space used
throughout the package.  This module provides the quadratic form, the inner
product obtained from it by polarization, the induced inner product on
bivectors, the type classification of bivectors (with the time-orientation
convention fixed by a reference bivector), and a closed-form exponential for
trace-free 2x2 matrices.

All functions broadcast over leading axes: a "matrix" argument may be a
single (2, 2) array or a stack (..., 2, 2).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

#: branch threshold for the closed-form exponential
_BRANCH_EPS = 1e-12

IDENTITY = np.eye(2)

#: the standard rotation generator; (IDENTITY, ROTATION) spans the fixed
#: negative-definite reference plane used for time orientation
ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]])


def det2(x):
    """Determinant of a (..., 2, 2) stack."""
    x = np.asarray(x, dtype=float)
    return x[..., 0, 0] * x[..., 1, 1] - x[..., 0, 1] * x[..., 1, 0]


def adj2(x):
    """Adjugate of a (..., 2, 2) stack: the inverse of a unimodular matrix.

    For frames with large entries the determinant cannot be evaluated
    stably (cosh^2 - sinh^2 cancels), so unimodular inverses must bypass
    the division.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0, 0] = x[..., 1, 1]
    out[..., 0, 1] = -x[..., 0, 1]
    out[..., 1, 0] = -x[..., 1, 0]
    out[..., 1, 1] = x[..., 0, 0]
    return out


def inv2(x):
    """Inverse of a (..., 2, 2) stack via the adjugate."""
    return adj2(x) / det2(x)[..., None, None]


def qform(x):
    """Quadratic form q(X) = -det(X) of signature (-,-,+,+)."""
    return -det2(x)


def inner(x, y):
    """Inner product obtained from q by polarization.

    Symmetric and bilinear, with inner(X, X) == qform(X).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * (qform(x + y) - qform(x) - qform(y))


@dataclass(frozen=True)
class Bivector:
    """Ordered pair (u, v) representing the bivector u ^ v."""

    u: np.ndarray
    v: np.ndarray


class BivectorKind(enum.Enum):
    MINUS_MINUS = "minus_minus"
    MINUS_ZERO = "minus_zero"
    OTHER = "other"


@dataclass(frozen=True)
class BivectorClass:
    kind: BivectorKind
    positive: bool


#: reference bivector of type (-,-) fixing the time orientation
REFERENCE_BIVECTOR = Bivector(IDENTITY, ROTATION)


def biv_inner(b1: Bivector, b2: Bivector):
    """Inner product on bivectors: det of the 2x2 matrix of pairwise inners.

    Antisymmetric in each argument's ordered pair:
    biv_inner(u ^ v, .) == -biv_inner(v ^ u, .).
    """
    return inner(b1.u, b2.u) * inner(b1.v, b2.v) - inner(b1.u, b2.v) * inner(b1.v, b2.u)


def plucker(u, v):
    """The six 2x2 minors of the pair (u, v) viewed as 4-vectors.

    Vanishes (as a 6-vector) exactly when u ^ v = 0.  Shape (..., 6).
    """
    a = np.asarray(u, dtype=float).reshape(*np.shape(u)[:-2], 4)
    b = np.asarray(v, dtype=float).reshape(*np.shape(v)[:-2], 4)
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    return np.stack([a[..., i] * b[..., j] - a[..., j] * b[..., i] for i, j in pairs], axis=-1)


def classify_bivector(b: Bivector, tol_rank: float = 1e-9) -> BivectorClass:
    """Classify a bivector by the restriction of the inner product to its span.

    Kinds: MINUS_MINUS for a negative-definite restriction, MINUS_ZERO for a
    nonzero negative-semidefinite degenerate one, OTHER for everything else
    (including the zero bivector).  ``positive`` is meaningful only for
    MINUS_ZERO and tests the sign of the pairing with the reference bivector.

    tol_rank is a relative tolerance: the Gram determinant counts as zero
    below tol_rank * ||G||^2; floating-point inputs need the slack.
    """
    u = np.asarray(b.u, dtype=float)
    v = np.asarray(b.v, dtype=float)
    scale = max(float(np.abs(u).max() * np.abs(v).max()), 1e-300)
    if float(np.abs(plucker(u, v)).max()) <= tol_rank * scale:
        return BivectorClass(BivectorKind.OTHER, False)

    g11 = float(qform(u))
    g12 = float(inner(u, v))
    g22 = float(qform(v))
    gnorm = max(abs(g11), abs(g12), abs(g22))
    if gnorm == 0.0:
        return BivectorClass(BivectorKind.OTHER, False)
    detg = g11 * g22 - g12 * g12

    if g11 < 0.0 and detg > tol_rank * gnorm * gnorm:
        return BivectorClass(BivectorKind.MINUS_MINUS, False)
    semidef = g11 <= tol_rank * gnorm and g22 <= tol_rank * gnorm
    if semidef and abs(detg) <= tol_rank * gnorm * gnorm:
        pos = float(biv_inner(REFERENCE_BIVECTOR, b)) > 0.0
        return BivectorClass(BivectorKind.MINUS_ZERO, pos)
    return BivectorClass(BivectorKind.OTHER, False)


def sl2_exp(a):
    """Closed-form exponential of a trace-free 2x2 matrix (stack).

    With d2 = -det(A) the Cayley-Hamilton relation gives A^2 = d2 * Id, so
    exp(A) = c0(d2) Id + c1(d2) A with hyperbolic coefficients for d2 > 0,
    trigonometric ones for d2 < 0 and a short series near the branch point
    (|d2| <= 1e-12).  The result is unimodular to machine precision.
    """
    a = np.asarray(a, dtype=float)
    tr = a[..., 0, 0] + a[..., 1, 1]
    if np.any(np.abs(tr) > 1e-12):
        raise ValueError("sl2_exp requires a trace-free matrix, got |trace| = %g"
                         % float(np.abs(tr).max()))
    d2 = -det2(a)
    r = np.sqrt(np.abs(d2))
    r_safe = np.where(r > 0.0, r, 1.0)
    hyp = d2 > _BRANCH_EPS
    trig = d2 < -_BRANCH_EPS
    c0 = np.where(hyp, np.cosh(r), np.where(trig, np.cos(r), 1.0 + 0.5 * d2))
    c1 = np.where(hyp, np.sinh(r) / r_safe,
                  np.where(trig, np.sin(r) / r_safe, 1.0 + d2 / 6.0))
    return c0[..., None, None] * IDENTITY + c1[..., None, None] * a


def project_unimodular(m):
    """Rescale a (..., 2, 2) stack onto det = 1; requires positive dets."""
    d = det2(m)
    if np.any(d <= 0.0):
        raise ValueError("cannot project onto SL(2,R): nonpositive determinant "
                         "%g encountered" % float(d.min()))
    return np.asarray(m, dtype=float) / np.sqrt(d)[..., None, None]


def is_unimodular(m, tol: float = 1e-8) -> bool:
    return bool(np.all(np.abs(det2(m) - 1.0) <= tol))
