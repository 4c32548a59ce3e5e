"""Geometric transforms of null curves built from Riccati solutions.

Two null curves are transforms of each other when both pairs of star-shaped
cousins subtend triangles of constant area with the origin, i.e. det(eta,
eta~) is a nonzero constant on each side.  The cross pairing

    chi = det(eta+, eta~+) det(eta-, eta~-') - det(eta-, eta~-) det(eta+, eta~+')

is then constant and splits the transforms into two families: chi = 0 gives
the one-parameter family driven by a solution f of the Riccati equation

    f' + f^2 = kappa + cosh(2 xi),        xi != 0,

with transformed bending kappa~ = -kappa + 2 f^2 - 2 cosh(2 xi), while
chi != 0 forces constant bending and an explicit two-constant family.  Both
are implemented here, along with the permutability construction exchanging
two chi = 0 transforms.

The Riccati equation is never integrated directly: f = -x/y is represented
by the linear lift x' = -(kappa + lambda) y, y' = -x, which stays smooth
through the poles of f (the zeros of y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curves import BendingProfile, NullCurve, SGrid, cousins
from .sl2 import adj2, sl2_exp
from .stencils import cross2

#: |y| below POLE_EPS * max(|x|, |y|) flags a pole of f = -x/y
POLE_EPS = 1e-8


class PoleError(ValueError):
    """A transforming function has a pole inside the requested range."""


@dataclass
class RiccatiSolution:
    """Projective solution f = -x/y of f' + f^2 = kappa + cosh(2 xi).

    The lift (x, y) is kept only up to a per-sample rescaling, which leaves
    f unchanged; samples at or bracketing a zero of y are flagged as poles
    and carry f = nan.
    """

    xi: float
    lam: float
    grid: SGrid
    x: np.ndarray
    y: np.ndarray
    f: np.ndarray
    poles: np.ndarray
    s0: float
    c: float

    @classmethod
    def from_values(cls, f, xi: float, grid: SGrid, s0: Optional[float] = None,
                    c: Optional[float] = None, poles=None) -> "RiccatiSolution":
        """Wrap precomputed samples of f (nan entries count as poles)."""
        f = np.asarray(f, dtype=float)
        poles = ~np.isfinite(f) if poles is None else np.asarray(poles, dtype=bool)
        y = np.where(poles, 0.0, 1.0)
        x = np.where(poles, 1.0, -np.nan_to_num(f))
        s0 = grid.s0 if s0 is None else s0
        c = float(f[grid.index_of(s0)]) if c is None else c
        return cls(float(xi), math.cosh(2.0 * xi), grid, x, y,
                   np.where(poles, np.nan, f), poles, s0, c)

    def section(self, i0: int, i1: int) -> "RiccatiSolution":
        return RiccatiSolution(self.xi, self.lam, self.grid.section(i0, i1),
                               self.x[i0:i1], self.y[i0:i1], self.f[i0:i1],
                               self.poles[i0:i1], self.s0, self.c)


@dataclass
class TTransformResult:
    """A transformed null curve with its invariants.

    det_plus / det_minus are the measured means of det(eta+-, eta~+-), each
    constant along the curve for a genuine transform; the *_deviation fields
    record the worst departure from constancy.
    """

    curve: NullCurve
    xi: Optional[float]
    chi: float
    kappa_tilde: np.ndarray
    det_plus: float
    det_minus: float
    chi_deviation: float
    det_plus_deviation: float
    det_minus_deviation: float
    meta: dict = field(default_factory=dict)


def _lift_normalize(v):
    scale = np.maximum(np.abs(v[..., 0]), np.abs(v[..., 1]))
    return v / np.maximum(scale, 1e-300)[..., None]


def flag_poles(num, den) -> np.ndarray:
    """Pole mask for a ratio num/den sampled along the last axis.

    A sample is flagged when den vanishes relative to max(|num|, |den|)
    (threshold POLE_EPS) and, since a transversal zero almost never lands on
    a sample, both neighbours of every sign change of den are flagged too.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    scale = np.maximum(np.abs(num), np.abs(den))
    poles = np.abs(den) < POLE_EPS * np.maximum(scale, 1e-300)
    if den.ndim >= 1 and den.shape[-1] >= 2:
        crossing = den[..., 1:] * den[..., :-1] < 0.0
        poles[..., 1:] |= crossing
        poles[..., :-1] |= crossing
    return poles


def _lift_to_f(x, y):
    poles = flag_poles(x, y)
    f = np.where(poles, np.nan, -x / np.where(poles, 1.0, y))
    return f, poles


def solve_riccati(profile: BendingProfile, grid: SGrid, xi: float,
                  s0: Optional[float] = None, c: float = 0.0) -> RiccatiSolution:
    """Integrate the linear lift of the Riccati equation with f(s0) = c.

    The lift runs both ways from s0 with RK4 (a fractional first step lands
    on the grid when s0 is not a node); constant profiles use the exact flow
    v(s) = exp(-(s - s0) K) v0 instead.
    """
    if xi == 0.0:
        raise ValueError("transform parameter xi must be nonzero")
    lam = math.cosh(2.0 * xi)
    s0 = grid.s0 if s0 is None else float(s0)
    if not grid.s0 - 1e-9 <= s0 <= grid.s_end + 1e-9:
        raise ValueError("initial point s0 must lie inside the grid")
    v0 = np.array([-c, 1.0])
    s = grid.points()

    if profile.is_constant:
        k = np.array([[0.0, profile.constant_value + lam], [1.0, 0.0]])
        v = sl2_exp(-(s - s0)[:, None, None] * k) @ v0
        v = _lift_normalize(v)
    else:
        v = _riccati_rk4(profile, grid, lam, s0, v0)

    x, y = v[..., 0], v[..., 1]
    f, poles = _lift_to_f(x, y)
    return RiccatiSolution(float(xi), lam, grid, x, y, f, poles, s0, c)


def _riccati_rk4(profile, grid, lam, s0, v0):
    def rhs(s, v):
        a = profile(s) + lam
        return np.stack([-a * v[..., 1], -v[..., 0]], axis=-1)

    def step(s, v, h):
        k1 = rhs(s, v)
        k2 = rhs(s + 0.5 * h, v + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h, v + 0.5 * h * k2)
        k4 = rhs(s + h, v + h * k3)
        return _lift_normalize(v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))

    s = grid.points()
    h = grid.h
    i0 = int(np.clip(round((s0 - grid.s0) / h), 0, grid.n - 1))
    out = np.empty((grid.n, 2))
    v_at = np.asarray(v0, dtype=float)
    if abs(s[i0] - s0) > 1e-14 * max(1.0, abs(s0)):
        v_at = step(s0, v_at, s[i0] - s0)
    out[i0] = _lift_normalize(v_at)
    v = out[i0]
    for i in range(i0, grid.n - 1):
        v = step(s[i], v, h)
        out[i + 1] = v
    v = out[i0]
    for i in range(i0, 0, -1):
        v = step(s[i], v, -h)
        out[i - 1] = v
    return out


def g_plus(xi: float, phi) -> np.ndarray:
    """Frame update factor of the chi = 0 transform on the plus side."""
    return _g_factor(phi, 2.0 * math.sinh(xi) ** 2, math.sqrt(2.0) * math.sinh(xi))


def g_minus(xi: float, phi, sign: int = +1) -> np.ndarray:
    """Frame update factor on the minus side; sign picks the lift branch."""
    return _g_factor(phi, 2.0 * math.cosh(xi) ** 2, sign * math.sqrt(2.0) * math.cosh(xi))


def _g_factor(phi, shift, denom):
    phi = np.asarray(phi, dtype=float)
    out = np.empty(phi.shape + (2, 2))
    out[..., 0, 0] = -phi
    out[..., 0, 1] = phi * phi - shift
    out[..., 1, 0] = 1.0
    out[..., 1, 1] = -phi
    return out / denom


def chi_invariant(eta_p, eta_tp, eta_m, eta_tm, grid: SGrid,
                  eta_tp_prime=None, eta_tm_prime=None):
    """Mean and worst deviation of the cross pairing along the grid.

    Derivatives of the transformed cousins default to central differences
    (evaluated on the interior); pass the analytic frame columns when
    available for machine-precision constancy.
    """
    eta_p, eta_tp = np.asarray(eta_p, float), np.asarray(eta_tp, float)
    eta_m, eta_tm = np.asarray(eta_m, float), np.asarray(eta_tm, float)
    if eta_tp_prime is None or eta_tm_prime is None:
        h = grid.h
        dp = (eta_tp[2:] - eta_tp[:-2]) / (2.0 * h)
        dm = (eta_tm[2:] - eta_tm[:-2]) / (2.0 * h)
        sl = slice(1, -1)
    else:
        dp, dm = np.asarray(eta_tp_prime, float), np.asarray(eta_tm_prime, float)
        sl = slice(None)
    chi = (cross2(eta_p[sl], eta_tp[sl]) * cross2(eta_m[sl], dm)
           - cross2(eta_m[sl], eta_tm[sl]) * cross2(eta_p[sl], dp))
    mean = float(chi.mean())
    return mean, float(np.abs(chi - mean).max())


def _assemble(curve, fp_t, fm_t, kappa_tilde, xi, meta):
    gamma_t = fp_t @ adj2(fm_t)
    out_curve = NullCurve(curve.grid, gamma_t, fp_t, fm_t, kappa_tilde)
    eta_p, eta_m = cousins(curve)
    eta_tp, eta_tm = cousins(out_curve)
    chi, chi_dev = chi_invariant(eta_p, eta_tp, eta_m, eta_tm, curve.grid,
                                 eta_tp_prime=fp_t[:, :, 1], eta_tm_prime=fm_t[:, :, 1])
    dp = cross2(eta_p, eta_tp)
    dm = cross2(eta_m, eta_tm)
    return TTransformResult(
        curve=out_curve, xi=xi, chi=chi, kappa_tilde=kappa_tilde,
        det_plus=float(dp.mean()), det_minus=float(dm.mean()),
        chi_deviation=chi_dev,
        det_plus_deviation=float(np.abs(dp - dp.mean()).max()),
        det_minus_deviation=float(np.abs(dm - dm.mean()).max()),
        meta=meta)


def t_transform(curve: NullCurve, sol: RiccatiSolution, sign: int = +1) -> TTransformResult:
    """Apply the chi = 0 transform with parameter xi and function f = sol.f.

    The frames update by the right factors g_plus / g_minus, the curve by
    gamma~ = +- F+ [[tanh xi, -csch xi sech xi f], [0, coth xi]] F-^{-1}, and
    the bending by kappa~ = -kappa + 2 f^2 - 2 cosh(2 xi).  Poles of f must
    not lie in the range; use t_transform_segments to split around them.
    """
    _check_shared_grid(curve.grid, sol.grid)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if np.any(sol.poles):
        raise PoleError("transforming function has poles inside the range; "
                        "use t_transform_segments")
    f = sol.f
    fp_t = curve.fplus @ g_plus(sol.xi, f)
    fm_t = curve.fminus @ g_minus(sol.xi, f, sign)
    kappa_tilde = -curve.kappa + 2.0 * f * f - 2.0 * sol.lam
    return _assemble(curve, fp_t, fm_t, kappa_tilde, sol.xi, {"sign": sign})


def t_transform_segments(curve: NullCurve, sol: RiccatiSolution, sign: int = +1,
                         guard: int = 3, min_samples: int = 7):
    """Transform each maximal pole-free segment, guard samples off each pole.

    Returns a list of (i0, i1, TTransformResult) with the segment's sample
    range in the parent grid.
    """
    bad = sol.poles.copy()
    for g in range(1, guard + 1):
        bad[g:] |= sol.poles[:-g]
        bad[:-g] |= sol.poles[g:]
    results = []
    i = 0
    n = curve.grid.n
    while i < n:
        if bad[i]:
            i += 1
            continue
        j = i
        while j < n and not bad[j]:
            j += 1
        if j - i >= min_samples:
            results.append((i, j, t_transform(curve.section(i, j),
                                              sol.section(i, j), sign)))
        i = j
    return results


def constant_bending_transform(kappa: float, curve: NullCurve, c_plus: float,
                               c_minus: float, sign_plus: int = +1,
                               sign_minus: int = +1) -> TTransformResult:
    """The chi != 0 transform of a constant-bending curve.

    The transforming constants f+- = sign * sqrt(kappa +- 1 + c+-^2) must be
    real and distinct, and c+, c- nonzero.  The result has the same constant
    bending and chi = (f+ - f-) / (c+ c-).  When the branch discriminant
    2 + c+^2 - c-^2 is negative the parameterization of the family swaps the
    hyperbolic functions; that branch is derived by analogy and marked in
    ``meta``.
    """
    if c_plus == 0.0 or c_minus == 0.0:
        raise ValueError("c_plus and c_minus must be nonzero")
    if np.abs(curve.kappa - kappa).max() > 1e-8:
        raise ValueError("curve bending does not match the stated constant")
    rad_p = kappa + 1.0 + c_plus * c_plus
    rad_m = kappa - 1.0 + c_minus * c_minus
    if rad_p < 0.0 or rad_m < 0.0:
        raise ValueError("square-root domain violated: need kappa+1+c_plus^2 >= 0 "
                         "and kappa-1+c_minus^2 >= 0")
    f_p = sign_plus * math.sqrt(rad_p)
    f_m = sign_minus * math.sqrt(rad_m)
    if abs(f_p - f_m) < 1e-12:
        raise ValueError("degenerate data: the transforming constants coincide")

    def factor(fv, cv):
        return np.array([[-fv, fv * fv - cv * cv], [1.0, -fv]]) / cv

    fp_t = curve.fplus @ factor(f_p, c_plus)
    fm_t = curve.fminus @ factor(f_m, c_minus)
    kappa_tilde = np.full(curve.grid.n, float(kappa))
    disc = 2.0 + c_plus * c_plus - c_minus * c_minus
    meta = {
        "f_plus": f_p, "f_minus": f_m, "c_plus": c_plus, "c_minus": c_minus,
        "chi_predicted": (f_p - f_m) / (c_plus * c_minus),
        "branch_discriminant": disc,
        "branch": "cosh_sinh" if disc > 0 else ("boundary" if disc == 0 else "sinh_cosh"),
        "branch_derived_by_analogy": disc < 0,
    }
    return _assemble(curve, fp_t, fm_t, kappa_tilde, None, meta)


@dataclass
class PermuteResult:
    """Exchanged transforming functions and the double-transform bending.

    ``valid`` is False where f1 and f2 graze each other (within 1e-10) or
    either input has a pole; those samples carry nan.  residual_* report the
    worst Riccati residual of the exchanged functions against the bending of
    the respective first transform, by central differences.
    """

    f21: np.ndarray
    f12: np.ndarray
    kappa21: np.ndarray
    valid: np.ndarray
    residual21: float
    residual12: float


def permute(profile: BendingProfile, grid: SGrid, sol1: RiccatiSolution,
            sol2: RiccatiSolution, coincidence_tol: float = 1e-10) -> PermuteResult:
    """Exchanged data of two chi = 0 transforms with parameters xi1 != xi2.

    f_{2->1} = -f1 + (cosh 2 xi1 - cosh 2 xi2) / (f1 - f2) solves the Riccati
    equation of the first transformed curve with the second parameter (and
    symmetrically for f_{1->2});  kappa21 is the bending of either double
    transform.
    """
    _check_shared_grid(grid, sol1.grid)
    _check_shared_grid(grid, sol2.grid)
    if sol1.xi == sol2.xi:
        raise ValueError("permutability requires distinct parameters xi1 != xi2")
    f1, f2 = sol1.f, sol2.f
    denom = f1 - f2
    valid = (~sol1.poles) & (~sol2.poles) & (np.abs(denom) > coincidence_tol)
    dlam = sol1.lam - sol2.lam
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(valid, dlam / np.where(valid, denom, 1.0), np.nan)
        f21 = np.where(valid, -f1 + ratio, np.nan)
        f12 = np.where(valid, -f2 + ratio, np.nan)
        kappa = profile(grid.points())
        kappa21 = np.where(valid, kappa - 2.0 * dlam * (f1 + f2) / np.where(valid, denom, 1.0)
                           + 2.0 * ratio * ratio, np.nan)

    kappa1 = -kappa + 2.0 * f1 * f1 - 2.0 * sol1.lam
    kappa2 = -kappa + 2.0 * f2 * f2 - 2.0 * sol2.lam
    res21 = _riccati_residual(f21, kappa1 + sol2.lam, grid.h, valid)
    res12 = _riccati_residual(f12, kappa2 + sol1.lam, grid.h, valid)
    return PermuteResult(f21, f12, kappa21, valid, res21, res12)


def _riccati_residual(f, target, h, valid):
    ok = valid[2:] & valid[:-2] & valid[1:-1]
    if not np.any(ok):
        return math.nan
    df = (f[2:] - f[:-2]) / (2.0 * h)
    res = df + f[1:-1] ** 2 - target[1:-1]
    return float(np.abs(res[ok]).max())


def _check_shared_grid(g1: SGrid, g2: SGrid):
    if (g1.n != g2.n or abs(g1.s0 - g2.s0) > 1e-9 * max(1.0, abs(g1.s0))
            or abs(g1.h - g2.h) > 1e-12 * g1.h):
        raise ValueError("curve and solution must share the same grid")
