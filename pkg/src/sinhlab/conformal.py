"""The transforms J_x and scriptJ_x, their spectral curve and inverse maps.

Notation used throughout:

* ``A(s) = artanh(1/sqrt s)/sqrt s`` is even in ``sqrt s`` and analytic off
  ``[0, 1]``; ``K(s) = x + 2 A(s)``.
* ``J_x(s) = sqrt(s) K(s)`` equals ``x sqrt s + arcosh((s+1)/(s-1))``.
* ``scriptJ_x(s) = s K(s)^2 / 4 = J_x(s)^2 / 4`` has no branch point at the
  origin, so Newton iterations run on it.

The curve gamma_1 is the arc in the upper half plane on which J_x is real; it
runs from ``s1 < 0`` to ``s2 = 1 + 2/x``.  The region it bounds together with
its mirror gamma_2 is called D.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .errors import (
    DomainError,
    NonConvergence,
    UndefinedOnCut,
    WrongSheet,
)
from .numerics import DEFAULT_DOUBLE, ContourSamples, PrecisionContext, find_root

DEFAULT_ARC_NODES = 512
OUTER, INNER = "outer", "inner"
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Scalar constants of the curve
# ---------------------------------------------------------------------------

def _check_x(x: float) -> float:
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"the map parameter must be positive and finite, got {x}")
    return x


def s2_of(x: float) -> float:
    """Right end of the curve, ``1 + 2/x``."""
    return 1.0 + 2.0 / _check_x(x)


def b_of(x: float) -> float:
    """Right end of the support, ``scriptJ_x(s2)``."""
    x = _check_x(x)
    root = math.sqrt(x * (x + 2.0))
    # arcosh(1 + x) without cancellation for small x
    return 0.25 * (root + math.log1p(x + root)) ** 2


def _s1_root(x: float, ctx: PrecisionContext) -> float:
    """t = sqrt(-s1) solving x t = 2 arctan(1/t)."""
    if ctx.multiprecision:
        import mpmath

        with ctx.workprec():
            xm = mpmath.mpf(x)
            return find_root(lambda t: xm * t - 2 * mpmath.atan2(1, t),
                             (0, mpmath.pi / xm), "bisect", ctx)

    def g(t):
        return x * t - 2.0 * math.atan2(1.0, t)

    t = find_root(g, (0.0, math.pi / x), "bisect", ctx)
    for _ in range(2):
        t -= g(t) / (x + 2.0 / (1.0 + t * t))
    return t


def s1_of(x: float, ctx: PrecisionContext = DEFAULT_DOUBLE) -> float:
    """Left end of the curve: the negative root of ``x sqrt(-s) = arccos((-s-1)/(-s+1))``.

    The equation is solved in the form ``x t = 2 arctan(1/t)`` with
    ``t = sqrt(-s)``, which is monotone and free of cancellation.
    """
    t = _s1_root(_check_x(x), ctx)
    return -t * t


def vstar_of(x: float, ctx: PrecisionContext = DEFAULT_DOUBLE) -> float:
    """The parameter v* in (-pi, 0) where the v-parametrized arc starts.

    Since ``s1 = -cot(v*/2)^2`` the defining relation gives ``v* = -x sqrt(-s1)``.
    """
    x = _check_x(x)
    return -x * _s1_root(x, ctx)


def e1_of(x: float, s1: float) -> float:
    s2 = s2_of(x)
    return 4.0 * math.sqrt(-s1) * (1.0 - s1) / (x * (s2 - s1))


def d1_of(x: float) -> float:
    return 2.0 * math.sqrt(2.0) * s2_of(x) ** 0.25 / (x * b_of(x) ** 0.25)


# ---------------------------------------------------------------------------
# The transforms
# ---------------------------------------------------------------------------

def _prepare(s) -> Tuple[np.ndarray, bool]:
    arr = np.atleast_1d(np.asarray(s, dtype=complex)).copy()
    # a signed zero imaginary part would pick the lower limit on (-inf, 0)
    arr.imag[arr.imag == 0.0] = 0.0
    if np.any((arr.imag == 0.0) & (arr.real >= 0.0) & (arr.real <= 1.0)):
        raise UndefinedOnCut("scriptJ is undefined on [0, 1]")
    return arr, np.ndim(s) == 0


def _out(arr, scalar):
    return complex(arr[0]) if scalar else arr


def A_of(s):
    """artanh(1/sqrt s)/sqrt s."""
    arr, scalar = _prepare(s)
    return _out(kernels.scaled_arctanh(arr), scalar)


def J_of(x: float, s):
    """J_x(s); on ``(-inf, 0)`` the limit from the upper half plane."""
    arr, scalar = _prepare(s)
    k = x + 2.0 * kernels.scaled_arctanh(arr)
    return _out(np.sqrt(arr) * k, scalar)


def J_deriv(x: float, s):
    arr, scalar = _prepare(s)
    return _out((0.5 * x - 1.0 / (arr - 1.0)) / np.sqrt(arr), scalar)


def scriptJ_of(x: float, s):
    """scriptJ_x(s) = J_x(s)^2/4, analytic on C minus [0, 1]."""
    arr, scalar = _prepare(s)
    k = x + 2.0 * kernels.scaled_arctanh(arr)
    return _out(0.25 * arr * k * k, scalar)


def scriptJ_deriv(x: float, s):
    arr, scalar = _prepare(s)
    k = x + 2.0 * kernels.scaled_arctanh(arr)
    return _out(0.5 * k * (0.5 * x - 1.0 / (arr - 1.0)), scalar)


def _sj(x: float, s: complex) -> Tuple[complex, complex]:
    """Scalar scriptJ and its derivative (no validation)."""
    r = cmath.sqrt(s)
    k = x + 2.0 * cmath.atanh(1.0 / r) / r
    return 0.25 * s * k * k, 0.5 * k * (0.5 * x - 1.0 / (s - 1.0))


def gamma1_point(x: float, v):
    """Point of the upper arc at parameter v in [v*, 0]: ``coth^2((u + iv)/2)``,
    i.e. ``(cosh w + 1)/(cosh w - 1)`` with ``cosh u = x sin v / v + cos v``."""
    v = np.asarray(v, dtype=float)
    safe = np.where(v == 0.0, -1e-300, v)
    s, _ = kernels._kernels_py.gamma1_on_v(float(x), safe)
    s = np.where(v == 0.0, s2_of(x), s)
    return complex(s) if s.ndim == 0 else s


# ---------------------------------------------------------------------------
# The curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralCurve:
    """Spectral curve of the transform with parameter ``x``.

    ``gamma1`` runs along the upper arc from s1 to s2, ``gamma2`` along its
    mirror image in the same direction.  ``closed`` is gamma2 followed by
    gamma1 reversed, a positively oriented loop around D that refines itself
    by node doubling.
    """

    x: float
    s1: float
    s2: float
    b: float
    vstar: float
    e1: float
    d1: float
    gamma1: ContourSamples = field(repr=False)
    gamma2: ContourSamples = field(repr=False)
    closed: ContourSamples = field(repr=False)
    ctx: PrecisionContext = field(default=DEFAULT_DOUBLE, repr=False)

    # -- maps ---------------------------------------------------------------
    def J(self, s):
        return J_of(self.x, s)

    def scriptJ(self, s):
        return scriptJ_of(self.x, s)

    def scriptJ_deriv(self, s):
        return scriptJ_deriv(self.x, s)

    def in_D(self, s):
        return in_D(self, s)

    def boundary_values(self, y):
        return boundary_values(self, y)

    def invert_outer(self, z):
        return invert_outer(self, z)

    def invert_inner(self, z):
        return invert_inner(self, z)


def _arc_on_theta(x: float, vstar: float, b: float, theta: np.ndarray):
    """Upper-arc points at y = b sin^2(theta/2) and ds/dtheta there."""
    y = b * np.sin(0.5 * theta) ** 2
    s = kernels.gamma1_solve(x, vstar, y)
    ds = 0.5 * b * np.sin(theta) / scriptJ_deriv(x, s)
    return s, ds


def _closed_contour(x: float, vstar: float, b: float, n: int) -> ContourSamples:
    """Trapezoid rule on the loop t -> conj(s(t)) for t < pi, s(2 pi - t) after.

    With y = b sin^2(t/2) the loop is an analytic periodic function of t, so
    the rule converges geometrically.
    """
    half = n // 2
    theta = np.pi * (np.arange(half) + 0.5) / half
    s, ds = _arc_on_theta(x, vstar, b, theta)
    h = np.pi / half
    nodes = np.concatenate([np.conj(s), s[::-1]])
    weights = h * np.concatenate([np.conj(ds), -ds[::-1]])
    return ContourSamples(nodes, weights, True,
                          refine=lambda: _closed_contour(x, vstar, b, 2 * n))


def build_curve(x: float, n_nodes: int = DEFAULT_ARC_NODES,
                ctx: PrecisionContext = DEFAULT_DOUBLE,
                closed_nodes: int = 128) -> SpectralCurve:
    """Construct the spectral curve for parameter ``x``.

    Arc nodes sit at ``y = b sin^2(theta/2)`` on a uniform midpoint grid in
    theta; each is found by bisection in the v-parametrization followed by
    a Newton polish on scriptJ.
    """
    x = _check_x(x)
    if n_nodes < 8:
        raise DomainError("need at least 8 arc nodes")
    s1 = s1_of(x, ctx)
    vstar = -x * math.sqrt(-s1)
    if not -math.pi < vstar < 0.0:
        raise NonConvergence(f"v* = {vstar} outside (-pi, 0)")
    b = b_of(x)
    theta = np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    s, ds = _arc_on_theta(x, vstar, b, theta)
    if not np.all(s.imag > 0.0):
        raise NonConvergence("arc solve left the upper half plane")
    h = np.pi / n_nodes
    gamma1 = ContourSamples(s, h * ds, False)
    gamma2 = ContourSamples(np.conj(s), h * np.conj(ds), False)
    closed = _closed_contour(x, vstar, b, closed_nodes)
    return SpectralCurve(x, s1, s2_of(x), b, vstar, e1_of(x, s1), d1_of(x),
                         gamma1, gamma2, closed, ctx)


def winding_number(loop_nodes: np.ndarray, s) -> np.ndarray:
    """Winding number of a closed polyline about each point of ``s``."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    rel = loop_nodes[None, :] - s[:, None]
    turn = np.angle(np.roll(rel, -1, axis=1) / rel)
    return np.rint(turn.sum(axis=1) / (2 * np.pi)).astype(int)


def in_D(curve: SpectralCurve, s):
    """Membership in the open region D bounded by gamma_1 and gamma_2.

    scriptJ maps D into the opposite half plane and the exterior into the
    same one, so for non-real s the sign of Im(s) Im(scriptJ(s)) decides.
    Points on the curve itself are reported as outside.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.zeros(arr.shape, dtype=bool)
    real = arr.imag == 0.0
    out[real] = (arr.real[real] > curve.s1) & (arr.real[real] < curve.s2)
    cx = ~real
    if np.any(cx):
        vals = scriptJ_of(curve.x, arr[cx])
        out[cx] = arr.imag[cx] * np.asarray(vals).imag < 0.0
    return bool(out[0]) if np.ndim(s) == 0 else out


# ---------------------------------------------------------------------------
# Boundary values and inverse maps
# ---------------------------------------------------------------------------

def boundary_values(curve: SpectralCurve, y):
    """(I_+(y), I_-(y)) for y in (0, b): the two limits of the outer inverse on the cut."""
    arr = np.asarray(y, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(~(arr < curve.b)):
        raise DomainError(f"boundary values need 0 < y < b = {curve.b}")
    s = kernels.gamma1_solve(curve.x, curve.vstar, np.atleast_1d(arr))
    res = np.abs(scriptJ_of(curve.x, s) - np.atleast_1d(arr))
    if np.any(res > 1e3 * _EPS * max(1.0, curve.b)) or np.any(s.imag <= 0.0):
        raise NonConvergence("boundary value solve did not converge on the arc")
    if arr.ndim == 0:
        return complex(s[0]), complex(np.conj(s[0]))
    return s, np.conj(s)


def in_parabola_region(z) -> np.ndarray:
    """Membership in the region right of the parabola Re z = (Im z)^2/pi^2 - pi^2/4."""
    z = np.asarray(z, dtype=complex)
    return z.real > z.imag ** 2 / math.pi ** 2 - math.pi ** 2 / 4


def _newton(x: float, z: complex, s: complex, tol: float, max_iter: int = 60):
    """Damped Newton on scriptJ(s) = z.  Returns (s, converged).

    The residual target is relaxed to the rounding floor ``16 eps |s J'(s)|``
    where scriptJ is ill-conditioned (inner sheet near s = 1).
    """
    try:
        val, der = _sj(x, s)
    except (ValueError, ZeroDivisionError):
        return s, False
    res = abs(val - z)

    def target(point, deriv):
        floor = 16 * _EPS * abs(point) * abs(deriv)
        # beyond this the root is not resolvable in binary64 at all
        return max(tol, floor) if floor <= 1e4 * tol else tol

    for _ in range(max_iter):
        if der == 0:
            return s, False
        step = (val - z) / der
        lam = 1.0
        for _ in range(30):
            cand = s - lam * step
            if cand.imag == 0.0 and 0.0 <= cand.real <= 1.0:
                lam *= 0.5
                continue
            try:
                cval, cder = _sj(x, cand)
            except (ValueError, ZeroDivisionError):
                lam *= 0.5
                continue
            cres = abs(cval - z)
            if cres < res or cres <= target(cand, cder):
                break
            lam *= 0.5
        else:
            return s, res <= target(s, der)
        small = abs(s - cand) <= 4 * _EPS * abs(cand)
        s, val, der, res = cand, cval, cder, cres
        goal = target(s, der)
        if res <= goal and (small or res <= 0.01 * goal):
            # one more step for the last bits
            cand = s - (val - z) / der
            try:
                cval, _ = _sj(x, cand)
                if abs(cval - z) <= res:
                    s = cand
            except (ValueError, ZeroDivisionError):
                pass
            return s, True
        if small:
            return s, res <= goal
    return s, res <= target(s, der)


def _on_sheet(curve: SpectralCurve, s: complex, sheet: str) -> bool:
    if s.imag == 0.0 and 0.0 <= s.real <= 1.0:
        return False
    inside = in_D(curve, s)
    return inside if sheet == INNER else not inside


def _seeds(curve: SpectralCurve, z: complex, sheet: str):
    x, b = curve.x, curve.b
    sign = 1.0 if sheet == OUTER else -1.0
    seeds = []
    if abs(z) < 0.1 * min(b, math.pi ** 2 / 4):
        seeds.append(curve.s1 - sign * curve.e1 * cmath.sqrt(-z))
    if abs(z - b) < 0.1 * b:
        seeds.append(curve.s2 + sign * curve.d1 * cmath.sqrt(z - b))
    if sheet == OUTER and abs(z) > 4 * b + 4:
        seeds.append(4.0 * (z - x) / x ** 2)
    if sheet == INNER and z.real > 0:
        expo = x - 2.0 * cmath.sqrt(z)
        if expo.real < math.log(0.05):
            seeds.append(1.0 + 4.0 * cmath.exp(expo))
    return seeds


def _march(curve: SpectralCurve, path, s: complex, sheet: str, tol_of) -> complex:
    """Continue a root of scriptJ(s) = z along a polyline of z values."""
    x = curve.x
    for z_from, z_to in zip(path[:-1], path[1:]):
        t, h = 0.0, 0.125
        while t < 1.0:
            h = min(h, 1.0 - t)
            z_next = z_from + (t + h) * (z_to - z_from)
            cand, ok = _newton(x, z_next, s, tol_of(z_next), max_iter=20)
            if ok and _on_sheet(curve, cand, sheet) and abs(cand - s) < 0.5 * max(abs(s - 1.0), abs(s), 1e-3):
                s, t = cand, t + h
                h = min(2.0 * h, 0.25)
            else:
                h *= 0.5
                if h < 1e-10:
                    raise NonConvergence(f"continuation stalled at z = {z_next}")
    return s


def _invert_scalar(curve: SpectralCurve, z: complex, sheet: str) -> complex:
    x, b = curve.x, curve.b
    ctx = curve.ctx

    def tol_of(w):
        return ctx.rel_tol * max(1.0, abs(w))

    tol = tol_of(z)
    if z.imag < 0.0:
        return _invert_scalar(curve, z.conjugate(), sheet).conjugate()
    real = z.imag == 0.0
    if real and 0.0 <= z.real <= b:
        raise DomainError(f"z = {z} lies on the cut [0, b]")
    if sheet == INNER:
        if not in_parabola_region(z):
            raise DomainError(f"z = {z} is outside the image region of the inner sheet")
    for seed in _seeds(curve, z, sheet):
        s, ok = _newton(x, z, seed, tol)
        if ok and _on_sheet(curve, s, sheet):
            return complex(s.real, 0.0) if real else s
    # homotopy from a point where a seed is reliable
    if sheet == OUTER:
        far = 4.0 * (abs(z) + b) + 10.0
        if real:
            start = z + (far if z.real > b else -far)
        else:
            start = z + 1j * far
        path = [start, z]
        s0 = 4.0 * (start - x) / x ** 2
    else:
        # start just right of b from the edge expansion; far to the right the
        # inner root crowds s = 1 beyond binary64 resolution
        offset = 0.02 * min(b, 0.5 * math.sqrt(b / curve.s2))
        start = complex(b + offset, 0.0)
        s0 = curve.s2 - curve.d1 * math.sqrt(offset)
        if z.real > start.real:
            path = [start, complex(z.real, 0.0), z] if not real else [start, z]
        else:
            bound = math.pi * math.sqrt(z.real + math.pi ** 2 / 4)
            height = max(z.imag, min(0.5 * bound, 0.5 * b + 1.0))
            path = [start, complex(start.real, height), complex(z.real, height), z]
    s, ok = _newton(x, path[0], s0, tol_of(path[0]))
    if not (ok and _on_sheet(curve, s, sheet)):
        raise NonConvergence(f"could not start continuation at {path[0]}")
    s = _march(curve, path, s, sheet, tol_of)
    s, ok = _newton(x, z, s, tol)
    if not ok:
        raise NonConvergence(f"Newton did not reach tolerance at z = {z}")
    if not _on_sheet(curve, s, sheet):
        raise WrongSheet(f"root {s} for z = {z} is not on the {sheet} sheet")
    return complex(s.real, 0.0) if real else s


def _invert(curve, z, sheet):
    if np.ndim(z) == 0:
        return _invert_scalar(curve, complex(z), sheet)
    arr = np.asarray(z, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    for idx, val in np.ndenumerate(arr):
        out[idx] = _invert_scalar(curve, complex(val), sheet)
    return out


def invert_outer(curve: SpectralCurve, z):
    """I_1(z): the preimage of z outside the closure of D, for z off [0, b]."""
    return _invert(curve, z, OUTER)


def invert_inner(curve: SpectralCurve, z):
    """I_2(z): the preimage of z in D minus [0, 1], for z right of the parabola and off [0, b]."""
    return _invert(curve, z, INNER)


def continue_inverse(curve: SpectralCurve, zs: np.ndarray, sheet: str) -> np.ndarray:
    """Inverse images of an ordered chain of nearby points, each seeded by the previous."""
    zs = np.asarray(zs, dtype=complex)
    out = np.empty_like(zs)
    tol_of = (lambda w: curve.ctx.rel_tol * max(1.0, abs(w)))
    s = _invert_scalar(curve, complex(zs[0]), sheet)
    out[0] = s
    for i in range(1, zs.size):
        z = complex(zs[i])
        cand, ok = _newton(curve.x, z, s, tol_of(z), max_iter=20)
        if not (ok and _on_sheet(curve, cand, sheet)):
            cand = _march(curve, [complex(zs[i - 1]), z], s, sheet, tol_of)
            cand, ok = _newton(curve.x, z, cand, tol_of(z))
            if not ok:
                raise NonConvergence(f"continuation failed at z = {z}")
        out[i] = s = cand
    return out


# ---------------------------------------------------------------------------
# Contours sandwiching the curve
# ---------------------------------------------------------------------------

def ellipse_radius(curve: SpectralCurve, margin: float = 0.5) -> float:
    """Radius rho of a Joukowski ellipse around [0, b] that keeps a margin from the parabola.

    The ellipse ``z = -b (w - 1)^2 / (4 w)``, ``|w| = rho``, has its left
    vertex at ``-b (rho - 1)^2 / (4 rho)``; this is placed at ``margin`` times
    the distance to the parabola vertex ``-pi^2/4``.
    """
    target = margin * math.pi ** 2 / curve.b
    # (rho - 1)^2 / rho = target
    q = 2.0 + target
    rho = 0.5 * (q + math.sqrt(q * q - 4.0))
    return min(rho, 2.0)


def ellipse_points(b: float, rho: float, n: int):
    """Midpoint-rule nodes of the ellipse around [0, b] with dz weights (counterclockwise)."""
    t = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    w = rho * np.exp(1j * t)
    z = -b * (w - 1.0) ** 2 / (4.0 * w)
    dz_dw = -b * (w - 1.0) * (w + 1.0) / (4.0 * w * w)
    dz = dz_dw * 1j * w * (2.0 * np.pi / n)
    if 0.5 * np.sum((np.conj(z) * dz).imag) < 0:
        z, dz = z[::-1], -dz[::-1]
    return z, dz


@dataclass(frozen=True)
class PulledBackContour:
    """A contour in the s-plane obtained as the preimage of an ellipse.

    ``z_nodes`` holds the ellipse points so integrands depending on
    ``scriptJ(s)`` can use them directly.
    """

    samples: ContourSamples
    z_nodes: np.ndarray
    sheet: str
    rho: float


def pulled_back_ellipse(curve: SpectralCurve, sheet: str, n: int = 256,
                        rho: Optional[float] = None) -> PulledBackContour:
    """Preimage of a Joukowski ellipse under the outer (gamma') or inner (gamma'') inverse."""
    rho = ellipse_radius(curve) if rho is None else rho
    z, dz = ellipse_points(curve.b, rho, n)
    if sheet == INNER and not np.all(in_parabola_region(z)):
        raise DomainError("ellipse leaves the inner image region; reduce rho")
    s = continue_inverse(curve, z, sheet)
    ds = dz / scriptJ_deriv(curve.x, s)
    if 0.5 * np.sum((np.conj(s) * ds).imag) < 0:
        ds = -ds  # the inner sheet reverses orientation
    return PulledBackContour(ContourSamples(s, ds, True), z, sheet, rho)
