"""The map f(x) = sinh^2(sqrt x), principal arcosh, Airy/Bessel functions and
the model Airy and Bessel parametrix matrices."""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .errors import BranchCut, OnContour

ArrayLike = Union[complex, float, np.ndarray]

OMEGA = cmath.exp(2j * math.pi / 3)
_AIRY_CONST = math.sqrt(2 * math.pi) * cmath.exp(-0.25j * math.pi)
_SERIES_RADIUS = 0.5

# f(z) = sum_{k>=1} 4^k z^k / (2 (2k)!),  f'(z) = sum_{k>=1} k 4^k z^(k-1) / (2 (2k)!)
_F_COEFFS = np.array([4.0 ** k / (2.0 * math.factorial(2 * k)) for k in range(1, 24)])
_DF_COEFFS = np.array([k * 4.0 ** k / (2.0 * math.factorial(2 * k)) for k in range(1, 24)])


def _series(coeffs: np.ndarray, z, shift: int):
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc * z ** shift


def _as_complex_array(z):
    scalar = np.ndim(z) == 0
    return np.atleast_1d(np.asarray(z, dtype=complex)), scalar


def map_f(z: ArrayLike) -> ArrayLike:
    """f(z) = sinh^2(sqrt z), an entire function of z."""
    arr, scalar = _as_complex_array(z)
    small = np.abs(arr) < _SERIES_RADIUS
    out = np.empty_like(arr)
    out[small] = _series(_F_COEFFS, arr[small], 1)
    # sinh^2 is even in sqrt(z), so the branch of the root is irrelevant
    out[~small] = np.sinh(np.sqrt(arr[~small])) ** 2
    if np.isrealobj(z) or (np.ndim(z) == 0 and isinstance(z, (int, float))):
        out = out.real
    return out[0] if scalar else out


def map_f_deriv(z: ArrayLike) -> ArrayLike:
    """f'(z) = sinh(2 sqrt z) / (2 sqrt z), equal to 1 at the origin."""
    arr, scalar = _as_complex_array(z)
    small = np.abs(arr) < _SERIES_RADIUS
    out = np.empty_like(arr)
    out[small] = _series(_DF_COEFFS, arr[small], 0)
    w = 2.0 * np.sqrt(arr[~small])
    out[~small] = np.sinh(w) / w
    if np.isrealobj(z) or (np.ndim(z) == 0 and isinstance(z, (int, float))):
        out = out.real
    return out[0] if scalar else out


def dmpk_h(z: ArrayLike) -> ArrayLike:
    """The DMPK weight factor h = (f')^(1/2), positive on [0, inf)."""
    return np.sqrt(map_f_deriv(z))


def arcosh_principal(z: ArrayLike) -> ArrayLike:
    """arcosh mapping C minus (-inf, 1] one-to-one onto {Re > 0, |Im| < pi}.

    Raises:
        BranchCut: some input lies on (-inf, 1]; callers needing a value
            there must pass an explicit one-sided point.
    """
    arr, scalar = _as_complex_array(z)
    if np.any((arr.imag == 0.0) & (arr.real <= 1.0)):
        raise BranchCut("arcosh_principal is not defined on (-inf, 1]")
    out = np.arccosh(arr)
    return out[0] if scalar else out


def airy_ai(z: ArrayLike) -> ArrayLike:
    return special.airy(z)[0]


def airy_ai_deriv(z: ArrayLike) -> ArrayLike:
    return special.airy(z)[1]


_KINDS = ("J", "I", "K", "H1", "H2")


def _order(alpha: float) -> float:
    # the AMOS routines return nan at subnormal orders; the functions are
    # smooth in the order so snapping to 0 is exact at double precision
    return 0.0 if abs(alpha) < sys.float_info.min else float(alpha)


def bessel(kind: str, alpha: float, z: ArrayLike, derivative: bool = False) -> ArrayLike:
    """Bessel function of the given kind at complex argument.

    ``kind`` is one of J, I, K, H1, H2.  All use the principal branch with the
    cut on (-inf, 0]; K and the Hankel functions (and J, I of non-integer
    order) raise :class:`BranchCut` there.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown Bessel kind {kind!r}")
    arr = np.asarray(z, dtype=complex)
    alpha = _order(alpha)
    integer_order = float(alpha).is_integer()
    needs_cut = kind in ("K", "H1", "H2") or not integer_order
    if needs_cut and np.any((arr.imag == 0.0) & (arr.real <= 0.0)):
        if not (kind in ("J", "I") and np.all(arr.real == 0.0) and alpha >= 0):
            raise BranchCut(f"{kind}_{alpha} evaluated on its branch cut")
    table = {
        "J": (special.jv, special.jvp),
        "I": (special.iv, special.ivp),
        "K": (special.kv, special.kvp),
        "H1": (special.hankel1, special.h1vp),
        "H2": (special.hankel2, special.h2vp),
    }
    fn = table[kind][1 if derivative else 0]
    out = fn(alpha, arr)
    return out if np.ndim(z) else complex(out)


@dataclass(frozen=True)
class ParametrixMatrix:
    entries: np.ndarray
    sector: str

    def det(self) -> complex:
        m = self.entries
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def inverse(self) -> np.ndarray:
        m = self.entries
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / self.det()


_RAY_TOL = 1e-14


def _on_ray(arg: float, rays) -> bool:
    return any(abs(arg - r) < _RAY_TOL for r in rays)


def _airy_y(zeta: complex):
    """(y0, y0', y1, y1', y2, y2')."""
    ai0, aip0, _, _ = special.airy(zeta)
    ai1, aip1, _, _ = special.airy(OMEGA * zeta)
    ai2, aip2, _, _ = special.airy(OMEGA ** 2 * zeta)
    c = _AIRY_CONST
    return (c * ai0, c * aip0,
            c * OMEGA * ai1, c * OMEGA ** 2 * aip1,
            c * OMEGA ** 2 * ai2, c * OMEGA * aip2)


def psi_airy(zeta: complex) -> ParametrixMatrix:
    """Sector-wise Airy model matrix; rays at arg 0, +-2pi/3 and pi."""
    zeta = complex(zeta)
    if zeta == 0:
        raise OnContour("the Airy contour passes through the origin")
    arg = cmath.phase(zeta)
    if zeta.imag == 0.0 or _on_ray(arg, (0.0, 2 * math.pi / 3, -2 * math.pi / 3, math.pi, -math.pi)):
        raise OnContour(f"zeta = {zeta} lies on the Airy contour")
    y0, dy0, y1, dy1, y2, dy2 = _airy_y(zeta)
    if 0 < arg < 2 * math.pi / 3:
        m, sector = [[y0, -y2], [dy0, -dy2]], "I"
    elif arg > 2 * math.pi / 3:
        m, sector = [[-y1, -y2], [-dy1, -dy2]], "II"
    elif arg < -2 * math.pi / 3:
        m, sector = [[-y2, y1], [-dy2, dy1]], "III"
    else:
        m, sector = [[y0, y1], [dy0, dy1]], "IV"
    return ParametrixMatrix(np.array(m, dtype=complex), sector)


def psi_bessel(alpha: float, zeta: complex) -> ParametrixMatrix:
    """Sector-wise Bessel model matrix of order ``alpha``; rays at +-2pi/3, pi."""
    zeta, alpha = complex(zeta), _order(alpha)
    if zeta == 0:
        raise OnContour("the Bessel contour passes through the origin")
    arg = cmath.phase(zeta)
    if (zeta.imag == 0.0 and zeta.real < 0) or _on_ray(
            arg, (2 * math.pi / 3, -2 * math.pi / 3, math.pi, -math.pi)):
        raise OnContour(f"zeta = {zeta} lies on the Bessel contour")
    prefactor = np.array([[1.0, 0.0], [0.0, -2j * math.pi * zeta]])
    if abs(arg) < 2 * math.pi / 3:
        r = cmath.sqrt(zeta)
        w0 = special.iv(alpha, 2 * r)
        w1 = -1j / math.pi * special.kv(alpha, 2 * r)
        dw0 = special.ivp(alpha, 2 * r) / r
        dw1 = -1j / math.pi * special.kvp(alpha, 2 * r) / r
        core, sector = np.array([[w0, w1], [dw0, dw1]]), "I"
    else:
        r = cmath.sqrt(-zeta)
        w2 = 0.5 * special.hankel1(alpha, 2 * r)
        w3 = 0.5 * special.hankel2(alpha, 2 * r)
        dw2 = -0.5 * special.h1vp(alpha, 2 * r) / r
        dw3 = -0.5 * special.h2vp(alpha, 2 * r) / r
        phase = np.exp(0.5j * alpha * math.pi * np.array([1.0, -1.0]))
        if arg > 0:
            core, sector = np.array([[w2, -w3], [dw2, -dw3]]) * phase, "II"
        else:
            core, sector = np.array([[w3, w2], [dw3, dw2]]) * np.conj(phase), "III"
    return ParametrixMatrix(prefactor @ core, sector)


def bessel_w(alpha: float, zeta: complex):
    """The four scalar solutions (w0, w1, w2, w3) at ``zeta``."""
    zeta, alpha = complex(zeta), _order(alpha)
    r = cmath.sqrt(zeta)
    rm = cmath.sqrt(-zeta)
    return (complex(special.iv(alpha, 2 * r)),
            complex(-1j / math.pi * special.kv(alpha, 2 * r)),
            complex(0.5 * special.hankel1(alpha, 2 * rm)),
            complex(0.5 * special.hankel2(alpha, 2 * rm)))


# Jump data of the two model problems: (ray angle, orientation, jump matrix).
# Orientation +1 means the ray is traversed away from the origin; the "+"
# side is on the left.
AIRY_RAYS = (
    (0.0, 1, ((1, 1), (0, 1))),
    (2 * math.pi / 3, -1, ((1, 0), (1, 1))),
    (-2 * math.pi / 3, -1, ((1, 0), (1, 1))),
    (math.pi, -1, ((0, 1), (-1, 0))),
)


def bessel_rays(alpha: float):
    e = cmath.exp(1j * math.pi * alpha)
    return (
        (2 * math.pi / 3, 1, ((1, 0), (e, 1))),
        (-2 * math.pi / 3, 1, ((1, 0), (1 / e, 1))),
        (math.pi, 1, ((0, 1), (-1, 0))),
    )


def observed_jump(model, theta: float, radius: float, orientation: int,
                  eps: float = 1e-6) -> np.ndarray:
    """Psi_-^{-1} Psi_+ on a ray, from one-sided values at eps and eps/2 (Richardson)."""
    direction = cmath.exp(1j * theta) * orientation
    point = radius * cmath.exp(1j * theta)

    def at(offset):
        plus = model(point + 1j * offset * direction)
        minus = model(point - 1j * offset * direction)
        return minus.inverse() @ plus.entries

    return 2.0 * at(0.5 * eps) - at(eps)


def model_checks(alpha: float = 0.0, points_per_ray: int = 20, radii=(0.2, 3.0)):
    """Determinants, jumps and the two connection identities of the model problems."""
    from .numerics import CheckResult

    rs = np.linspace(radii[0], radii[1], points_per_ray)
    angles = np.linspace(-math.pi, math.pi, points_per_ray + 1)[:-1] + 0.1
    samples = [r * cmath.exp(1j * a) for r, a in zip(rs, angles)]

    def bessel_model(z):
        return psi_bessel(alpha, z)

    det_ai = max(abs(psi_airy(z).det() - 1.0) for z in samples)
    det_be = max(abs(bessel_model(z).det() - 1.0) for z in samples)
    jump_ai = max(float(np.abs(observed_jump(psi_airy, th, r, o) - np.array(J)).max())
                  for th, o, J in AIRY_RAYS for r in rs)
    jump_be = max(float(np.abs(observed_jump(bessel_model, th, r, o) - np.array(J)).max())
                  for th, o, J in bessel_rays(alpha) for r in rs)
    sum_ai = max(abs(complex(airy_ai(z)) + OMEGA * complex(airy_ai(OMEGA * z))
                     + OMEGA ** 2 * complex(airy_ai(OMEGA ** 2 * z))) for z in samples)
    # in the upper half plane the connection carries the phase e^{i alpha pi/2},
    # which is 1 at alpha = 0
    phase = cmath.exp(0.5j * math.pi * alpha)
    upper = [r * cmath.exp(1j * a) for r, a in zip(rs, np.linspace(0.7 * math.pi, 0.99 * math.pi, len(rs)))]
    sum_be = 0.0
    for z in upper:
        w0, _, w2, w3 = bessel_w(alpha, z)
        sum_be = max(sum_be, abs(phase * (w2 + w3) - w0) / max(1.0, abs(w0)))
    return [
        CheckResult("airy det = 1", det_ai, 1e-12),
        CheckResult("bessel det = 1", det_be, 1e-12),
        CheckResult("airy jumps", jump_ai, 1e-10),
        CheckResult("bessel jumps", jump_be, 1e-10),
        CheckResult("airy three-term sum = 0", sum_ai, 1e-12),
        CheckResult("bessel w2 + w3 = w0", sum_be, 1e-12),
    ]
