"""Equilibrium measure of the two-kernel energy with external field V.

The measure lives on ``[0, b]`` with ``b = b_of(c)`` and the parameter ``c``
fixed by ``F(c) = 2``.  Its density is reconstructed from the log kernel

    psi(x) = 1/(2 pi^2 sqrt x) int_0^b U'(u) F_c(u; x) du,   U(u) = V'(u) sqrt u.

Everything downstream uses the angle ``theta`` with ``y = b sin^2(theta/2)``:
the density times ``sqrt(x/(b-x))`` (called ``phi_hat`` here) is smooth on the
closed interval and is stored as a Chebyshev series in ``2x/b - 1 = -cos theta``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import fft

from . import kernels
from .conformal import SpectralCurve, build_curve
from .errors import (
    AnalyticityViolation,
    BracketFailure,
    BranchCut,
    CoincidentPoints,
    ConfigError,
    DomainError,
    NonConvergence,
    OutsideRadius,
)
from .numerics import (
    DEFAULT_DOUBLE,
    PrecisionContext,
    find_root,
    integrate_adaptive,
    integrate_contour,
    integrate_log_singular,
    integrate_tanh_sinh,
    tanh_sinh,
)
from .specialfn import map_f

# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    """External field V with its first two derivatives.

    ``radius`` bounds the disc around the origin on which V is analytic;
    polynomials use ``inf``.  ``coeffs`` (for ``kind == "poly"``) lists
    ``a_1, a_2, ...`` of ``V = sum a_k x^k``.
    """

    kind: str
    V: Callable = field(repr=False)
    dV: Callable = field(repr=False)
    d2V: Callable = field(repr=False)
    M: Optional[float] = None
    coeffs: Tuple[float, ...] = ()
    radius: float = math.inf

    @classmethod
    def linear(cls, M: float) -> "Potential":
        if not M > 0:
            raise DomainError(f"linear potential needs M > 0, got {M}")
        M = float(M)
        return cls("linear", lambda z: z / M, lambda z: 0 * z + 1.0 / M,
                   lambda z: 0 * z, M=M, coeffs=(1.0 / M,))

    @classmethod
    def poly(cls, coeffs: Sequence[float]) -> "Potential":
        a = tuple(float(v) for v in coeffs)
        if not a or all(v == 0 for v in a):
            raise DomainError("a polynomial potential needs a nonzero coefficient")
        p = np.polynomial.Polynomial((0.0,) + a)
        dp, d2p = p.deriv(1), p.deriv(2)
        return cls("poly", p, dp, d2p, coeffs=a)

    @classmethod
    def general(cls, V: Callable, dV: Callable, d2V: Callable,
                radius: float = math.inf) -> "Potential":
        return cls("general", V, dV, d2V, radius=radius)

    @classmethod
    def from_spec(cls, spec: str) -> "Potential":
        """Parse ``linear:M=<v>`` or ``poly:a1,a2,...``."""
        spec = spec.strip()
        m = re.fullmatch(r"linear:M=([^,\s]+)", spec)
        try:
            if m:
                return cls.linear(float(m.group(1)))
            if spec.startswith("poly:"):
                parts = [p for p in spec[5:].split(",")]
                return cls.poly([float(p) for p in parts])
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"bad potential spec {spec!r}: {exc}") from None
        raise ConfigError(f"bad potential spec {spec!r}; expected linear:M=<v> or poly:a1,a2,...")

    def U(self, x):
        return self.dV(x) * np.sqrt(x)

    def dU(self, x):
        return self.d2V(x) * np.sqrt(x) + self.dV(x) / (2.0 * np.sqrt(x))

    def theta_weight(self, y, b: float):
        """``U'(y) dy/dtheta`` at ``y = b sin^2(theta/2)``, written without the 1/sqrt(y)."""
        # U'(y) (b/2) sin(theta) = sqrt(b) cos(theta/2) (V'(y)/2 + y V''(y))
        cos_half = np.sqrt(np.clip(1.0 - y / b, 0.0, 1.0))
        return math.sqrt(b) * cos_half * (0.5 * self.dV(y) + y * self.d2V(y))

    def check_admissible(self, log_h: Callable = None) -> None:
        """Growth at infinity and the one-cut condition U' > 0 on a log grid."""
        grid = np.logspace(-6, 6, 121)
        du = np.asarray(self.dU(grid), dtype=float)
        if not np.all(du > 0):
            raise DomainError("U'(x) = (V'(x) sqrt x)' is not positive everywhere")
        pts = np.array([1e2, 1e3, 1e4])
        lh = np.sqrt(pts) if log_h is None else np.asarray(log_h(pts))
        ratio = np.asarray(self.V(pts), dtype=float) / np.maximum(lh, np.sqrt(pts) + 1.0)
        # the ratio must diverge; at finite x all one can ask is steady growth
        if not np.all(ratio[1:] > 1.5 * ratio[:-1]):
            raise DomainError("V does not outgrow max(log h, sqrt x + 1)")


# ---------------------------------------------------------------------------
# The parameter c
# ---------------------------------------------------------------------------

def _quick_curve(x: float) -> SpectralCurve:
    return build_curve(x, n_nodes=16)


def F_of(x: float, V: Potential, ctx: PrecisionContext = DEFAULT_DOUBLE,
         curve: Optional[SpectralCurve] = None) -> float:
    """(1/2 pi i) of the loop integral of (x + 2A(xi)) V'(scriptJ(xi)) / (xi - 1)."""
    curve = _quick_curve(x) if curve is None else curve
    if not curve.b < V.radius:
        raise AnalyticityViolation(f"V is analytic only for |z| < {V.radius}, contour image reaches {curve.b}")
    x = curve.x

    def integrand(s):
        k = x + 2.0 * kernels.scaled_arctanh(s)
        # scriptJ maps the loop onto [0, b]
        y = np.clip(curve.scriptJ(s).real, 0.0, curve.b)
        return k * V.dV(y) / (s - 1.0)

    val = integrate_contour(integrand, curve.closed, ctx) / (2j * math.pi)
    if abs(val.imag) > max(ctx.tol(abs(val.real)), 1e-10):
        raise NonConvergence(f"F({x}) has imaginary residue {val.imag:.3g}")
    return val.real


def solve_c(V: Potential, ctx: PrecisionContext = DEFAULT_DOUBLE) -> float:
    """The unique root of F(x) = 2, bracketed by doubling/halving from x = 1."""
    if V.kind in ("linear", "poly"):
        V.check_admissible()
    lo = hi = 1.0
    f_lo = f_hi = F_of(1.0, V, ctx) - 2.0
    for _ in range(80):
        if f_lo <= 0.0 <= f_hi:
            break
        if f_hi < 0.0:
            lo, f_lo = hi, f_hi
            hi *= 2.0
            f_hi = F_of(hi, V, ctx) - 2.0
        else:
            hi, f_hi = lo, f_lo
            lo *= 0.5
            f_lo = F_of(lo, V, ctx) - 2.0
    else:
        raise BracketFailure("no sign change of F(x) - 2 found")
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    # F itself is only known to rel_tol, so that is the attainable residual
    root_ctx = PrecisionContext.double(rel_tol=ctx.rel_tol, abs_tol=max(ctx.abs_tol, 2.0 * ctx.rel_tol))
    return find_root(lambda t: F_of(t, V, ctx) - 2.0, (lo, hi), "bisect", root_ctx)


# ---------------------------------------------------------------------------
# The density
# ---------------------------------------------------------------------------

def _sqrt_upper(s):
    """sqrt with the root in the upper half plane for Im s > 0."""
    return np.sqrt(s)


def F_kernel(curve: SpectralCurve, u, xi):
    """The positive log kernel F_c(u; xi) for u, xi in (0, b)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    u, xi = np.broadcast_arrays(u, xi)
    if np.any(u == xi):
        raise CoincidentPoints("F kernel is singular at u = xi")
    a = _sqrt_upper(curve.boundary_values(u.ravel())[0]).reshape(u.shape)
    e = _sqrt_upper(curve.boundary_values(xi.ravel())[0]).reshape(u.shape)
    ab = np.conj(a)
    out = np.log(np.abs((a + e) * (ab - e) / ((a - e) * (ab + e))))
    return out if out.size > 1 else float(out[0])


_TS_CUTOFF = 1e-18


def _phi_hat_direct(curve: SpectralCurve, V: Potential, theta_x: np.ndarray, level: int) -> np.ndarray:
    """phi_hat = psi sqrt(x/(b-x)) at x = b sin^2(theta_x/2) using one tanh-sinh level."""
    b = curve.b
    left, gap, w = tanh_sinh(level, _TS_CUTOFF)
    lower = left <= 0.5
    tx = theta_x[:, None]
    # [0, theta_x]: nodes measured from whichever end is nearer
    th_l = np.where(lower, tx * left, tx - tx * gap)
    w_l = w * tx
    # [theta_x, pi]
    span = np.pi - tx
    th_r = np.where(lower, tx + span * left, np.pi - span * gap)
    w_r = w * span
    theta = np.concatenate([th_l, th_r], axis=1)
    weights = np.concatenate([w_l, w_r], axis=1)
    y = b * np.sin(0.5 * theta) ** 2
    inside = (y > 0.0) & (y < b) & (theta != tx)
    y_safe = np.where(inside, y, 0.5 * b)
    s_nodes = kernels.gamma1_solve(curve.x, curve.vstar, y_safe.ravel()).reshape(y.shape)
    sq_u = np.sqrt(s_nodes)
    x_pts = b * np.sin(0.5 * theta_x) ** 2
    sq_x = np.sqrt(kernels.gamma1_solve(curve.x, curve.vstar, x_pts))
    wt = np.where(inside, weights * V.theta_weight(y_safe, b), 0.0)
    # nodes that round onto the singular point carry negligible weight
    hit = sq_u == sq_x[:, None]
    if np.any(hit):
        wt = np.where(hit, 0.0, wt)
        sq_u = np.where(hit, sq_u + 1.0, sq_u)
    sums = kernels.log_kernel_sums(sq_u, wt, sq_x)
    # sqrt(b - x) = sqrt(b) cos(theta_x/2)
    return sums / (2.0 * math.pi ** 2 * math.sqrt(b) * np.cos(0.5 * theta_x))


def _phi_hat(curve, V, theta_x, ctx, min_level=4, max_level=9):
    prev = _phi_hat_direct(curve, V, theta_x, min_level)
    for level in range(min_level + 1, max_level + 1):
        cur = _phi_hat_direct(curve, V, theta_x, level)
        if np.max(np.abs(cur - prev)) <= max(ctx.rel_tol, 1e-13) * np.max(np.abs(cur)):
            return cur
        prev = cur
    raise NonConvergence("density quadrature did not settle")


def density_psi(c: float, curve: Optional[SpectralCurve], V: Potential, x,
                ctx: PrecisionContext = DEFAULT_DOUBLE):
    """psi(x) by direct quadrature of the log-kernel representation."""
    curve = build_curve(c, n_nodes=16) if curve is None else curve
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(arr > 0)) or np.any(~(arr < curve.b)):
        raise DomainError("density_psi needs 0 < x < b")
    theta_x = 2.0 * np.arcsin(np.sqrt(arr / curve.b))
    vals = _phi_hat(curve, V, theta_x, ctx) * np.sqrt((curve.b - arr) / arr)
    return vals if np.ndim(x) else float(vals[0])


def psi_linear_closed(curve: SpectralCurve, x):
    """Closed form (1/pi) Im sqrt(I_+(x)/x) of the linear-potential density."""
    arr = np.asarray(x, dtype=float)
    ip = curve.boundary_values(np.atleast_1d(arr))[0]
    out = np.sqrt(ip).imag / (math.pi * np.sqrt(np.atleast_1d(arr)))
    return out if arr.ndim else float(out[0])


# ---------------------------------------------------------------------------
# Chebyshev representation and the measure
# ---------------------------------------------------------------------------

def _cheb_coeffs(values: np.ndarray) -> np.ndarray:
    """Coefficients from samples at first-kind nodes cos(pi (j + 1/2)/N)."""
    c = fft.dct(values, type=2) / values.size
    c[0] *= 0.5
    return c


_TAIL = 2e-14
# a tail below this that stops shrinking under doubling is quadrature noise
_NOISE_TAIL = 1e-12


def _fit_phi_hat(curve, V, ctx, n_start=32, n_max=4096):
    n = n_start
    prev_tail = math.inf
    while True:
        alpha = np.pi * (np.arange(n) + 0.5) / n
        theta_x = np.pi - alpha
        vals = _phi_hat(curve, V, theta_x, ctx)
        coeffs = _cheb_coeffs(vals)
        tail = np.max(np.abs(coeffs[-max(4, n // 8):])) / np.max(np.abs(coeffs))
        plateau = tail <= _NOISE_TAIL and tail > 0.25 * prev_tail
        if tail <= _TAIL or plateau:
            x_nodes = curve.b * np.cos(0.5 * alpha) ** 2
            return coeffs, x_nodes, vals
        if n >= n_max:
            raise NonConvergence(f"density interpolant unresolved at {n} nodes (tail {tail:.3g})")
        prev_tail = tail
        n *= 2


def _theta_of(x, b):
    return 2.0 * np.arcsin(np.sqrt(np.clip(np.asarray(x, dtype=float) / b, 0.0, 1.0)))


def _log_abs_diff_f(x, y):
    """log|f(x) - f(y)| for x, y >= 0 via sinh(a-c) sinh(a+c)."""
    a, c = np.sqrt(x), np.sqrt(y)
    return _log_sinh(np.abs(a - c)) + _log_sinh(a + c)


def _log_sinh(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        small = t < 20.0
        out = np.empty_like(t)
        out[small] = np.log(np.sinh(t[small]))
        out[~small] = t[~small] - math.log(2.0) + np.log1p(-np.exp(-2.0 * t[~small]))
    return out


def log_f(z):
    """Principal log f(z) for complex z, computed without overflow."""
    z = complex(z)
    r = cmath.sqrt(z)
    if r.real < 0:
        r = -r
    if r.real < 20.0:
        return cmath.log(cmath.sinh(r) ** 2)
    # 2 log sinh r = 2 r - 2 log 2 + 2 log(1 - e^{-2r}), then fold into (-pi, pi]
    val = 2.0 * r - 2.0 * math.log(2.0) + 2.0 * cmath.log(1.0 - cmath.exp(-2.0 * r))
    im = math.remainder(val.imag, 2.0 * math.pi)
    return complex(val.real, im)


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Equilibrium measure on [0, b] with its constants.

    ``psi_grid`` holds the Chebyshev nodes and density values used to build
    the interpolant ``coeffs`` of ``phi_hat = psi sqrt(x/(b - x))``.
    """

    c: float
    b: float
    psi_grid: Tuple[np.ndarray, np.ndarray] = field(repr=False)
    psi0: float
    psib: float
    ell: float
    curve: SpectralCurve = field(repr=False)
    potential: Potential = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    ctx: PrecisionContext = field(default=DEFAULT_DOUBLE, repr=False)

    # -- density ------------------------------------------------------------
    def phi_hat(self, x):
        return np.polynomial.chebyshev.chebval(2.0 * np.asarray(x, dtype=float) / self.b - 1.0,
                                               self.coeffs)

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)) or np.any(~(x < self.b)):
            raise DomainError("psi is evaluated on (0, b)")
        return self.phi_hat(x) * np.sqrt((self.b - x) / x)

    def _mass_series(self):
        d = self.coeffs * (-1.0) ** np.arange(self.coeffs.size)
        e = np.zeros(d.size + 1)
        e[: d.size] += d
        e[1:] += 0.5 * d
        e[: d.size - 1] += 0.5 * d[1:]
        # k = 0: cos(theta) cos(0) contributes its full d_0 to m = 1
        e[1] += 0.5 * d[0]
        return e

    def total_mass(self) -> float:
        return 0.5 * self.b * math.pi * self._mass_series()[0]

    def mass_right(self, x):
        """mu([x, b])."""
        th = _theta_of(x, self.b)
        e = self._mass_series()
        m = np.arange(1, e.size)
        th_arr = np.atleast_1d(th)
        val = e[0] * (math.pi - th_arr) - np.sum(e[1:] * np.sin(np.outer(th_arr, m)) / m, axis=1)
        out = 0.5 * self.b * val
        return out if np.ndim(x) else float(out[0])

    # -- quadrature in theta -----------------------------------------------
    def _theta_measure(self, theta):
        """dmu/dtheta = (b/2) phi_hat (1 + cos theta)."""
        y = self.b * np.sin(0.5 * theta) ** 2
        return 0.5 * self.b * self.phi_hat(y) * (1.0 + np.cos(theta)), y

    def integrate(self, fn: Callable, singular_at: Optional[float] = None) -> float:
        """int fn(y) dmu(y); ``singular_at`` marks a log singularity at y."""
        def g(theta):
            dm, y = self._theta_measure(theta)
            return fn(y) * dm

        if singular_at is None or not 0.0 < singular_at < self.b:
            return integrate_tanh_sinh(g, 0.0, math.pi, self.ctx).value
        return integrate_log_singular(g, float(_theta_of(singular_at, self.b)), 0.0, math.pi,
                                      self.ctx).value

    def log_potential(self, x: float) -> float:
        """L(x) = int log|x - y| dmu(y) for real x."""
        x = float(x)
        with np.errstate(divide="ignore"):
            return self.integrate(lambda y: np.log(np.abs(x - y)), x)

    def log_potential_f(self, x: float) -> float:
        """Ltilde(x) = int log|f(x) - f(y)| dmu(y) for real x >= 0."""
        x = float(x)
        if x < 0:
            fx = float(map_f(x))
            return self.integrate(lambda y: np.log(np.abs(fx - map_f(y))))
        with np.errstate(divide="ignore"):
            return self.integrate(lambda y: _log_abs_diff_f(x, y), x)

    # -- g-functions --------------------------------------------------------
    def _complex_quad(self, fn: Callable) -> complex:
        def g(theta):
            dm, y = self._theta_measure(theta)
            return fn(y) * dm

        return complex(integrate_adaptive(g, 0.0, math.pi, self.ctx).value)

    def g(self, z) -> complex:
        """g(z) = int log(z - y) dmu(y); boundary values from above on (-inf, b]."""
        z = complex(z)
        if z.imag == 0.0 and z.real <= self.b:
            x = z.real
            if 0.0 < x < self.b:
                return complex(self.log_potential(x), math.pi * self.mass_right(x))
            if x <= 0.0:
                return complex(self.log_potential(x), math.pi)
            return complex(self.log_potential(x), 0.0)
        return self._complex_quad(lambda y: np.log(z - y))

    def gtilde(self, z) -> complex:
        """gtilde(z) = int log(f(z) - f(y)) dmu(y); boundary values from above on the cut."""
        z = complex(z)
        if z.imag == 0.0:
            x = z.real
            if x <= -math.pi ** 2 / 4:
                raise BranchCut("gtilde needs z right of the parabola")
            if 0.0 < x < self.b:
                return complex(self.log_potential_f(x), math.pi * self.mass_right(x))
            if x <= 0.0:
                return complex(self.log_potential_f(x), math.pi)
            return complex(self.log_potential_f(x), 0.0)
        lfz = log_f(z)
        fz = cmath.exp(lfz) if lfz.real < 700 else None

        def integrand(y):
            if fz is not None:
                return np.log(fz - map_f(y))
            # f(z) dominates: log f(z) + log(1 - f(y)/f(z))
            ratio = np.exp(2.0 * _log_sinh(np.sqrt(y)) - lfz)
            return lfz + np.log1p(-ratio)

        val = self._complex_quad(integrand)
        return val

    def phi(self, z) -> complex:
        z = complex(z)
        return self.g(z) + self.gtilde(z) - complex(self.potential.V(z)) - self.ell

    def phi_real(self, x: float) -> float:
        """phi on the real axis where it is real: x > b (and x < 0 up to 2 pi i)."""
        x = float(x)
        return (self.log_potential(x) + self.log_potential_f(x)
                - float(self.potential.V(x)) - self.ell)

    # -- local conformal maps -------------------------------------------------
    def fb_radius(self) -> float:
        return 0.25 * self.b

    def f0_radius(self) -> float:
        return 0.25 * min(self.b, math.pi ** 2 / 4)

    def local_map_b(self, z) -> complex:
        """f_b(z) = (-3 phi(z)/4)^{2/3}, continued analytically through z = b."""
        z = complex(z)
        if abs(z - self.b) > self.fb_radius():
            raise OutsideRadius(f"|z - b| exceeds {self.fb_radius():.3g}")
        if z == self.b:
            return 0.0j
        scale = (math.pi * self.psib) ** (2.0 / 3.0)
        if z.imag == 0.0:
            x = z.real
            if x > self.b:
                return complex((-0.75 * self.phi_real(x)) ** (2.0 / 3.0))
            return complex(-((1.5 * math.pi * self.mass_right(x)) ** (2.0 / 3.0)))
        if z.imag < 0:
            return self.local_map_b(z.conjugate()).conjugate()
        lead = -(4.0 * math.pi / 3.0) * self.psib * (z - self.b) ** 1.5
        return scale * (z - self.b) * (self.phi(z) / lead) ** (2.0 / 3.0)

    def local_map_0(self, z) -> complex:
        """f_0(z) = (phi(z) -+ 2 pi i)^2/16, the sign chosen so f_0 is analytic at 0."""
        z = complex(z)
        if abs(z) > self.f0_radius():
            raise OutsideRadius(f"|z| exceeds {self.f0_radius():.3g}")
        if z == 0:
            return 0.0j
        if z.imag == 0.0:
            x = z.real
            if 0.0 < x < self.b:
                return complex(-(math.pi ** 2 / 4) * (1.0 - self.mass_right(x)) ** 2)
            # phi_+ = (real part) + 2 pi i on the negative axis
            return complex(self.phi_real(x) ** 2 / 16.0)
        shift = 2j * math.pi if z.imag > 0 else -2j * math.pi
        return (self.phi(z) - shift) ** 2 / 16.0


def build_measure(V: Potential, ctx: PrecisionContext = DEFAULT_DOUBLE,
                  c: Optional[float] = None) -> EquilibriumMeasure:
    """Solve for c, fit the density and fix the Lagrange constant at b."""
    c = solve_c(V, ctx) if c is None else float(c)
    curve = build_curve(c)
    if not curve.b < V.radius:
        raise AnalyticityViolation("support exceeds the analyticity radius of V")
    coeffs, nodes, vals = _fit_phi_hat(curve, V, ctx)
    b = curve.b
    psi_vals = vals * np.sqrt((b - nodes) / nodes)
    even = coeffs * (-1.0) ** np.arange(coeffs.size)
    psi0 = float(np.sum(even)) * math.sqrt(b)
    psib = float(np.sum(coeffs)) / math.sqrt(b)
    meas = EquilibriumMeasure(c, b, (nodes, psi_vals), psi0, psib, 0.0, curve, V, coeffs, ctx)
    ell = meas.log_potential(b) + meas.log_potential_f(b) - float(V.V(b))
    return EquilibriumMeasure(c, b, (nodes, psi_vals), psi0, psib, ell, curve, V, coeffs, ctx)


def richardson_edge_constants(meas: EquilibriumMeasure,
                              ladder: Sequence[float] = (1e-3, 1e-4, 1e-5)) -> Tuple[float, float]:
    """psi0 and psib by Richardson extrapolation of directly computed density values.

    ``sqrt(x) psi(x)`` and ``psi(b - x)/sqrt(x)`` are analytic in x at the
    edge, so the ladder removes the linear and quadratic error terms.
    """
    b, V, ctx = meas.b, meas.potential, meas.ctx
    h = np.asarray(ladder, dtype=float) * b
    left = np.sqrt(h) * density_psi(meas.c, meas.curve, V, h, ctx)
    right = density_psi(meas.c, meas.curve, V, b - h, ctx) / np.sqrt(h)

    def extrap(vals):
        # geometric ladder with ratio r: kill the O(h) then the O(h^2) term
        r = h[0] / h[1]
        t1 = (r * vals[1] - vals[0]) / (r - 1.0)
        t2 = (r * vals[2] - vals[1]) / (r - 1.0)
        return (r * r * t2 - t1) / (r * r - 1.0)

    return float(extrap(left)), float(extrap(right))


def edge_constants(meas: EquilibriumMeasure, tol: float = 1e-6) -> Tuple[float, float]:
    """(psi0, psib) from the interpolant, confirmed by the Richardson ladders."""
    r0, rb = richardson_edge_constants(meas)
    for name, a, bb in (("psi0", meas.psi0, r0), ("psib", meas.psib, rb)):
        if not (a > 0 and bb > 0) or abs(a - bb) > tol * abs(a):
            raise NonConvergence(f"{name}: interpolant {a:.12g} vs Richardson {bb:.12g}")
    return meas.psi0, meas.psib


# ---------------------------------------------------------------------------
# DMPK specialization
# ---------------------------------------------------------------------------

def dmpk_measure(M: float, ctx: PrecisionContext = DEFAULT_DOUBLE) -> EquilibriumMeasure:
    return build_measure(Potential.linear(M), ctx)


def dmpk_density(M_or_measure, x):
    """rho(x; M) = 2 x psi(x^2)."""
    meas = M_or_measure if isinstance(M_or_measure, EquilibriumMeasure) else dmpk_measure(M_or_measure)
    x = np.asarray(x, dtype=float)
    return 2.0 * x * meas.psi(x * x)


def ohm_integral(M_or_measure) -> float:
    """int_0^b sech^2(sqrt(lambda)) psi(lambda) dlambda."""
    meas = M_or_measure if isinstance(M_or_measure, EquilibriumMeasure) else dmpk_measure(M_or_measure)

    def sech2(y):
        return 1.0 / np.cosh(np.sqrt(y)) ** 2

    def g(theta):
        dm, y = meas._theta_measure(theta)
        return sech2(y) * dm

    return float(integrate_adaptive(g, 0.0, math.pi, meas.ctx).value)


def b_linear_closed(M: float) -> float:
    """Closed-form endpoint for V = x/M: b_of(2M)."""
    c = 2.0 * M
    return 0.25 * (math.sqrt((c + 1.0) ** 2 - 1.0) + math.acosh(c + 1.0)) ** 2


def g_functions(meas: EquilibriumMeasure, z) -> Tuple[complex, complex]:
    """(g(z), gtilde(z)) with boundary values from above on the cuts."""
    return meas.g(z), meas.gtilde(z)


def ell_and_phi(meas: EquilibriumMeasure, z) -> Tuple[float, complex]:
    return meas.ell, meas.phi(z)


def local_maps(meas: EquilibriumMeasure, z, edge: str) -> complex:
    """f_b(z) for ``edge == "b"``, f_0(z) for ``edge == "0"``."""
    if edge == "b":
        return meas.local_map_b(z)
    if edge == "0":
        return meas.local_map_0(z)
    raise ConfigError(f"edge must be 'b' or '0', not {edge!r}")
