"""Quadrature, contour integration and root finding.

Every routine is driven by a :class:`PrecisionContext`.  Contexts with
``mantissa_bits <= 53`` run in binary64 with vectorised numpy rules; wider
contexts run in mpmath at the requested working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy import optimize

from .errors import DomainError, NewtonDiverged, NoSignChange, NonConvergence

Number = Union[float, complex, "mpmath.mpf", "mpmath.mpc"]

DOUBLE_BITS = 53


@dataclass(frozen=True)
class CheckResult:
    """One line of an identity suite: the worst deviation seen and its tolerance."""

    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


@dataclass(frozen=True)
class PrecisionContext:
    """Arithmetic width plus the tolerances every routine must honour."""

    mantissa_bits: int = 256
    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_refinements: int = 60

    def __post_init__(self) -> None:
        if self.mantissa_bits < 1 or int(self.mantissa_bits) != self.mantissa_bits:
            raise DomainError("mantissa_bits must be a positive integer")
        if self.max_refinements < 1:
            raise DomainError("max_refinements must be >= 1")
        floor = 2.0 ** (-self.mantissa_bits + 8)
        if self.abs_tol < floor or self.rel_tol < floor:
            raise DomainError(
                f"tolerances below 2^(-{self.mantissa_bits}+8) = {floor:.3g} "
                "cannot be met at this precision"
            )

    @classmethod
    def double(cls, rel_tol: float = 1e-12, abs_tol: float = 3e-14,
               max_refinements: int = 60) -> "PrecisionContext":
        return cls(DOUBLE_BITS, abs_tol, rel_tol, max_refinements)

    @property
    def multiprecision(self) -> bool:
        return self.mantissa_bits > DOUBLE_BITS

    def tol(self, magnitude: float) -> float:
        """Accepted absolute error for a result of the given size."""
        return max(self.abs_tol, self.rel_tol * abs(float(magnitude)))

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits, self.abs_tol, self.rel_tol, self.max_refinements)

    def workprec(self):
        """mpmath context manager entering this context's precision."""
        return mpmath.workprec(max(self.mantissa_bits, DOUBLE_BITS))


DEFAULT_DOUBLE = PrecisionContext.double()


@dataclass(frozen=True)
class QuadResult:
    value: Number
    error: float
    evaluations: int = 0

    def __iter__(self):
        yield self.value
        yield self.error


# ---------------------------------------------------------------------------
# Fixed rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def gauss_legendre(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] in binary64."""
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=16)
def tanh_sinh(level: int, cutoff: float = 1e-300) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tanh-sinh rule on [0, 1] at step ``2**-level``.

    Returns ``(left_gap, right_gap, weight)`` where ``left_gap`` is the node
    itself and ``right_gap = 1 - node`` computed without cancellation, so
    callers can place nodes next to a singular endpoint exactly.
    """
    h = 2.0 ** (-level)
    t_max = 0.0
    # largest t with a representable endpoint gap
    while True:
        s = 0.5 * math.pi * math.sinh(t_max + h)
        if 2.0 * s > -math.log(cutoff):
            break
        t_max += h
    k = np.arange(-int(round(t_max / h)), int(round(t_max / h)) + 1)
    t = k * h
    s = 0.5 * np.pi * np.sinh(t)
    gap = 1.0 / (1.0 + np.exp(2.0 * s))  # distance of node from the right end
    left = 1.0 / (1.0 + np.exp(-2.0 * s))
    weight = h * 0.5 * np.pi * np.cosh(t) / (2.0 * np.cosh(s) ** 2)
    keep = weight > 0.0
    out = (left[keep], gap[keep], weight[keep])
    for arr in out:
        arr.setflags(write=False)
    return out


def tanh_sinh_nodes(a: float, b: float, level: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the tanh-sinh rule mapped to [a, b].

    Nodes in the left half are measured from ``a`` and those in the right
    half from ``b`` so both endpoints keep full relative resolution.
    """
    left, gap, w = tanh_sinh(level)
    width = b - a
    x = np.where(left <= 0.5, a + width * left, b - width * gap)
    return x, w * width


# ---------------------------------------------------------------------------
# Adaptive integration
# ---------------------------------------------------------------------------

def _check_interval(a, b) -> None:
    if not a < b:
        raise DomainError(f"integration interval requires a < b, got [{a}, {b}]")


def _call(f, x, vectorized):
    if vectorized:
        return np.asarray(f(x))
    return np.array([f(xi) for xi in x])


def _substitute(f, a, b, hints):
    """Remove declared square-root endpoint behaviour by a change of variable."""
    ha, hb = hints
    sqrt_a = ha is not None and abs(abs(ha) - 0.5) < 1e-15
    sqrt_b = hb is not None and abs(abs(hb) - 0.5) < 1e-15
    width = b - a
    if sqrt_a and sqrt_b:
        def g(t):
            st, ct = np.sin(t), np.cos(t)
            u = np.where(st * st <= 0.5, a + width * st * st, b - width * ct * ct)
            return f(u) * 2.0 * width * st * ct
        return g, 0.0, 0.5 * math.pi, (None, None)
    if sqrt_a:
        def g(t):
            return f(a + width * t * t) * 2.0 * width * t
        return g, 0.0, 1.0, (None, hb)
    if sqrt_b:
        def g(t):
            return f(b - width * t * t) * 2.0 * width * t
        return g, 0.0, 1.0, (ha, None)
    return f, a, b, hints


def _bisect_gauss(f, a, b, ctx, vectorized, m=20):
    x1, w1 = gauss_legendre(m)
    x2, w2 = gauss_legendre(2 * m)
    evals = 0

    def panel(lo, hi):
        nonlocal evals
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        v1 = half * np.dot(w1, _call(f, mid + half * x1, vectorized))
        v2 = half * np.dot(w2, _call(f, mid + half * x2, vectorized))
        evals += 3 * m
        return v2, abs(v2 - v1)

    panels = [(a, b) + panel(a, b) + (0,)]
    while True:
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        if not np.isfinite(total):
            raise NonConvergence("integrand produced non-finite values")
        tol = ctx.tol(abs(total))
        if err <= tol:
            return QuadResult(total, float(err), evals)
        # split every panel carrying more than its share of the budget
        width = b - a
        new = []
        split_any = False
        for lo, hi, val, e, depth in panels:
            if e > tol * (hi - lo) / width or e > 0.25 * err:
                if depth >= ctx.max_refinements:
                    raise NonConvergence(
                        f"adaptive quadrature on [{a}, {b}] did not reach {tol:.3g} "
                        f"(estimate {err:.3g}) within {ctx.max_refinements} bisections"
                    )
                c = 0.5 * (lo + hi)
                new.append((lo, c) + panel(lo, c) + (depth + 1,))
                new.append((c, hi) + panel(c, hi) + (depth + 1,))
                split_any = True
            else:
                new.append((lo, hi, val, e, depth))
        panels = new
        if not split_any:
            # error spread evenly over many panels; split the worst
            worst = max(range(len(panels)), key=lambda i: panels[i][3])
            lo, hi, _, _, depth = panels.pop(worst)
            c = 0.5 * (lo + hi)
            panels.append((lo, c) + panel(lo, c) + (depth + 1,))
            panels.append((c, hi) + panel(c, hi) + (depth + 1,))


def _tail_point(f, a, rate, ctx, vectorized):
    """Truncation point beyond which an ``exp(-rate u)`` envelope is negligible."""
    t = a + max(1.0, math.log(1.0 / ctx.abs_tol) / rate)
    for _ in range(200):
        val = abs(complex(_call(f, np.array([t]), vectorized)[0]))
        if val / rate <= 0.1 * ctx.abs_tol:
            return t, val / rate
        t = a + 2.0 * (t - a)
    raise NonConvergence("could not locate an exponential tail truncation point")


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    ctx: PrecisionContext = DEFAULT_DOUBLE,
    *,
    endpoint_exponents: Tuple[Optional[float], Optional[float]] = (None, None),
    tail_rate: Optional[float] = None,
    vectorized: bool = True,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` to the context tolerance.

    Args:
        f: integrand; called on numpy arrays when ``vectorized`` (binary64),
            elementwise on mpmath numbers otherwise.
        a, b: limits; ``b`` may be ``inf`` when ``tail_rate`` bounds the
            decay as ``exp(-tail_rate * u)``.
        endpoint_exponents: behaviour ``(u - a)^p`` / ``(b - u)^p`` at the
            ends.  ``p = +-1/2`` triggers a sin^2 substitution; other values
            rely on geometric bisection toward the endpoint.

    Raises:
        DomainError: ``a >= b``.
        NonConvergence: tolerance not reached within ``ctx.max_refinements``.
    """
    _check_interval(a, b)
    if ctx.multiprecision:
        return _integrate_mp(f, [a, b], ctx, tail_rate)
    tail_err = 0.0
    if math.isinf(b):
        if not tail_rate or tail_rate <= 0.0:
            raise DomainError("an infinite upper limit needs a positive tail_rate hint")
        b, tail_err = _tail_point(f, a, tail_rate, ctx, vectorized)
        endpoint_exponents = (endpoint_exponents[0], None)
    g, lo, hi, _ = _substitute(lambda u: _call(f, u, vectorized) if vectorized else _call(f, u, False),
                               a, b, endpoint_exponents)
    res = _bisect_gauss(g, lo, hi, ctx, True)
    return QuadResult(res.value, res.error + tail_err, res.evaluations)


def _integrate_mp(f, points, ctx, tail_rate=None):
    with ctx.workprec():
        pts = [mpmath.mpf(p) if not (isinstance(p, float) and math.isinf(p)) else mpmath.inf
               for p in points]
        value, err = mpmath.quad(f, pts, error=True, maxdegree=10)
        err = float(err)
        if err > ctx.tol(abs(value)):
            raise NonConvergence(f"mpmath quadrature error estimate {err:.3g} above tolerance")
        return QuadResult(value, err, 0)


def integrate_tanh_sinh(f: Callable, a: float, b: float, ctx: PrecisionContext = DEFAULT_DOUBLE,
                        *, min_level: int = 3, max_level: int = 8) -> QuadResult:
    """Nested tanh-sinh rule on [a, b] for integrands singular at the ends."""
    _check_interval(a, b)
    prev = None
    evals = 0
    for level in range(min_level, max_level + 1):
        x, w = tanh_sinh_nodes(a, b, level)
        # nodes that round onto a singular endpoint are dropped below
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.asarray(f(x))
        evals += x.size
        finite = np.isfinite(vals)
        val = np.dot(w[finite], vals[finite])
        if prev is not None:
            err = abs(val - prev)
            if err <= ctx.tol(abs(val)):
                return QuadResult(val, float(err), evals)
        prev = val
    raise NonConvergence(f"tanh-sinh on [{a}, {b}] did not settle by level {max_level}")


def integrate_log_singular(
    f: Callable,
    singularity: float,
    a: float,
    b: float,
    ctx: PrecisionContext = DEFAULT_DOUBLE,
) -> QuadResult:
    """Integrate ``f`` whose only interior singularity is ``log|u - singularity|``.

    The interval is split at the singularity and each half is handled by the
    endpoint-singular tanh-sinh rule.
    """
    _check_interval(a, b)
    if not a < singularity < b:
        raise DomainError(f"singularity {singularity} is not inside ({a}, {b})")
    if ctx.multiprecision:
        return _integrate_mp(f, [a, singularity, b], ctx)
    left = integrate_tanh_sinh(f, a, singularity, ctx)
    right = integrate_tanh_sinh(f, singularity, b, ctx)
    return QuadResult(left.value + right.value, left.error + right.error,
                      left.evaluations + right.evaluations)


# ---------------------------------------------------------------------------
# Contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSamples:
    """Quadrature nodes on a path with integration weights ``dz``.

    ``refine``, when present, returns the same contour with twice the nodes;
    :func:`integrate_contour` uses it for its stability check.
    """

    nodes: np.ndarray
    weights: np.ndarray
    closed: bool
    refine: Optional[Callable[[], "ContourSamples"]] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=complex)
        weights = np.asarray(self.weights, dtype=complex)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise DomainError("nodes and weights must be matching 1-d arrays")
        if nodes.size < 8:
            raise DomainError("a contour needs at least 8 nodes")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if self.closed and self.signed_area() <= 0.0:
            raise DomainError("closed contours must be positively oriented")

    def signed_area(self) -> float:
        """Area enclosed, positive for counterclockwise traversal."""
        # integral of (x dy - y dx)/2 = Im(conj(z) dz)/2
        return 0.5 * float(np.sum((np.conj(self.nodes) * self.weights).imag))

    def __len__(self) -> int:
        return self.nodes.size


def periodic_contour(z_of_t: Callable[[np.ndarray], np.ndarray],
                     dz_of_t: Callable[[np.ndarray], np.ndarray],
                     n: int) -> ContourSamples:
    """Trapezoid rule on a closed curve ``t -> z(t)``, ``t`` in [0, 2 pi).

    Midpoint nodes ``2 pi (k + 1/2) / n`` avoid the seam.
    """
    t = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    return ContourSamples(z_of_t(t), dz_of_t(t) * (2.0 * np.pi / n), True,
                          refine=lambda: periodic_contour(z_of_t, dz_of_t, 2 * n))


def circle(center: complex, radius: float, n: int = 64) -> ContourSamples:
    return periodic_contour(lambda t: center + radius * np.exp(1j * t),
                            lambda t: 1j * radius * np.exp(1j * t), n)


def integrate_contour(f: Callable, contour: ContourSamples,
                      ctx: Optional[PrecisionContext] = None) -> complex:
    """Sum ``f(z) dz`` over the samples.

    When ``ctx`` is given and the contour can refine itself, node counts are
    doubled until two successive sums agree to tolerance.
    """
    terms = contour.weights * np.asarray(f(contour.nodes))
    value = complex(np.sum(terms))
    if ctx is None or contour.refine is None:
        return value
    current = contour
    for _ in range(ctx.max_refinements):
        current = current.refine()
        terms = current.weights * np.asarray(f(current.nodes))
        finer = complex(np.sum(terms))
        # two binary64 sums cannot agree better than their rounding floor
        floor = 0.0 if ctx.multiprecision else 64 * np.finfo(float).eps * float(np.sum(np.abs(terms)))
        if abs(finer - value) <= max(ctx.tol(abs(finer)), floor):
            return finer
        value = finer
        if len(current) > 2 ** 20:
            break
    raise NonConvergence("contour integral did not stabilise under node doubling")


# ---------------------------------------------------------------------------
# Roots
# ---------------------------------------------------------------------------

def _bisect_generic(f, lo, hi, flo, ctx):
    iters = 0
    while True:
        mid = (lo + hi) / 2
        fmid = f(mid)
        width = abs(hi - lo)
        if fmid == 0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        iters += 1
        if width <= ctx.rel_tol * abs(mid) + ctx.abs_tol and abs(fmid) <= ctx.abs_tol:
            return mid
        if iters > 4 * ctx.mantissa_bits + 64:
            raise NonConvergence("bisection stalled before meeting |f| <= abs_tol")


def find_root(
    f: Callable[[Number], Number],
    bracket_or_seed: Union[Sequence[Number], Number],
    mode: str = "bisect",
    ctx: PrecisionContext = DEFAULT_DOUBLE,
    *,
    fprime: Optional[Callable[[Number], Number]] = None,
    bracket: Optional[Sequence[Number]] = None,
    max_iter: int = 100,
) -> Number:
    """Find a real root of ``f``.

    ``mode="bisect"`` needs a sign-changing bracket; ``mode="newton"`` needs a
    seed and ``fprime``, and falls back to bisection on ``bracket`` if
    Newton wanders off.

    Raises:
        NoSignChange: the bisection bracket does not straddle a root.
        NewtonDiverged: Newton failed and no bracket was offered.
    """
    if mode == "bisect":
        lo, hi = bracket_or_seed
        if ctx.multiprecision:
            with ctx.workprec():
                lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
                flo, fhi = f(lo), f(hi)
                if flo == 0:
                    return lo
                if fhi == 0:
                    return hi
                if (flo < 0) == (fhi < 0):
                    raise NoSignChange(f"f({lo})={flo} and f({hi})={fhi} share a sign")
                return _bisect_generic(f, lo, hi, flo, ctx)
        lo, hi = float(lo), float(hi)
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if np.sign(flo) == np.sign(fhi):
            raise NoSignChange(f"f({lo})={flo} and f({hi})={fhi} share a sign")
        root = optimize.brentq(f, lo, hi, xtol=ctx.abs_tol,
                               rtol=max(ctx.rel_tol, 4 * np.finfo(float).eps), maxiter=500)
        if abs(f(root)) <= ctx.abs_tol:
            return root
        # brentq met its width target but not the residual target: keep bisecting
        fl = f(lo)
        a_, b_ = lo, hi
        for _ in range(200):
            mid = 0.5 * (a_ + b_)
            fm = f(mid)
            if abs(fm) <= ctx.abs_tol:
                return mid
            if np.sign(fm) == np.sign(fl):
                a_, fl = mid, fm
            else:
                b_ = mid
            if mid in (a_, b_) and b_ - a_ <= 2 * np.spacing(mid):
                break
        raise NonConvergence(f"|f(root)| = {abs(f(root)):.3g} exceeds abs_tol {ctx.abs_tol:.3g}")

    if mode != "newton":
        raise DomainError(f"unknown root-finding mode {mode!r}")
    if fprime is None:
        raise DomainError("newton mode needs fprime")
    x = bracket_or_seed
    if ctx.multiprecision:
        x = mpmath.mpf(x)
    fx = f(x)
    for _ in range(max_iter):
        d = fprime(x)
        if d == 0 or not np.isfinite(float(d)):
            break
        step = fx / d
        x_new = x - step
        f_new = f(x_new)
        if not np.isfinite(float(abs(f_new))) or abs(f_new) > 10 * abs(fx) + ctx.abs_tol:
            break
        x, fx = x_new, f_new
        if abs(step) <= ctx.rel_tol * abs(x) + ctx.abs_tol and abs(fx) <= ctx.abs_tol:
            return x
    if bracket is not None:
        return find_root(f, bracket, "bisect", ctx)
    raise NewtonDiverged(f"Newton iteration from seed {bracket_or_seed} failed")
