"""Exact biorthogonal polynomials at desk scale, in multiprecision arithmetic.

All bimoments ``int_0^inf x^i f(x)^j W(x) dx`` come out of one quadrature
rule: after ``x = u^2`` the integrand is ``2 u^(2i+2alpha+1) sinh(u)^(2j)
h(u^2) e^{-nV(u^2)}``, integrated by a nested tanh-sinh rule on ``[0, U]``.
The whole matrix is then one product ``X diag(w) F^T`` of node tables.
Arithmetic is gmpy2 ``mpfr``/``mpc``; numbers leave this module as Python
floats/complex only through the explicit conversion helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import gmpy2
import mpmath
import numpy as np
from gmpy2 import mpc, mpfr

from .equilibrium import EquilibriumMeasure, Potential
from .errors import ConfigError, DomainError, NonConvergence, SingularBimomentMatrix, TailBoundFailure
from .numerics import PrecisionContext

LN2 = math.log(2.0)
MAX_ESCALATIONS = 3
FIRST_LEVEL = 5
MAX_LEVEL = 11


def default_bits(max_degree: int) -> int:
    return max(256, 24 * int(max_degree))


# ---------------------------------------------------------------------------
# Weight
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """W(x) = x^alpha h(x) e^{-n V(x)} on (0, inf).

    ``h_kind`` is ``"one"``, ``"dmpk"`` (h = f'^(1/2)) or ``"custom"``, in
    which case ``h_custom`` maps an ``mpfr`` x > 0 to h(x) > 0.
    """

    alpha: float
    h_kind: str
    V: Potential = field(repr=False)
    n: int
    h_custom: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.alpha > -1:
            raise ConfigError("alpha must exceed -1")
        if self.h_kind not in ("one", "dmpk", "custom"):
            raise ConfigError(f"h_kind must be one, dmpk or custom, not {self.h_kind!r}")
        if self.h_kind == "custom" and self.h_custom is None:
            raise ConfigError("custom h_kind needs h_custom")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be a positive integer")

    def with_n(self, n: int) -> "WeightSpec":
        return WeightSpec(self.alpha, self.h_kind, self.V, int(n), self.h_custom)

    # -- multiprecision pieces ------------------------------------------------
    def V_mp(self, x):
        pot = self.V
        if pot.kind == "linear":
            return x / mpfr(pot.M)
        if pot.kind == "poly":
            acc = mpfr(0)
            for a in reversed(pot.coeffs):
                acc = (acc + mpfr(a)) * x
            return acc
        return mpfr(pot.V(x))

    def log_h_of_u(self, u):
        """log h(u^2)."""
        if self.h_kind == "one":
            return mpfr(0)
        if self.h_kind == "dmpk":
            if u == 0:
                return mpfr(0)
            return gmpy2.log(gmpy2.sinh(2 * u) / (2 * u)) / 2
        return gmpy2.log(mpfr(self.h_custom(u * u)))

    def h_mp(self, x):
        return gmpy2.exp(self.log_h_of_u(gmpy2.sqrt(mpfr(x))))

    def weight_mp(self, x):
        x = mpfr(x)
        if x <= 0:
            return mpfr(0)
        return (x ** mpfr(self.alpha)) * self.h_mp(x) * gmpy2.exp(-self.n * self.V_mp(x))

    def weight_float(self, x: float) -> float:
        with gmpy2.context(gmpy2.get_context(), precision=64):
            return float(self.weight_mp(x))


def dmpk_weight(M: float, n: int, alpha: float = 0.0) -> WeightSpec:
    return WeightSpec(alpha, "dmpk", Potential.linear(M), n)


# ---------------------------------------------------------------------------
# Quadrature rule
# ---------------------------------------------------------------------------

def _log_integrand(w: WeightSpec, i: int, j: int, u: float) -> float:
    """log of 2 u^(2i+2alpha+1) sinh(u)^(2j) h(u^2) e^{-nV(u^2)} in double precision."""
    with gmpy2.context(gmpy2.get_context(), precision=80):
        uu = mpfr(u)
        val = (LN2 + (2 * i + 2 * w.alpha + 1) * gmpy2.log(uu)
               + 2 * j * gmpy2.log(gmpy2.sinh(uu)) + w.log_h_of_u(uu) - w.n * w.V_mp(uu * uu))
        return float(val)


def _peak(w: WeightSpec, i: int, j: int, grid: np.ndarray) -> Tuple[float, float]:
    vals = np.array([_log_integrand(w, i, j, u) for u in grid])
    k = int(np.argmax(vals))
    return float(vals[k]), float(grid[k])


def truncation_point(w: WeightSpec, max_degree: int, bits: int) -> float:
    """U with every tail int_U^inf below 2^-bits 1e-10 of its own bimoment.

    Envelope argument: past the peak the log integrand is concave (V grows
    superlinearly against the sqrt x growth of log h and log f), so the
    tail is at most g(U)/kappa with kappa = -(log g)'(U) > 0.
    """
    target = bits * LN2 + 10.0 * math.log(10.0)
    d = int(max_degree)
    corners = sorted({(i, j) for i in (0, d // 2, d) for j in (0, d // 2, d)})
    # scan for the peaks on a geometric-plus-linear grid
    grid = np.concatenate([np.geomspace(1e-3, 1.0, 40), np.linspace(1.0, 200.0, 800)[1:]])
    u_max = 0.0
    for i, j in corners:
        peak, u_peak = _peak(w, i, j, grid)
        # entry >= peak value times a width of e^-5 relative to the peak point
        floor = peak - 5.0 - target
        u = max(u_peak, 1e-3)
        step = max(0.05, 0.05 * u)
        for _ in range(100000):
            if _log_integrand(w, i, j, u) < floor:
                break
            u += step
        else:
            raise TailBoundFailure("integrand does not decay; V must grow faster than sqrt x")
        h = 1e-4 * u
        slope = (_log_integrand(w, i, j, u + h) - _log_integrand(w, i, j, u - h)) / (2 * h)
        far = [_log_integrand(w, i, j, u * f) for f in (1.25, 1.5, 2.0)]
        if not slope < 0 or not all(np.diff([_log_integrand(w, i, j, u)] + far) < 0):
            raise TailBoundFailure(f"tail envelope not monotone past U = {u:.4g}")
        # tail <= g(U)/kappa; require it below the floor as well
        if _log_integrand(w, i, j, u) - math.log(-slope) > floor:
            u *= 1.1
        u_max = max(u_max, u)
    return 1.05 * u_max


@dataclass
class _NodeTable:
    """Node tables for one rule: u, x = u^2, f = sinh^2 u and w * (integrand without x^i f^j)."""

    x: List
    f: List
    w: List
    u: List


def _tanh_sinh_nodes(U, level: int, bits: int, odd_only: bool):
    """Tanh-sinh nodes on [0, U] at step 2^-level (all, or only odd multiples)."""
    h = mpfr(2) ** (-level)
    t_max = math.asinh((bits * LN2 + 60.0) / math.pi) + 0.5
    kmax = int(t_max * 2 ** level) + 1
    pi = gmpy2.const_pi()
    nodes, weights = [], []
    for k in range(-kmax, kmax + 1):
        if odd_only and k % 2 == 0:
            continue
        t = k * h
        s = pi / 2 * gmpy2.sinh(t)
        u = U / (1 + gmpy2.exp(-2 * s))
        c = gmpy2.cosh(s)
        wt = h * U * (pi / 2 * gmpy2.cosh(t)) / (2 * c * c)
        if u <= 0 or wt == 0:
            continue
        nodes.append(u)
        weights.append(wt)
    return nodes, weights


def _node_table(w: WeightSpec, U, level: int, bits: int, odd_only: bool) -> _NodeTable:
    us, wts = _tanh_sinh_nodes(U, level, bits, odd_only)
    xs, fs, ws = [], [], []
    two_alpha_1 = mpfr(2 * w.alpha + 1)
    for u, wt in zip(us, wts):
        x = u * u
        sh = gmpy2.sinh(u)
        xs.append(x)
        fs.append(sh * sh)
        ws.append(wt * 2 * u ** two_alpha_1 * gmpy2.exp(w.log_h_of_u(u) - w.n * w.V_mp(x)))
    return _NodeTable(xs, fs, ws, us)


def _power_table(vals: List, degree: int) -> np.ndarray:
    out = np.empty((degree + 1, len(vals)), dtype=object)
    row = np.array([mpfr(1)] * len(vals), dtype=object)
    arr = np.array(vals, dtype=object)
    for i in range(degree + 1):
        out[i] = row
        row = row * arr
    return out


def _moment_sum(table: _NodeTable, degree: int) -> np.ndarray:
    X = _power_table(table.x, degree) * np.array(table.w, dtype=object)[None, :]
    F = _power_table(table.f, degree)
    return X.dot(F.T)


@dataclass(frozen=True)
class BimomentMatrix:
    values: np.ndarray = field(repr=False)  # object array of mpfr, [i, j] = int x^i f^j W
    bits: int
    level: int
    truncation: float
    quad_change: float  # max relative change of any entry at the last level halving


def bimoment_matrix(w: WeightSpec, max_degree: int, bits: int,
                    quad_tol: Optional[float] = None) -> BimomentMatrix:
    """All bimoments up to ``max_degree`` at ``bits`` of working precision."""
    quad_tol = 2.0 ** (-0.5 * bits) if quad_tol is None else quad_tol
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        U = mpfr(truncation_point(w, max_degree, bits))
        table = _node_table(w, U, FIRST_LEVEL, bits, odd_only=False)
        total = _moment_sum(table, max_degree)
        change = math.inf
        for level in range(FIRST_LEVEL + 1, MAX_LEVEL + 1):
            extra = _moment_sum(_node_table(w, U, level, bits, odd_only=True), max_degree)
            new = total / 2 + extra
            change = max(float(abs(a / b - 1)) for a, b in zip(new.ravel(), total.ravel()))
            total = new
            if change <= quad_tol:
                return BimomentMatrix(total, bits, level, float(U), change)
    raise NonConvergence(f"bimoment quadrature stalled at relative change {change:.3g}")


def bimoment(i: int, j: int, w: WeightSpec, ctx: Optional[PrecisionContext] = None):
    """int_0^inf x^i f(x)^j W(x) dx as an mpfr at the context precision."""
    if i < 0 or j < 0:
        raise DomainError("bimoment indices must be non-negative")
    bits = 256 if ctx is None else max(int(ctx.mantissa_bits), 64)
    deg = max(i, j)
    mat = bimoment_matrix(w, deg, bits)
    return mat.values[i, j]


# ---------------------------------------------------------------------------
# Biorthogonalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BiorthoSystem:
    """Monic p_j (in x) and q_j (in w = f(x)) with their norms h_j, j <= max_degree.

    Coefficient lists run from the constant term upward.  ``max_residual``
    is the largest normalized biorthogonality residual and
    ``pivot_agreement`` the largest relative gap between the pairing and
    the LDU pivot for h_j.
    """

    n: int
    max_degree: int
    p_coeffs: List[List] = field(repr=False)
    q_coeffs: List[List] = field(repr=False)
    h_norms: List = field(repr=False)
    precision_used: int
    weight: WeightSpec = field(repr=False)
    moments: BimomentMatrix = field(repr=False)
    max_residual: float = 0.0
    pivot_agreement: float = 0.0

    def h_float(self, j: int) -> float:
        return float(self.h_norms[j])

    def log_h(self, j: int) -> float:
        with self.context():
            return float(gmpy2.log(self.h_norms[j]))

    def context(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.precision_used)


def _solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting on object arrays."""
    m = A.shape[0]
    a = np.array(A, dtype=object, copy=True)
    b = np.array(rhs, dtype=object, copy=True)
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(a[r, col]))
        if a[piv, col] == 0:
            raise SingularBimomentMatrix("zero pivot in the bimoment system")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        inv = 1 / a[col, col]
        for r in range(col + 1, m):
            fac = a[r, col] * inv
            if fac != 0:
                a[r, col:] = a[r, col:] - fac * a[col, col:]
                b[r] = b[r] - fac * b[col]
    x = np.empty(m, dtype=object)
    for r in range(m - 1, -1, -1):
        acc = b[r] - (a[r, r + 1:].dot(x[r + 1:]) if r + 1 < m else 0)
        x[r] = acc / a[r, r]
    return x


def _ldu_pivots(M: np.ndarray) -> List:
    """Diagonal of D in M = L D U without pivoting (the ratios of leading minors)."""
    a = np.array(M, dtype=object, copy=True)
    m = a.shape[0]
    piv = []
    for k in range(m):
        d = a[k, k]
        if d == 0:
            raise SingularBimomentMatrix(f"leading minor {k + 1} vanishes")
        piv.append(d)
        if k + 1 < m:
            inv = 1 / d
            col = a[k + 1:, k] * inv
            a[k + 1:, k + 1:] = a[k + 1:, k + 1:] - np.outer(col, a[k, k + 1:])
    return piv


def _eliminate(mat: BimomentMatrix, max_degree: int):
    M = mat.values
    p_all, q_all, h_pair, res = [], [], [], 0.0
    for j in range(max_degree + 1):
        if j == 0:
            a = np.array([mpfr(1)], dtype=object)
            b = np.array([mpfr(1)], dtype=object)
        else:
            # p_j: sum_i a_i M[i, k] = -M[j, k] for k < j
            a = np.append(_solve(M[:j, :j].T, -M[j, :j]), mpfr(1))
            # q_j: sum_k b_k M[i, k] = -M[i, j] for i < j
            b = np.append(_solve(M[:j, :j], -M[:j, j]), mpfr(1))
            for k in range(j):
                terms = a * M[: j + 1, k]
                scale = sum(abs(t) for t in terms)
                res = max(res, float(abs(sum(terms)) / scale))
                terms = b * M[k, : j + 1]
                scale = sum(abs(t) for t in terms)
                res = max(res, float(abs(sum(terms)) / scale))
        h = a.dot(M[: j + 1, : j + 1]).dot(b)
        p_all.append(list(a))
        q_all.append(list(b))
        h_pair.append(h)
    return p_all, q_all, h_pair, res


def biorthogonalize(w: WeightSpec, max_degree: int,
                    ctx: Optional[PrecisionContext] = None,
                    bits: Optional[int] = None,
                    residual_bound: Optional[float] = None) -> BiorthoSystem:
    """Monic biorthogonal families up to ``max_degree`` with automatic precision escalation."""
    if max_degree < 0:
        raise DomainError("max_degree must be non-negative")
    if bits is None:
        bits = default_bits(max_degree)
        if ctx is not None and ctx.multiprecision:
            bits = max(bits, int(ctx.mantissa_bits))
    failure = None
    for attempt in range(MAX_ESCALATIONS + 1):
        digits = bits * math.log10(2.0)
        bound = 10.0 ** (-digits / 2) if residual_bound is None else residual_bound
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            try:
                mat = bimoment_matrix(w, max_degree, bits)
                p, q, h, res = _eliminate(mat, max_degree)
                piv = _ldu_pivots(mat.values)
                agree = max(float(abs(hp / hv - 1)) for hp, hv in zip(h, piv))
                ok = res <= bound and all(v > 0 for v in h)
            except SingularBimomentMatrix as exc:
                failure, ok = str(exc), False
            else:
                failure = f"residual {res:.3g} above {bound:.3g} or non-positive h"
            if ok:
                return BiorthoSystem(w.n, max_degree, p, q, h, bits, w, mat, res, agree)
        bits *= 2
    raise SingularBimomentMatrix(f"biorthogonalization failed after {MAX_ESCALATIONS} "
                                 f"escalations: {failure}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

MPFR = type(mpfr(0))
MPC = type(mpc(0))


def _to_mp(z):
    """mpfr for real input (including complex with zero imaginary part), else mpc."""
    if isinstance(z, (MPFR, MPC)):
        return z
    if isinstance(z, (complex, np.complexfloating)):
        z = complex(z)
        return mpfr(z.real) if z.imag == 0 else mpc(z)
    return mpfr(z)


def _horner(coeffs, z):
    acc = coeffs[-1] * 1
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc


def eval_p(sys: BiorthoSystem, j: int, z):
    """p_j(z) at the system's precision (mpfr for real z, mpc for complex)."""
    if not 0 <= j <= sys.max_degree:
        raise DomainError(f"degree {j} outside 0..{sys.max_degree}")
    with sys.context():
        return _horner(sys.p_coeffs[j], _to_mp(z))


def map_f_mp(z):
    """f(z) = sinh^2(sqrt z); even in the root, so negative reals go through mpc."""
    if isinstance(z, MPFR):
        if z >= 0:
            sh = gmpy2.sinh(gmpy2.sqrt(z))
            return sh * sh
        s = gmpy2.sin(gmpy2.sqrt(-z))
        return -(s * s)
    sh = gmpy2.sinh(gmpy2.sqrt(z))
    return sh * sh


def eval_q(sys: BiorthoSystem, j: int, z):
    """q_j(f(z))."""
    if not 0 <= j <= sys.max_degree:
        raise DomainError(f"degree {j} outside 0..{sys.max_degree}")
    with sys.context():
        return _horner(sys.q_coeffs[j], map_f_mp(_to_mp(z)))


def eval_q_at_w(sys: BiorthoSystem, j: int, wval):
    """q_j(w) for a value w of the f variable."""
    with sys.context():
        return _horner(sys.q_coeffs[j], _to_mp(wval))


def as_complex(v) -> complex:
    return complex(v)


# ---------------------------------------------------------------------------
# Kernel and conductance
# ---------------------------------------------------------------------------

def kernel_K(sys: BiorthoSystem, x, y, n: Optional[int] = None):
    """K_n(x, y) = sqrt(W(x) W(y)) sum_{j<n} p_j(x) q_j(f(y)) / h_j."""
    n = sys.n if n is None else int(n)
    if n - 1 > sys.max_degree:
        raise DomainError("the system does not reach degree n - 1")
    with sys.context():
        xm, ym = mpfr(x), mpfr(y)
        if xm <= 0 or ym <= 0:
            raise DomainError("the kernel is defined for x, y > 0")
        fy = map_f_mp(ym)
        acc = mpfr(0)
        for j in range(n):
            acc += _horner(sys.p_coeffs[j], xm) * _horner(sys.q_coeffs[j], fy) / sys.h_norms[j]
        w = sys.weight
        return gmpy2.sqrt(w.weight_mp(xm) * w.weight_mp(ym)) * acc


def _diag_density(sys: BiorthoSystem, n: int, x):
    """K_n(x, x) without the square root: W(x) sum p_j(x) q_j(f(x)) / h_j."""
    fx = map_f_mp(x)
    acc = mpfr(0)
    for j in range(n):
        acc += _horner(sys.p_coeffs[j], x) * _horner(sys.q_coeffs[j], fx) / sys.h_norms[j]
    return sys.weight.weight_mp(x) * acc


def _mp_quad_u(sys: BiorthoSystem, fn: Callable, dps: int = 30) -> float:
    """int_0^U fn(u^2) 2u du with mpmath's adaptive tanh-sinh (independent of the bimoment rule)."""
    U = sys.moments.truncation
    with sys.context():
        def integrand(u):
            um = mpfr(str(u)) if not isinstance(u, float) else mpfr(u)
            return mpmath.mpf(str(fn(um * um) * 2 * um))
        with mpmath.workdps(dps):
            pts = list(np.linspace(0.0, U, 9))
            return float(mpmath.quad(integrand, pts))


def kernel_trace(sys: BiorthoSystem, n: Optional[int] = None) -> float:
    """int_0^inf K_n(x, x) dx by a quadrature independent of the bimoment rule."""
    n = sys.n if n is None else int(n)
    if n - 1 > sys.max_degree:
        raise DomainError("the system does not reach degree n - 1")
    return _mp_quad_u(sys, lambda x: _diag_density(sys, n, x))


def reproducing_residual(sys: BiorthoSystem, x: float, y: float, n: Optional[int] = None) -> float:
    """|int K(x, t) K(t, y) dt - K(x, y)| / |K(x, y)|."""
    n = sys.n if n is None else int(n)
    lhs = _mp_quad_u(sys, lambda t: kernel_K(sys, x, t, n) * kernel_K(sys, t, y, n))
    with sys.context():
        rhs = float(kernel_K(sys, x, y, n))
    return abs(lhs - rhs) / abs(rhs)


def conductance_mean(source, mode: str = "exact", n: Optional[int] = None) -> float:
    """Mean of sum_j sech^2(sqrt lambda_j).

    ``mode="exact"``: ``source`` is a BiorthoSystem and the first intensity
    K_n(lambda, lambda) is integrated against sech^2.  ``mode="continuum"``:
    ``source`` is an EquilibriumMeasure or M and the limiting integral is used.
    """
    if mode == "continuum":
        from .equilibrium import ohm_integral
        return float(ohm_integral(source))
    if mode != "exact":
        raise ConfigError("mode must be exact or continuum")
    sys = source
    n = sys.n if n is None else int(n)
    if sys.weight.V.kind != "linear":
        raise ConfigError("exact conductance needs the linear (DMPK) potential")

    def density(x):
        c = gmpy2.cosh(gmpy2.sqrt(x))
        return _diag_density(sys, n, x) / (c * c)

    return _mp_quad_u(sys, density)


# ---------------------------------------------------------------------------
# Exact-vs-asymptotic comparison
# ---------------------------------------------------------------------------

def scaled_exact_airy(sys: BiorthoSystem, measure: EquilibriumMeasure, degree: int,
                      z: float, which: str = "p") -> float:
    """n^(-1/6) e^{-n(g -+ gtilde + V + l)/2} times p (or q(f)) at real z near b."""
    from .parametrix import half_exponent
    n = sys.n
    val = eval_p(sys, degree, z) if which == "p" else eval_q(sys, degree, z)
    expo = half_exponent(measure, complex(z), which).real
    with sys.context():
        out = val * gmpy2.exp(mpfr(-n * expo))
    return float(out) * n ** (-1.0 / 6.0)


def scaled_exact_bessel(sys: BiorthoSystem, measure: EquilibriumMeasure, degree: int,
                        z: float, alpha: float, which: str = "p") -> float:
    """n^(-1/2) e^{-n(...)/2} z^(alpha/2) times p (or q(f)) at small z > 0."""
    from .parametrix import half_exponent
    n = sys.n
    val = eval_p(sys, degree, z) if which == "p" else eval_q(sys, degree, z)
    expo = half_exponent(measure, complex(z), which).real
    with sys.context():
        out = val * gmpy2.exp(mpfr(-n * expo))
    return float(out) * n ** -0.5 * z ** (0.5 * alpha)


@dataclass(frozen=True)
class CompareRow:
    n: int
    region: str
    quantity: str
    point: complex
    k: int
    exact: complex
    asymptotic: complex
    rel_error: float


@dataclass(frozen=True)
class CompareReport:
    rows: List[CompareRow]
    decay: Dict[Tuple[str, str, complex, int], float]  # fitted exponent in error ~ n^-a

    def errors(self, region: str, quantity: str, point, k: int) -> List[float]:
        return [r.rel_error for r in self.rows if r.region == region and r.quantity == quantity
                and r.point == point and r.k == k]


def _fit_decay(ns: Sequence[int], errs: Sequence[float]) -> float:
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if ns.size < 2 or np.any(errs <= 0):
        return float("nan")
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    return float(-slope)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / abs(a) if a != 0 else abs(b)


def compare_report(w: WeightSpec, measure: EquilibriumMeasure, bundle, n_list: Sequence[int],
                   k: int = 0, points: Optional[Dict[str, Sequence]] = None,
                   systems: Optional[Dict[int, BiorthoSystem]] = None) -> CompareReport:
    """Relative errors of every requested asymptotic formula against exact values.

    ``points`` maps a region name to sample points: complex z for ``outer``
    and ``bulk`` (real x for the cosine form), local coordinates t for
    ``airy`` and ``bessel``; the key ``h`` (any value) adds the norm check.
    """
    from . import parametrix as pm

    n_list = sorted(int(v) for v in n_list)
    points = points or {"outer": [2 * measure.b], "h": [None]}
    bk = bundle.with_k(k)
    rows: List[CompareRow] = []
    systems = {} if systems is None else systems
    for n in n_list:
        sys = systems.get(n)
        if sys is None or sys.max_degree < n + k:
            sys = biorthogonalize(w.with_n(n), n + max(k, 0) + 1)
            systems[n] = sys
        deg = n + k
        for region, pts in points.items():
            for pt in pts:
                for quantity in ("p", "q"):
                    exact, asym = _compare_one(sys, measure, bk, n, deg, region, pt, quantity, pm)
                    if exact is None:
                        continue
                    rows.append(CompareRow(n, region, quantity, pt, k, exact, asym, _rel(exact, asym)))
    decay = {}
    keys = {(r.region, r.quantity, r.point, r.k) for r in rows}
    for key in keys:
        sel = sorted((r.n, r.rel_error) for r in rows
                     if (r.region, r.quantity, r.point, r.k) == key)
        decay[key] = _fit_decay([s[0] for s in sel], [s[1] for s in sel])
    return CompareReport(rows, decay)


def _compare_one(sys, measure, bundle, n, deg, region, pt, quantity, pm):
    if region == "h":
        if quantity == "q":
            return None, None
        with sys.context():
            exact = float(sys.h_norms[deg] * gmpy2.exp(mpfr(-n * measure.ell)))
        asym = pm.asym_h(n, bundle) * math.exp(-n * measure.ell)
        return exact, asym
    if region == "outer":
        z = complex(pt)
        if quantity == "q" and not bool(pm.in_parabola_region(z)):
            return None, None
        exact = complex(eval_p(sys, deg, z) if quantity == "p" else eval_q(sys, deg, z))
        fn = pm.asym_p if quantity == "p" else pm.asym_q
        return exact, fn(bundle, z, n, "outer")
    if region == "bulk":
        x = float(np.real(pt))
        exact = float(eval_p(sys, deg, x) if quantity == "p" else eval_q(sys, deg, x))
        r, th, rt, tht = bundle.bulk_amplitude_phase(x)
        if quantity == "p":
            env = r * math.exp(n * measure.log_potential(x))
            asym = pm.asym_p(bundle, x, n, "bulk")
        else:
            env = rt * math.exp(n * measure.log_potential_f(x))
            asym = pm.asym_q(bundle, x, n, "bulk")
        # the bulk error is measured against the envelope, not the oscillating value
        return env, env + (exact - asym.real)
    if region == "airy":
        t = float(pt)
        z = pm.airy_point(measure, n, t)
        exact = scaled_exact_airy(sys, measure, deg, z, quantity)
        asym = pm.airy_scaled_p(bundle, t) if quantity == "p" else pm.airy_scaled_q(bundle, t)
        return exact, asym
    if region == "bessel":
        t = float(pt)
        z = pm.bessel_point(measure, n, t)
        exact = scaled_exact_bessel(sys, measure, deg, z, bundle.alpha, quantity)
        asym = pm.bessel_scaled_p(bundle, t) if quantity == "p" else pm.bessel_scaled_q(bundle, t)
        return exact, asym
    raise ConfigError(f"unknown region {region!r}")
