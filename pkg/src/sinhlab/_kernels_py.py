"""Pure numpy implementations of the hot loops (reference and fallback)."""

from __future__ import annotations

import numpy as np

BISECTION_STEPS = 64
POLISH_STEPS = 3


def scaled_arctanh(s: np.ndarray) -> np.ndarray:
    """A(s) = artanh(1/sqrt s)/sqrt s, analytic on C minus [0, 1]."""
    r = np.sqrt(s)
    return np.arctanh(1.0 / r) / r


def gamma1_on_v(x: float, v: np.ndarray):
    """Point of the upper arc at parameter v in (v*, 0) and the real value of J there."""
    ratio = np.sin(v) / v
    cu = x * ratio + np.cos(v)
    u = np.arccosh(np.maximum(cu, 1.0))
    w = u + 1j * v
    s = 1.0 / np.tanh(0.5 * w) ** 2
    re_j = v * np.sinh(u) / np.sin(v) + u
    return s, re_j


def _re_j_on_v(x: float, v: np.ndarray) -> np.ndarray:
    """Real value of J on the upper arc at v; sinh u = sqrt(cosh^2 u - 1) skips forming s."""
    sv = np.sin(v)
    cu = np.maximum(x * sv / v + np.cos(v), 1.0)
    return v * np.sqrt(cu * cu - 1.0) / sv + np.arccosh(cu)


def gamma1_solve(x: float, vstar: float, y: np.ndarray) -> np.ndarray:
    """Points s on the upper arc with scriptJ(s) = y, for y in (0, b).

    Bisection on v against the monotone real value of J, then Newton on
    J(s) = 2 sqrt(y) for the last digits.  J rather than scriptJ is used for
    the polish because J'(s1) != 0 while scriptJ'(s1) = 0.
    """
    y = np.asarray(y, dtype=float)
    target = 2.0 * np.sqrt(y)
    lo = np.full(y.shape, float(vstar))
    hi = np.zeros(y.shape)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = _re_j_on_v(x, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    s, _ = gamma1_on_v(x, 0.5 * (lo + hi))
    # a real start must carry +0j so the square roots pick the upper sheet
    s = np.where(s.imag == 0, s.real + 0j, s)
    # Newton steps are kept only where they shrink the residual (J'(s2) = 0)
    val = np.sqrt(s) * (x + 2.0 * scaled_arctanh(s))
    for _ in range(POLISH_STEPS):
        der = (0.5 * x - 1.0 / (s - 1.0)) / np.sqrt(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            trial = s - (val - target) / der
            trial_val = np.sqrt(trial) * (x + 2.0 * scaled_arctanh(trial))
        better = np.isfinite(trial_val) & (np.abs(trial_val - target) < np.abs(val - target))
        s = np.where(better, trial, s)
        val = np.where(better, trial_val, val)
    return np.where(s.imag < 0, np.conj(s), s)


def log_kernel_sums(sq_u: np.ndarray, weights: np.ndarray, sq_x: np.ndarray) -> np.ndarray:
    """Row sums of ``weights * F`` with F the positive log kernel.

    ``sq_u[i, j]`` is sqrt(I+(u_ij)) for quadrature nodes of row i and
    ``sq_x[i]`` is sqrt(I+(x_i)).
    """
    a = sq_u
    ab = np.conj(sq_u)
    xi = sq_x[:, None]
    ratio = ((a + xi) * (ab - xi)) / ((a - xi) * (ab + xi))
    return np.sum(weights * np.log(np.abs(ratio)), axis=1)
