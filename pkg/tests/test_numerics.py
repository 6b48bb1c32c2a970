import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from sinhlab.errors import DomainError, NewtonDiverged, NoSignChange, NonConvergence
from sinhlab.numerics import (
    DEFAULT_DOUBLE,
    ContourSamples,
    PrecisionContext,
    circle,
    find_root,
    integrate_adaptive,
    integrate_contour,
    integrate_log_singular,
    integrate_tanh_sinh,
    periodic_contour,
)

COS_FIXED_POINT = 0.739085133215160641655312087674  # mpmath.findroot at 30 digits


class TestPrecisionContext:
    def test_tolerance_floor_enforced(self):
        with pytest.raises(DomainError):
            PrecisionContext(53, abs_tol=1e-16, rel_tol=1e-12)
        PrecisionContext(256, abs_tol=1e-70, rel_tol=1e-70)

    def test_refinements_positive(self):
        with pytest.raises(DomainError):
            PrecisionContext(64, 1e-12, 1e-12, max_refinements=0)

    def test_double_default(self):
        assert DEFAULT_DOUBLE.mantissa_bits == 53
        assert not DEFAULT_DOUBLE.multiprecision
        assert DEFAULT_DOUBLE.tol(1e6) == pytest.approx(1e-6)


class TestIntegrateAdaptive:
    def test_polynomial(self):
        assert integrate_adaptive(lambda u: u, 0.0, 1.0).value == pytest.approx(0.5, abs=1e-15)

    def test_log_endpoint(self):
        res = integrate_adaptive(lambda u: np.log(1.0 / u), 0.0, 1.0, endpoint_exponents=(0.0, None))
        assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_exponential_tail(self):
        res = integrate_adaptive(lambda u: np.exp(-u), 0.0, math.inf, tail_rate=1.0)
        assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_sqrt_hints(self):
        # int_0^1 sqrt(u (1 - u)) du = pi / 8
        res = integrate_adaptive(lambda u: np.sqrt(u * (1 - u)), 0.0, 1.0, endpoint_exponents=(0.5, 0.5))
        assert res.value == pytest.approx(math.pi / 8, abs=1e-13)
        res = integrate_adaptive(lambda u: 1 / np.sqrt(u * (1 - u)), 0.0, 1.0,
                                 endpoint_exponents=(-0.5, -0.5))
        assert res.value == pytest.approx(math.pi, abs=1e-12)

    def test_error_estimate_reported(self):
        res = integrate_adaptive(np.cos, 0.0, 2.0)
        assert res.error <= DEFAULT_DOUBLE.tol(abs(res.value))

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            integrate_adaptive(np.cos, 1.0, 1.0)

    def test_infinite_without_hint(self):
        with pytest.raises(DomainError):
            integrate_adaptive(np.exp, 0.0, math.inf)

    def test_refinement_budget(self):
        ctx = PrecisionContext.double(max_refinements=1)
        with pytest.raises(NonConvergence):
            integrate_adaptive(lambda u: np.sin(1.0 / (u + 1e-3)), 0.0, 1.0, ctx)

    def test_multiprecision_path(self):
        ctx = PrecisionContext(200, 1e-50, 1e-50)
        res = integrate_adaptive(lambda u: mpmath.exp(-u * u), 0, 1, ctx, vectorized=False)
        with mpmath.workdps(60):
            ref = mpmath.sqrt(mpmath.pi) / 2 * mpmath.erf(1)
            assert abs(res.value - ref) < 1e-48


class TestLogSingular:
    def test_symmetric(self):
        assert integrate_log_singular(lambda u: np.log(np.abs(u - 1)), 1.0, 0.0, 2.0).value == \
            pytest.approx(-2.0, abs=1e-12)

    def test_off_centre(self):
        # oracle: antiderivative u log u - u on both halves
        val = integrate_log_singular(lambda u: np.log(np.abs(u - 0.5)), 0.5, 0.0, 1.0).value
        assert val == pytest.approx(-(1 + math.log(2)), abs=1e-12)

    def test_smooth_agrees(self):
        a = integrate_log_singular(np.cos, 0.3, 0.0, 1.0).value
        b = integrate_adaptive(np.cos, 0.0, 1.0).value
        assert a == pytest.approx(b, abs=DEFAULT_DOUBLE.abs_tol * 10)

    def test_singularity_outside(self):
        with pytest.raises(DomainError):
            integrate_log_singular(np.cos, 2.0, 0.0, 1.0)

    def test_tanh_sinh_helper(self):
        assert integrate_tanh_sinh(lambda u: u ** -0.5, 0.0, 1.0).value == pytest.approx(2.0, rel=1e-9)


class TestContour:
    def test_residue_inside(self):
        c = circle(0.0, 1.0, 64)
        assert integrate_contour(lambda z: 1 / (z - 0.3j), c) / (2j * math.pi) == pytest.approx(1.0, abs=1e-13)

    def test_point_outside(self):
        c = circle(0.0, 1.0, 64)
        assert abs(integrate_contour(lambda z: 1 / (z - 2.5), c)) < 1e-13

    def test_polynomial_zero(self):
        c = circle(0.2, 0.7, 32)
        assert abs(integrate_contour(lambda z: 3 * z ** 5 - z + 1, c)) < 1e-13

    def test_orientation_enforced(self):
        t = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        with pytest.raises(DomainError):
            ContourSamples(np.exp(-1j * t), -1j * np.exp(-1j * t) * (2 * np.pi / 16), True)

    def test_too_few_nodes(self):
        with pytest.raises(DomainError):
            circle(0.0, 1.0, 4)

    def test_refinement_stabilises(self):
        c = periodic_contour(lambda t: 2 * np.cos(t) + 1j * np.sin(t),
                             lambda t: -2 * np.sin(t) + 1j * np.cos(t), 16)
        val = integrate_contour(lambda z: np.exp(z) / (z - 0.5), c, DEFAULT_DOUBLE)
        assert val / (2j * math.pi) == pytest.approx(math.exp(0.5), abs=1e-12)

    @given(st.complex_numbers(max_magnitude=0.8), st.integers(0, 6))
    def test_analytic_integrand_vanishes(self, centre, power):
        c = circle(centre, 1.0, 64)
        val = integrate_contour(lambda z: np.exp(z) * z ** power, c)
        assert abs(val) < 1e-11


class TestFindRoot:
    def test_sqrt2(self):
        r = find_root(lambda t: t * t - 2, (1.0, 2.0))
        assert r == pytest.approx(math.sqrt(2), abs=1e-13)

    def test_identity_root(self):
        assert abs(find_root(lambda t: t, (-1.0, 1.0))) <= DEFAULT_DOUBLE.abs_tol

    def test_newton_cos(self):
        r = find_root(lambda t: math.cos(t) - t, 0.7, "newton", fprime=lambda t: -math.sin(t) - 1)
        assert r == pytest.approx(COS_FIXED_POINT, abs=1e-13)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            find_root(lambda t: t * t + 1, (-1.0, 1.0))

    def test_newton_fallback_and_divergence(self):
        f, df = (lambda t: math.atan(t)), (lambda t: 1 / (1 + t * t))
        assert abs(find_root(f, 3.0, "newton", fprime=df, bracket=(-1.0, 4.0))) < 1e-12
        with pytest.raises(NewtonDiverged):
            find_root(f, 3.0, "newton", fprime=df)

    @given(st.floats(0.1, 50.0))
    def test_residual_within_abs_tol(self, a):
        r = find_root(lambda t: t ** 3 - a, (0.0, 4.0))
        assert abs(r ** 3 - a) <= DEFAULT_DOUBLE.abs_tol

    def test_precision_doubling_stable(self):
        coarse = PrecisionContext(128, 1e-30, 1e-30)
        fine = coarse.with_bits(256)
        f = lambda t: mpmath.cos(t) - t  # noqa: E731
        r1 = find_root(f, (0, 1), ctx=coarse)
        r2 = find_root(f, (0, 1), ctx=fine)
        assert abs(r1 - r2) <= 1e-30
