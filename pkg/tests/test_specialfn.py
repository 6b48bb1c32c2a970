import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from sinhlab.errors import BranchCut, OnContour
from sinhlab.specialfn import (
    AIRY_RAYS,
    OMEGA,
    airy_ai,
    airy_ai_deriv,
    arcosh_principal,
    bessel,
    bessel_rays,
    bessel_w,
    map_f,
    map_f_deriv,
    model_checks,
    observed_jump,
    psi_airy,
    psi_bessel,
)

AI0 = 0.355028053887817239260063186004  # 3^(-2/3)/Gamma(2/3)
AIP0 = -0.258819403792806798405183560189  # -3^(-1/3)/Gamma(1/3)

complexes = st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False)


class TestMapF:
    def test_values(self):
        assert map_f(0.0) == 0.0
        assert map_f(-math.pi ** 2 / 4) == pytest.approx(-1.0, abs=1e-15)
        assert map_f(math.log(1 + math.sqrt(2)) ** 2) == pytest.approx(1.0, abs=1e-15)

    def test_deriv_at_zero(self):
        assert map_f_deriv(0.0) == pytest.approx(1.0)
        assert map_f_deriv(1e-12) == pytest.approx(1.0)

    def test_increasing_on_positive_axis(self):
        x = np.linspace(0, 30, 500)
        assert np.all(np.diff(map_f(x)) > 0)

    def test_seam_continuity(self):
        for z in (0.4999999, 0.5000001, -0.5000001j, 0.35 + 0.35j):
            with mpmath.workdps(30):
                ref = complex(mpmath.sinh(mpmath.sqrt(mpmath.mpc(z))) ** 2)
            assert abs(complex(map_f(complex(z))) - ref) < 1e-15

    def test_conjugate_symmetry_bulk(self):
        rng = np.random.default_rng(7)
        z = rng.normal(size=10_000) * 5 + 1j * rng.normal(size=10_000) * 5
        assert np.max(np.abs(map_f(np.conj(z)) - np.conj(map_f(z))) / (1 + np.abs(map_f(z)))) < 1e-14

    @given(complexes)
    def test_derivative_matches_difference(self, z):
        h = 1e-6
        fd = (map_f(z + h) - map_f(z - h)) / (2 * h)
        d = map_f_deriv(z)
        assert abs(fd - d) <= 1e-6 * max(1.0, abs(d))


class TestArcosh:
    def test_inverse(self):
        assert complex(arcosh_principal(math.cosh(2.0))) == pytest.approx(2.0)

    def test_branch_point_series(self):
        eps = 1e-8
        assert complex(arcosh_principal(1 + eps)).real == pytest.approx(math.sqrt(2 * eps), rel=1e-7)

    @pytest.mark.parametrize("z", [0.0, -3.0, 1.0, 0.5])
    def test_cut(self, z):
        with pytest.raises(BranchCut):
            arcosh_principal(z)

    @given(complexes.filter(lambda z: abs(z.imag) > 1e-3))
    def test_cosh_roundtrip_and_range(self, z):
        w = complex(arcosh_principal(z))
        assert abs(cmath.cosh(w) - z) <= 1e-12 * max(1, abs(z))
        assert w.real > 0 and -math.pi < w.imag < math.pi


class TestAiry:
    def test_origin(self):
        assert complex(airy_ai(0)).real == pytest.approx(AI0, abs=1e-15)
        assert complex(airy_ai_deriv(0)).real == pytest.approx(AIP0, abs=1e-15)

    def test_against_series_oracle(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-5, 5, 50) + 1j * rng.uniform(-5, 5, 50)
        pts = pts[np.abs(pts) <= 5]
        with mpmath.workdps(30):
            for z in pts:
                assert abs(complex(airy_ai(z)) - complex(mpmath.airyai(z))) < 1e-12 * max(1, abs(complex(mpmath.airyai(z))))

    @given(complexes)
    def test_three_term_identity(self, z):
        s = airy_ai(z) + OMEGA * airy_ai(OMEGA * z) + OMEGA ** 2 * airy_ai(OMEGA ** 2 * z)
        assert abs(s) < 1e-12 * max(1.0, abs(airy_ai(z)))

    @given(st.complex_numbers(max_magnitude=3.0))
    def test_airy_ode(self, z):
        h = 1e-4
        second = (airy_ai(z + h) - 2 * airy_ai(z) + airy_ai(z - h)) / h ** 2
        assert abs(second - z * airy_ai(z)) < 1e-5 * max(1.0, abs(airy_ai(z)))


class TestBessel:
    def test_origin(self):
        assert bessel("J", 0.0, 0.0) == pytest.approx(1.0)
        assert bessel("I", 0.0, 0.0) == pytest.approx(1.0)

    @given(st.floats(0.1, 30.0))
    def test_hankel_average(self, x):
        val = 0.5 * bessel("H1", 1.0, x) + 0.5 * bessel("H2", 1.0, x) - bessel("J", 1.0, x)
        assert abs(val) < 1e-13

    def test_cuts(self):
        with pytest.raises(BranchCut):
            bessel("K", 0.0, -1.0)
        with pytest.raises(BranchCut):
            bessel("J", 0.5, -2.0)
        with pytest.raises(ValueError):
            bessel("Y", 0.0, 1.0)

    def test_against_series_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            z = complex(rng.uniform(0.1, 5), rng.uniform(-3, 3))
            a = float(rng.uniform(-0.9, 3))
            with mpmath.workdps(30):
                assert abs(bessel("I", a, z) - complex(mpmath.besseli(a, z))) < 1e-12 * max(1, abs(bessel("I", a, z)))
                assert abs(bessel("J", a, z) - complex(mpmath.besselj(a, z))) < 1e-12 * max(1, abs(bessel("J", a, z)))

    @given(st.floats(-0.9, 3.0), st.floats(0.2, 5.0))
    def test_bessel_ode(self, a, x):
        # x^2 y'' + x y' - (x^2 + a^2) y = 0 for I_a
        h = 1e-4
        y = lambda t: bessel("I", a, t).real  # noqa: E731
        d2 = (y(x + h) - 2 * y(x) + y(x - h)) / h ** 2
        d1 = bessel("I", a, x, derivative=True).real
        assert abs(x * x * d2 + x * d1 - (x * x + a * a) * y(x)) < 1e-5 * max(1.0, abs(y(x)) * x * x)


class TestParametrixMatrices:
    def test_airy_det(self):
        assert abs(psi_airy(1 + 1j).det() - 1) < 1e-12

    def test_airy_jump_on_positive_axis(self):
        jump = observed_jump(psi_airy, 0.0, 1.7, 1)
        assert np.allclose(jump, [[1, 1], [0, 1]], atol=1e-10)

    def test_airy_bounded_at_origin(self):
        for z in (1e-8 * (1 + 1j), 1e-8 * (-1 + 0.1j), 1e-8 * (0.3 - 1j)):
            assert np.max(np.abs(psi_airy(z).entries)) < 10

    def test_airy_normalization_at_infinity(self):
        errs = []
        for r in (4.0, 8.0, 16.0):
            z = r * cmath.exp(0.25j * math.pi)
            m = psi_airy(z).entries
            lead = (np.diag([z ** -0.25, z ** 0.25]) @ (np.array([[1, 1], [-1, 1]]) / math.sqrt(2))
                    @ np.diag([cmath.exp(-0.25j * math.pi), cmath.exp(0.25j * math.pi)]))
            exp_part = np.diag([cmath.exp(-2 / 3 * z ** 1.5), cmath.exp(2 / 3 * z ** 1.5)])
            normalized = np.linalg.solve(lead, m) @ np.linalg.inv(exp_part)
            errs.append(np.max(np.abs(normalized - np.eye(2))))
        assert errs[0] > errs[1] > errs[2] and errs[2] < 0.02

    def test_on_contour(self):
        with pytest.raises(OnContour):
            psi_airy(2.0)
        with pytest.raises(OnContour):
            psi_bessel(0.5, -1.0)
        with pytest.raises(OnContour):
            psi_airy(cmath.exp(2j * math.pi / 3))

    def test_bessel_det_and_jump(self):
        assert abs(psi_bessel(0.5, 2.0).det() - 1) < 1e-12
        jump = observed_jump(lambda z: psi_bessel(0.5, z), math.pi, 1.2, 1)
        assert np.allclose(jump, [[0, 1], [-1, 0]], atol=1e-10)

    def test_bessel_connection_alpha_zero(self):
        z = 1.3 * cmath.exp(0.8j * math.pi)
        w0, _, w2, w3 = bessel_w(0.0, z)
        assert abs(w2 + w3 - w0) < 1e-13

    @given(st.floats(-0.95, 4.0), st.floats(0.2, 3.0))
    def test_all_jumps(self, alpha, r):
        for th, o, J in AIRY_RAYS:
            assert np.max(np.abs(observed_jump(psi_airy, th, r, o) - np.array(J))) < 1e-10
        for th, o, J in bessel_rays(alpha):
            got = observed_jump(lambda z: psi_bessel(alpha, z), th, r, o)
            assert np.max(np.abs(got - np.array(J))) < 1e-10

    @given(st.floats(-0.95, 4.0), st.complex_numbers(min_magnitude=0.1, max_magnitude=4.0))
    def test_dets(self, alpha, z):
        try:
            assert abs(psi_bessel(alpha, z).det() - 1) < 1e-11
            assert abs(psi_airy(z).det() - 1) < 1e-11
        except OnContour:
            pass

    def test_bessel_growth_at_origin(self):
        for alpha in (-0.5, 0.0, 0.5):
            small = [np.max(np.abs(psi_bessel(alpha, r * cmath.exp(0.3j)).entries)) for r in (1e-4, 1e-6)]
            if alpha < 0:
                rate = math.log(small[1] / small[0]) / math.log(1e-2)
                assert rate == pytest.approx(alpha / 2, abs=0.05)
            elif alpha == 0:
                assert small[1] / small[0] < 2.0  # logarithmic
            else:
                rate = math.log(small[1] / small[0]) / math.log(1e-2)
                assert rate == pytest.approx(-alpha / 2, abs=0.05)

    def test_suite_summary(self):
        assert all(c.passed for c in model_checks(0.3))
