import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sinhlab.conformal import (
    A_of,
    J_of,
    b_of,
    boundary_values,
    build_curve,
    gamma1_point,
    in_D,
    in_parabola_region,
    invert_inner,
    invert_outer,
    pulled_back_ellipse,
    s1_of,
    s2_of,
    scriptJ_deriv,
    scriptJ_of,
)
from sinhlab.errors import DomainError, UndefinedOnCut

xs = st.floats(0.05, 30.0)


@pytest.fixture(scope="module")
def curve2():
    return build_curve(2.0)


class TestScalars:
    def test_s2(self):
        assert s2_of(2.0) == 2.0
        assert s2_of(1.0) == 3.0
        vals = [s2_of(x) for x in (1, 10, 100, 1e4)]
        assert all(a > b > 1 for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("inf"), float("nan")])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            s2_of(bad)

    def test_s1_special_value(self):
        assert s1_of(math.pi / 2) == pytest.approx(-1.0, abs=1e-14)

    def test_s1_limits(self):
        assert s1_of(1e4) * 1e8 / math.pi ** 2 == pytest.approx(-1.0, rel=1e-3)
        assert s1_of(1e-5) * 1e-5 / 2 == pytest.approx(-1.0, rel=1e-4)

    @given(xs)
    def test_s1_solves_defining_equation(self, x):
        s = s1_of(x)
        assert s < 0
        assert abs(x * math.sqrt(-s) - math.acos((-s - 1) / (-s + 1))) < 1e-12

    def test_b_limits(self):
        assert b_of(1e5) / (1e10 / 4) == pytest.approx(1.0, rel=1e-3)
        assert b_of(1e-8) / 2e-8 == pytest.approx(1.0, rel=1e-7)

    def test_b_from_J(self):
        assert J_of(1.0, s2_of(1.0)).real == pytest.approx(2 * math.sqrt(b_of(1.0)), rel=1e-14)

    @given(xs, st.floats(1.001, 2.0))
    def test_b_increasing(self, x, factor):
        assert b_of(x * factor) > b_of(x)


class TestMaps:
    @given(xs)
    def test_J_vanishes_at_s1(self, x):
        assert abs(J_of(x, s1_of(x))) < 1e-12

    def test_scriptJ_at_origin(self):
        assert scriptJ_of(2.0, 1e-14j) == pytest.approx(-math.pi ** 2 / 4, abs=1e-6)

    def test_J_dominant_term(self):
        s = 1e12
        assert (J_of(3.0, s) / (3.0 * math.sqrt(s))).real == pytest.approx(1.0, rel=1e-10)

    def test_cut_rejected(self):
        for s in (0.0, 0.5, 1.0):
            with pytest.raises(UndefinedOnCut):
                scriptJ_of(2.0, s)

    def test_J_real_minimum_at_s2(self):
        x = 2.0
        s = np.linspace(1.05, 10, 400)
        j = np.asarray(J_of(x, s))
        assert np.max(np.abs(j.imag)) < 1e-14
        assert s[np.argmin(j.real)] == pytest.approx(s2_of(x), abs=0.03)

    @given(st.complex_numbers(min_magnitude=1.5, max_magnitude=50))
    def test_conjugation(self, s):
        assert abs(scriptJ_of(2.0, s.conjugate()) - scriptJ_of(2.0, s).conjugate()) < 1e-12 * abs(s)

    @given(st.complex_numbers(min_magnitude=1.5, max_magnitude=50))
    def test_derivative(self, s):
        h = 1e-6 * abs(s)
        fd = (scriptJ_of(2.0, s + h) - scriptJ_of(2.0, s - h)) / (2 * h)
        assert abs(fd - scriptJ_deriv(2.0, s)) < 1e-6 * max(1, abs(fd))

    def test_A_series(self):
        s = 1e6
        assert A_of(s).real == pytest.approx(1 / s + 1 / (3 * s * s), rel=1e-9)


class TestCurve:
    def test_fields(self, curve2):
        assert curve2.s2 == 2.0
        assert curve2.s1 < 0 and curve2.b > 0 and -math.pi < curve2.vstar < 0
        assert curve2.e1 > 0 and curve2.d1 > 0

    def test_endpoints(self, curve2):
        assert complex(gamma1_point(2.0, curve2.vstar)) == pytest.approx(curve2.s1, abs=1e-9)
        assert complex(gamma1_point(2.0, 0.0)) == pytest.approx(curve2.s2, abs=1e-14)

    def test_arcs(self, curve2):
        nodes = curve2.gamma1.nodes
        assert np.all(nodes.imag > 0)
        assert np.array_equal(curve2.gamma2.nodes, np.conj(nodes))
        j = np.asarray(J_of(2.0, nodes))
        assert np.max(np.abs(j.imag)) < 1e-10
        assert np.all(np.diff(j.real) > 0)
        assert j.real[0] > 0 and j.real[-1] < 2 * math.sqrt(curve2.b)

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0, 20.0])
    def test_monotone_for_several_x(self, x):
        c = build_curve(x, n_nodes=64)
        j = np.asarray(J_of(x, c.gamma1.nodes)).real
        assert np.all(np.diff(j) > 0)

    def test_membership(self, curve2):
        assert in_D(curve2, 0.5 + 0.0j)
        assert in_D(curve2, 0.5 + 0.1j)
        assert not in_D(curve2, 5.0 + 1j)
        assert not in_D(curve2, -5.0)


class TestInverse:
    def test_outer_roundtrip_and_sheet(self, curve2):
        rng = np.random.default_rng(5)
        b = curve2.b
        z = rng.uniform(-b, 2 * b, 150) + 1j * rng.uniform(-b, b, 150)
        dist = np.where((z.real >= 0) & (z.real <= b), np.abs(z.imag),
                        np.minimum(np.abs(z), np.abs(z - b)))
        z = z[dist > b / 100][:100]
        s = invert_outer(curve2, z)
        assert np.max(np.abs(scriptJ_of(2.0, s) - z) / np.maximum(1, np.abs(z))) < 1e-12
        assert not np.any(in_D(curve2, s))

    def test_outer_conjugate_symmetry(self, curve2):
        z = np.array([1 + 2j, -3 + 0.5j, 7 - 1j])
        assert np.allclose(invert_outer(curve2, np.conj(z)), np.conj(invert_outer(curve2, z)), atol=1e-13)

    def test_inner_roundtrip(self, curve2):
        z = np.array([complex(a, c) for a in np.linspace(-1.5, 2 * curve2.b, 8)
                      for c in (-1.0, -0.3, 0.3, 1.0)])
        z = z[in_parabola_region(z)]
        s = invert_inner(curve2, z)
        assert np.max(np.abs(scriptJ_of(2.0, s) - z) / np.maximum(1, np.abs(z))) < 1e-12
        assert np.all(in_D(curve2, s))

    def test_outer_large_z(self, curve2):
        R = 1e8
        assert complex(invert_outer(curve2, R)).real * 4 / (4 * R) == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.parametrize("sheet", ["outer", "inner"])
    def test_edge_slope_at_b(self, curve2, sheet):
        inv = invert_outer if sheet == "outer" else invert_inner
        delta = 1e-8
        s = complex(inv(curve2, curve2.b + 1j * delta))
        assert abs(s - curve2.s2) / math.sqrt(delta) == pytest.approx(curve2.d1, rel=1e-3)

    def test_boundary_values(self, curve2):
        b = curve2.b
        plus, minus = boundary_values(curve2, 0.4 * b)
        assert minus == plus.conjugate() and plus.imag > 0
        assert complex(invert_outer(curve2, 0.4 * b + 1e-10j)) == pytest.approx(plus, abs=1e-4)
        assert boundary_values(curve2, 1e-12 * b)[0] == pytest.approx(curve2.s1, abs=1e-4)
        assert boundary_values(curve2, b * (1 - 1e-12))[0] == pytest.approx(curve2.s2, abs=1e-4)
        with pytest.raises(DomainError):
            boundary_values(curve2, b * 1.01)

    def test_boundary_values_large_x(self):
        def rel_gap(x):
            c = build_curve(x, n_nodes=64)
            y = x * x / 8
            got = boundary_values(c, y)[0] * x * x / 4
            want = y + 1j * math.pi * math.sqrt(y)
            return abs(got - want) / abs(want)

        gaps = [rel_gap(x) for x in (100.0, 400.0)]
        assert gaps[0] < 0.05
        assert gaps[1] < 0.5 * gaps[0]  # O(1/x)

    def test_pulled_back_contour_encloses_D(self, curve2):
        inner = pulled_back_ellipse(curve2, "inner", n=128)
        ones = np.sum(inner.samples.weights / (inner.samples.nodes - 0.5))
        assert abs(ones - 2j * math.pi) < 1e-8
        assert np.allclose(scriptJ_of(2.0, inner.samples.nodes), inner.z_nodes, atol=1e-10)
