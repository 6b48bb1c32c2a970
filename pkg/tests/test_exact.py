import math

import gmpy2
import mpmath
import pytest

from sinhlab import exact
from sinhlab.equilibrium import Potential
from sinhlab.errors import ConfigError, DomainError, SingularBimomentMatrix, TailBoundFailure
from sinhlab.numerics import PrecisionContext

# int_0^inf sinh^2(sqrt x) e^-x dx (mpmath, 30 digits)
SINH2_MOMENT = 2.03007846927870497553908992567
# DMPK weight, M = 1, n = 1: h_0 = int f'(x)^(1/2) e^-x dx and the one-channel conductance
DMPK_H0 = 1.36539834145365188110249316879
DMPK_COND_N1 = 0.471044645670254798920984239511


def plain_weight(n=1):
    return exact.WeightSpec(0.0, "one", Potential.linear(1.0), n)


@pytest.fixture(scope="module")
def sys10():
    return exact.biorthogonalize(exact.dmpk_weight(1.0, 10), 12)


class TestWeight:
    def test_validation(self):
        for kwargs in ({"alpha": -1.0}, {"h_kind": "two"}, {"n": 0}, {"h_kind": "custom"}):
            args = {"alpha": 0.0, "h_kind": "one", "V": Potential.linear(1.0), "n": 1, **kwargs}
            with pytest.raises(ConfigError):
                exact.WeightSpec(**args)

    def test_dmpk_factor(self):
        w = exact.dmpk_weight(1.0, 1)
        x = 2.0
        want = math.sqrt(math.sinh(2 * math.sqrt(x)) / (2 * math.sqrt(x))) * math.exp(-x)
        assert w.weight_float(x) == pytest.approx(want, rel=1e-15)

    def test_default_bits(self):
        assert exact.default_bits(4) == 256
        assert exact.default_bits(40) == 960


class TestBimoments:
    def test_plain_moments(self):
        w = plain_weight()
        assert float(exact.bimoment(0, 0, w)) == pytest.approx(1.0, rel=1e-30)
        assert float(exact.bimoment(1, 0, w)) == pytest.approx(1.0, rel=1e-30)
        assert float(exact.bimoment(3, 0, w)) == pytest.approx(6.0, rel=1e-30)
        assert float(exact.bimoment(0, 1, w)) == pytest.approx(SINH2_MOMENT, rel=1e-15)

    def test_precision_follows_context(self):
        ctx = PrecisionContext(200, abs_tol=1e-50, rel_tol=1e-50)
        val = exact.bimoment(0, 1, plain_weight(), ctx)
        with mpmath.workdps(60):
            ref = mpmath.quad(lambda x: mpmath.sinh(mpmath.sqrt(x)) ** 2 * mpmath.exp(-x), [0, 1, 10, mpmath.inf])
            assert abs(mpmath.mpf(str(val)) - ref) < mpmath.mpf(10) ** -50

    def test_negative_index(self):
        with pytest.raises(DomainError):
            exact.bimoment(-1, 0, plain_weight())

    def test_tail_failure(self):
        flat = Potential.general(lambda z: 0 * z, lambda z: 0 * z, lambda z: 0 * z)
        with pytest.raises(TailBoundFailure):
            exact.biorthogonalize(exact.WeightSpec(0.0, "one", flat, 1), 2)


class TestSystem:
    def test_first_norm(self):
        s = exact.biorthogonalize(exact.dmpk_weight(1.0, 1), 2)
        assert s.h_float(0) == pytest.approx(DMPK_H0, rel=1e-15)

    def test_first_polynomial(self):
        w = plain_weight()
        s = exact.biorthogonalize(w, 3)
        m = s.moments.values
        with s.context():
            root, qroot = m[1, 0] / m[0, 0], m[0, 1] / m[0, 0]
        assert abs(exact.eval_p(s, 1, root)) < 1e-60
        assert abs(exact.eval_q_at_w(s, 1, qroot)) < 1e-60

    def test_norms_positive_and_residuals(self, sys10):
        assert all(sys10.h_float(j) > 0 for j in range(13))
        assert sys10.max_residual < 1e-30
        assert sys10.pivot_agreement < 1e-30

    def test_monic(self, sys10):
        for j in range(13):
            assert sys10.p_coeffs[j][-1] == 1 and len(sys10.p_coeffs[j]) == j + 1
            assert sys10.q_coeffs[j][-1] == 1
        assert exact.eval_p(sys10, 0, 3.7) == 1

    def test_pairing(self, sys10):
        # <p_i, q_j> = h_j delta_ij directly from the bimoment matrix
        m = sys10.moments.values
        with sys10.context():
            for i, j in ((3, 3), (3, 5), (7, 2)):
                pair = sum(a * b * m[r, s] for r, a in enumerate(sys10.p_coeffs[i])
                           for s, b in enumerate(sys10.q_coeffs[j]))
                if i == j:
                    assert abs(pair / sys10.h_norms[j] - 1) < 1e-30
                else:
                    assert abs(pair) < 1e-30 * sys10.h_norms[max(i, j)]

    def test_conjugate_symmetry(self, sys10):
        z = 1.3 + 0.7j
        assert complex(exact.eval_q(sys10, 5, z.conjugate())) == pytest.approx(
            complex(exact.eval_q(sys10, 5, z)).conjugate(), rel=1e-15)
        assert complex(exact.eval_p(sys10, 5, z.conjugate())) == pytest.approx(
            complex(exact.eval_p(sys10, 5, z)).conjugate(), rel=1e-15)

    def test_degree_bounds(self, sys10):
        with pytest.raises(DomainError):
            exact.eval_p(sys10, 13, 1.0)
        with pytest.raises(DomainError):
            exact.kernel_K(sys10, 1.0, 1.0, 20)

    def test_escalation_gives_up(self):
        # a negative bound can never be met, so every escalation is used up
        with pytest.raises(SingularBimomentMatrix, match="escalations"):
            exact.biorthogonalize(plain_weight(), 2, residual_bound=-1.0)


class TestKernel:
    def test_one_term_kernel(self):
        s = exact.biorthogonalize(exact.dmpk_weight(1.0, 1), 2)
        x, y = 0.7, 1.9
        want = math.sqrt(s.weight.weight_float(x) * s.weight.weight_float(y)) / s.h_float(0)
        assert float(exact.kernel_K(s, x, y, 1)) == pytest.approx(want, rel=1e-15)

    def test_trace_and_reproducing(self):
        s = exact.biorthogonalize(exact.dmpk_weight(1.0, 4), 4)
        assert exact.kernel_trace(s, 4) == pytest.approx(4.0, abs=1e-12)
        assert exact.reproducing_residual(s, 0.5, 2.0, 4) < 1e-12


class TestConductance:
    def test_single_channel(self):
        s = exact.biorthogonalize(exact.dmpk_weight(1.0, 1), 2)
        assert exact.conductance_mean(s, "exact", 1) == pytest.approx(DMPK_COND_N1, rel=1e-14)

    def test_close_to_continuum(self):
        s = exact.biorthogonalize(exact.dmpk_weight(1.0, 8), 8)
        per_channel = exact.conductance_mean(s, "exact", 8) / 8
        continuum = exact.conductance_mean(1.0, "continuum")
        assert abs(per_channel / continuum - 1) < 0.1

    def test_modes(self):
        with pytest.raises(ConfigError):
            exact.conductance_mean(1.0, "other")
        quad = exact.biorthogonalize(exact.WeightSpec(0.0, "one", Potential.poly([0.0, 1.0]), 1), 1)
        with pytest.raises(ConfigError):
            exact.conductance_mean(quad, "exact")


def test_compare_report_shape(meas1, bundle1):
    rep = exact.compare_report(exact.dmpk_weight(1.0, 8), meas1, bundle1, [8, 12], 0,
                               {"outer": [2 * meas1.b], "h": [None]})
    assert {(r.region, r.quantity) for r in rep.rows} == {("outer", "p"), ("outer", "q"), ("h", "p")}
    e8, e12 = rep.errors("outer", "p", 2 * meas1.b, 0)
    assert e12 < e8
    assert rep.decay[("outer", "p", 2 * meas1.b, 0)] > 0
    assert isinstance(gmpy2.mpfr(1), type(exact.eval_p(exact.biorthogonalize(plain_weight(), 1), 1, 0.5)))
