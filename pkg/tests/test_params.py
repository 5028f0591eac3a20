"""Parameter bookkeeping: exponents, scalings, regimes, kernel constants."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenlab.params import (
    Regime,
    SystemParams,
    fundamental_constant,
    gamma_constants,
    make_params,
)


class TestMakeParams:
    def test_low_b_reference_point(self):
        prm = make_params(5, 1.0)
        assert prm.q0 == pytest.approx(9.0, rel=1e-14)
        assert prm.alpha0 == pytest.approx(0.5, rel=1e-14)
        assert prm.beta0 == pytest.approx(2.5, rel=1e-14)
        assert prm.regime is Regime.LOW_B
        assert prm.c_n == pytest.approx(1.0 / (8.0 * math.pi**2), rel=1e-14)
        assert prm.gamma1 == pytest.approx(1.0 / (16.0 * math.pi**2), rel=1e-13)
        # at p = 1 the kernel power drops out: gamma2 = 1/((s-2(n-1))(n-s)) = -1/10
        assert prm.gamma2 == pytest.approx(-0.1, rel=1e-13)

    def test_high_reference_point(self):
        prm = make_params(5, 2.0)
        assert prm.regime is Regime.HIGH
        assert prm.q0 == pytest.approx(11.0 / 4.0, rel=1e-14)
        assert prm.alpha0 == pytest.approx(4.0 / 3.0, rel=1e-14)
        assert prm.beta0 == pytest.approx(5.0 / 3.0, rel=1e-14)
        assert prm.gamma1 is None and prm.gamma2 is None

    def test_perturbed_exponent(self):
        prm = make_params(5, 1.0, eps=0.01)
        assert prm.q_eps == pytest.approx(89.0 / 11.0, rel=1e-14)
        assert prm.q_eps < prm.q0

    def test_critical_boundary_included(self):
        prm = make_params(6, 2.0)
        assert prm.regime is Regime.HIGH
        assert prm.q0 == pytest.approx(2.0, rel=1e-14)
        assert prm.alpha0 == pytest.approx(2.0, rel=1e-14)
        assert prm.beta0 == pytest.approx(2.0, rel=1e-14)

    def test_log_tie(self):
        n = 5
        p_log = n / (n - 2.0)
        assert make_params(n, p_log).regime is Regime.LOG
        assert make_params(n, p_log + 5e-12).regime is Regime.HIGH
        assert make_params(n, p_log - 5e-12).regime is Regime.LOW_A

    def test_low_a_band(self):
        # (n-1)/(n-2) <= p < n/(n-2)
        assert make_params(5, 4.0 / 3.0).regime is Regime.LOW_A
        assert make_params(5, 1.5).regime is Regime.LOW_A
        assert make_params(5, 1.3).regime is Regime.LOW_B

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            make_params(5, 2.0 / 3.0)  # at the lower boundary
        with pytest.raises(ValueError):
            make_params(5, 7.0 / 3.0 + 1e-9)  # beyond the critical exponent
        with pytest.raises(ValueError):
            make_params(2, 1.0)
        with pytest.raises(ValueError):
            make_params(5.5, 1.0)  # type: ignore[arg-type]
        with pytest.raises(ValueError):
            make_params(5, 1.0, eps=-0.01)

    def test_rejects_order_violation(self):
        # large eps drags q_eps below p
        with pytest.raises(ValueError):
            make_params(5, 2.0, eps=0.1)

    def test_json_dict(self):
        d = make_params(5, 1.0, eps=0.01).to_json_dict()
        assert d["regime"] == "LOW_B"
        assert d["n"] == 5
        assert isinstance(d["q_eps"], float)


class TestScalingIdentities:
    @given(
        st.integers(min_value=3, max_value=40),
        st.floats(min_value=0.01, max_value=0.99),
        st.floats(min_value=0.0, max_value=0.005),
    )
    @settings(max_examples=300, deadline=None)
    def test_exponent_relations(self, n, frac, eps):
        lo = 2.0 / (n - 2)
        hi = (n + 2.0) / (n - 2)
        p = lo + frac * (hi - lo)
        try:
            prm = make_params(n, p, eps=eps)
        except ValueError:
            return  # order violation at this eps; ruled out by construction
        # scaling exponents solve the linear system tied to the source powers
        pq1 = p * prm.q_eps - 1.0
        assert prm.alpha_eps * pq1 == pytest.approx(2.0 * (p + 1.0), rel=1e-11)
        assert prm.beta_eps * pq1 == pytest.approx(2.0 * (prm.q_eps + 1.0), rel=1e-11)
        # unperturbed exponents satisfy the dimensional normalizations
        assert prm.alpha0 * (prm.q0 + 1.0) == pytest.approx(n, rel=1e-11)
        assert prm.beta0 * (p + 1.0) == pytest.approx(n, rel=1e-11)
        assert prm.alpha0 + prm.beta0 == pytest.approx(n - 2.0, rel=1e-10)
        # perturbation only increases the total scaling weight
        assert prm.alpha_eps + prm.beta_eps >= n - 2.0 - 1e-10

    def test_perturbation_monotone(self):
        prm0 = make_params(5, 1.0, eps=0.0)
        prm1 = make_params(5, 1.0, eps=0.01)
        assert prm1.alpha_eps > prm0.alpha_eps
        assert prm1.q_eps < prm0.q_eps


class TestKernelConstants:
    def test_fundamental_constant_values(self):
        assert fundamental_constant(3) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-14)
        assert fundamental_constant(5) == pytest.approx(1.0 / (8.0 * math.pi**2), rel=1e-14)

    def test_gamma_signs(self):
        for n in range(5, 13):
            for frac in (0.1, 0.4, 0.8):
                lo, hi = 2.0 / (n - 2), n / (n - 2.0)
                p = lo + frac * (hi - lo)
                g1, g2 = gamma_constants(n, p)
                assert g1 > 0.0
                assert g2 < 0.0

    def test_gamma_requires_low_range(self):
        with pytest.raises(ValueError):
            gamma_constants(5, 2.0)  # (n-2)p = 6 > n
        with pytest.raises(ValueError):
            gamma_constants(5, 0.5)  # (n-2)p = 1.5 < 2

    def test_frozen(self):
        prm = make_params(5, 1.0)
        with pytest.raises(Exception):
            prm.n = 6  # type: ignore[misc]
        assert isinstance(prm, SystemParams)
