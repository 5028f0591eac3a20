"""Special-function layer: frozen oracles and bound properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenlab.specfun import (
    beta_fn,
    check_power_bound,
    gamma_fn,
    ln_gamma,
    sphere_measure,
)


class TestGamma:
    def test_half_integer(self):
        assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert gamma_fn(1.5) == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-15)

    def test_factorial(self):
        assert gamma_fn(5.0) == 24.0
        assert gamma_fn(1.0) == 1.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gamma_fn(0.0)
        with pytest.raises(ValueError):
            gamma_fn(-1.5)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            gamma_fn(200.0)

    @given(st.floats(min_value=0.1, max_value=60.0))
    @settings(max_examples=200, deadline=None)
    def test_ln_gamma_consistent(self, x):
        assert ln_gamma(x) == pytest.approx(math.log(gamma_fn(x)), abs=1e-12, rel=1e-12)


class TestBeta:
    def test_simple(self):
        assert beta_fn(3.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-14)
        assert beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)

    def test_half_space_moment(self):
        # the (n, p) = (5, 4/3) tail moment B(3, 3/2) = 16/105
        assert beta_fn(3.0, 1.5) == pytest.approx(16.0 / 105.0, rel=1e-13)

    @given(
        st.floats(min_value=0.05, max_value=40.0),
        st.floats(min_value=0.05, max_value=40.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, x, y):
        assert beta_fn(x, y) == pytest.approx(beta_fn(y, x), rel=1e-12)

    def test_recurrence(self):
        # B(x, y+1) = B(x, y) * y / (x + y)
        for x, y in [(2.3, 0.7), (5.0, 1.5), (0.5, 0.5)]:
            assert beta_fn(x, y + 1.0) == pytest.approx(
                beta_fn(x, y) * y / (x + y), rel=1e-12
            )


class TestSphereMeasure:
    def test_known_values(self):
        assert sphere_measure(2) == pytest.approx(2.0 * math.pi, rel=1e-15)
        assert sphere_measure(3) == pytest.approx(4.0 * math.pi, rel=1e-15)
        assert sphere_measure(4) == pytest.approx(2.0 * math.pi**2, rel=1e-15)
        assert sphere_measure(5) == pytest.approx(8.0 * math.pi**2 / 3.0, rel=1e-14)

    def test_recurrence(self):
        # measure of the unit sphere in R^n: S(n) = 2 pi S(n-2) / (n-2)
        for n in range(4, 14):
            assert sphere_measure(n) == pytest.approx(
                2.0 * math.pi * sphere_measure(n - 2) / (n - 2), rel=1e-13
            )


class TestPowerBound:
    """a^p - (a-b)^p sandwich and expansion clauses, exercised densely."""

    def _sample(self, rng, p, m=10000):
        a = rng.uniform(1e-3, 10.0, size=m)
        b = a * rng.uniform(0.0, 1.0, size=m)
        return a, b

    @pytest.mark.parametrize("p", [0.3, 0.7, 1.0, 1.2, 1.5, 1.9, 2.0, 2.7, 4.0])
    def test_sandwich_clause(self, p):
        rng = np.random.default_rng(20240 + int(100 * p))
        a, b = self._sample(rng, p)
        results = [check_power_bound(p, ai, bi) for ai, bi in zip(a, b)]
        bad = [r for r in results if not r.ok]
        assert not bad, f"{len(bad)} sandwich violations at p={p}: {bad[:3]}"

    @pytest.mark.parametrize("p", [0.5, 1.3, 2.0, 3.1])
    @pytest.mark.parametrize("eta", [0.1, 0.5, 0.9])
    def test_expansion_clause(self, p, eta):
        rng = np.random.default_rng(77 + int(10 * p) + int(100 * eta))
        m = 10000
        a = rng.uniform(1e-3, 10.0, size=m)
        b = eta * a * rng.uniform(-1.0, 1.0, size=m)
        results = [check_power_bound(p, ai, bi, eta=eta) for ai, bi in zip(a, b)]
        bad = [r for r in results if not r.ok]
        assert not bad, f"{len(bad)} expansion violations at p={p}, eta={eta}: {bad[:3]}"

    def test_degenerate(self):
        assert check_power_bound(1.5, 0.0, 0.0).ok
        assert check_power_bound(1.5, 3.0, 0.0).ok
        assert check_power_bound(1.5, 3.0, 3.0).ok

    def test_requires_ordering(self):
        with pytest.raises(ValueError):
            check_power_bound(1.5, 1.0, 2.0)
        with pytest.raises(ValueError):
            check_power_bound(1.5, 1.0, -0.5)

    def test_eta_requires_window(self):
        with pytest.raises(ValueError):
            check_power_bound(1.5, 1.0, 0.9, eta=0.5)

    def test_slack_sign(self):
        r = check_power_bound(1.3, 2.0, 1.0)
        assert r.slack >= 0.0
        assert r.lower <= r.value <= r.upper
