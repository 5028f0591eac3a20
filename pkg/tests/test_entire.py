"""Entire ground states: radial shooting, decay constants, integral norms."""

import dataclasses
import math

import numpy as np
import pytest

from emdenlab import entire
from emdenlab import (
    RadialProfile,
    decay_constants,
    make_params,
    norms,
    sobolev_quotient,
    solve_entire,
    write_profile_csv,
)


def _bubble(n):
    """Closed-form ground state at the symmetric exponent p = q = (n+2)/(n-2)."""
    lam = float(n * (n - 2))
    k = (n - 2) / 2.0
    return lambda r: (1.0 + np.asarray(r, dtype=float) ** 2 / lam) ** (-k)


def _sphere_area(n):
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@pytest.fixture(scope="module")
def bubble5():
    return solve_entire(make_params(5, 7.0 / 3.0, 0.0), tol=1e-11, r_max=1e3)


@pytest.fixture(scope="module")
def bubble6():
    return solve_entire(make_params(6, 2.0, 0.0), tol=1e-11, r_max=2e3)


@pytest.fixture(scope="module")
def high_asym():
    # n=5, p=2 puts q0 = 11/4 on the hyperbola; both tails decay like r^(2-n)
    return solve_entire(make_params(5, 2.0, 0.0), tol=1e-11, r_max=3e3)


@pytest.fixture(scope="module")
def low_p1():
    # n=5, p=1 puts q0 = 9 on the hyperbola; u decays like r^(2-(n-2)p) = 1/r
    return solve_entire(make_params(5, 1.0, 0.0), tol=1e-11, r_max=1e3)


class TestSolveEntire:
    def test_bubble5_matches_closed_form(self, bubble5):
        w = _bubble(5)
        r = np.linspace(0.0, 50.0, 2001)
        assert np.max(np.abs(bubble5.u(r) - w(r))) < 1e-5
        assert np.max(np.abs(bubble5.v(r) - w(r))) < 1e-5

    def test_bubble5_shoot_param(self, bubble5):
        assert abs(bubble5.shoot_param - 1.0) < 1e-5

    def test_bubble6_matches_closed_form(self, bubble6):
        w = _bubble(6)
        r = np.linspace(0.0, 50.0, 2001)
        assert np.max(np.abs(bubble6.u(r) - w(r))) < 1e-5
        assert np.max(np.abs(bubble6.v(r) - w(r))) < 1e-5
        assert abs(bubble6.shoot_param - 1.0) < 1e-5

    def test_bracket_metadata(self, bubble5):
        assert bubble5.iterations > 10
        assert 0.0 < bubble5.bracket_width < 2e-14 * bubble5.shoot_param

    def test_profiles_monotone(self, bubble5, high_asym, low_p1):
        for sol in (bubble5, high_asym, low_p1):
            assert np.all(np.diff(sol.profile.u_vals) <= 0.0)
            assert np.all(np.diff(sol.profile.v_vals) <= 0.0)

    def test_center_normalization(self, high_asym):
        prof = high_asym.profile
        assert prof.grid[0] == 0.0
        assert prof.u_vals[0] == 1.0
        assert prof.u_vals[0] == np.max(prof.u_vals)
        assert prof.v_vals[0] == high_asym.shoot_param

    def test_classification_monotone_in_s(self):
        # below the threshold v crosses, above it u crosses; no interleaving
        kinds = [entire._integrate(5, 7.0 / 3.0, 7.0 / 3.0, s,
                                   entire._CLASSIFY_CAP, 1e-10)[0]
                 for s in (0.3, 0.7, 1.5, 3.0)]
        assert kinds == [entire._CROSS_V, entire._CROSS_V,
                         entire._CROSS_U, entire._CROSS_U]

    def test_eps_nonzero_rejected(self):
        params = make_params(5, 2.0, 0.01)
        with pytest.raises(ValueError, match="eps = 0"):
            solve_entire(params)

    def test_no_bracket_raises(self, monkeypatch):
        monkeypatch.setattr(entire, "_integrate",
                            lambda *a, **k: (entire._CROSS_U, None))
        with pytest.raises(RuntimeError, match="no ground-state bracket"):
            solve_entire(make_params(5, 2.0, 0.0))

    def test_multiple_brackets_raise(self, monkeypatch):
        state = {"i": 0}

        def flipping(*a, **k):
            state["i"] += 1
            return (entire._CROSS_U if state["i"] % 2 else entire._CROSS_V,
                    None)

        monkeypatch.setattr(entire, "_integrate", flipping)
        with pytest.raises(RuntimeError, match="multiple shooting brackets"):
            solve_entire(make_params(5, 2.0, 0.0))

    def test_short_run_warns(self):
        # a tiny integration window cannot host a converged plateau
        with pytest.warns(RuntimeWarning, match="plateau variation"):
            solve_entire(make_params(5, 2.0, 0.0), tol=1e-8, r_max=30.0)


class TestDecayConstants:
    def test_bubble5_a(self, bubble5):
        target = 15.0 ** 1.5
        assert abs(bubble5.a - target) / target < 1e-3

    def test_bubble6_a(self, bubble6):
        assert abs(bubble6.a - 576.0) / 576.0 < 1e-3

    def test_plateau_quality_high(self, high_asym):
        assert high_asym.a_variation < 0.05
        assert high_asym.b_variation < 0.05

    def test_plateau_quality_low(self, low_p1):
        assert low_p1.a_variation < 0.05
        assert low_p1.b_variation < 0.05

    def test_endpoint_estimator_consistent(self, bubble5, bubble6, high_asym,
                                           low_p1):
        for sol in (bubble5, bubble6, high_asym, low_p1):
            assert abs(sol.L - sol.a) < 0.05 * sol.a

    def test_refit_matches_solver(self, bubble5):
        a, b, L = decay_constants(bubble5)
        assert np.isclose(a, bubble5.a, rtol=1e-12)
        assert np.isclose(b, bubble5.b, rtol=1e-12)
        assert np.isclose(L, bubble5.L, rtol=1e-12)

    def test_symmetric_case_a_equals_b(self, bubble5):
        # at p = q0 the two components coincide, so their limits do too
        assert abs(bubble5.a - bubble5.b) < 1e-5 * bubble5.a

    def test_low_example_b3_plateau(self):
        # u decays like r^(2-(n-2)p) = r^(-1.6) here; the compensated
        # plateau r^1.6 u settles well inside the 5% tolerance
        sol = solve_entire(make_params(5, 1.2, 0.0), tol=1e-11, r_max=1e3)
        assert sol.params.q0 == pytest.approx(5.875)
        assert sol.b > 0.0
        assert sol.b_variation < 0.05

    def test_decay_crosscheck_bounded(self, high_asym, low_p1):
        # u (1 + r^kappa) stays bounded by a multiple of the fitted constant
        for sol, kappa in ((high_asym, 3.0), (low_p1, 1.0)):
            r = sol.profile.grid
            u = sol.profile.u_vals
            assert np.max(u * (1.0 + r ** kappa)) < 10.0 * (sol.b + 1.0)


class TestNorms:
    def test_bubble5_A_U0(self, bubble5):
        # the bubble reduces the q0-power integral to a Beta function
        target = (8.0 * math.pi ** 2 / 3.0) * 15.0 ** 2.5 / 5.0
        assert abs(bubble5.A_U0 - target) / target < 1e-4

    def test_bubble6_A_U0(self, bubble6):
        target = math.pi ** 3 * 24.0 ** 3 / 6.0
        assert abs(bubble6.A_U0 - target) / target < 1e-4

    def test_symmetric_norms_agree(self, bubble5):
        assert bubble5.A_V0 == pytest.approx(bubble5.A_U0, rel=1e-5)

    def test_divergent_A_V0_low(self, low_p1):
        a_u, a_v = norms(low_p1)
        assert a_v.divergent
        assert a_v.value is None
        assert math.isinf(a_v.tail_part)
        assert low_p1.A_V0 is None

    def test_finite_A_V0_high(self, high_asym):
        a_u, a_v = norms(high_asym)
        assert not a_v.divergent
        assert a_v.value > 0.0
        assert 0.0 < a_v.tail_part < 1e-2 * a_v.value

    def test_tail_reported(self, bubble6):
        a_u, _ = norms(bubble6)
        assert 0.0 < a_u.tail_part < 1e-3 * a_u.value


class TestSobolevQuotient:
    def test_bubble5_value(self, bubble5):
        # independent closed form from the bubble integrals:
        # S = (integral of w^(p+1))^(2(p+1)/(n p)) at p = 7/3, n = 5
        beta = math.gamma(2.5) ** 2 / math.gamma(5.0)
        i_v = _sphere_area(5) * 15.0 ** 2.5 * 0.5 * beta
        target = i_v ** (4.0 / 7.0)
        assert abs(sobolev_quotient(bubble5) - target) / target < 1e-4

    def test_asymmetric_identity_holds(self, high_asym):
        assert sobolev_quotient(high_asym) > 0.0

    def test_identity_violation_raises(self, bubble5):
        hacked = dataclasses.replace(bubble5)
        object.__setattr__(hacked, "_dense_u", bubble5._dense_u)
        object.__setattr__(hacked, "_dense_v",
                           lambda r: 1.02 * bubble5._dense_v(r))
        with pytest.raises(RuntimeError, match="identity violated"):
            sobolev_quotient(hacked)


class TestProfileExport:
    def test_csv_roundtrip(self, tmp_path, bubble5):
        path = tmp_path / "profile.csv"
        write_profile_csv(bubble5.profile, path)
        header = path.read_text().splitlines()[0]
        assert header == "r,u,v,du,dv"
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        prof = bubble5.profile
        assert np.allclose(data[:, 0], prof.grid, rtol=0, atol=0)
        assert np.allclose(data[:, 1], prof.u_vals, rtol=1e-15)
        assert np.allclose(data[:, 2], prof.v_vals, rtol=1e-15)
        assert np.allclose(data[:, 3], prof.du_vals, rtol=1e-15)
        assert np.allclose(data[:, 4], prof.dv_vals, rtol=1e-15)


class TestRadialProfileInvariants:
    def _fields(self):
        g = np.array([0.0, 1.0, 2.0, 3.0])
        u = np.array([1.0, 0.8, 0.5, 0.3])
        v = np.array([0.9, 0.7, 0.4, 0.2])
        du = np.zeros(4)
        dv = np.zeros(4)
        return g, u, v, du, dv

    def test_valid_profile_accepted(self):
        g, u, v, du, dv = self._fields()
        prof = RadialProfile(g, u, v, du, dv)
        assert prof.r_end == 3.0

    def test_grid_must_start_at_zero(self):
        g, u, v, du, dv = self._fields()
        with pytest.raises(ValueError, match="start at 0"):
            RadialProfile(g + 0.5, u, v, du, dv)

    def test_grid_must_increase(self):
        g, u, v, du, dv = self._fields()
        g[2] = g[1]
        with pytest.raises(ValueError, match="increase"):
            RadialProfile(g, u, v, du, dv)

    def test_positive_values_required(self):
        g, u, v, du, dv = self._fields()
        v[-1] = -0.1
        with pytest.raises(ValueError, match="positive"):
            RadialProfile(g, u, v, du, dv)

    def test_center_maximum_required(self):
        g, u, v, du, dv = self._fields()
        u[1] = 1.5
        with pytest.raises(ValueError, match="maximum at the center"):
            RadialProfile(g, u, v, du, dv)

    def test_length_mismatch_rejected(self):
        g, u, v, du, dv = self._fields()
        with pytest.raises(ValueError, match="length"):
            RadialProfile(g, u, v, du, dv[:-1])

    def test_minimum_points(self):
        with pytest.raises(ValueError, match=">= 4"):
            RadialProfile(np.array([0.0, 1.0]), np.array([1.0, 0.5]),
                          np.array([1.0, 0.5]), np.zeros(2), np.zeros(2))
