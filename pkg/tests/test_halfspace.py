"""Boundary-layer inequality certification: kernels, closed forms, verdicts."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenlab.halfspace import (
    InequalityReport,
    Verdict,
    case1_margin_lower_bound,
    compute_X1,
    compute_X2,
    compute_X2_direct,
    compute_X2_terms,
    compute_X3,
    compute_Y,
    fold_diagnostic,
    kernel_K1,
    kernel_K2,
    lhs_as0,
    low_grid,
    neg_x2_upper_bound,
    rhs_as0,
    rhs_as1,
    verify_as0,
    verify_as1,
    verify_b50,
    verify_master,
    x1_upper_bound,
    x3_upper_bound,
    y_lower_bound_large_n,
)
from emdenlab.quadrature import QuadResult


def _low_b_point(n: int, frac: float) -> float:
    lo, hi = 2.0 / (n - 2.0), (n - 1.0) / (n - 2.0)
    return lo + frac * (hi - lo)


def _low_a_point(n: int, frac: float) -> float:
    lo, hi = (n - 1.0) / (n - 2.0), float(n) / (n - 2.0)
    return lo + frac * (hi - lo)


class TestKernels:
    def test_K1_exact_point(self):
        # at (n, p, r, t) = (5, 1, 1, 1): A = 1, B = 5, and the p = 1
        # bracket collapses to xi, so K1 = B^(-3/2)
        assert kernel_K1(5, 1.0, 1.0, 1.0) == pytest.approx(5.0**-1.5, rel=1e-14)

    def test_K1_linear_case_is_far_kernel(self):
        # p = 1 makes the difference kernel telescope to B^(-(n-2)/2)
        rng = np.random.default_rng(7)
        r = rng.uniform(0.05, 5.0, size=40)
        t = rng.uniform(0.0, 5.0, size=40)
        for n in (5, 7, 10):
            expect = (r * r + (t + 1.0) ** 2) ** (-0.5 * (n - 2))
            np.testing.assert_allclose(kernel_K1(n, 1.0, r, t), expect, rtol=1e-12)

    def test_K1_on_boundary_height(self):
        # at t = 0 the shifted distances coincide and the kernel reduces
        # to the pure power A^(-(n-2)p/2)
        r = np.array([0.3, 1.0, 2.5])
        for n, p in ((5, 1.2), (8, 0.9)):
            expect = (r * r + 1.0) ** (-0.5 * (n - 2) * p)
            np.testing.assert_allclose(kernel_K1(n, p, r, 0.0), expect, rtol=1e-13)

    def test_K1_rejects_singular_point(self):
        with pytest.raises(ValueError):
            kernel_K1(5, 1.0, 0.0, 1.0)

    @given(
        n=st.integers(min_value=5, max_value=12),
        frac=st.floats(0.01, 0.99),
        r=st.floats(1e-3, 50.0),
        t=st.floats(0.0, 50.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_K1_positive(self, n, frac, r, t):
        # 0 < xi < 1 away from (0, 1), so the bracket is strictly positive
        if r * r + (t - 1.0) ** 2 == 0.0:
            return
        p = _low_b_point(n, frac)
        assert kernel_K1(n, p, r, t) > 0.0

    def test_K2_matches_direct_formula(self):
        rng = np.random.default_rng(11)
        for n in (5, 6, 9):
            p = _low_a_point(n, 0.4)
            lam = 2.0 * (n - 2) * p / (2.0 * (n - 1) - (n - 2) * p)
            r = rng.uniform(0.2, 4.0, size=30)
            t = rng.uniform(0.0, 4.0, size=30)
            A = r * r + (t - 1.0) ** 2
            B = r * r + (t + 1.0) ** 2
            xi = (A / B) ** (0.5 * (n - 2))
            direct = A ** (-0.5 * (n - 2) * p) * (
                1.0 - (1.0 - xi) ** p - p * xi + lam * xi * (r * r + t * t - 1.0) / B
            )
            np.testing.assert_allclose(kernel_K2(n, p, r, t), direct, rtol=1e-9)

    def test_K2_rejects_out_of_range_exponent(self):
        # the corrected kernel needs (n-2)p < 2(n-1)
        with pytest.raises(ValueError):
            kernel_K2(5, 3.0, 1.0, 1.0)

    def test_small_xi_branch_is_smooth(self):
        # values straddling the series/direct switch at xi = 1e-3 must match
        # the raw unguarded formula, which is still accurate there
        n, p = 6, 1.3
        for target in (0.99e-3, 1.01e-3):
            # along t = 1 we have xi = (r^2 / (r^2 + 4))^2; solve for r
            root = math.sqrt(target)
            r = math.sqrt(4.0 * root / (1.0 - root))
            A = r * r
            B = r * r + 4.0
            xi = (A / B) ** (0.5 * (n - 2))
            assert xi == pytest.approx(target, rel=1e-12)
            raw = A ** (-0.5 * (n - 2) * p) * (1.0 - (1.0 - xi) ** p)
            assert kernel_K1(n, p, r, 1.0) == pytest.approx(raw, rel=1e-10)


class TestFirstInequality:
    def test_rhs_closed_form_reference_point(self):
        closed, quad = rhs_as0(5, 1.0)
        assert closed == pytest.approx(-1.0 / 24.0, rel=1e-14)
        assert quad.value == pytest.approx(-1.0 / 24.0, abs=1e-10)
        assert abs(closed - quad.value) <= quad.abs_error + 1e-12 / 24.0

    def test_rhs_closed_vs_quadrature_on_band(self):
        for n, frac in ((5, 0.15), (7, 0.5), (10, 0.85)):
            p = _low_b_point(n, frac)
            closed, quad = rhs_as0(n, p)
            assert closed == pytest.approx(quad.value, abs=quad.abs_error + 1e-8 * abs(closed))

    def test_verify_reference_point(self):
        rep = verify_as0(5, 1.0)
        assert rep.verdict is Verdict.CERTIFIED
        assert rep.margin >= case1_margin_lower_bound(5, 1.0) - 1e-6

    def test_margin_lower_bound_closed_form(self):
        assert case1_margin_lower_bound(5, 1.0) == pytest.approx(1.0 / 32.0, rel=1e-13)

    def test_fold_consistency_random_points(self):
        rng = np.random.default_rng(2024)
        for _ in range(10):
            n = int(rng.integers(5, 13))
            p = _low_b_point(n, rng.uniform(0.05, 0.95))
            d = fold_diagnostic(n, p)
            u, f = d["unfolded"], d["folded"]
            assert abs(u.value - f.value) <= u.abs_error + f.abs_error

    def test_bulk_is_positive_in_low_b(self):
        lhs = lhs_as0(6, 0.8)
        assert lhs.value > 0.0
        assert lhs.converged

    def test_wrong_regime_rejected(self):
        with pytest.raises(ValueError):
            verify_as0(5, 2.0)  # above the low range entirely
        with pytest.raises(ValueError):
            verify_as0(5, 1.4)  # sharp low range, not this check's band
        with pytest.raises(ValueError):
            verify_as1(5, 1.0)  # wide low range, not the sharp one

    def test_small_dimensions_rejected(self):
        with pytest.raises(ValueError):
            verify_as0(4, 1.0)
        with pytest.raises(ValueError):
            verify_as0(3, 2.0)


class TestSecondInequality:
    def test_rhs_dual_closed_forms_agree(self):
        # rhs_as1 cross-checks two independent closed forms internally and
        # raises if they disagree; reaching the return is the assertion
        closed, quad = rhs_as1(5, 4.0 / 3.0)
        assert closed < 0.0
        assert closed == pytest.approx(quad.value, abs=quad.abs_error + 1e-10 * abs(closed))

    def test_verify_reference_point(self):
        rep = verify_as1(5, 4.0 / 3.0)
        assert rep.verdict is Verdict.CERTIFIED
        assert rep.margin > 0.01

    def test_high_dimension_point(self):
        assert verify_as1(100, 99.0 / 98.0).verdict is Verdict.CERTIFIED


class TestMasterInequality:
    def test_exact_rational_values(self):
        # at (5, 4/3) every ingredient has a closed rational value
        x1 = compute_X1(5, 4.0 / 3.0)
        x2 = compute_X2(5, 4.0 / 3.0)
        x3 = compute_X3(5, 4.0 / 3.0)
        y = compute_Y(5, 4.0 / 3.0)
        assert abs(x1.value - 1.0 / 180.0) <= x1.abs_error + 1e-13
        assert abs(x2.value + 2.0 / 105.0) <= x2.abs_error + 1e-13
        assert abs(x3.value - 1.0 / 252.0) <= x3.abs_error + 1e-13
        assert y.value == pytest.approx(16.0 / 105.0, rel=1e-14)

    def test_x2_routes_agree(self):
        # the six-piece substituted decomposition against a direct
        # original-coordinates quadrature of the same integral
        pieces = compute_X2(5, 4.0 / 3.0)
        direct = compute_X2_direct(5, 4.0 / 3.0)
        assert abs(pieces.value - direct.value) <= pieces.abs_error + direct.abs_error

    def test_x2_terms_structure(self):
        total, terms = compute_X2_terms(6, 1.3)
        for key in ("J1", "J2", "J3", "J41", "J42", "far",
                    "range_low", "range_mid", "range_far"):
            assert key in terms
        regrouped = (
            terms["range_low"].value + terms["range_mid"].value + terms["range_far"].value
        )
        assert total.value == pytest.approx(regrouped, abs=1e-15 + 1e-12 * abs(total.value))
        split = terms["J1"].value + terms["J2"].value
        assert terms["range_low"].value == pytest.approx(split, rel=1e-12)

    def test_x1_fold_matches_unfolded(self):
        a = compute_X1(5, 4.0 / 3.0, folded=True)
        b = compute_X1(5, 4.0 / 3.0, folded=False)
        assert abs(a.value - b.value) <= a.abs_error + b.abs_error

    def test_master_reference_point(self):
        rep = verify_master(5, 4.0 / 3.0)
        assert rep.verdict is Verdict.CERTIFIED
        for key in ("X1", "X2", "X3", "Y"):
            assert key in rep.terms

    def test_master_certification_implies_sharp_inequality(self):
        # the master bound dominates the sharp-range comparison: whenever it
        # certifies, the direct check must certify as well
        for n, frac in ((5, 0.3), (7, 0.7)):
            p = _low_a_point(n, frac)
            if verify_master(n, p).verdict is Verdict.CERTIFIED:
                assert verify_as1(n, p).verdict is Verdict.CERTIFIED


class TestClosedFormBounds:
    def test_term_bounds_strict_on_sample(self):
        for n in (5, 8, 12):
            for frac in (0.05, 0.5, 0.95):
                p = _low_a_point(n, frac)
                x1 = compute_X1(n, p)
                x3 = compute_X3(n, p)
                assert x1.value + x1.abs_error < x1_upper_bound(n, p)
                assert x3.value + x3.abs_error < x3_upper_bound(n, p)

    def test_neg_x2_bound_strict_on_sample(self):
        for n in (5, 8, 12):
            p = _low_a_point(n, 0.5)
            x2 = compute_X2(n, p)
            assert -x2.value + x2.abs_error < neg_x2_upper_bound(n, p)

    def test_y_lower_bound_high_dimension(self):
        y = compute_Y(100, 99.0 / 98.0)
        assert y.value >= y_lower_bound_large_n(100)

    def test_y_lower_bound_domain(self):
        with pytest.raises(ValueError):
            y_lower_bound_large_n(99)

    def test_coefficient_check_high_dimension(self):
        assert verify_b50(100, 99.0 / 98.0) is True
        assert verify_b50(128, _low_a_point(128, 0.3)) is True

    def test_coefficient_check_domain(self):
        with pytest.raises(ValueError):
            verify_b50(99, 98.0 / 97.0)
        with pytest.raises(ValueError):
            verify_b50(100, 1.5)  # outside the sharp low band for n = 100


class TestVerdictMachinery:
    def _qr(self, v, e):
        return QuadResult(value=v, abs_error=e, n_evals=1, converged=True)

    def test_certified_when_margin_clears_budget(self):
        rep = InequalityReport.from_sides(5, 1.0, "a > b", self._qr(1.0, 0.1), self._qr(0.5, 0.1))
        assert rep.verdict is Verdict.CERTIFIED
        assert rep.margin == pytest.approx(0.5)
        assert rep.error_budget == pytest.approx(0.2)

    def test_failed_when_reversed(self):
        rep = InequalityReport.from_sides(5, 1.0, "a > b", self._qr(0.0, 0.1), self._qr(1.0, 0.1))
        assert rep.verdict is Verdict.FAILED

    def test_inconclusive_inside_budget(self):
        rep = InequalityReport.from_sides(5, 1.0, "a > b", self._qr(1.0, 0.3), self._qr(0.9, 0.3))
        assert rep.verdict is Verdict.INCONCLUSIVE

    def test_json_round_trip_fields(self):
        rep = verify_as0(5, 1.0)
        d = rep.to_json_dict()
        assert d["verdict"] == "CERTIFIED"
        assert set(d) == {
            "n", "p", "statement", "lhs", "rhs", "margin",
            "error_budget", "verdict", "terms",
        }
        assert list(d["terms"]) == sorted(d["terms"])

    def test_tightening_tolerance_preserves_certification(self):
        # a certified verdict must survive a tenfold tolerance cut
        for n, p, verify, tol in ((5, 1.0, verify_as0, 1e-8), (6, 1.45, verify_as1, 1e-7)):
            loose = verify(n, p, tol=tol)
            tight = verify(n, p, tol=tol / 10.0)
            assert loose.verdict is Verdict.CERTIFIED
            assert tight.verdict is Verdict.CERTIFIED
            assert tight.error_budget <= loose.error_budget


class TestGrids:
    def test_grid_shape_and_insets(self):
        pts = low_grid("LOW_B")
        assert len(pts) == 40
        for n, p in pts:
            lo, hi = 2.0 / (n - 2.0), (n - 1.0) / (n - 2.0)
            assert lo + 1e-3 - 1e-12 <= p <= hi - 1e-3 + 1e-12

    def test_grid_rejects_small_dimension(self):
        with pytest.raises(ValueError):
            low_grid("LOW_A", n_values=(4,))
