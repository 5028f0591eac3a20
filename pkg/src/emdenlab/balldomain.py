"""Blow-up family on the unit ball near the critical hyperbola.

Solves -Lap u = v^p, -Lap v = u^(q_eps) with zero Dirichlet data on the
unit ball for margins eps > 0 by one-parameter shooting.  The system is
scale invariant, so a unit-height run with u(0) = 1, v(0) = s solves the
ball problem once both components vanish at a common radius R: matching
the two first zeros over s and rescaling by lambda = R lands the
solution on B(0, 1) with max u = lambda^alpha_eps.

The measurement side covers the quantities that characterize the family
as eps -> 0: growth of the maximum against the regime exponent and its
compensated limit, convergence of the energy quotient to the entire
problem's Sobolev-type constant, a translated surface-flux identity on
interior spheres, the Green-function approximation of the components
away from the concentration point, and uniform decay constants of the
rescaled profiles.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .entire import EntireSolution, RadialProfile, _start_point, \
    sobolev_quotient, solve_entire
from .greenfun import BallGreenContext, green, robin, sphere_integral, \
    tau_tilde
from .params import Regime, SystemParams, make_params
from .specfun import sphere_measure

__all__ = [
    "BallSolution",
    "BlowupRow",
    "BlowupScan",
    "DecayFit",
    "GreenApproxReport",
    "PohozaevRecord",
    "blowup_scan",
    "check_decay",
    "energy_identity",
    "pohozaev_check",
    "solve_ball",
    "v_green_approx",
    "write_scan_csv",
]

# sentinel gap when only one component reaches zero: must dominate every
# genuine |R_U - R_V| (bounded by the integration window)
_GAP_SENTINEL = 1e18
_S_BOUNDS = (1e-8, 1e8)


@dataclass(frozen=True)
class BallSolution:
    """Dirichlet solution on the unit ball with its blow-up bookkeeping.

    profile lives on [0, 1]; the boundary zeros are stored at the last
    grid point.  M_eps = u(0) is the maximum and lambda_eps carries the
    blow-up rate through lambda_eps^alpha_eps = M_eps, exact by
    construction of the rescaling.  boundary_defect records the residual
    relative size of (u, v) at the boundary; match_gap the relative
    mismatch |R_U - R_V| / R_U of the two first zeros of the matched
    unit-height run.
    """

    params: SystemParams
    profile: RadialProfile
    M_eps: float
    lambda_eps: float
    shoot_param: float
    energy_quotient: float
    boundary_defect: float
    match_gap: float
    iterations: int

    def u(self, t):
        """Monotone cubic interpolation of u on [0, 1] (nan outside)."""
        return _interpolants(self)[0](t)

    def v(self, t):
        """Monotone cubic interpolation of v on [0, 1] (nan outside)."""
        return _interpolants(self)[1](t)


@dataclass(frozen=True)
class PohozaevRecord:
    """Surface-flux identity on one interior sphere.

    lhs = term_flux + term_grad, rhs = term_source_v + term_source_u;
    residual is |lhs - rhs| relative to the largest single term.  j is
    the 0-based coordinate direction.
    """

    lhs: float
    rhs: float
    residual: float
    term_flux: float
    term_grad: float
    term_source_v: float
    term_source_u: float
    center: tuple
    radius: float
    j: int
    quad_error: float


@dataclass(frozen=True)
class BlowupRow:
    """One margin of the blow-up scan; nan fields when the solve failed."""

    eps: float
    q_eps: float
    M_eps: float
    lambda_eps: float
    compensated: float
    slope_estimate: float
    error: str | None = None


@dataclass(frozen=True)
class BlowupScan:
    """Blow-up growth measurements along a decreasing eps schedule.

    slope is the least-squares slope of log M_eps against log(1/eps)
    over all rows; slope_last the pairwise slope between the last two
    successful rows, which discards the most pre-asymptotic data and is
    the better estimate of theoretical_slope, the regime exponent (the
    LOG regime value ignores the logarithmic correction).

    predicted_limit is the theoretical limit of the compensated column,
    assembled by inserting the boundary Green-function limits of both
    components into the exact dilation flux identity
    eps * E = (1/n) oint (x . nu) u_nu v_nu dS (E the common value of
    the three energy integrals); the compensated column converges to
    it.  predicted_limit_quotient is a closed-form variant built from
    the same entire-solution constants with a power of the Sobolev-type
    quotient in place of the mass integral of V0^(p+1); it is recorded
    for reference and does not track the measured family.
    """

    n: int
    p: float
    regime: Regime
    rows: tuple
    slope: float | None
    slope_last: float | None
    theoretical_slope: float
    predicted_limit: float | None
    predicted_limit_quotient: float | None
    predicted_limit_error: str | None


@dataclass(frozen=True)
class GreenApproxReport:
    """Deviation of a rescaled component from its Green-function limit.

    ratios holds (scaling factor) * component(rho) / (amplitude * G(rho e1, 0))
    per shell radius; deviation is max |ratios - 1|.  The primary scaling
    factor is the measured one (M_eps for v, M_eps^(n/((n-2)p-2)) for u);
    deviation_alt replaces it with the eps -> 0 exponent form
    (lambda^alpha0, resp. lambda^beta0), which differs at finite eps by a
    lambda^(O(eps)) factor.
    """

    component: str
    shell_radii: np.ndarray
    ratios: np.ndarray
    deviation: float
    deviation_alt: float
    lambda_eps: float
    eps: float


@dataclass(frozen=True)
class DecayFit:
    """Uniform decay constants of the rescaled profile on [0, lambda_eps].

    C_V bounds V (1 + r^(n-2)); C_U bounds U against the regime majorant:
    r^(n-2) for the high regime, r^(n-2)/log(1+r) on r >= 1 for the
    logarithmic regime, r^((n-2)p-2) for the low regime.
    """

    C_U: float
    C_V: float
    regime: Regime
    eps: float
    lambda_eps: float


# -- shooting ----------------------------------------------------------------


def _make_rhs(n: int, p: float, q: float):
    def rhs(r, y):
        u, du, v, dv = y
        return (du,
                -abs(v) ** p * np.sign(v) - (n - 1) * du / r,
                dv,
                -abs(u) ** q * np.sign(u) - (n - 1) * dv / r)
    return rhs


def _run(n, p, q, span, y0, events, rtol, dense=False):
    sol = solve_ivp(_make_rhs(n, p, q), span, y0, method="RK45", rtol=rtol,
                    atol=1e-30, events=events, dense_output=dense)
    if sol.status == -1:
        raise RuntimeError(f"stiffness error: integration failed on "
                           f"[{span[0]}, {span[1]}]: {sol.message}")
    return sol


def _both_crossings(n, p, q, s, r_max, rtol):
    """First zeros (R_U, R_V) of the unit-height run with v(0) = s.

    Missing zeros come back as nan.  The run stops at the first zero of
    either component, then resumes watching only the survivor: once its
    radial derivative turns positive it can never vanish (its source
    keeps pushing it up while the crossed component stays negative), so
    the hunt is abandoned early instead of integrating to r_max.
    """
    def hit_u(r, y):
        return y[0]

    def hit_v(r, y):
        return y[2]

    hit_u.terminal, hit_u.direction = True, -1.0
    hit_v.terminal, hit_v.direction = True, -1.0
    r0, y0 = _start_point(n, p, q, s)
    first = _run(n, p, q, (r0, r_max), y0, (hit_u, hit_v), rtol)
    r_u = float(first.t_events[0][0]) if first.t_events[0].size else math.nan
    r_v = float(first.t_events[1][0]) if first.t_events[1].size else math.nan
    if math.isnan(r_u) and math.isnan(r_v):
        return r_u, r_v
    if not (math.isnan(r_u) or math.isnan(r_v)):
        return r_u, r_v

    survivor = 2 if math.isnan(r_v) else 0

    def hit(r, y):
        return y[survivor]

    def give_up(r, y):
        return y[survivor + 1]

    hit.terminal, hit.direction = True, -1.0
    give_up.terminal, give_up.direction = True, 1.0
    start = float(first.t[-1])
    if start >= r_max:
        return r_u, r_v
    second = _run(n, p, q, (start, r_max), first.y[:, -1], (hit, give_up),
                  rtol)
    if second.t_events[0].size:
        r_hit = float(second.t_events[0][0])
        if survivor == 0:
            r_u = r_hit
        else:
            r_v = r_hit
    return r_u, r_v


def _final_run(n, p, q, s, r_max, rtol):
    """Dense run through both zeros; returns (evaluate, r0, R_U, R_V).

    The run mirrors the two-leg structure of the crossing search -- stop
    at the first zero of either component, restart watching only the
    survivor -- and stitches the dense interpolants of the two legs into
    one evaluator.  A single continuous run is fragile here: at the
    matched parameter the later zero is nearly tangent, so integration
    noise accumulated past the first crossing can lift the second
    component off the axis entirely and send the run to r_max with one
    crossing missing.  The legs reproduce exactly the trajectory the
    matcher scored.
    """
    failure = RuntimeError(
        "shooting failure: the matched run does not drive both "
        "components through zero; try a smaller tol or larger r_max")

    def hit_u(r, y):
        return y[0]

    def hit_v(r, y):
        return y[2]

    hit_u.terminal = hit_v.terminal = True
    hit_u.direction = hit_v.direction = -1.0
    r0, y0 = _start_point(n, p, q, s)
    first = _run(n, p, q, (r0, r_max), y0, (hit_u, hit_v), rtol, dense=True)
    r_u = float(first.t_events[0][0]) if first.t_events[0].size else math.nan
    r_v = float(first.t_events[1][0]) if first.t_events[1].size else math.nan
    if math.isnan(r_u) and math.isnan(r_v):
        raise failure
    if not (math.isnan(r_u) or math.isnan(r_v)):
        # both zeros were localized inside one integration step; the
        # final dense segment spans that whole step, so the single-leg
        # interpolant covers both of them
        return first.sol, r0, r_u, r_v
    survivor = 0 if math.isnan(r_u) else 2

    def hit(r, y):
        return y[survivor]

    def give_up(r, y):
        return y[survivor + 1]

    hit.terminal, hit.direction = True, -1.0
    give_up.terminal, give_up.direction = True, 1.0
    t_switch = float(first.t[-1])
    if t_switch >= r_max:
        raise failure
    second = _run(n, p, q, (t_switch, r_max), first.y[:, -1],
                  (hit, give_up), rtol, dense=True)
    if not second.t_events[0].size:
        raise failure
    r_hit = float(second.t_events[0][0])
    if survivor == 0:
        r_u = r_hit
    else:
        r_v = r_hit
    leg1, leg2 = first.sol, second.sol

    def evaluate(r):
        r = np.asarray(r, dtype=float)
        out = np.empty((4,) + r.shape)
        head = r <= t_switch
        if head.any():
            out[:, head] = leg1(r[head])
        tail = ~head
        if tail.any():
            out[:, tail] = leg2(r[tail])
        return out

    return evaluate, r0, r_u, r_v


def _match_parameter(n, p, q, rtol, r_max):
    """Shooting parameter with matching first zeros, by bracketed secant.

    The gap R_U(s) - R_V(s) decreases through zero at the matched value;
    runs where the second zero never forms contribute a signed sentinel,
    so the root search degrades gracefully to bisection until it reaches
    the window where both zeros exist and the gap is smooth.
    """
    evals = 0

    def gap(s):
        nonlocal evals
        evals += 1
        r_u, r_v = _both_crossings(n, p, q, s, r_max, rtol)
        if math.isnan(r_u) and math.isnan(r_v):
            raise RuntimeError(
                "not subcritical enough: neither component reaches zero "
                f"before r = {r_max} at s = {s}; the margin eps is too "
                "small for this window (increase r_max)")
        if math.isnan(r_v):
            return -_GAP_SENTINEL
        if math.isnan(r_u):
            return _GAP_SENTINEL
        return r_u - r_v

    s_cur, d_cur = 1.0, gap(1.0)
    if d_cur == 0.0:
        return 1.0, evals
    factor = 2.0 if d_cur > 0.0 else 0.5
    while True:
        s_next = s_cur * factor
        if not (_S_BOUNDS[0] <= s_next <= _S_BOUNDS[1]):
            raise RuntimeError(
                "shooting failure: no sign change of the zero-matching "
                f"gap for s in [{_S_BOUNDS[0]}, {_S_BOUNDS[1]}]")
        d_next = gap(s_next)
        if d_next == 0.0:
            return s_next, evals
        if (d_next > 0.0) != (d_cur > 0.0):
            break
        s_cur, d_cur = s_next, d_next
    lo, hi = sorted((s_cur, s_next))
    s_star = brentq(gap, lo, hi, xtol=1e-14 * hi, rtol=1e-15, maxiter=200)
    return float(s_star), evals


def solve_ball(params: SystemParams, tol: float = 1e-10, *,
               r_max: float = 1e4, profile_points: int = 1500
               ) -> BallSolution:
    """Dirichlet solution on the unit ball at the subcritical pair.

    One-parameter shooting on the unit-height run u(0) = 1, v(0) = s:
    the first zeros R_U(s) and R_V(s) are matched by root-finding on
    their gap, and the matched run on B(0, R) is rescaled onto the unit
    ball through u(x) -> lambda^alpha_eps u(lambda x) with lambda = R_U,
    which makes M_eps = lambda^alpha_eps exact.  tol/10 is the
    integrator's relative tolerance; profile_points controls the stored
    log-spaced grid (and thereby the accuracy of every downstream
    interpolation-based check).
    """
    if params.eps <= 0.0:
        raise ValueError("solve_ball needs a strictly subcritical pair; "
                         "build the parameter set with eps > 0")
    n, p, q = params.n, params.p, params.q_eps
    if p * q <= 1.0:
        raise ValueError(f"the exponent product p q_eps = {p * q} must "
                         "exceed 1")
    if profile_points < 16:
        raise ValueError("profile_points must be at least 16")
    rtol = max(tol / 10.0, 1e-12)

    s_star, iterations = _match_parameter(n, p, q, rtol, r_max)
    evaluate, r_start, r_u, r_v = _final_run(n, p, q, s_star, r_max, rtol)

    lam = r_u
    alpha, beta = params.alpha_eps, params.beta_eps
    m_eps = lam ** alpha

    tt = np.concatenate(([0.0], np.geomspace(r_start / lam, 1.0,
                                             profile_points)))
    yy = evaluate(tt[1:] * lam)
    if np.any(yy[0][:-1] <= 0.0) or np.any(yy[2][:-1] <= 0.0):
        raise RuntimeError("shooting failure: the matched run loses "
                           "positivity inside the ball")
    boundary_defect = max(abs(float(yy[0][-1])),
                          abs(float(yy[2][-1])) / s_star)
    u_vals = np.concatenate(([m_eps], lam ** alpha * yy[0]))
    v_vals = np.concatenate(([lam ** beta * s_star], lam ** beta * yy[2]))
    u_vals[-1] = max(u_vals[-1], 0.0)
    v_vals[-1] = max(v_vals[-1], 0.0)
    du_vals = np.concatenate(([0.0], lam ** (alpha + 1.0) * yy[1]))
    dv_vals = np.concatenate(([0.0], lam ** (beta + 1.0) * yy[3]))
    profile = RadialProfile(grid=tt, u_vals=u_vals, v_vals=v_vals,
                            du_vals=du_vals, dv_vals=dv_vals)

    # energy quotient from the unit-height run, carried through the
    # rescaling exactly: each integral picks up a pure power of lambda
    surf = sphere_measure(n)
    rq = np.geomspace(r_start, lam, 6000)
    yq = evaluate(rq)
    u_q = np.clip(yq[0], 0.0, None)
    v_q = np.clip(yq[2], 0.0, None)
    stub_u = r_start ** n / n
    stub_v = s_star ** (p + 1.0) * r_start ** n / n
    i_q = surf * (float(simpson(rq ** (n - 1) * u_q ** (q + 1.0), x=rq))
                  + stub_u)
    i_p = surf * (float(simpson(rq ** (n - 1) * v_q ** (p + 1.0), x=rq))
                  + stub_v)
    int_u = lam ** (alpha * (q + 1.0) - n) * i_q
    int_v = lam ** (beta * (p + 1.0) - n) * i_p
    energy_quotient = int_v / int_u ** ((p + 1.0) / (p * (q + 1.0)))

    return BallSolution(
        params=params, profile=profile, M_eps=float(m_eps),
        lambda_eps=float(lam), shoot_param=float(s_star),
        energy_quotient=float(energy_quotient),
        boundary_defect=float(boundary_defect),
        match_gap=float(abs(r_u - r_v) / lam), iterations=iterations)


# -- interpolation and integral checks ---------------------------------------


def _interpolants(sol: BallSolution):
    cached = getattr(sol, "_pchips", None)
    if cached is None:
        prof = sol.profile
        cached = tuple(
            PchipInterpolator(prof.grid, vals, extrapolate=False)
            for vals in (prof.u_vals, prof.v_vals, prof.du_vals,
                         prof.dv_vals))
        object.__setattr__(sol, "_pchips", cached)
    return cached


def energy_identity(sol: BallSolution) -> float:
    """Worst relative mismatch of the three energy integrals on the ball.

    For a Dirichlet solution, int u^(q+1) = int grad u . grad v
    = int v^(p+1) (multiply either equation by the other component and
    integrate by parts; the boundary terms vanish).  All three are
    evaluated by radial quadrature of the interpolated profile, so the
    returned figure measures solver plus interpolation consistency.
    """
    n, p, q = sol.params.n, sol.params.p, sol.params.q_eps
    p_u, p_v, p_du, p_dv = _interpolants(sol)
    t = np.geomspace(sol.profile.grid[1], 1.0, 8000)
    surf = sphere_measure(n)
    w = t ** (n - 1)
    stub = sol.profile.grid[1] ** n / n
    i_u = surf * (float(simpson(w * p_u(t) ** (q + 1.0), x=t))
                  + sol.M_eps ** (q + 1.0) * stub)
    i_grad = surf * float(simpson(w * p_du(t) * p_dv(t), x=t))
    i_v = surf * (float(simpson(w * p_v(t) ** (p + 1.0), x=t))
                  + sol.profile.v_vals[0] ** (p + 1.0) * stub)
    return max(abs(i_u - i_v), abs(i_grad - i_v)) / abs(i_v)


def _max_sphere_order(n: int) -> int:
    # largest doubled order whose product rule stays inside the node
    # budget of the sphere quadrature
    order = 6
    while 2.0 * (2 * order) ** (n - 1) <= 4e7:
        order *= 2
    return order


def pohozaev_check(sol: BallSolution, center, r: float, j: int,
                   tol: float = 1e-9) -> PohozaevRecord:
    """Translated surface-flux identity on the sphere of radius r at center.

    For solutions of the system, the flux combination

        -oint (du/dnu dv/dx_j + dv/dnu du/dx_j) + oint (grad u . grad v) nu_j

    equals oint [v^(p+1)/(p+1) + u^(q+1)/(q+1)] nu_j over any interior
    sphere.  The profile enters through monotone cubic interpolation of
    the stored values and radial derivatives, so the residual measures
    how far the interpolated discrete solution is from an exact one.  At
    center = 0 every integrand is odd under the reflection flipping
    coordinate j, so each term vanishes individually and the relative
    residual carries no information there; off-center spheres give the
    nontrivial check.  j is a 0-based coordinate index.
    """
    n, p, q = sol.params.n, sol.params.p, sol.params.q_eps
    c = np.asarray(center, dtype=float).reshape(-1)
    if c.shape != (n,) or not np.all(np.isfinite(c)):
        raise ValueError(f"center must be a finite point in R^{n}")
    if not (isinstance(j, int) and 0 <= j < n):
        raise ValueError(f"direction index j must lie in [0, {n}), got {j!r}")
    if not (r > 0.0 and math.isfinite(r)):
        raise ValueError(f"sphere radius must be positive, got {r!r}")
    if float(np.linalg.norm(c)) + r >= 1.0 - 1e-12:
        raise ValueError("domain error: the sphere B(center, r) must stay "
                         "inside the unit ball")
    p_u, p_v, p_du, p_dv = _interpolants(sol)

    def geometry(x):
        rad = np.maximum(np.sqrt(np.einsum("ij,ij->i", x, x)), 1e-300)
        unit = x / rad[:, None]
        nu = (x - c[None, :]) / r
        return rad, unit, nu

    def f_flux(x):
        rad, unit, nu = geometry(x)
        radial = np.einsum("ij,ij->i", unit, nu)
        return -2.0 * p_du(rad) * p_dv(rad) * radial * unit[:, j]

    def f_grad(x):
        rad, unit, nu = geometry(x)
        return p_du(rad) * p_dv(rad) * nu[:, j]

    def f_source_v(x):
        rad, _, nu = geometry(x)
        return p_v(rad) ** (p + 1.0) / (p + 1.0) * nu[:, j]

    def f_source_u(x):
        rad, _, nu = geometry(x)
        return p_u(rad) ** (q + 1.0) / (q + 1.0) * nu[:, j]

    max_order = _max_sphere_order(n)
    results = [sphere_integral(f, c, r, n, tol, max_order=max_order)
               for f in (f_flux, f_grad, f_source_v, f_source_u)]
    term_flux, term_grad, term_source_v, term_source_u = \
        (res[0] for res in results)
    quad_error = max(res[1] for res in results)
    lhs = term_flux + term_grad
    rhs = term_source_v + term_source_u
    scale = max(abs(term_flux), abs(term_grad), abs(term_source_v),
                abs(term_source_u), 1e-300)
    return PohozaevRecord(
        lhs=float(lhs), rhs=float(rhs),
        residual=float(abs(lhs - rhs) / scale),
        term_flux=float(term_flux), term_grad=float(term_grad),
        term_source_v=float(term_source_v),
        term_source_u=float(term_source_u),
        center=tuple(float(x) for x in c), radius=float(r), j=j,
        quad_error=float(quad_error))


# -- blow-up asymptotics ------------------------------------------------------


_ENTIRE_CACHE: dict = {}


def _entire_reference(n: int, p: float) -> EntireSolution:
    key = (n, float(p))
    if key not in _ENTIRE_CACHE:
        _ENTIRE_CACHE[key] = solve_entire(make_params(n, p, 0.0),
                                          tol=1e-11, r_max=2e3)
    return _ENTIRE_CACHE[key]


def _kappa(params: SystemParams) -> float:
    """Exponent of M_eps in the compensated product eps M^kappa."""
    n, p = params.n, params.p
    if params.regime is Regime.HIGH:
        return n / ((n - 2.0) * p - 2.0) + 1.0
    if params.regime is Regime.LOG:
        return n / (n - 2.0) + 1.0
    return p + 1.0


def _compensated(params: SystemParams, eps: float, m_eps: float) -> float:
    value = eps * m_eps ** _kappa(params)
    if params.regime is Regime.LOG:
        value /= math.log(m_eps)
    return value


def _predicted_limit(n: int, p: float, regime: Regime) -> float:
    """Theoretical limit of the compensated product, from the entire
    ground state's constants and the center value of the Robin-type
    function matching the regime."""
    ent = _entire_reference(n, p)
    q0 = ent.params.q0
    base = sobolev_quotient(ent) ** ((1.0 - p * q0) / (p * (q0 + 1.0)))
    if regime is Regime.HIGH:
        tau0 = abs(robin(BallGreenContext(n), np.zeros(n)))
        return base * ent.A_U0 * ent.A_V0 * tau0
    if regime is Regime.LOG:
        tau0 = abs(robin(BallGreenContext(n), np.zeros(n)))
        return ((p + 1.0) / (n - 2.0) * ent.a ** (n / (n - 2.0))
                * base * ent.A_U0 * tau0)
    tt0 = abs(tau_tilde(BallGreenContext(n, p), np.zeros(n), tol=1e-6))
    return base * ent.A_U0 ** (p + 1.0) * tt0


def blowup_scan(n: int, p: float, eps_list, tol: float = 1e-10, *,
                workers: int = 1, r_max: float = 1e4,
                profile_points: int = 1500) -> BlowupScan:
    """Growth of the maximum along a decreasing margin schedule.

    Each row solves the ball problem at one eps and reports the maximum
    M_eps, the blow-up scale lambda_eps, the regime-compensated product
    eps M_eps^kappa (log-corrected in the logarithmic regime), and the
    pairwise slope of log M_eps against log(1/eps).  Individual solve
    failures are recorded in the row and the scan continues.  workers
    parallelizes rows (each solve itself stays sequential).
    """
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) == 0:
        raise ValueError("eps_list must not be empty")
    if any(e2 >= e1 for e1, e2 in zip(eps_arr, eps_arr[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    params_list = [make_params(n, p, e) for e in eps_arr]
    regime = params_list[0].regime

    def attempt(par):
        try:
            return solve_ball(par, tol, r_max=r_max,
                              profile_points=profile_points), None
        except RuntimeError as exc:
            return None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, params_list))
    else:
        outcomes = [attempt(par) for par in params_list]

    rows = []
    prev = None  # (eps, M_eps) of the last successful row
    for par, (ball, err) in zip(params_list, outcomes):
        if ball is None:
            rows.append(BlowupRow(eps=par.eps, q_eps=par.q_eps,
                                  M_eps=math.nan, lambda_eps=math.nan,
                                  compensated=math.nan,
                                  slope_estimate=math.nan, error=err))
            continue
        slope = math.nan
        if prev is not None:
            slope = ((math.log(ball.M_eps) - math.log(prev[1]))
                     / (math.log(1.0 / par.eps) - math.log(1.0 / prev[0])))
        rows.append(BlowupRow(eps=par.eps, q_eps=par.q_eps,
                              M_eps=ball.M_eps,
                              lambda_eps=ball.lambda_eps,
                              compensated=_compensated(par, par.eps,
                                                       ball.M_eps),
                              slope_estimate=slope, error=None))
        prev = (par.eps, ball.M_eps)

    good = [row for row in rows if row.error is None]
    slope = None
    if len(good) >= 2:
        x = np.log([1.0 / row.eps for row in good])
        y = np.log([row.M_eps for row in good])
        slope = float(np.polyfit(x, y, 1)[0])

    try:
        predicted = _predicted_limit(n, p, regime)
        predicted_error = None
    except Exception as exc:  # the scan stays useful without it
        predicted, predicted_error = None, str(exc)

    return BlowupScan(n=n, p=float(p), regime=regime, rows=tuple(rows),
                      slope=slope,
                      theoretical_slope=1.0 / _kappa(params_list[0]),
                      predicted_limit=predicted,
                      predicted_limit_error=predicted_error)


def write_scan_csv(scan: BlowupScan, path) -> None:
    """Write the scan rows as CSV columns eps, q_eps, M_eps, lambda_eps,
    compensated, slope_estimate."""
    data = np.array([[row.eps, row.q_eps, row.M_eps, row.lambda_eps,
                      row.compensated, row.slope_estimate]
                     for row in scan.rows], dtype=float)
    header = "eps,q_eps,M_eps,lambda_eps,compensated,slope_estimate"
    np.savetxt(path, data.reshape(-1, 6), delimiter=",", header=header,
               comments="", fmt="%.17g")


# -- limit object comparisons -------------------------------------------------


def v_green_approx(sol: BallSolution, shell_radii, *, component: str = "v",
                   entire_solution: EntireSolution | None = None
                   ) -> GreenApproxReport:
    """Deviation of a component from its Green-function limit on shells.

    Away from the concentration point the low component approaches
    lambda_eps^(-alpha0) A_U0 G(., 0): the report compares
    lambda_eps^alpha0 v(rho) against A_U0 G(rho e1, 0) over the given
    shell radii.  component="u" runs the companion high-regime
    comparison of lambda_eps^beta0 u(rho) against A_V0 G(rho e1, 0).
    deviation_alt rescales by the measured maximum instead: M_eps
    (resp. M_eps^(n/((n-2)p-2))), which differs from the primary form
    by lambda^(alpha_eps - alpha0) -> 1.
    """
    params = sol.params
    n, p = params.n, params.p
    if sol.lambda_eps < 1e1:
        raise RuntimeError(
            f"insufficient blow-up: lambda_eps = {sol.lambda_eps:.3g} < "
            "1e1; decrease eps before comparing against the Green limit")
    radii = np.asarray(shell_radii, dtype=float).reshape(-1)
    if radii.size == 0:
        raise ValueError("shell_radii must not be empty")
    if np.any(radii <= 0.0) or np.any(radii >= 1.0):
        raise ValueError("shell radii must lie strictly inside (0, 1)")
    ent = entire_solution if entire_solution is not None \
        else _entire_reference(n, p)
    if (ent.params.n, ent.params.p) != (n, p):
        raise ValueError("entire_solution was built for different (n, p)")

    if component == "v":
        amplitude = ent.A_U0
        factor = sol.lambda_eps ** params.alpha0
        factor_alt = sol.M_eps
        values = _interpolants(sol)[1](radii)
    elif component == "u":
        if params.regime is not Regime.HIGH:
            raise ValueError("the u-comparison against the Green function "
                             "needs the high regime (n-2)p > n")
        amplitude = ent.A_V0
        factor = sol.lambda_eps ** params.beta0
        factor_alt = sol.M_eps ** (n / ((n - 2.0) * p - 2.0))
        values = _interpolants(sol)[0](radii)
    else:
        raise ValueError(f"component must be 'u' or 'v', got {component!r}")

    ctx = BallGreenContext(n)
    origin = np.zeros(n)
    g_vals = np.array([green(ctx, np.concatenate(([rho], origin[1:])),
                             origin) for rho in radii])
    ratios = factor * values / (amplitude * g_vals)
    ratios_alt = factor_alt * values / (amplitude * g_vals)
    return GreenApproxReport(
        component=component, shell_radii=radii, ratios=ratios,
        deviation=float(np.max(np.abs(ratios - 1.0))),
        deviation_alt=float(np.max(np.abs(ratios_alt - 1.0))),
        lambda_eps=sol.lambda_eps, eps=params.eps)


def check_decay(sol: BallSolution) -> DecayFit:
    """Uniform decay constants of the rescaled profile.

    Undoing the blow-up rescaling puts the solution on B(0, lambda_eps)
    at unit height; the fit takes the maximum of the component against
    the regime decay majorant over the stored grid.  Finite, eps-stable
    constants are the numerical face of the uniform decay bounds.
    """
    params = sol.params
    n, p, lam = params.n, params.p, sol.lambda_eps
    r = sol.profile.grid * lam
    u_resc = sol.profile.u_vals / sol.M_eps
    v_resc = sol.profile.v_vals / lam ** params.beta_eps
    c_v = float(np.max(v_resc * (1.0 + r ** (n - 2.0))))
    if params.regime is Regime.HIGH:
        c_u = float(np.max(u_resc * (1.0 + r ** (n - 2.0))))
    elif params.regime is Regime.LOG:
        # the log-corrected majorant vanishes at the center, so the fit
        # runs over r >= 1 where the bound is meaningful
        mask = r >= 1.0
        if not mask.any():
            raise RuntimeError("decay fit needs the rescaled profile to "
                               "reach r = 1")
        c_u = float(np.max(u_resc[mask] * (1.0 + r[mask] ** (n - 2.0))
                           / np.log1p(r[mask])))
    else:
        c_u = float(np.max(u_resc * (1.0 + r ** ((n - 2.0) * p - 2.0))))
    if not (math.isfinite(c_u) and math.isfinite(c_v)):
        raise RuntimeError("decay fit produced a non-finite constant")
    return DecayFit(C_U=c_u, C_V=c_v, regime=params.regime,
                    eps=params.eps, lambda_eps=lam)
