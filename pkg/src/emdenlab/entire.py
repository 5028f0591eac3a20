"""Entire ground states of the coupled system -Lap u = v^p, -Lap v = u^q
on all of R^n, q on the critical hyperbola, by radial shooting.

The profile is normalized by u(0) = 1; the single shooting parameter is
s = v(0).  Solutions above the ground-state threshold drive u through
zero, solutions below drive v through zero, and the threshold value s*
separating the two behaviors gives the decaying ground state.  All the
asymptotic constants (decay limits, integral norms, the Sobolev-type
quotient) are extracted from the converged profile plus analytic tail
laws fitted on its last decade.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp

from .params import Regime, SystemParams

__all__ = [
    "EntireSolution",
    "NormResult",
    "RadialProfile",
    "decay_constants",
    "norms",
    "sobolev_quotient",
    "solve_entire",
    "write_profile_csv",
]


@dataclass(frozen=True)
class RadialProfile:
    """Radial profile (u, v) with derivatives on an increasing grid.

    grid[0] = 0 carries the center values; u_vals[0] is the maximum of u.
    """

    grid: np.ndarray
    u_vals: np.ndarray
    v_vals: np.ndarray
    du_vals: np.ndarray
    dv_vals: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) < 4:
            raise ValueError("profile grid must be a 1d array with >= 4 points")
        if g[0] != 0.0 or np.any(np.diff(g) <= 0.0):
            raise ValueError("profile grid must start at 0 and increase")
        for name in ("u_vals", "v_vals", "du_vals", "dv_vals"):
            if len(getattr(self, name)) != len(g):
                raise ValueError(f"{name} length does not match the grid")
        # strictly positive inside; the final grid point may vanish so that
        # zero-boundary profiles fit the same container
        for vals in (self.u_vals, self.v_vals):
            if np.any(vals[:-1] <= 0.0) or vals[-1] < 0.0:
                raise ValueError("profile values must stay positive away "
                                 "from the final grid point")
        if self.u_vals[0] < np.max(self.u_vals):
            raise ValueError("u must attain its maximum at the center")

    @property
    def r_end(self) -> float:
        return float(self.grid[-1])


@dataclass(frozen=True)
class NormResult:
    """Integral norm split into grid quadrature and analytic tail.

    value is None when the integral diverges (divergent = True); tail_part
    records the modeled contribution beyond the profile support and serves
    as the non-certified error field of the result.
    """

    value: float | None
    tail_part: float
    divergent: bool


@dataclass(frozen=True)
class EntireSolution:
    """Converged ground state with its asymptotic constants."""

    profile: RadialProfile
    shoot_param: float
    a: float
    b: float
    L: float
    A_U0: float
    A_V0: float | None
    params: SystemParams
    a_variation: float
    b_variation: float
    bracket_width: float
    iterations: int

    # dense evaluators are attached by the solver; they fall outside the
    # frozen dataclass protocol on purpose (not part of equality/repr)
    def u(self, r):
        return self._dense_u(r)

    def v(self, r):
        return self._dense_v(r)


# -- shooting ----------------------------------------------------------------

_S_RANGE = (1e-6, 1e6)
_CROSS_U = "u"
_CROSS_V = "v"
_NO_CROSS = "none"
# classification runs integrate far beyond the profile window: a shooting
# parameter off the threshold by as little as ~1e-12 relative still drives
# one component through zero well before this cap, so the bisection can
# keep resolving sides long after every run looks clean on [0, r_max]
_CLASSIFY_CAP = 1e8


def _start_point(n: int, p: float, q: float, s: float) -> tuple[float, np.ndarray]:
    # series start u = 1 - s^p r^2/(2n), v = s - r^2/(2n); the start radius
    # stays far below both curvature scales so the truncation is ~ r0^4
    r0 = 1e-4
    if s > 1.0:
        r0 = min(r0, 1e-4 * s ** (-p / 2.0))
    r0 = min(r0, 1e-2 * math.sqrt(2.0 * n * s))
    y0 = np.array([
        1.0 - s**p * r0**2 / (2.0 * n),
        -(s**p) * r0 / n,
        s - r0**2 / (2.0 * n),
        -r0 / n,
    ])
    return r0, y0


def _integrate(n: int, p: float, q: float, s: float, r_max: float,
               rtol: float, dense: bool = False):
    def rhs(r, y):
        u, du, v, dv = y
        return (du,
                -abs(v) ** p * np.sign(v) - (n - 1) * du / r,
                dv,
                -abs(u) ** q * np.sign(u) - (n - 1) * dv / r)

    def hit_u(r, y):
        return y[0]

    def hit_v(r, y):
        return y[2]

    hit_u.terminal = True
    hit_v.terminal = True
    r0, y0 = _start_point(n, p, q, s)
    sol = solve_ivp(rhs, (r0, r_max), y0, method="RK45", rtol=rtol,
                    atol=1e-30, events=(hit_u, hit_v), dense_output=dense)
    if sol.status == -1:
        raise RuntimeError(f"stiffness error: integration failed at s = {s}: "
                           f"{sol.message}")
    if sol.t_events[0].size > 0:
        kind = _CROSS_U
    elif sol.t_events[1].size > 0:
        kind = _CROSS_V
    else:
        kind = _NO_CROSS
    return kind, sol


def _scan_bracket(n: int, p: float, q: float, rtol: float):
    # coarse geometric scan; exactly one u/v classification change is the
    # observed and assumed picture, several changes are surfaced as errors
    svals = np.geomspace(_S_RANGE[0], _S_RANGE[1], 25)
    kinds = [_integrate(n, p, q, s, _CLASSIFY_CAP, rtol)[0] for s in svals]
    # scan points where nothing crosses sit inside the bracket; change
    # detection runs over the classified points only and spans the gap
    classified = [(s, k) for s, k in zip(svals, kinds) if k != _NO_CROSS]
    changes = [i for i in range(len(classified) - 1)
               if classified[i][1] != classified[i + 1][1]]
    if not changes:
        raise RuntimeError(
            "shooting failure: no ground-state bracket found for "
            f"s in [{_S_RANGE[0]}, {_S_RANGE[1]}]")
    if len(changes) > 1:
        raise RuntimeError(
            "multiple shooting brackets detected; refusing to pick one "
            f"silently (change candidates near s = "
            f"{[float(classified[i][0]) for i in changes]})")
    i = changes[0]
    return (classified[i][0], classified[i][1],
            classified[i + 1][0], classified[i + 1][1])


def _truncate_index(u, du, v, dv) -> int:
    # keep the leading stretch where both components are positive and
    # strictly decreasing; the first violation marks departure from the
    # ground-state branch at the residual bracket width
    bad = (u <= 0.0) | (v <= 0.0) | (du > 0.0) | (dv > 0.0)
    idx = np.argmax(bad)
    if not bad.any():
        return len(u)
    return int(idx)


def _pair_spread(sol_a, sol_b, rr: np.ndarray) -> np.ndarray:
    """Pointwise max of |u_a - u_b| and |v_a - v_b| on the grid rr.

    Beyond the reach of either run (an event or its end radius) the spread
    is set to infinity: no information survives past that radius.
    """
    r_trust = math.inf
    for sol in (sol_a, sol_b):
        r_hit = min((t[0] for t in sol.t_events if t.size > 0),
                    default=math.inf)
        r_trust = min(r_trust, r_hit, sol.t[-1] * (1 + 1e-12))
    spread = np.full(len(rr), np.inf)
    valid = rr <= r_trust
    if valid.any():
        ya = sol_a.sol(rr[valid])
        yb = sol_b.sol(rr[valid])
        spread[valid] = np.maximum(np.abs(ya[0] - yb[0]),
                                   np.abs(ya[2] - yb[2]))
    return spread


def _profile_sensitivity(n: int, p: float, q: float, s_lo: float, s_hi: float,
                         s_mid: float, sol_mid, r_max: float, rtol: float,
                         rr: np.ndarray) -> np.ndarray:
    """Pointwise uncertainty of the converged midpoint run on the grid rr.

    Two independent error sources are combined by a pointwise maximum: the
    residual shooting offset, read off as the spread between the two
    bracket-endpoint runs, and the integrator's accumulated drift, read off
    against a control run of the same midpoint at a 3x looser tolerance
    (the difference slightly overestimates the error of the tighter run).
    Either one, left unchecked, masquerades as a perturbation of the
    shooting parameter and bends the far tail off the ground-state branch.
    """
    runs = [_integrate(n, p, q, s, r_max, rtol, dense=True)[1]
            for s in (s_lo, s_hi)]
    shoot = _pair_spread(runs[0], runs[1], rr)
    _, sol_ctrl = _integrate(n, p, q, s_mid, r_max, 3.0 * rtol, dense=True)
    integ = _pair_spread(sol_mid, sol_ctrl, rr)
    return np.maximum(shoot, integ)


def _plateau(r: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    """Constant least-squares fit over the last decade; returns the fit
    and its relative variation (max-min over mean)."""
    mask = r >= r[-1] / 10.0
    seg = vals[mask]
    level = float(np.mean(seg))
    variation = float((np.max(seg) - np.min(seg)) / abs(level))
    return level, variation


def _decay_exponent_u(params: SystemParams) -> float:
    if params.regime is Regime.HIGH:
        return params.n - 2.0
    if params.regime is Regime.LOG:
        return params.n - 2.0
    return (params.n - 2.0) * params.p - 2.0


def _compensated_u(params: SystemParams, r: np.ndarray, u: np.ndarray):
    if params.regime is Regime.LOG:
        return r ** (params.n - 2) / np.log(r) * u
    return r ** _decay_exponent_u(params) * u


def solve_entire(params: SystemParams, tol: float = 1e-8,
                 r_max: float = 1e3) -> EntireSolution:
    """Ground state of the entire system at the critical pair (p, q0).

    Bisection on s = v(0) between the u-crossing and v-crossing regimes;
    the bracket is located by a geometric scan of s in [1e-6, 1e6] and
    shrunk until its width drops below 2e-14 s (or 200 iterations).
    Classification runs integrate far past r_max so near-threshold values
    still reveal their side; a midpoint staying positive through that cap
    is below any resolvable width and ends the search.  The returned
    profile is the final midpoint run truncated where it departs the
    ground-state branch.  tol/10 is the integrator's relative tolerance.
    """
    if params.eps != 0.0:
        raise ValueError("solve_entire needs the critical pair; build the "
                         "parameter set with eps = 0")
    n, p, q = params.n, params.p, params.q0
    rtol = max(tol / 10.0, 1e-12)

    s_lo, kind_lo, s_hi, kind_hi = _scan_bracket(n, p, q, rtol)
    iterations = 0
    s_mid = 0.5 * (s_lo + s_hi)
    while iterations < 200:
        s_mid = 0.5 * (s_lo + s_hi)
        # resolve the threshold to ~100 ulps: the leftover shooting error
        # appears in the far field as an additive constant, so its imprint
        # on the profile grows like r^(n-2) relative to u and every extra
        # digit of s buys a longer trustworthy plateau
        if (s_hi - s_lo) < 2e-14 * s_mid:
            break
        kind_mid, _ = _integrate(n, p, q, s_mid, _CLASSIFY_CAP, rtol)
        iterations += 1
        if kind_mid == _NO_CROSS:
            break
        if kind_mid == kind_lo:
            s_lo = s_mid
        else:
            s_hi = s_mid

    _, sol = _integrate(n, p, q, s_mid, r_max, rtol, dense=True)
    r_hit = min((t[0] for t in sol.t_events if t.size > 0), default=sol.t[-1])
    r_stop = min(r_hit, sol.t[-1])

    # log-spaced resample of the dense solution, then truncation to the
    # stretch still tracking the ground-state branch: the profile is cut
    # where min(u, v) sinks below ten times the combined shooting-offset
    # and integration-drift sensitivity
    r0 = sol.t[0]
    rr = np.geomspace(r0, r_stop, 3000)
    yy = sol.sol(rr)
    cut = _truncate_index(yy[0], yy[1], yy[2], yy[3])
    sens = _profile_sensitivity(n, p, q, s_lo, s_hi, s_mid, sol, r_max,
                                rtol, rr)
    bad = np.minimum(yy[0], yy[2]) < 10.0 * sens
    if bad.any():
        cut = min(cut, int(np.argmax(bad)))
    if cut < 100:
        raise RuntimeError("shooting failure: converged run leaves the "
                           "ground-state branch almost immediately")
    rr, yy = rr[:cut], yy[:, :cut]

    grid = np.concatenate(([0.0], rr))
    u_vals = np.concatenate(([1.0], yy[0]))
    v_vals = np.concatenate(([s_mid], yy[2]))
    du_vals = np.concatenate(([0.0], yy[1]))
    dv_vals = np.concatenate(([0.0], yy[3]))
    profile = RadialProfile(grid=grid, u_vals=u_vals, v_vals=v_vals,
                            du_vals=du_vals, dv_vals=dv_vals)

    a, a_var = _plateau(rr, rr ** (n - 2) * yy[2])
    b, b_var = _plateau(rr, _compensated_u(params, rr, yy[0]))
    # independent endpoint estimator of the same v-limit as a
    L = float(rr[-1] ** (n - 2) * yy[2][-1])
    if a_var > 0.05 or b_var > 0.05 or abs(L - a) > 0.05 * abs(a):
        warnings.warn(
            "decay plateau variation exceeds 5% over the last decade; "
            "increase r_max for sharper constants", RuntimeWarning)

    solution = EntireSolution(
        profile=profile, shoot_param=float(s_mid), a=a, b=b, L=L,
        A_U0=math.nan, A_V0=None, params=params,
        a_variation=a_var, b_variation=b_var,
        bracket_width=float(s_hi - s_lo), iterations=iterations)
    object.__setattr__(solution, "_dense_u",
                       lambda r, s=sol: np.where(np.asarray(r) < s.t[0],
                                                 1.0, s.sol(np.maximum(r, s.t[0]))[0]))
    object.__setattr__(solution, "_dense_v",
                       lambda r, s=sol: np.where(np.asarray(r) < s.t[0],
                                                 solution.shoot_param,
                                                 s.sol(np.maximum(r, s.t[0]))[2]))
    au, av = norms(solution)
    object.__setattr__(solution, "A_U0", au.value)
    object.__setattr__(solution, "A_V0", av.value)
    return solution


def decay_constants(sol: EntireSolution) -> tuple[float, float, float]:
    """Decay limits (a, b, L) re-fitted from the stored profile.

    a is the plateau of r^(n-2) v on the last grid decade; b compensates u
    by the regime law (r^(n-2), r^(n-2)/log r, or r^((n-2)p-2)); L is the
    endpoint estimate of the same limit as a, reported separately as a
    consistency handle.
    """
    params = sol.params
    r = sol.profile.grid[1:]
    u = sol.profile.u_vals[1:]
    v = sol.profile.v_vals[1:]
    a, a_var = _plateau(r, r ** (params.n - 2) * v)
    b, b_var = _plateau(r, _compensated_u(params, r, u))
    L = float(r[-1] ** (params.n - 2) * v[-1])
    if a_var > 0.05 or b_var > 0.05 or abs(L - a) > 0.05 * abs(a):
        warnings.warn("decay plateau variation exceeds 5%; increase r_max",
                      RuntimeWarning)
    return a, b, L


def _grid_integral(sol: EntireSolution, power_of_u: float | None,
                   power_of_v: float | None) -> float:
    prof = sol.profile
    r = np.geomspace(prof.grid[1], prof.r_end, 6000)
    u = sol.u(r) if power_of_u is not None else None
    v = sol.v(r) if power_of_v is not None else None
    if power_of_u is not None and power_of_v is not None:
        raise ValueError("one power at a time")
    f = u ** power_of_u if power_of_u is not None else v ** power_of_v
    surf = 2.0 * math.pi ** (sol.params.n / 2.0) / math.gamma(sol.params.n / 2.0)
    core = float(simpson(r ** (sol.params.n - 1) * f, x=r))
    # the [0, r_first] stub with the integrand frozen at the center value
    stub = (1.0 if power_of_u is not None else sol.shoot_param
            ** power_of_v) * prof.grid[1] ** sol.params.n / sol.params.n
    return surf * (core + stub)


def _tail_integral(sol: EntireSolution, which: str, power: float) -> float:
    """Analytic tail beyond the profile, from the fitted decay law."""
    n = sol.params.n
    R = sol.profile.r_end
    surf = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    if which == "v":
        law = lambda r: sol.a * r ** (2.0 - n)
    elif sol.params.regime is Regime.LOG:
        law = lambda r: sol.b * np.log(r) * r ** (2.0 - n)
    else:
        law = lambda r: sol.b * r ** (-_decay_exponent_u(sol.params))
    val, _ = quad(lambda r: r ** (n - 1) * law(r) ** power, R, np.inf)
    return surf * val


def norms(sol: EntireSolution) -> tuple[NormResult, NormResult]:
    """Whole-space integrals of u^q0 and v^p (grid part plus modeled tail).

    The v-integral converges only when (n-2)p > n; otherwise the tail
    exponent is not integrable and the result carries a divergence flag.
    """
    params = sol.params
    n, p, q = params.n, params.p, params.q0

    tail_u = _tail_integral(sol, "u", q)
    a_u = NormResult(value=_grid_integral(sol, q, None) + tail_u,
                     tail_part=tail_u, divergent=False)

    if (n - 2) * p > n:
        tail_v = _tail_integral(sol, "v", p)
        a_v = NormResult(value=_grid_integral(sol, None, p) + tail_v,
                         tail_part=tail_v, divergent=False)
    else:
        a_v = NormResult(value=None, tail_part=math.inf, divergent=True)
    return a_u, a_v


def sobolev_quotient(sol: EntireSolution) -> float:
    """Sobolev-type quotient S = (integral of v^(p+1))^(2(p+1)/(np)).

    Also enforces the ground-state identity
    int u^(q0+1) = int |Lap u|^((p+1)/p) = int v^(p+1)
    (the middle integral evaluated through Lap u = -v^p pointwise) to
    1e-4 relative; a violation signals an unconverged profile.
    """
    params = sol.params
    p, q = params.p, params.q0
    i_v = _grid_integral(sol, None, p + 1.0) + _tail_integral(sol, "v", p + 1.0)
    i_lap = _grid_integral(sol, None, p * ((p + 1.0) / p)) \
        + _tail_integral(sol, "v", p + 1.0)
    i_u = _grid_integral(sol, q + 1.0, None) + _tail_integral(sol, "u", q + 1.0)
    worst = max(abs(i_u - i_v), abs(i_lap - i_v)) / abs(i_v)
    if worst > 1e-4:
        raise RuntimeError(
            f"consistency error: ground-state integral identity violated "
            f"at {worst:.2e} relative; the profile looks unconverged")
    return i_v ** (2.0 * (p + 1.0) / (params.n * p))


def write_profile_csv(profile: RadialProfile, path) -> None:
    """Write the profile as CSV columns r, u, v, du, dv."""
    data = np.column_stack([profile.grid, profile.u_vals, profile.v_vals,
                            profile.du_vals, profile.dv_vals])
    header = "r,u,v,du,dv"
    np.savetxt(path, data, delimiter=",", header=header, comments="")
