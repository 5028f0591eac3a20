"""Adaptive quadrature with conservative error budgets.

The half-space inequality certifications need integrals with five awkward
features at once: semi-infinite domains, interior point singularities with
exponents arbitrarily close to non-integrability, slowly decaying tails,
signed integrands with local cancellation, and an auditable absolute error
bound.  The engine here is a nested Gauss-Kronrod (G7, K15) scheme:

* semi-infinite axes are compactified exactly by x = a + u/(1-u), so tails
  never need a truncation heuristic; the transformed integrand lives on a
  finite rectangle and the budget stays a genuine bound,
* smooth regions use adaptive bisection with the K15 value and the
  conservative |K15 - G7| error estimate per cell,
* declared singular points are wrapped in geometrically shrinking square
  shells; the shell series is summed until the remaining core is either
  negligible or extrapolated as a geometric tail whose ratio is measured
  from the series itself, with the measurement noise and ratio drift
  inflated into the reported error.

All error accounting is a conservative sum; `converged` simply records
whether the final budget met the requested tolerance.  Callers that need a
certificate compare their inequality margin against `abs_error` and treat
a failed comparison as inconclusive rather than as a result.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["QuadResult", "integrate_1d", "integrate_2d"]


# ---------------------------------------------------------------------------
# Gauss-Kronrod (7, 15) pair, nodes ascending on [-1, 1].  The G7 nodes are
# the odd-index subset of the K15 nodes.

_K15_NODES = np.array(
    [
        -0.9914553711208126,
        -0.9491079123427585,
        -0.8648644233597691,
        -0.7415311855993945,
        -0.5860872354676911,
        -0.4058451513773972,
        -0.2077849550078985,
        0.0,
        0.2077849550078985,
        0.4058451513773972,
        0.5860872354676911,
        0.7415311855993945,
        0.8648644233597691,
        0.9491079123427585,
        0.9914553711208126,
    ]
)

_K15_WEIGHTS = np.array(
    [
        0.0229353220105292,
        0.0630920926299785,
        0.1047900103222502,
        0.1406532597155259,
        0.1690047266392679,
        0.1903505780647854,
        0.2044329400752989,
        0.2094821410847278,
        0.2044329400752989,
        0.1903505780647854,
        0.1690047266392679,
        0.1406532597155259,
        0.1047900103222502,
        0.0630920926299785,
        0.0229353220105292,
    ]
)

_G7_WEIGHTS = np.array(
    [
        0.1294849661688697,
        0.2797053914892767,
        0.3818300505051189,
        0.4179591836734694,
        0.3818300505051189,
        0.2797053914892767,
        0.1294849661688697,
    ]
)

_ROUNDOFF = 1e-15


@dataclass(frozen=True)
class QuadResult:
    """Value, conservative absolute error bound, evaluation count, and
    whether the bound met the requested tolerance."""

    value: float
    abs_error: float
    n_evals: int
    converged: bool

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            self.value + other.value,
            self.abs_error + other.abs_error,
            self.n_evals + other.n_evals,
            self.converged and other.converged,
        )

    def scaled(self, factor: float) -> "QuadResult":
        return QuadResult(
            factor * self.value, abs(factor) * self.abs_error, self.n_evals, self.converged
        )


# ---------------------------------------------------------------------------
# Axis maps: unit coordinate u in [0, 1] -> original coordinate.


class _AxisMap:
    __slots__ = ("a", "width", "infinite")

    def __init__(self, lo: float, hi: float):
        if not (hi > lo):
            raise ValueError(f"empty integration range ({lo}, {hi})")
        if math.isinf(lo):
            raise ValueError("lower endpoint must be finite")
        self.a = float(lo)
        self.infinite = math.isinf(hi)
        self.width = None if self.infinite else float(hi - lo)

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        if self.infinite:
            return self.a + u / (1.0 - u)
        return self.a + self.width * u

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        if self.infinite:
            return 1.0 / (1.0 - u) ** 2
        return np.full_like(u, self.width)

    def to_unit(self, x: float) -> float:
        if self.infinite:
            if math.isinf(x):
                raise ValueError("singular points at infinity are not supported")
            return (x - self.a) / (1.0 + (x - self.a))
        return (x - self.a) / self.width


def _wrap_scalar(f: Callable) -> Callable:
    uf = np.frompyfunc(f, 1, 1)

    def g(x):
        return uf(x).astype(float)

    return g


def _wrap_scalar2(f: Callable) -> Callable:
    uf = np.frompyfunc(f, 2, 1)

    def g(x, y):
        return uf(x, y).astype(float)

    return g


# ---------------------------------------------------------------------------
# Geometric tail extrapolation shared by the 1D endpoint series and the 2D
# singular-patch shells.

_MAX_RATIO = 0.9995
_TAIL_SAFETY = 2.0


def _geometric_tail(T: Sequence[float], E: Sequence[float], alloc: float):
    """Estimate sum_{j>K} T_j for a geometrically decaying series.

    Returns (tail_value, tail_error, ok).  The ratio is measured from the
    last terms; its uncertainty combines the observed drift between
    consecutive ratios with the relative integration noise of the terms,
    inflated by a safety factor.  The error is the spread of the geometric
    sum over the uncertainty interval.  `ok` is False when the measurement
    is unusable (ratio too close to 1, terms at the noise floor while still
    large, too few terms).
    """
    if len(T) < 4:
        return 0.0, math.inf, False
    t1, t2, t3 = T[-3], T[-2], T[-1]
    e2, e3 = E[-2], E[-1]
    # fast path: the series has already decayed below relevance
    if abs(t3) + e3 <= 0.02 * alloc and abs(t3) <= abs(t2) + e2:
        return 0.0, 3.0 * (abs(t3) + e3), True
    if t1 == 0.0 or t2 == 0.0:
        return 0.0, math.inf, False
    r_prev = t2 / t1
    r_last = t3 / t2
    noise = e3 / abs(t3) + e2 / abs(t2) if t3 != 0.0 else math.inf
    unc = _TAIL_SAFETY * (abs(r_last - r_prev) + abs(r_last) * noise)
    if not math.isfinite(unc) or abs(r_last) + unc >= _MAX_RATIO:
        return 0.0, math.inf, False

    def geom(rho: float) -> float:
        return rho / (1.0 - rho)

    tail = t3 * geom(r_last)
    r_hi = min(r_last + unc, _MAX_RATIO)
    r_lo = max(r_last - unc, -_MAX_RATIO)
    spread = max(abs(geom(r_hi) - geom(r_last)), abs(geom(r_last) - geom(r_lo)))
    tail_err = abs(t3) * spread + e3 * abs(geom(abs(r_last) + unc))
    return tail, tail_err, True


# ---------------------------------------------------------------------------
# 1D engine.


def _eval_intervals_1d(f, amap: _AxisMap, intervals: np.ndarray):
    """K15/G7 on a batch of unit-coordinate intervals, shape (m, 2)."""
    lo = intervals[:, 0][:, None]
    hi = intervals[:, 1][:, None]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    U = mid + half * _K15_NODES[None, :]
    X = amap.from_unit(U)
    F = f(X.ravel()).reshape(U.shape) * amap.jacobian(U)
    if not np.all(np.isfinite(F)):
        bad = np.argwhere(~np.isfinite(F))
        i, j = bad[0]
        raise FloatingPointError(
            f"integrand returned non-finite value at x = {X[i, j]!r}"
        )
    k15 = F @ _K15_WEIGHTS * half[:, 0]
    g7 = F[:, 1::2] @ _G7_WEIGHTS * half[:, 0]
    raw = np.abs(F) @ _K15_WEIGHTS * half[:, 0]
    err = np.abs(k15 - g7) + _ROUNDOFF * raw
    return k15, err, U.size


def _adapt_1d(f, amap, u_lo, u_hi, tol, max_intervals, floor=1e-14):
    """Plain adaptive bisection on [u_lo, u_hi] in unit coordinates."""
    store = {}
    heap = []
    counter = 0
    vals, errs, _ = _eval_intervals_1d(f, amap, np.array([[u_lo, u_hi]]))
    store[0] = (u_lo, u_hi, float(vals[0]), float(errs[0]))
    heapq.heappush(heap, (-float(errs[0]), 0))
    counter = 1
    n_evals = 15
    total_err = float(errs[0])

    while total_err > tol and len(store) < max_intervals and heap:
        batch = []
        while heap and len(batch) < 8:
            negerr, idx = heapq.heappop(heap)
            if idx not in store:
                continue
            lo, hi, v, e = store[idx]
            if hi - lo < floor:
                continue  # frozen: too narrow to split further
            batch.append(idx)
        if not batch:
            break
        children = []
        for idx in batch:
            lo, hi, v, e = store[idx]
            mid = 0.5 * (lo + hi)
            children.append((lo, mid))
            children.append((mid, hi))
        cvals, cerrs, ne = _eval_intervals_1d(f, amap, np.array(children))
        n_evals += ne
        for idx in batch:
            lo, hi, v, e = store.pop(idx)
            total_err -= e
        for (lo, hi), v, e in zip(children, cvals, cerrs):
            store[counter] = (lo, hi, float(v), float(e))
            heapq.heappush(heap, (-float(e), counter))
            counter += 1
            total_err += float(e)

    value = math.fsum(item[2] for item in store.values())
    err = math.fsum(item[3] for item in store.values())
    return value, err, n_evals


def _endpoint_series_1d(f, amap, u_sing, u_far, alloc, max_levels=42):
    """Integrate from a singular endpoint u_sing toward u_far.

    Dyadic levels [u_sing + w 2^-(k+1), u_sing + w 2^-k] (signed toward
    u_far) are integrated adaptively; the unreachable core is extrapolated
    with `_geometric_tail`.
    """
    w = u_far - u_sing
    T, E = [], []
    n_evals = 0
    best = None
    scale = 0.0
    for k in range(max_levels):
        hi = u_sing + w * 0.5**k
        lo = u_sing + w * 0.5 ** (k + 1)
        a, b = (lo, hi) if w > 0 else (hi, lo)
        rough_v, rough_e, ne = _eval_intervals_1d(f, amap, np.array([[a, b]]))
        n_evals += ne
        scale = max(scale, abs(float(rough_v[0])))
        # levels feed a ratio extrapolation whose error is amplified by
        # 1/(1-ratio)^2, so integrate them close to the roundoff floor
        level_tol = max(abs(float(rough_v[0])) * 2e-13, scale * 1e-15, 1e-300)
        if float(rough_e[0]) > level_tol:
            v, e, ne = _adapt_1d(f, amap, a, b, level_tol, max_intervals=128)
            n_evals += ne
        else:
            v, e = float(rough_v[0]), float(rough_e[0])
        # node coordinates carry ~1e-16 absolute error, a relative position
        # error of 1e-16 / distance at this level; charge it to the budget
        # since the K15-G7 difference cannot see input noise
        e += abs(v) * min(1.0, 8e-16 * 2.0 ** (k + 1) / abs(w))
        T.append(v)
        E.append(e)
        if k >= 7:
            # every level yields a valid conservative estimate (partial sum
            # plus extrapolated core); keep the one with the smallest budget,
            # since coordinate noise eventually degrades deeper levels
            tail, tail_err, ok = _geometric_tail(T, E, alloc)
            if ok:
                cand = (math.fsum(T) + tail, math.fsum(E) + tail_err)
                if best is None or cand[1] < best[1]:
                    best = cand
                if cand[1] <= 0.5 * alloc:
                    break
                if cand[1] > 4.0 * best[1]:
                    break  # noise floor has taken over; deeper is worse
    if best is None:
        tail, tail_err, ok = _geometric_tail(T, E, alloc)
        if not ok:
            # honest fallback: bound the core by the last level over the
            # worst admissible ratio
            tail = 0.0
            tail_err = abs(T[-1]) * _MAX_RATIO / (1.0 - _MAX_RATIO) + sum(E[-3:])
        best = (math.fsum(T) + tail, math.fsum(E) + tail_err)
    return best[0], best[1], n_evals


def integrate_1d(
    f: Callable,
    a: float,
    b: float,
    tol: float,
    singular_points: Sequence[float] = (),
    *,
    max_intervals: int = 4000,
    vectorized: bool = True,
) -> QuadResult:
    """Integrate f over (a, b) with an auditable absolute error bound.

    b may be math.inf (compactified exactly).  singular_points lists
    locations of integrable singularities, including possibly the
    endpoints; the integrand is never evaluated at them.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if not vectorized:
        f = _wrap_scalar(f)
    amap = _AxisMap(a, b)

    sing_unit = sorted(amap.to_unit(s) for s in singular_points)
    for s in sing_unit:
        if not (0.0 <= s <= 1.0):
            raise ValueError("singular point outside the integration range")

    # segment the unit interval at singular points
    cuts = [0.0] + [s for s in sing_unit if 0.0 < s < 1.0] + [1.0]
    cuts = sorted(set(cuts))
    singset = set(sing_unit)

    n_segments = len(cuts) - 1
    total_v = 0.0
    total_e = 0.0
    n_evals = 0
    for i in range(n_segments):
        lo, hi = cuts[i], cuts[i + 1]
        lo_sing = lo in singset
        hi_sing = hi in singset
        alloc = tol / n_segments
        if lo_sing and hi_sing:
            mid = 0.5 * (lo + hi)
            v1, e1, ne1 = _endpoint_series_1d(f, amap, lo, mid, 0.5 * alloc)
            v2, e2, ne2 = _endpoint_series_1d(f, amap, hi, mid, 0.5 * alloc)
            total_v += v1 + v2
            total_e += e1 + e2
            n_evals += ne1 + ne2
        elif lo_sing or hi_sing:
            s, far = (lo, hi) if lo_sing else (hi, lo)
            v, e, ne = _endpoint_series_1d(f, amap, s, far, alloc)
            total_v += v
            total_e += e
            n_evals += ne
        else:
            v, e, ne = _adapt_1d(f, amap, lo, hi, alloc, max_intervals)
            total_v += v
            total_e += e
            n_evals += ne

    return QuadResult(total_v, total_e, n_evals, total_e <= tol)


# ---------------------------------------------------------------------------
# 2D engine.


def _eval_cells_2d(f, xmap, ymap, rects: np.ndarray):
    """Tensor K15/G7 on a batch of unit-coordinate rectangles (m, 4)."""
    u0, u1, v0, v1 = rects[:, 0], rects[:, 1], rects[:, 2], rects[:, 3]
    uh = 0.5 * (u1 - u0)
    vh = 0.5 * (v1 - v0)
    U = (0.5 * (u0 + u1))[:, None] + uh[:, None] * _K15_NODES[None, :]
    V = (0.5 * (v0 + v1))[:, None] + vh[:, None] * _K15_NODES[None, :]
    X = xmap.from_unit(U)
    Y = ymap.from_unit(V)
    JX = xmap.jacobian(U)
    JY = ymap.jacobian(V)
    m = rects.shape[0]
    XX = np.repeat(X[:, :, None], 15, axis=2)
    YY = np.repeat(Y[:, None, :], 15, axis=1)
    F = f(XX.ravel(), YY.ravel()).reshape(m, 15, 15)
    if not np.all(np.isfinite(F)):
        bad = np.argwhere(~np.isfinite(F))
        i, j, k = bad[0]
        raise FloatingPointError(
            f"integrand returned non-finite value at (r, t) = ({XX[i, j, k]!r}, {YY[i, j, k]!r})"
        )
    F = F * JX[:, :, None] * JY[:, None, :]
    area4 = (uh * vh)[:]
    k15 = np.einsum("i,j,mij->m", _K15_WEIGHTS, _K15_WEIGHTS, F) * area4
    g7 = np.einsum("i,j,mij->m", _G7_WEIGHTS, _G7_WEIGHTS, F[:, 1::2, 1::2]) * area4
    raw = np.einsum("i,j,mij->m", _K15_WEIGHTS, _K15_WEIGHTS, np.abs(F)) * area4
    err = np.abs(k15 - g7) + _ROUNDOFF * raw
    return k15, err, F.size


def _adapt_2d(f, xmap, ymap, rects0, tol, max_cells, floor=5e-14):
    """Adaptive quadrant subdivision over a list of unit rectangles."""
    if not rects0:
        return 0.0, 0.0, 0
    store = {}
    heap = []
    counter = 0
    vals, errs, ne = _eval_cells_2d(f, xmap, ymap, np.array(rects0))
    n_evals = ne
    total_err = 0.0
    for rect, v, e in zip(rects0, vals, errs):
        store[counter] = (rect, float(v), float(e))
        heapq.heappush(heap, (-float(e), counter))
        counter += 1
        total_err += float(e)

    while total_err > tol and len(store) < max_cells and heap:
        batch = []
        while heap and len(batch) < 6:
            negerr, idx = heapq.heappop(heap)
            if idx not in store:
                continue
            (u0, u1, v0, v1), v, e = store[idx]
            if (u1 - u0) < floor and (v1 - v0) < floor:
                continue  # frozen floor cell
            if e <= 0.25 * tol / max(1, len(store)):
                continue
            batch.append(idx)
        if not batch:
            break
        children = []
        owners = []
        for idx in batch:
            (u0, u1, v0, v1), v, e = store[idx]
            du, dv = u1 - u0, v1 - v0
            um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
            if du >= floor and dv >= floor:
                kids = [
                    (u0, um, v0, vm),
                    (um, u1, v0, vm),
                    (u0, um, vm, v1),
                    (um, u1, vm, v1),
                ]
            elif du >= floor:
                kids = [(u0, um, v0, v1), (um, u1, v0, v1)]
            else:
                kids = [(u0, u1, v0, vm), (u0, u1, vm, v1)]
            children.extend(kids)
            owners.append(idx)
        cvals, cerrs, ne = _eval_cells_2d(f, xmap, ymap, np.array(children))
        n_evals += ne
        for idx in owners:
            rect, v, e = store.pop(idx)
            total_err -= e
        for rect, v, e in zip(children, cvals, cerrs):
            store[counter] = (rect, float(v), float(e))
            heapq.heappush(heap, (-float(e), counter))
            counter += 1
            total_err += float(e)

    value = math.fsum(item[1] for item in store.values())
    err = math.fsum(item[2] for item in store.values())
    return value, err, n_evals


def _clip_rect(rect, dom):
    u0 = max(rect[0], dom[0])
    u1 = min(rect[1], dom[1])
    v0 = max(rect[2], dom[2])
    v1 = min(rect[3], dom[3])
    if u0 >= u1 or v0 >= v1:
        return None
    return (u0, u1, v0, v1)


def _subtract_rect(rects, hole):
    """Remove `hole` from each rectangle, producing up to 4 pieces each."""
    out = []
    for (u0, u1, v0, v1) in rects:
        h = _clip_rect(hole, (u0, u1, v0, v1))
        if h is None:
            out.append((u0, u1, v0, v1))
            continue
        hu0, hu1, hv0, hv1 = h
        if hu0 > u0:
            out.append((u0, hu0, v0, v1))
        if hu1 < u1:
            out.append((hu1, u1, v0, v1))
        if hv0 > v0:
            out.append((hu0, hu1, v0, hv0))
        if hv1 < v1:
            out.append((hu0, hu1, hv1, v1))
    return out


def _square(pt, h, dom):
    return _clip_rect((pt[0] - h, pt[0] + h, pt[1] - h, pt[1] + h), dom)


def _patch_series_2d(f, xmap, ymap, dom, pt, D, alloc, max_levels=40):
    """Shell series around a singular point at unit coordinates `pt`.

    Shell k covers Q(D 2^-k) \\ Q(D 2^-(k+1)) clipped to the domain; the
    innermost core is extrapolated geometrically.
    """
    T, E = [], []
    n_evals = 0
    best = None
    scale = 0.0
    for k in range(max_levels):
        h_out = D * 0.5**k
        h_in = 0.5 * h_out
        outer = _square(pt, h_out, dom)
        inner = _square(pt, h_in, dom)
        if outer is None:
            raise ValueError("singular point lies outside the domain")
        shell = _subtract_rect([outer], inner) if inner else [outer]
        rough_v, rough_e, ne = _eval_cells_2d(f, xmap, ymap, np.array(shell))
        n_evals += ne
        rough = float(np.sum(rough_v))
        scale = max(scale, abs(rough))
        # shell sums feed the same amplified ratio extrapolation as the 1D
        # endpoint series; keep their own error near the roundoff floor
        level_tol = max(abs(rough) * 5e-13, scale * 1e-15, 1e-300)
        if float(np.sum(rough_e)) > level_tol:
            v, e, ne = _adapt_2d(f, xmap, ymap, shell, level_tol, max_cells=128)
            n_evals += ne
        else:
            v, e = rough, float(np.sum(rough_e))
        # charge coordinate roundoff: node positions are exact only to
        # ~1e-16 in unit coordinates, a 1e-16 / h_in relative position
        # error that the K15-G7 difference cannot see
        e += abs(v) * min(1.0, 16e-16 / h_in)
        T.append(v)
        E.append(e)
        if k >= 7:
            # each level yields a valid conservative estimate; keep the best
            # one, since coordinate noise eventually degrades deeper levels
            tail, tail_err, ok = _geometric_tail(T, E, alloc)
            if ok:
                cand = (math.fsum(T) + tail, math.fsum(E) + tail_err)
                if best is None or cand[1] < best[1]:
                    best = cand
                if cand[1] <= 0.5 * alloc:
                    break
                if cand[1] > 4.0 * best[1]:
                    break  # noise floor has taken over; deeper is worse
    if best is None:
        tail, tail_err, ok = _geometric_tail(T, E, alloc)
        if not ok:
            tail = 0.0
            tail_err = abs(T[-1]) * _MAX_RATIO / (1.0 - _MAX_RATIO) + sum(E[-3:])
        best = (math.fsum(T) + tail, math.fsum(E) + tail_err)
    return best[0], best[1], n_evals


def integrate_2d(
    f: Callable,
    r_range: tuple[float, float],
    t_range: tuple[float, float],
    tol: float,
    singular_points: Sequence[tuple[float, float]] = (),
    *,
    max_cells: int = 24000,
    vectorized: bool = True,
) -> QuadResult:
    """Integrate f(r, t) over a rectangle, possibly semi-infinite per axis.

    singular_points lists integrable point singularities in original
    coordinates (they may sit on the domain boundary).  Each is wrapped in
    a geometric shell patch; the smooth remainder is handled adaptively.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if not vectorized:
        f = _wrap_scalar2(f)
    xmap = _AxisMap(*r_range)
    ymap = _AxisMap(*t_range)
    dom = (0.0, 1.0, 0.0, 1.0)

    pts = [(xmap.to_unit(sr), ymap.to_unit(st)) for (sr, st) in singular_points]
    for (su, sv) in pts:
        if not (0.0 <= su <= 1.0 and 0.0 <= sv <= 1.0):
            raise ValueError("singular point outside the integration domain")

    # patch half-widths: small enough to keep patches disjoint
    Ds = []
    for i, (su, sv) in enumerate(pts):
        D = 0.125
        for j, (ou, ov) in enumerate(pts):
            if i != j:
                D = min(D, 0.45 * max(abs(su - ou), abs(sv - ov)))
        if D <= 0.0:
            raise ValueError("coincident singular points")
        Ds.append(D)

    main = [dom]
    for (su, sv), D in zip(pts, Ds):
        main = _subtract_rect(main, (su - D, su + D, sv - D, sv + D))

    n_parts = 1 + len(pts)
    alloc_main = 0.5 * tol if pts else tol
    total_v, total_e, n_evals = _adapt_2d(f, xmap, ymap, main, alloc_main, max_cells)

    alloc_patch = (0.5 * tol / len(pts)) if pts else 0.0
    for (su, sv), D in zip(pts, Ds):
        v, e, ne = _patch_series_2d(f, xmap, ymap, dom, (su, sv), D, alloc_patch)
        total_v += v
        total_e += e
        n_evals += ne

    return QuadResult(total_v, total_e, n_evals, total_e <= tol)
