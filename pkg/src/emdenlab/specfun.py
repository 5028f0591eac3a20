"""Special functions and elementary inequality checks.

Everything here is deterministic and cheap: gamma/beta wrappers accurate to
at least 13 significant digits, sphere surface measures, and the pointwise
power-difference bounds used by the kernel positivity arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "gamma_fn",
    "ln_gamma",
    "beta_fn",
    "sphere_measure",
    "PowerBoundCheck",
    "check_power_bound",
]


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments.

    Wraps the C library implementation, which is a Lanczos/Stirling hybrid
    good to ~15 significant digits; the contract here is >= 13 digits.
    Raises ValueError for x <= 0 (poles and the cut are out of scope).
    """
    if not (x > 0.0):
        raise ValueError(f"gamma_fn requires x > 0, got {x!r}")
    if x > 171.6:
        raise OverflowError(f"gamma_fn({x}) overflows double precision")
    return math.gamma(x)


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0; safe for large arguments."""
    if not (x > 0.0):
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def beta_fn(x: float, y: float) -> float:
    """Euler Beta function B(x, y) for x, y > 0.

    Computed in log space so that large arguments do not overflow before
    the final exponential.
    """
    if not (x > 0.0 and y > 0.0):
        raise ValueError(f"beta_fn requires positive arguments, got {x!r}, {y!r}")
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere S^(n-1) in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    if n < 1:
        raise ValueError(f"sphere_measure requires n >= 1, got {n!r}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class PowerBoundCheck:
    """Result of a pointwise power-difference bound check.

    value is the quantity being sandwiched, lower/upper the proven bounds,
    slack the distance to the nearest bound (negative means violation after
    allowing float noise).
    """

    clause: str
    value: float
    lower: float
    upper: float
    ok: bool

    @property
    def slack(self) -> float:
        return min(self.value - self.lower, self.upper - self.value)


# Relative float-noise allowance for the sandwich tests.  The bound
# quantities are products of a few powers, so a handful of ulps suffices.
_NOISE = 5e-13


def check_power_bound(p: float, a: float, b: float, eta: float | None = None) -> PowerBoundCheck:
    """Check the elementary power-difference inequalities at a sample point.

    With eta=None, requires 0 <= b <= a and verifies, by p-range:

    * p in (0, 1]:   0 <= a^p - (a-b)^p <= b^p
    * p in (1, 2):   -min((p-1) a^(p-2) b^2, b^p) <= a^p - (a-b)^p - p a^(p-1) b <= 0
    * p >= 2:        -(p(p-1)/2) a^(p-2) b^2 <= a^p - (a-b)^p - p a^(p-1) b <= 0

    With eta in (0, 1), requires |b| <= eta * a instead (b may be negative)
    and verifies the two-term expansion remainder bound

        |a^p - (a-b)^p - p a^(p-1) b|
            <= (p|p-1|/2) max((1+eta)^(p-2), (1-eta)^(p-2)) a^(p-2) b^2

    which follows from the exact Taylor remainder with the intermediate
    point pushed to the worst end of [a(1-eta), a(1+eta)]: the right end
    when p > 2, the left end when p < 2.
    """
    if p <= 0.0:
        raise ValueError(f"check_power_bound requires p > 0, got {p!r}")

    if eta is not None:
        if not (0.0 < eta < 1.0):
            raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
        if not (a > 0.0 and abs(b) <= eta * a):
            raise ValueError(f"expansion clause needs |b| <= eta*a with a > 0, got a={a!r} b={b!r}")
        remainder = a**p - (a - b) ** p - p * a ** (p - 1.0) * b
        worst_end = max((1.0 + eta) ** (p - 2.0), (1.0 - eta) ** (p - 2.0))
        bound = 0.5 * p * abs(p - 1.0) * worst_end * a ** (p - 2.0) * b * b
        noise = _NOISE * (a**p + abs(b) * p * a ** (p - 1.0))
        ok = abs(remainder) <= bound + noise
        return PowerBoundCheck("expansion", remainder, -bound, bound, ok)

    if not (0.0 <= b <= a):
        raise ValueError(f"sandwich clauses need 0 <= b <= a, got a={a!r} b={b!r}")

    if a == 0.0:
        # degenerate a = b = 0: every clause reads 0 <= 0 <= 0
        clause = "p<=1" if p <= 1.0 else ("1<p<2" if p < 2.0 else "p>=2")
        return PowerBoundCheck(clause, 0.0, 0.0, 0.0, True)

    noise = _NOISE * a**p
    if p <= 1.0:
        diff = a**p - (a - b) ** p
        lower, upper = 0.0, b**p
        ok = (lower - noise) <= diff <= (upper + noise)
        return PowerBoundCheck("p<=1", diff, lower, upper, ok)

    diff = a**p - (a - b) ** p - p * a ** (p - 1.0) * b
    if p < 2.0:
        quad = (p - 1.0) * a ** (p - 2.0) * b * b
        lower = -min(quad, b**p)
        clause = "1<p<2"
    else:
        lower = -0.5 * p * (p - 1.0) * a ** (p - 2.0) * b * b
        clause = "p>=2"
    ok = (lower - noise) <= diff <= noise
    return PowerBoundCheck(clause, diff, lower, 0.0, ok)
