"""Exponent bookkeeping for the Lane-Emden system near the critical hyperbola.

The system -Delta u = v^p, -Delta v = u^q on a domain in R^n is studied at
exponent pairs (p, q_eps) lying below the critical hyperbola by a margin
eps >= 0:

    1/(p+1) + 1/(q_eps+1) = (n-2)/n + eps.

All derived scaling exponents and the constants used by the Green function
machinery live in a single frozen dataclass so every report can embed the
exact configuration it was produced from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from enum import Enum

from .specfun import sphere_measure

__all__ = [
    "Regime",
    "SystemParams",
    "make_params",
    "fundamental_constant",
    "gamma_constants",
]

# Tie tolerance for classifying p == n/(n-2) as the logarithmic regime.
_LOG_TIE = 1e-12


class Regime(str, Enum):
    """Decay regime of the first component of the entire ground state.

    HIGH:  p in (n/(n-2), (n+2)/(n-2)]   both components decay like r^(2-n)
    LOG:   p = n/(n-2)                   u decays like r^(2-n) log r
    LOW_A: p in [(n-1)/(n-2), n/(n-2))   u decays like r^(2-(n-2)p), strong case
    LOW_B: p in (2/(n-2), (n-1)/(n-2))   u decays like r^(2-(n-2)p), mild case
    """

    HIGH = "HIGH"
    LOG = "LOG"
    LOW_A = "LOW_A"
    LOW_B = "LOW_B"


def fundamental_constant(n: int) -> float:
    """Constant c_n with -Delta (c_n |x|^(2-n)) = delta_0 in R^n, n >= 3."""
    if n < 3:
        raise ValueError(f"fundamental_constant requires n >= 3, got {n!r}")
    return 1.0 / ((n - 2) * sphere_measure(n))


def gamma_constants(n: int, p: float) -> tuple[float, float]:
    """Constants (gamma1, gamma2) of the iterated Newtonian expansion.

    gamma1 = c_n^p / ((n-2)p - 2) / (n - (n-2)p)
    gamma2 = p c_n^(p-1) / ((n-2)p - 2(n-1)) / (n - (n-2)p)

    Both require 2/(n-2) < p < n/(n-2); the second denominator factor
    (n-2)p - 2(n-1) is negative throughout that range, so gamma2 < 0 < gamma1.
    """
    if n < 3:
        raise ValueError(f"gamma_constants requires n >= 3, got {n!r}")
    s = (n - 2) * p
    if not (2.0 < s < n):
        raise ValueError(
            f"gamma_constants requires 2/(n-2) < p < n/(n-2); got n={n}, p={p} "
            f"with (n-2)p = {s}"
        )
    c = fundamental_constant(n)
    gamma1 = c**p / ((s - 2.0) * (n - s))
    gamma2 = p * c ** (p - 1.0) / ((s - 2.0 * (n - 1)) * (n - s))
    return gamma1, gamma2


@dataclass(frozen=True)
class SystemParams:
    """Complete parameter set for one (n, p, eps) configuration."""

    n: int
    p: float
    eps: float
    q_eps: float
    q0: float
    alpha_eps: float
    beta_eps: float
    alpha0: float
    beta0: float
    c_n: float
    gamma1: float | None
    gamma2: float | None
    regime: Regime

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        return d


def _q_from_hyperbola(n: int, p: float, eps: float) -> float:
    rhs = (n - 2) / n + eps - 1.0 / (p + 1.0)
    if rhs <= 0.0:
        raise ValueError(
            f"no admissible q: 1/(q+1) = {(n-2)/n} + {eps} - 1/({p}+1) is not positive"
        )
    return 1.0 / rhs - 1.0


def make_params(n: int, p: float, eps: float = 0.0) -> SystemParams:
    """Build the full parameter record for dimension n, exponent p, margin eps.

    Preconditions: integer n >= 3, p in (2/(n-2), (n+2)/(n-2)], eps >= 0 small
    enough that q_eps >= p still holds (least energy solutions are normalized
    with q the larger exponent).  Violations raise ValueError; the q_eps < p
    case reports a supercritical-order violation.
    """
    if not isinstance(n, int) or n < 3:
        raise ValueError(f"make_params requires integer n >= 3, got {n!r}")
    if not (2.0 / (n - 2) < p <= (n + 2.0) / (n - 2)):
        raise ValueError(
            f"make_params requires p in (2/(n-2), (n+2)/(n-2)] = "
            f"({2.0/(n-2)}, {(n+2.0)/(n-2)}]; got p={p!r} for n={n}"
        )
    if eps < 0.0:
        raise ValueError(f"make_params requires eps >= 0, got {eps!r}")

    q_eps = _q_from_hyperbola(n, p, eps)
    q0 = _q_from_hyperbola(n, p, 0.0)
    if q_eps < p - 1e-12:
        raise ValueError(
            f"supercritical-order violation: q_eps = {q_eps} < p = {p}; "
            f"the pair must keep q >= p"
        )

    def scaling(q: float) -> tuple[float, float]:
        denom = p * q - 1.0
        return 2.0 * (p + 1.0) / denom, 2.0 * (q + 1.0) / denom

    alpha_eps, beta_eps = scaling(q_eps)
    alpha0, beta0 = scaling(q0)

    s = (n - 2) * p
    if abs(p - n / (n - 2.0)) <= _LOG_TIE:
        regime = Regime.LOG
    elif s > n:
        regime = Regime.HIGH
    elif p >= (n - 1.0) / (n - 2):
        regime = Regime.LOW_A
    else:
        regime = Regime.LOW_B

    if 2.0 < s < n and regime in (Regime.LOW_A, Regime.LOW_B):
        gamma1, gamma2 = gamma_constants(n, p)
    else:
        gamma1, gamma2 = None, None

    return SystemParams(
        n=n,
        p=float(p),
        eps=float(eps),
        q_eps=q_eps,
        q0=q0,
        alpha_eps=alpha_eps,
        beta_eps=beta_eps,
        alpha0=alpha0,
        beta0=beta0,
        c_n=fundamental_constant(n),
        gamma1=gamma1,
        gamma2=gamma2,
        regime=regime,
    )
