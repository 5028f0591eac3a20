"""Numerical laboratory for Lane-Emden systems near the critical hyperbola.

Subpackages cover special-function helpers, exponent bookkeeping, adaptive
quadrature with certified error budgets, half-space integral inequality
certification, Green function machinery on the unit ball, entire ground
states, and nearly critical solutions on the ball.
"""

__version__ = "0.1.0"

from .balldomain import (
    BallSolution,
    BlowupRow,
    BlowupScan,
    DecayFit,
    GreenApproxReport,
    PohozaevRecord,
    blowup_scan,
    check_decay,
    energy_identity,
    pohozaev_check,
    solve_ball,
    v_green_approx,
    write_scan_csv,
)
from .entire import (
    EntireSolution,
    NormResult,
    RadialProfile,
    decay_constants,
    norms,
    sobolev_quotient,
    solve_entire,
    write_profile_csv,
)
from .greenfun import (
    BallGreenContext,
    HBoundaryCheck,
    HtildeBoundaryCheck,
    check_H_boundary,
    check_htilde_boundary,
    green,
    green_gradient,
    gtilde,
    htilde,
    pohozaev_I1,
    pohozaev_I1_limit,
    pohozaev_I2,
    pohozaev_I2_limit,
    regular_part,
    regular_part_diag_gradient,
    regular_part_gradient,
    robin,
    sphere_integral,
    tau_tilde,
)
from .halfspace import (
    InequalityReport,
    Verdict,
    verify_as0,
    verify_as1,
    verify_b50,
    verify_master,
)
from .params import Regime, SystemParams, make_params, gamma_constants
from .quadrature import QuadResult, integrate_1d, integrate_2d

__all__ = [
    "Regime",
    "SystemParams",
    "make_params",
    "gamma_constants",
    "QuadResult",
    "integrate_1d",
    "integrate_2d",
    "InequalityReport",
    "Verdict",
    "verify_as0",
    "verify_as1",
    "verify_b50",
    "verify_master",
    "BallGreenContext",
    "HBoundaryCheck",
    "HtildeBoundaryCheck",
    "check_H_boundary",
    "check_htilde_boundary",
    "green",
    "green_gradient",
    "gtilde",
    "htilde",
    "pohozaev_I1",
    "pohozaev_I1_limit",
    "pohozaev_I2",
    "pohozaev_I2_limit",
    "regular_part",
    "regular_part_diag_gradient",
    "regular_part_gradient",
    "robin",
    "sphere_integral",
    "tau_tilde",
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
    "EntireSolution",
    "NormResult",
    "RadialProfile",
    "decay_constants",
    "norms",
    "sobolev_quotient",
    "solve_entire",
    "write_profile_csv",
    "__version__",
]
