"""Anomalous exponents of fully nonlinear parabolic equations."""

from ._anomex import (
    AnomexError,
    CheckResult,
    ConvergenceReport,
    convergence_report,
    EigenResult,
    Operator,
    RadialGrid,
    apply_resolvent,
    check_gaussian_bounds,
    check_special_subsolution,
    dual,
    evolve_cauchy,
    exponent_bounds,
    exponent_pair,
    find_alpha_shooting,
    inverse_power_iteration,
    normalized_rescaled_flow,
    run_verification_suite,
    shoot,
)

__all__ = [
    "AnomexError",
    "CheckResult",
    "ConvergenceReport",
    "convergence_report",
    "EigenResult",
    "Operator",
    "RadialGrid",
    "apply_resolvent",
    "check_gaussian_bounds",
    "check_special_subsolution",
    "dual",
    "evolve_cauchy",
    "exponent_bounds",
    "exponent_pair",
    "find_alpha_shooting",
    "inverse_power_iteration",
    "normalized_rescaled_flow",
    "run_verification_suite",
    "shoot",
]
