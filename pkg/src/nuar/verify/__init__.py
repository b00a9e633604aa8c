from .checks import (
    psi_cdf_sup_error,
    scaling_exponent,
    verify_donsker,
    verify_geosum_heavy,
    verify_geosum_light,
    verify_hurst,
    verify_increment_bound,
    verify_offdiag_decay,
    verify_psi_cdf,
    verify_special_functions,
)
from .report import VerificationReport
from .stats import hurst_estimate, ks_statistic

__all__ = [
    "VerificationReport",
    "hurst_estimate",
    "ks_statistic",
    "psi_cdf_sup_error",
    "scaling_exponent",
    "verify_donsker",
    "verify_geosum_heavy",
    "verify_geosum_light",
    "verify_hurst",
    "verify_increment_bound",
    "verify_offdiag_decay",
    "verify_psi_cdf",
    "verify_special_functions",
]
