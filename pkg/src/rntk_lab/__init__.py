"""Residual tangent kernel laboratory.

Exact depth-L tangent kernel of the scaled-residual ReLU network on the
unit sphere, its Gegenbauer spectra and depth limits, kernel regression
under gradient flow/descent with early stopping, and the finite-width
network it idealizes.
"""

from .rntk import (
    KernelConfig,
    KernelMatrix,
    RntkTrace,
    cross_kernel,
    degeneration_diagnostics,
    kernel_matrix,
    limit_kernel_constant,
    limit_kernel_fast_decay,
    rntk_value,
    rntk_value_raw,
    rntk_values,
)
from .special import (
    SeriesCoeffs,
    a_coeff,
    beta,
    gegenbauer,
    kappa0,
    kappa0_maclaurin,
    kappa1,
    kappa1_maclaurin,
    log_gamma,
    sphere_volume,
)

__version__ = "0.1.0"

__all__ = [
    "KernelConfig",
    "KernelMatrix",
    "RntkTrace",
    "SeriesCoeffs",
    "a_coeff",
    "beta",
    "cross_kernel",
    "degeneration_diagnostics",
    "gegenbauer",
    "kappa0",
    "kappa0_maclaurin",
    "kappa1",
    "kappa1_maclaurin",
    "kernel_matrix",
    "limit_kernel_constant",
    "limit_kernel_fast_decay",
    "log_gamma",
    "rntk_value",
    "rntk_value_raw",
    "rntk_values",
    "sphere_volume",
    "__version__",
]
