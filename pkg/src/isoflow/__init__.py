"""isoflow: isospectral double-bracket matrix flows on the quantized sphere.

Toda, incompressible-porous-medium, and diagonalizing gradient flows under
one generator interface, with a spectrum-preserving midpoint integrator,
an O(N^2) Poisson solver on the quantized sphere, and invariant-based
diagnostics.
"""

__version__ = "0.1.0"

from ._accel import backend
from .continuum import AbState, LagrangianState, ab_rhs, j_integral, step_ab
from .diagnostics import (
    DiagnosticsRecord,
    conserved_traces,
    contraction_check,
    inversion_count,
    offdiag_norm,
    orthogonality_residual,
    spectral_drift,
)
from .flows import (
    FlowSpec,
    diagflow_rhs,
    generator,
    ipm_rhs,
    lyapunov,
    potential_diagonal,
    qr_step,
    toda_rhs,
)
from .integrators import IntegratorConfig, Trajectory, isomp_step, rk4_step, run_flow
from .matrixcore import (
    SpectrumReport,
    commutator,
    frobenius_inner,
    householder_qr,
    jacobi_spectrum,
    matrix_exp,
    symmetric,
    tridiag_solve,
)
from .quantization import (
    DiscreteLaplacian,
    QuantizedBasis,
    SphereField,
    SpinGenerators,
    band_coefficients,
    build_generators,
    laplacian_apply,
    matrix_to_field,
    poisson_solve,
    quantized_basis,
)

__all__ = [
    "__version__",
    "backend",
    "AbState",
    "LagrangianState",
    "ab_rhs",
    "j_integral",
    "step_ab",
    "DiagnosticsRecord",
    "conserved_traces",
    "contraction_check",
    "inversion_count",
    "offdiag_norm",
    "orthogonality_residual",
    "spectral_drift",
    "FlowSpec",
    "diagflow_rhs",
    "generator",
    "ipm_rhs",
    "lyapunov",
    "potential_diagonal",
    "qr_step",
    "toda_rhs",
    "IntegratorConfig",
    "Trajectory",
    "isomp_step",
    "rk4_step",
    "run_flow",
    "SpectrumReport",
    "commutator",
    "frobenius_inner",
    "householder_qr",
    "jacobi_spectrum",
    "matrix_exp",
    "symmetric",
    "tridiag_solve",
    "DiscreteLaplacian",
    "QuantizedBasis",
    "SphereField",
    "SpinGenerators",
    "band_coefficients",
    "build_generators",
    "laplacian_apply",
    "matrix_to_field",
    "poisson_solve",
    "quantized_basis",
]
