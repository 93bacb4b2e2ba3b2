"""Numerical checks of the reverse quantum speed limit and the minimum-norm bound it implies."""

from .dynamics import (
    UNBOUNDED,
    EvolutionContext,
    OverlapDiagnostics,
    characteristic_time,
    delta_psi,
    energy_variance,
    overlap_diagnostics,
    propagate,
    second_moment_root,
)
from .hilbert import (
    HermitianOperator,
    SpectralDecomposition,
    StateVector,
    eigendecompose,
    inner_product,
    normalize,
    tensor_product_operator,
    tensor_product_state,
)
from .rqsl import (
    BoundReport,
    NormLimitReport,
    QuadratureConfig,
    discrete_length,
    norm_limit,
    reference_section,
    reference_section_length,
    rqsl_check,
    verify_norm_inequality,
    verify_system,
)

__version__ = "0.1.0"
