"""Q-deformed Fock spaces, fields and Levy processes on a finite grid."""
from .errors import (
    BadRoot,
    BosonCase,
    ConfigError,
    CutoffTooSmall,
    DegenerateMeasure,
    EnvelopeExceeded,
    IndexOutOfRange,
    InvalidKernel,
    NotGroupSymmetric,
    NotSymmetric,
    NotUnimodular,
    QFockError,
    RangeError,
    SupportOverlap,
    WordTooLong,
)
from .kernel import (
    QKernel,
    SiteGrid,
    build_anyonic_kernel,
    build_explicit_kernel,
    build_window_kernel,
    random_kernel,
    validate_kernel,
)
from .symmetrize import (
    check_exclusion,
    psi,
    q_coeff,
    q_factorial,
    q_number,
    q_product,
    symmetrize,
    symmetrize_recursive,
)
from .fock import (
    GradedOperator,
    GradedVector,
    annihilate,
    check_ccr,
    create,
    negdef_form,
    neutral,
    point_operators,
    restricted_creation_norm,
)
from .field import (
    FieldConfig,
    normal_order_product,
    omega,
    vacuum_state,
    wick_polynomial_vector,
    wick_recurrence_apply,
    wick_rule_expand,
    wick_vs_normal_report,
)
from .partitions import (
    MarkedPartition,
    SetPartition,
    crossing_coeff,
    cumulants_from_moments,
    enumerate_marked,
    enumerate_partitions,
    independence_test,
    marked_crossing_coeff,
    moment_formula,
)
from .levy import (
    JumpMeasure,
    LevySpace,
    build_levy_space,
    cyclicity_rank,
    power_jump,
    pyramidal_residual,
    stationarity_residual,
    verify_levy_cumulants,
    xi,
)
from .chaos import (
    OrthoPolyBasis,
    chaos_orthogonality_report,
    multiple_integral,
    ortho_polys,
    orthogonalized_jump,
)

__version__ = "0.1.0"
