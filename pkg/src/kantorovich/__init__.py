"""Numerical verification of operator Kantorovich-type inequalities."""

from .hermitian import (
    DomainError,
    LoewnerVerdict,
    NotHermitianError,
    SpectralDecomposition,
    SpectrumBounds,
    SpectrumError,
    apply_function,
    chord_operator,
    loewner_leq,
    operator_norm,
    spectral_decompose,
    spectral_norm,
)
from .inequalities import (
    ChainReport,
    Link,
    check_ando,
    check_bhatia_kittaneh,
    check_cdj,
    check_eq6,
    check_logconvex_refinement,
    check_norm_criterion,
    check_power_refinement,
    check_refined_kantorovich,
    check_squared,
    check_theorem_A,
    check_theorem_C,
)
from .maps import (
    CompressionMap,
    KrausMap,
    NormalizedTraceMap,
    PinchingMap,
    UnitaryMixtureMap,
    apply_map,
    random_unital_map,
    validate_map,
)
from .scalar import (
    ScalarFunction,
    get_function,
    is_log_convex,
    kantorovich_constant,
    sum_bound_gap,
    linear_chord,
    log_chord,
    mu_constant,
)

__version__ = "0.1.0"
