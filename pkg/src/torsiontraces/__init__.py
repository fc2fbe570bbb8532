"""Trace separation of torsion idempotents in group algebras of free products
of cyclic groups."""

__version__ = "0.1.0"

from .algebra import (
    AlgebraElement,
    Mode,
    SobolevParams,
    augmentation_trace,
    build_idempotent,
    convolve,
    delta_trace,
    is_idempotent,
    sobolev_norm,
)
from .group import (
    BUNDLED_SPECS,
    INFINITE,
    CyclicFactor,
    GroupElement,
    GroupSpec,
    are_conjugate,
    cyclically_reduce,
    element_order,
    inverse,
    length,
    multiply,
    normal_form,
    parse_group_spec,
)
from .growth import (
    ConjugacyProfile,
    GrowthKind,
    GrowthVerdict,
    ShellSchedule,
    classify_growth,
    conjugacy_shell_counts,
    enumerate_ball,
    find_shell_sequence,
    profile_from_formula,
    synthetic_profile,
)
from .traces import (
    DivergenceReport,
    OverallVerdict,
    TraceMatrix,
    check_rd_poly_inequality,
    conjugacy_trace,
    counterexample_partial_sums,
    materialize_counterexample,
    separability_report,
    trace_matrix,
)
