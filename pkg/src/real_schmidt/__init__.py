"""Normal forms of real 3-qubit states under local orthogonal gates."""
from .errors import (
    DegenerateRecovery,
    NonFinite,
    NormalFormFailed,
    NotInS05,
    ReductionFailed,
    SolveFailed,
    StepSizeUnderflow,
    ZeroVector,
)
from .flowfield import (
    EquilibriumClass,
    FlowOutcome,
    FlowTrace,
    InvariantVector,
    angle_rates,
    classify_equilibrium,
    integrate_flow,
    invariants,
    vector_field,
)
from .oracle import (
    COMPLEX_STYLE,
    TARGET,
    SearchConfig,
    equivalence_residual,
    pattern_residual,
    random_state,
)
from .reduce5 import Stage1Angles, reduce_to_s05, stage1_angles
from .schmidt4 import (
    NormalFormResult,
    f_eval,
    normal_form,
    solve_equilibrium_s1,
    solve_equilibrium_s2,
    solve_equilibrium_s3,
)
from .states import (
    GHZ,
    GHZ_PARTNER,
    XI,
    LocalOrthogonalGate,
    ToleranceConfig,
    apply_local_gate,
    compose_gates,
    embed_s05,
    normalize,
    overlap,
    project_s05,
    reduced_purity,
)

__version__ = "0.1.0"
