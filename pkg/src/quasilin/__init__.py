"""quasilin: symbolic-numeric verification of quasi-linear algebras.

The package checks, exactly where possible and numerically elsewhere,
that commutator and Poisson-bracket actions which are linear in a
distinguished set of generators (with coefficients depending only on a
Hamiltonian) really close, flow, and commute the way their defining
relations claim.
"""

from .algfile import (
    AlgebraBundle,
    AlgebraFileError,
    BUILTIN_NAMES,
    builtin_bundle,
    bundles_equal,
    export_builtin,
    load_algebra_dict,
    load_algebra_file,
    parse_rep_spec,
    resolve_algebra,
    save_algebra_file,
)
from .flow import (
    AdAction,
    AWKPresentation,
    DGSystem,
    DGViolation,
    TridiagonalConstants,
    UVWTriple,
    aw_closed_flow,
    aw_k_adaction,
    aw_z_adaction,
    comm,
    dg_adaction,
    dg_closed_flow,
    dg_relation_residuals,
    heisenberg_oracle,
    matrix_exp,
    numeric_flow,
    onsager_transfer_check,
    qosc_adaction,
    qosc_closed_flow,
    uvw_from_ncexpression,
    uvw_recurrence,
    weyl_adaction,
)
from .ncrewrite import (
    NcExpression,
    RewriteBudgetError,
    RewriteSystem,
    ad_power_nf,
    commutator_nf,
    normal_form,
    parse_nc,
)
from .poisson import (
    Canonical30Form,
    NotQuasiLinear,
    PoissonStructure,
    QuasiLinearDecomposition,
    bracket_fn,
    canonical_20_form,
    classical_flow_series,
    classify_canonical_30,
    curl_test_3,
    decomposition_adaction,
    evaluate_flow_series,
    jacobi_defect,
    ode_oracle,
    quasi_linear_decompose,
)
from .poly import (
    NEG_INF,
    ExprError,
    Poly1,
    PolyN,
    RationalComplex,
    as_scalar,
    degree_profile,
    eval_matrix,
    parse_poly,
    parse_scalar,
    partial,
)
from .report import Check, Report, Table
from .reps import (
    ClosureFit,
    DegenerateFitWarning,
    GridSpec,
    OperatorRep,
    aw_grid_check,
    closure_eval,
    detect_closure,
    detect_dual_closure,
    difference_operator_rep,
    fit_tridiagonal_constants,
    grid_verdict,
    relation_residual,
    rep_krawtchouk,
    rep_pauli_dg,
    rep_q_oscillator,
)
from .suites import SUITE_NAMES, run_suite

__version__ = "0.1.0"
