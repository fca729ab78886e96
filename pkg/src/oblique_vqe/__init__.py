"""Eigensolvers for the lowest p eigenpairs of a Hermitian operator.

Three cost functions embed the orthogonality of the target eigenvectors
directly in the objective, so minimization over unit-norm states (the
oblique manifold) needs no explicit orthogonalization: an implicit
(2I - X*X)-weighted trace, a Frobenius-norm penalty on the Gram defect, and
an l1 penalty on the off-diagonal overlaps. The package provides the dense
matrix backend, a noiseless statevector backend emulating the variational
quantum workflow, constructors and verifiers for the complete
stationary-point landscape of the smooth models, and the optimizers that
drive both backends.
"""

from .errors import (
    AlreadyMinimal,
    DegenerateColumn,
    DimensionMismatch,
    IllConditionedMetric,
    ImaginaryResidue,
    InconsistentSpec,
    InvalidInput,
    InvalidWeights,
    LineSearchFailure,
    MajorizationError,
    MuTooSmall,
    NonFiniteObjective,
    ObliqueVQEError,
    SpanError,
    TooLarge,
)
from .linalg import (
    EigenDecomposition,
    HermitianOperator,
    eigh,
    generalized_eigh,
    is_strictly_majorized_by_ones,
    load_matrix,
    save_matrix,
    schur_horn_unit_diag,
    svd,
)
from .manifold import (
    is_oblique,
    orthogonality_error,
    random_oblique,
    retract,
    tangent_project,
)
from .models import (
    Model,
    ModelConfig,
    model_gradient,
    model_value,
    ql1m_subgrad,
    ql1m_value,
    qomm_grad,
    qomm_value,
    qtpm_grad,
    qtpm_penalty_value,
    qtpm_value,
    reference_minimum,
    shift_to_negative_definite,
    slrp_value,
    weighted_ql1m_value,
)
from .landscape import (
    Block,
    BlockSpec,
    MixedColumn,
    StationaryCertificate,
    build_qomm_minimizer,
    build_qomm_stationary,
    build_qtpm_minimizer,
    build_qtpm_stationary,
    classify_point,
    descent_direction_ql1m,
    oblique_perturb,
    saddle_escape,
    verify_qomm_stationary,
    verify_qtpm_stationary,
)
from .quantum import (
    AnsatzCircuit,
    Gate,
    PauliHamiltonian,
    apply_circuit,
    basis_state,
    expectation,
    hamiltonian_matrix,
    overlap,
    rayleigh_ritz,
    resource_count,
    transition,
    vqe_objective,
)
from .optimize import (
    Method,
    OptimizationTrace,
    OptimizerOptions,
    TerminalStatus,
    minimize_oblique,
    minimize_scalar_field,
    solve_eigenpairs_matrix,
    solve_eigenpairs_statevector,
)

__version__ = "0.1.0"
