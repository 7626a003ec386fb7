"""Genuine tripartite entanglement of (2 x 2 x n) pure states.

Exact values of the monotone tau = sqrt(C_a^2 - C^2) by three independent
routes, measurable lower bounds, a full simulation of the two-copy local
coincidence measurement protocol with finite-shot statistics, and a noise
robustness analysis for quasi-pure preparations and imperfect copies.
"""

from .errors import (
    DegenerateDeviation,
    DimensionError,
    DomainError,
    InternalInconsistency,
    InvalidBasis,
    InvalidState,
    NotSymmetric,
    NumericError,
    TritangleError,
)
from .linalg import TakagiFactors, eig_general, haar_unitary, herm_sqrt, singular_values, takagi
from .noise import (
    DeviationRow,
    NoiseSpec,
    ScanResult,
    deviation_scan,
    imperfect_copy,
    m_abs_noisy,
    quasi_pure,
)
from .protocol import (
    BasisSearchTrace,
    ProtocolReport,
    ShotEstimate,
    TraceIdentity,
    TwoCopyObservable,
    antisym_projector,
    expectation,
    off_diagonal_signal,
    optimal_basis,
    sample_shots,
    search_basis,
    tau_from_protocol,
    verify_trace_identity,
)
from .states import (
    BipartiteSlice,
    CBasis,
    DensityMatrix,
    PureState,
    amp_index,
    apply_c_basis,
    canonical_state,
    identity_basis,
    load_state,
    make_state,
    random_c_basis,
    random_pure,
    reduced_ab,
    save_state,
    slice_phi,
    state_from_json,
    state_to_json,
    two_copy,
)
from .tangle import (
    LambdaSpectrum,
    MMatrix,
    TangleReport,
    bound_qubit_det,
    bound_sigma_u,
    bound_spectral,
    build_m,
    concurrence,
    lambda_spectrum,
    localizable_concurrence,
    r_matrix,
    sigma_u,
    tau,
    tau_branch,
)

__version__ = "0.1.0"
