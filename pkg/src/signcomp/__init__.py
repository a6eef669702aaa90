"""Sign and binary component decompositions of matrices.

``B = S W^t`` with a +-1 matrix ``S`` and ``C = Z W^t`` with a 0/1 matrix ``Z``,
computed exactly (up to column permutation and sign) when the discrete factor
is Schur independent, plus denoising front-ends and diagnostics.
"""

from .decompose import (
    BinaryDecomposition,
    SignDecomposition,
    SignedPermutation,
    SymScdResult,
    asym_scd,
    bcd,
    match_permutation,
    match_signed_permutation,
    planted_binary_basis,
    planted_sign_basis,
    sym_scd,
)
from .errors import (
    CardinalityError,
    EmptyBasisError,
    ExtractionError,
    HypothesisViolation,
    InfeasibleError,
    MatrixParseError,
    PreconditionError,
    SamplingError,
    SignCompError,
    SignResolutionError,
    SolverError,
    StructureError,
    UnboundedPencilError,
)
from .io import read_matrix, write_matrix
from .linalg import DEFAULT_TOL, Tolerances
from .robust import (
    denoise_factorize_outliers,
    denoise_factorize_sparse,
    pcp_denoise,
    reaper,
    select_inliers,
)
from .schur import (
    binary_to_sign,
    correspondence_holds,
    is_schur_binary,
    is_schur_sign,
    max_sign_cardinality,
    random_schur_binary,
    random_schur_sign,
    sign_to_binary,
)

__version__ = "0.1.0"
