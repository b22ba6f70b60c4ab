"""Spectrahull membership with pivot and witness certificates.

The package decides whether a target vector lies in the image of the
spectraplex under a family of symmetric matrices, returning either a factored
convex-combination representation or a separating hyperplane backed by an
exact eigenvalue certificate.  Reductions to semidefinite feasibility and the
cut-value relaxation ride on top, as does separation of two such image sets.
"""

from .symcore import (
    DimensionError,
    ShmInstance,
    SpectraplexPoint,
    SymmetricMatrix,
    bind,
    frobenius_dot,
    gershgorin_bound,
    image,
    quad_form,
    radius_bound,
    rank_one_image,
)
from .eigen import (
    EigenConvergenceError,
    EigenDecomposition,
    PowerResult,
    certified_min_eig,
    jacobi_eigen,
    min_eig_power,
)
from .chm import (
    FEASIBLE,
    INCONCLUSIVE,
    WITNESS,
    ChmCertificate,
    ChmIterate,
    DegeneratePivotError,
    Hyperplane,
    PointSet,
    find_pivot,
    solve_chm,
    ta_step,
)
from .shm import (
    Certificate,
    PivotCache,
    PivotMatrixAssembly,
    PivotOutcome,
    VerificationReport,
    assemble_pivot_matrix,
    pivot_oracle,
    prune_representation,
    solve_shm,
    solve_shm_cached,
    verify_certificate,
)
from .reductions import (
    MaxCutInstance,
    MaxCutResult,
    RecessionDirectionError,
    SdpFeasibilityInstance,
    SdpReduction,
    maxcut_feasibility_probe,
    reduce_sdp_to_shm,
    solve_maxcut_relaxation,
)
from .svmsep import (
    INTERSECTING,
    SEPARATED,
    PairCertificate,
    PairIterate,
    solve_separation,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "ChmCertificate",
    "ChmIterate",
    "DegeneratePivotError",
    "DimensionError",
    "EigenConvergenceError",
    "EigenDecomposition",
    "FEASIBLE",
    "Hyperplane",
    "INCONCLUSIVE",
    "INTERSECTING",
    "MaxCutInstance",
    "MaxCutResult",
    "PairCertificate",
    "PairIterate",
    "PivotCache",
    "PivotMatrixAssembly",
    "PivotOutcome",
    "PointSet",
    "PowerResult",
    "RecessionDirectionError",
    "SEPARATED",
    "SdpFeasibilityInstance",
    "SdpReduction",
    "ShmInstance",
    "SpectraplexPoint",
    "SymmetricMatrix",
    "VerificationReport",
    "WITNESS",
    "assemble_pivot_matrix",
    "bind",
    "certified_min_eig",
    "find_pivot",
    "frobenius_dot",
    "gershgorin_bound",
    "image",
    "jacobi_eigen",
    "maxcut_feasibility_probe",
    "min_eig_power",
    "pivot_oracle",
    "prune_representation",
    "quad_form",
    "radius_bound",
    "rank_one_image",
    "reduce_sdp_to_shm",
    "solve_chm",
    "solve_maxcut_relaxation",
    "solve_separation",
    "solve_shm",
    "solve_shm_cached",
    "ta_step",
    "verify_certificate",
]
