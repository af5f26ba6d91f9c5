"""Weighted and S-arithmetic Dirichlet approximation: exact solvers, certificates, experiments."""

from .dirichlet import (
    DirichletSolution,
    ProfilePoint,
    SingularityVerdict,
    epsilon_star,
    singularity_scan,
    solve_homogeneous,
    verify_homogeneous,
)
from .errors import (
    DiophError,
    NoWitness,
    PrecisionError,
    ResourceError,
    SolverError,
    StrongApproxError,
    ValidationError,
)
from .exact import (
    INF,
    AlgebraicReal,
    Place,
    Radical,
    RealInterval,
    SMatrix,
    SNumber,
    SVector,
    golden_ratio,
    parse_snumber,
    parse_value,
    refine_constant,
)
from .experiments import (
    CIExperiment,
    LiminfRecord,
    TargetQuery,
    ci_simulation,
    emit,
    liminf_statistic,
    sample_gamma,
    target_membership,
)
from .lattice import IntegerLattice, WeightedBox, enumerate_box, successive_minima
from .twisted import (
    TwistedCertificate,
    certificate_sequence,
    construct,
    construct_real,
    find_witness_heights,
    strong_approx,
    verify_certificate,
)
from .weights import PlaceSet, Weights, WeightsReal, eta_norm, tau_norm, validate_weights

__version__ = "0.1.0"
