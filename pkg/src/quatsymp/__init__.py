"""quatsymp: linear symplectic maps from a quaternionic structure on the
doubled phase space, and the associated implicit symplectic integrator."""

from .errors import (
    ConditioningError,
    ConvergenceError,
    DomainError,
    ExceptionalMatrixError,
    QuatsympError,
    StructureError,
)
from .integrator import (
    ConvergenceStudy,
    IntegratorConfig,
    Trajectory,
    convergence_study,
    integrate,
    linear_one_step_matrix,
    read_trajectory_csv,
    step,
    symplecticity_defect,
    write_trajectory_csv,
)
from .linalg import (
    CONVENTIONS_VERSION,
    SymplecticMap,
    cayley,
    form_eval,
    inverse_cayley,
    is_hamiltonian,
    is_non_exceptional,
    is_symplectic,
    make_standard_J,
    read_matrix,
    write_matrix,
)
from .product import (
    CheckRecord,
    GraphFrame,
    LiouvilleFieldSpec,
    QuaternionicTriple,
    VerificationReport,
    build_liouville_spec,
    extract_map,
    graph_frame,
    is_liouville_linear,
    make_triple,
    perp_identity_report,
    pointwise_v,
    projection_residual,
    restriction,
    theta_eval,
    verify_k_nonhamiltonian,
    verify_quaternion_relations,
)
from .systems import (
    BeaReport,
    HamiltonianSystem,
    QuadraticSystem,
    bea_report,
    make_harmonic_oscillator,
    make_kepler,
    make_pendulum,
    make_quadratic,
    surrounding_hamiltonian,
)
from .verify import run_verification

__version__ = "0.1.0"
