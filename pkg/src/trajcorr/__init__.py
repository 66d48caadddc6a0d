"""Trajectory-averaged genuine multipartite correlations of open quantum systems."""

from .correlations import (
    CorrelationSample,
    average_genuine_correlations,
    genuine_correlations_dicke,
    genuine_correlations_qubits,
)
from .lindblad import (
    LindbladSpec,
    StepSizeError,
    UnravelingTransform,
    apply_unraveling,
    dissipator,
    effective_hamiltonian,
    integrate_master,
    liouvillian_apply,
    liouvillian_matrix,
    trace_distance,
)
from .models import (
    LMGParams,
    ThreeQubitScenario,
    lmg_hamiltonian,
    lmg_homodyne_model,
    lmg_spec,
    psi1,
    psi2,
    spin_quadrature,
    three_qubit_spec,
)
from .states import (
    Bipartition,
    DensityOperator,
    SchmidtRow,
    StateVector,
    collective_operator,
    dicke_block_entropy,
    dicke_reduced_state,
    dicke_to_register,
    partial_trace,
    qubit_bipartitions,
    schmidt_row,
    tensor_product,
    von_neumann_entropy,
)
from .trajectory import (
    DiffusiveModel,
    EnsembleResult,
    Observable,
    TrajectoryConfig,
    TrajectoryError,
    TrajectoryRecord,
    diffusive_step,
    jump_step,
    reconstruction_noise_scale,
    run_diffusive_trajectory,
    run_ensemble,
    run_jump_trajectory,
    trajectory_rng,
)

__version__ = "0.1.0"
