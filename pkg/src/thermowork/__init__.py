"""Single-copy work distillation on explicit bipartite quantum states."""

from . import errors
from .infotheory import (
    RelEntropyResult,
    mutual_information,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)
from .measurement import (
    ConditionalEnsemble,
    OptConfig,
    OptResult,
    Povm,
    brute_force_qubit_J,
    classical_correlations_at,
    condition_on_outcome,
    optimize_classical_correlations,
)
from .qmat import (
    EigDecomposition,
    eigh,
    kron,
    matrix_exp_hermitian,
    matrix_log_psd,
    partial_trace,
    trace_distance,
)
from .states import (
    BipartiteState,
    DensityMatrix,
    GibbsContext,
    ProductCheck,
    Purification,
    a_complement,
    a_complement_extension,
    apply_kraus_to_a,
    bipartite_tensor,
    gibbs_state,
    is_product_state,
    max_entangled,
    purify,
    random_bipartite,
    random_density,
)
from .workmeasures import (
    DecompositionResult,
    IsotropicAssistance,
    IsotropicSpec,
    WorkReport,
    assistance_at,
    collaboration_upper_at,
    derive_seed,
    discord_gap,
    distillable_work,
    entanglement_of_formation_small,
    hierarchy_report,
    isotropic_classical_correlations,
    isotropic_state,
    isotropic_work_of_assistance,
    pure_state_assistance,
    pure_state_collaboration,
    relative_entropy_of_collaboration,
    work_of_assistance,
)

__version__ = "0.1.0"
