"""compfact: compressed low-rank factorization with sparse-factor recovery.

Factorize randomly projected matrices or tensors, then recover the original
sparse factors column-by-column with l1 sparse recovery; built-in oracles
measure the expansion and uniqueness properties that make the approach
work on a concrete instance.
"""

from .exceptions import BudgetExceededError, DegenerateInputError, DimensionError
from .matrix_factorization import (
    FactorPair,
    ProjectedGradientNMF,
    SparsePCA,
    init_noise_variance,
    nmf,
    reconstruction_gradients,
    sparse_pca,
)
from .metrics import MatchResult, align_columns, match_factors, nnz_eps, rel_err
from .pipelines import (
    FactorizeRecover,
    PipelineInfo,
    RecoverFactorize,
    TensorFactorizeRecover,
    factorize_recover_matrix,
    factorize_recover_tensor,
    recover_factorize_matrix,
)
from .projection import (
    ExpanderReport,
    ProjectionMatrix,
    certify_expander,
    default_nnz_per_column,
    expander_failure_bound,
    gen_projection,
    neighborhood_size,
    project_matrix,
    project_tensor_mode1,
)
from .recovery import (
    GREEDY,
    L1_MIN,
    RecoveryOptions,
    RecoveryReport,
    greedy_recover,
    l1_recover,
    recover,
    recover_columns,
)
from .synthetic import (
    SymmetricTensorInstance,
    SynthInstance,
    SynthTensorInstance,
    gen_matrix_instance,
    gen_symmetric_incoherent_tensor,
    gen_tensor_instance,
)
from .tensor_factorization import (
    CPDecomposition,
    TensorFactors,
    check_full_column_rank,
    cp_als,
    cp_reconstruct,
    fold_mode1,
    khatri_rao,
    nncp_als,
    tensor_power_method,
    unfold_mode1,
)
from .uniqueness import (
    ExpansionBoundReport,
    UniquenessReport,
    benchmark_projection_dim,
    colspace_equality_check,
    expansion_bound_check,
    sparsest_column_check,
)

__version__ = "0.1.0"
