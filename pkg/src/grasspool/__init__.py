"""Generalized rank pooling: order-preserving low-rank subspaces of feature
sequences, Grassmann conjugate gradient, and subspace kernels for
classification."""

from .baselines import PoolMethod, VectorDescriptor, pca_subspace, pool_average, pool_max, rank_pool_line
from .errors import (
    CallbackFailure,
    DegenerateSequence,
    DimensionMismatch,
    EmptySequence,
    GrassPoolError,
    NonFinite,
    NotPsdWarning,
    ParseError,
    RankDeficient,
    ShapeMismatch,
    SingleClass,
)
from .formats import load_descriptor, load_sequence, save_descriptor, save_sequence
from .grassmann import (
    BetaRule,
    CgOptions,
    OptTrace,
    Termination,
    cg_minimize,
    orthonormalize,
    principal_angles,
    project_tangent,
    projection_distance,
    retract,
    transport,
)
from .grp import (
    GrpParams,
    SubspaceDescriptor,
    ViolationMatrix,
    grp_gradient_fast,
    grp_gradient_naive,
    grp_objective,
    pool_grp,
    pool_grp_incremental,
    reconstruction_identity_check,
    violation_matrix,
)
from .kernels import GramMatrix, KernelKind, KernelSpec, cross_gram, gram, gram_sum, kernel_eval
from .sequence import FeatureSequence
from .svm import SvmModel, svm_predict, svm_train
from .synthetic import Dynamics, SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
