"""Tracking-regret learners on the clipped simplex and clipped spectraplex."""

from cliptrack.comparator import (
    ComparatorResult,
    MatrixComparatorResult,
    best_switching_matrix,
    best_switching_sequence,
    comparator_stats,
    path_length,
)
from cliptrack.environments import EnvironmentSpec, generate
from cliptrack.errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    InfeasibleError,
    InvariantViolation,
)
from cliptrack.kernels import BACKEND
from cliptrack.learners import (
    MWU,
    OCS,
    PCS,
    ClippedOMD,
    FixedShare,
    OCSPlus,
    ProjectionUpdate,
    clipped_omd_learner,
    fixed_share_step,
    mwu_step,
    ocs_learner,
    ocs_plus_learner,
    pcs_learner,
    projection_update_step,
)
from cliptrack.matrix import (
    PCSP,
    SpectraplexPoint,
    matrix_exp,
    matrix_log,
    pcsp_learner,
    sym_eig,
    vn_project_clipped,
    von_neumann_divergence,
    von_neumann_entropy,
)
from cliptrack.projections import ClippedProjectionResult, clipped_omd_step, kl_project_clipped
from cliptrack.runner import Trajectory, run_learner
from cliptrack.simplex import HorizonConfig, kl_divergence, negative_entropy, weighted_loss
from cliptrack.verification import BoundReport, check_trajectory

__version__ = "0.1.0"
