"""Constrained sparse classification and regression.

A projection-gradient solver for minimizing a smooth convex empirical risk
subject to a convex sparsity or grouping constraint value(w) <= eta.  The
projection onto the constraint level set is computed generically by an
outer-approximation scheme built from two affine half-spaces per
iteration, so no closed-form projection is ever required.
"""

from .constraints import ConstraintKind, ConstraintSpec, FeatureGraph
from .data import (Dataset, DatasetKind, NetworkExample, NetworkParams,
                   block_clique_graph, generate_network, generate_response,
                   load_csv, load_graph, mean_squared_error, roc_auc,
                   signed_graph_for_example, split_folds, star_graph,
                   true_regressor)
from .errors import (DataFormatError, InfeasibleConstraintError,
                     LevelprojError, NumericalError)
from .projection import (ProjectionOptions, ProjectionOutcome,
                         ProjectionStatus, haugazeau_projection,
                         project_level_set, project_level_set_multi,
                         subgradient_projection)
from .risk import (LossKind, RiskModel, Task, curvature_at_zero,
                   loss_derivative, loss_value, posterior)
from .solver import (ConstantOverBeta, FixedStep, IterationTrace,
                     SolverConfig, SolverResult, StopReason, solve,
                     solve_path)

__version__ = "0.1.0"

__all__ = [
    "ConstraintKind", "ConstraintSpec", "FeatureGraph",
    "Dataset", "DatasetKind", "NetworkExample", "NetworkParams",
    "block_clique_graph", "generate_network", "generate_response",
    "load_csv", "load_graph", "mean_squared_error", "roc_auc",
    "signed_graph_for_example", "split_folds", "star_graph",
    "true_regressor",
    "DataFormatError", "InfeasibleConstraintError", "LevelprojError",
    "NumericalError",
    "ProjectionOptions", "ProjectionOutcome", "ProjectionStatus",
    "haugazeau_projection", "project_level_set", "project_level_set_multi",
    "subgradient_projection",
    "LossKind", "RiskModel", "Task", "curvature_at_zero", "loss_derivative",
    "loss_value", "posterior",
    "ConstantOverBeta", "FixedStep", "IterationTrace", "SolverConfig",
    "SolverResult", "StopReason", "solve", "solve_path",
    "__version__",
]
