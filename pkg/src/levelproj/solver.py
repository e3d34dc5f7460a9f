"""Outer projection-gradient loop for constrained risk minimization.

Each outer iteration takes a gradient step on the risk and then projects
back onto the constraint level set with the outer-approximation routine
from the projection module.  The step size defaults to 1/beta, where beta
bounds the Lipschitz constant of the risk gradient; any constant inside
]0, 2/beta[ keeps the iterates convergent under summable projection
errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .constraints import ConstraintSpec
from .errors import NumericalError
from .projection import (ProjectionOptions, project_level_set,
                         project_level_set_multi)
from .risk import RiskModel

_STEP_MARGIN = 1e-3


@dataclass
class ConstantOverBeta:
    """Constant step gamma = scale / beta with scale in ]0, 2[."""

    scale: float = 1.0

    def __post_init__(self):
        if not _STEP_MARGIN <= self.scale <= 2.0 - _STEP_MARGIN:
            raise ValueError(
                f"step scale must lie in [{_STEP_MARGIN}, {2 - _STEP_MARGIN}]")

    def resolve(self, beta: float) -> float:
        return self.scale / beta


@dataclass
class FixedStep:
    """Explicit constant step size; the caller owns the 2/beta safety check."""

    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("step size must be positive")

    def resolve(self, beta: float) -> float:
        return self.gamma


class StopReason(Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max-iters"
    TARGET_SPARSITY = "target-sparsity"


@dataclass
class SolverConfig:
    """Step-size, iteration and stopping policy for `solve`.

    strict_projection_schedule tightens the inner projection tolerance as
    schedule_scale / (n + 1)^1.1 at outer iteration n (with a raised inner
    budget), which makes the accumulated projection errors summable as the
    convergence theory assumes.  The default budget-based policy is cheaper
    and accurate enough in practice.
    """

    step_policy: ConstantOverBeta | FixedStep = field(
        default_factory=ConstantOverBeta)
    projection: ProjectionOptions = field(default_factory=ProjectionOptions)
    max_outer_iters: int = 10_000
    rel_change_tolerance: float = 1e-8
    target_l0: int | None = None
    zero_threshold: float = 1e-10
    seed_w0: NDArray | None = None
    strict_projection_schedule: bool = False
    schedule_scale: float = 1e-3
    polish_feasibility: bool = True

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.zero_threshold < 0:
            raise ValueError("zero_threshold must be >= 0")
        if self.target_l0 is not None and self.target_l0 < 0:
            raise ValueError("target_l0 must be >= 0")


@dataclass
class IterationTrace:
    """Per-iteration records; row n describes the iterate w_n."""

    risk: NDArray
    constraint: NDArray
    nonzeros: NDArray
    inner_iterations: NDArray

    def __len__(self) -> int:
        return len(self.risk)


@dataclass
class SolverResult:
    w_final: NDArray
    stop_reason: StopReason
    trace: IterationTrace
    eta: float
    beta: float
    gamma: float


def _count_nonzeros(w: NDArray, threshold: float) -> int:
    return int(np.count_nonzero(np.abs(w) > threshold))


def _project(constraint, weights, p0, opts):
    if isinstance(constraint, ConstraintSpec):
        return project_level_set(constraint, p0, opts)
    return project_level_set_multi(constraint, weights, p0, opts)


def _constraint_value(constraint, w) -> float:
    if isinstance(constraint, ConstraintSpec):
        return constraint.value(w)
    return max(spec.value(w) for spec in constraint)


def _constraint_violation(constraint, w) -> float:
    if isinstance(constraint, ConstraintSpec):
        return constraint.value(w) - constraint.eta
    return max(spec.value(w) - spec.eta for spec in constraint)


def _radial_feasibility_polish(constraint, w) -> NDArray:
    """Rescale w onto the level set, exploiting positive homogeneity.

    All supported constraint functionals satisfy value(t*w) = t*value(w)
    for t >= 0, so shrinking w by eta/value(w) removes the residual
    violation the budgeted inner loop leaves behind, while moving the point
    by only violation/value(w) in relative terms.
    """
    specs = [constraint] if isinstance(constraint, ConstraintSpec) else constraint
    scale = 1.0
    for spec in specs:
        value = spec.value(w)
        if value > spec.eta:
            scale = min(scale, spec.eta / value)
    w = scale * w
    # Guard against the rescaled value rounding a hair above eta.
    for _ in range(3):
        if _constraint_violation(constraint, w) <= 0.0:
            break
        w = (1.0 - 4.0 * np.finfo(float).eps) * w
    return w


def solve(model: RiskModel, constraint: ConstraintSpec | Sequence[ConstraintSpec],
          config: SolverConfig | None = None,
          weights: Sequence[float] | None = None) -> SolverResult:
    """Minimize the empirical risk over the constraint level set.

    `constraint` is a single spec or a sequence of specs; in the latter
    case `weights` (positive, summing to 1, default uniform) selects the
    averaging weights of the multi-constraint projection.  Stops on
    relative iterate change, the outer budget, or a target number of
    nonzero coefficients.  When polish_feasibility is set, the returned
    point gets one final high-budget projection so its residual constraint
    violation is at machine-noise level rather than inner-budget level.
    """
    cfg = config or SolverConfig()
    multi = not isinstance(constraint, ConstraintSpec)
    if multi:
        constraint = list(constraint)
        if weights is None:
            weights = np.full(len(constraint), 1.0 / len(constraint))
    elif weights is not None:
        raise ValueError("weights only apply to a sequence of constraints")

    beta = model.lipschitz_bound()
    gamma = cfg.step_policy.resolve(beta)
    w = (np.zeros(model.d) if cfg.seed_w0 is None
         else np.asarray(cfg.seed_w0, dtype=float).copy())
    if w.shape != (model.d,):
        raise ValueError("seed_w0 dimension mismatch")
    _constraint_value(constraint, w)  # validates dimensions up front

    risk, g = model.value_and_gradient(w)
    risk_hist = [risk]
    cval_hist = [_constraint_value(constraint, w)]
    nnz_hist = [_count_nonzeros(w, cfg.zero_threshold)]
    inner_hist = [0]

    stop_reason = StopReason.MAX_ITERS
    for n in range(cfg.max_outer_iters):
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite risk gradient at iteration {n}")
        opts = cfg.projection
        if cfg.strict_projection_schedule:
            opts = dataclasses.replace(
                cfg.projection,
                feasibility_tolerance=cfg.schedule_scale / (n + 1.0) ** 1.1,
                max_inner_iters=max(cfg.projection.max_inner_iters, 500))
        w_next, status = _project(constraint, weights, w - gamma * g, opts)
        risk, g = model.value_and_gradient(w_next)
        if not np.isfinite(risk):
            raise NumericalError(f"non-finite risk value at iteration {n}")
        risk_hist.append(risk)
        cval_hist.append(_constraint_value(constraint, w_next))
        nnz_hist.append(_count_nonzeros(w_next, cfg.zero_threshold))
        inner_hist.append(status.iterations_used)
        change = float(np.linalg.norm(w_next - w))
        w = w_next
        if cfg.target_l0 is not None and nnz_hist[-1] <= cfg.target_l0:
            stop_reason = StopReason.TARGET_SPARSITY
            break
        if cfg.rel_change_tolerance > 0 and \
                change <= cfg.rel_change_tolerance * max(1.0, float(np.linalg.norm(w))):
            stop_reason = StopReason.CONVERGED
            break

    if cfg.polish_feasibility and _constraint_violation(constraint, w) > 0.0:
        w = _radial_feasibility_polish(constraint, w)
        risk_hist[-1] = model.value(w)
        cval_hist[-1] = _constraint_value(constraint, w)
        nnz_hist[-1] = _count_nonzeros(w, cfg.zero_threshold)

    trace = IterationTrace(
        risk=np.asarray(risk_hist),
        constraint=np.asarray(cval_hist),
        nonzeros=np.asarray(nnz_hist, dtype=int),
        inner_iterations=np.asarray(inner_hist, dtype=int),
    )
    eta = constraint.eta if isinstance(constraint, ConstraintSpec) else float("nan")
    return SolverResult(w_final=w, stop_reason=stop_reason, trace=trace,
                        eta=eta, beta=beta, gamma=gamma)


def solve_path(model: RiskModel, constraint: ConstraintSpec,
               eta_grid: Sequence[float],
               config: SolverConfig | None = None,
               warm_start: bool = True) -> list[SolverResult]:
    """One solve per eta in a monotone grid, warm-starting along the path."""
    etas = [float(e) for e in eta_grid]
    if len(etas) == 0:
        raise ValueError("eta grid must be nonempty")
    ascending = all(a <= b for a, b in zip(etas, etas[1:]))
    descending = all(a >= b for a, b in zip(etas, etas[1:]))
    if not (ascending or descending):
        raise ValueError("eta grid must be sorted ascending or descending")
    cfg = config or SolverConfig()
    results = []
    for eta in etas:
        spec = dataclasses.replace(constraint, eta=eta)
        results.append(solve(model, spec, cfg))
        if warm_start:
            cfg = dataclasses.replace(cfg, seed_w0=results[-1].w_final)
    return results
