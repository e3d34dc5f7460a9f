"""Independent reference implementations used by tests and acceptance runs.

Nothing here is on the production path: the solver and projection modules
never call into this module.  Each function provides a second, structurally
different route to a quantity the production code computes, so the two can
be compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .risk import RiskModel


class OracleMethod(Enum):
    SORT_THRESHOLD = "sort-threshold"
    ACTIVE_SET = "active-set"
    GRID_REFINEMENT = "grid-refinement"
    FINITE_DIFFERENCE = "finite-difference"
    LONG_PROJECTED_GRADIENT = "long-projected-gradient"


@dataclass
class OracleReport:
    """Record of a reference computation used in a comparison."""

    reference_value: float | NDArray
    method: OracleMethod
    tolerance_used: float


def l1_ball_projection(v, radius: float) -> NDArray:
    """Exact Euclidean projection onto {w : ||w||_1 <= radius}.

    Sort-and-threshold construction: soft-threshold |v| at the unique tau
    for which the thresholded magnitudes sum to the radius.  Returns v
    unchanged when already feasible; radius 0 maps everything to 0.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    v = np.asarray(v, dtype=float)
    if radius == 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    cumsum = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    candidates = (cumsum - radius) / k
    rho = np.nonzero(u > candidates)[0][-1]
    tau = candidates[rho]
    return np.sign(v) * np.maximum(a - tau, 0.0)


def halfspace_projection(halfspaces: Sequence[tuple], x) -> NDArray:
    """Projection of x onto an intersection of at most two half-spaces.

    Each half-space is a pair (a, b) meaning {p : <a, p> <= b}.  Solved by
    enumerating the active sets: unconstrained, each face alone, and the
    intersection of both hyperplanes (2x2 Gram system).  Raises ValueError
    when the feasible set is detectably empty.
    """
    x = np.asarray(x, dtype=float)
    if len(halfspaces) > 2:
        raise ValueError("at most two half-spaces supported")
    normals = [np.asarray(a, dtype=float) for a, _ in halfspaces]
    offsets = [float(b) for _, b in halfspaces]

    def feasible(p, slack=1e-9):
        scale = 1.0 + np.linalg.norm(p)
        return all(a @ p <= b + slack * scale
                   for a, b in zip(normals, offsets))

    candidates = []
    if feasible(x, slack=0.0):
        candidates.append(x.copy())
    for a, b in zip(normals, offsets):
        na = a @ a
        if na == 0.0:
            continue
        p = x - max(a @ x - b, 0.0) / na * a
        if feasible(p):
            candidates.append(p)
    if len(normals) == 2:
        a1, a2 = normals
        b1, b2 = offsets
        gram = np.array([[a1 @ a1, a1 @ a2], [a1 @ a2, a2 @ a2]])
        rhs = np.array([a1 @ x - b1, a2 @ x - b2])
        det = np.linalg.det(gram)
        if abs(det) > 1e-12 * max(1.0, gram[0, 0] * gram[1, 1]):
            lam = np.linalg.solve(gram, rhs)
            p = x - lam[0] * a1 - lam[1] * a2
            if feasible(p):
                candidates.append(p)
    if not candidates:
        raise ValueError("empty intersection of half-spaces")
    dists = [np.linalg.norm(x - p) for p in candidates]
    return candidates[int(np.argmin(dists))]


def halfspace_pair_from_points(x, y) -> tuple:
    """(a, b) form of {p : <p - y, x - y> <= 0}, the half-space H(x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = x - y
    return a, float(a @ y)


def grid_projection(value_batch: Callable[[NDArray], NDArray], eta: float,
                    p0, box_radius: float, points_per_axis: int = 801,
                    target_cell: float = 2e-7) -> NDArray:
    """Brute-force projection onto {w : value(w) <= eta} by grid refinement.

    `value_batch` evaluates the constraint on an (N, d) stack of points.
    Starts from a box of half-width `box_radius` centered midway between p0
    and the origin (the level set contains 0), keeps the feasible point
    nearest to p0 and zooms until the cell size drops below `target_cell`.
    Intended for d <= 3; cost grows as points_per_axis**d per round.
    """
    p0 = np.asarray(p0, dtype=float)
    d = p0.shape[0]
    if d > 3:
        raise ValueError("grid projection oracle supports d <= 3 only")
    center = 0.5 * p0
    half = float(box_radius)
    best = None
    while True:
        axes = [np.linspace(center[k] - half, center[k] + half,
                            points_per_axis) for k in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = value_batch(pts)
        mask = vals <= eta
        if not np.any(mask):
            raise ValueError("no feasible grid point; enlarge the box")
        feas = pts[mask]
        dists = np.linalg.norm(feas - p0, axis=1)
        best = feas[int(np.argmin(dists))]
        cell = 2.0 * half / (points_per_axis - 1)
        if cell <= target_cell:
            return best
        center = best
        half = 4.0 * cell


def finite_difference_gradient(f: Callable[[NDArray], float], w,
                               h: float = 1e-5) -> NDArray:
    """Central-difference gradient of a scalar function, coordinate-wise."""
    if h <= 0:
        raise ValueError("h must be positive")
    w = np.asarray(w, dtype=float)
    g = np.empty_like(w)
    for k in range(w.shape[0]):
        e = np.zeros_like(w)
        e[k] = h
        g[k] = (f(w + e) - f(w - e)) / (2.0 * h)
    return g


def reference_solve(model: RiskModel, eta: float, iters: int = 100_000,
                    w0=None) -> NDArray:
    """High-precision L1-constrained baseline: exact-projection gradient descent.

    Runs `iters` projected-gradient steps with step 1/beta and the exact
    sort-based ball projection.  Slow by design; used as the source of
    reference optima for acceptance comparisons.
    """
    beta = model.lipschitz_bound()
    gamma = 1.0 / beta
    w = np.zeros(model.d) if w0 is None else np.asarray(w0, dtype=float).copy()
    for _ in range(iters):
        w = l1_ball_projection(w - gamma * model.gradient(w), eta)
    return w
