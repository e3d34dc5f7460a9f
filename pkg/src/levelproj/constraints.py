"""Sparsity and grouping constraint functionals over a feature graph.

Four convex functionals are supported, each used through its lower level
set {w : value(w) <= eta}:

* L1                   sum_i |w_i|                      (sparsity)
* PAIRWISE_MAX         sum_edges max(|w_i|, |w_j|)      (grouping)
* PAIRWISE_DIFF        sum_edges |w_i - w_j|            (fusion)
* SIGNED_PAIRWISE_DIFF sum_edges |w_i - a_ij w_j|       (signed fusion)

All four are positively homogeneous, nonnegative and vanish at 0, so the
level set always contains the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import NDArray


class ConstraintKind(Enum):
    L1 = "l1"
    PAIRWISE_MAX = "pairwise-max"
    PAIRWISE_DIFF = "pairwise-diff"
    SIGNED_PAIRWISE_DIFF = "signed-pairwise-diff"


_GRAPH_KINDS = (ConstraintKind.PAIRWISE_MAX, ConstraintKind.PAIRWISE_DIFF,
                ConstraintKind.SIGNED_PAIRWISE_DIFF)


@dataclass
class FeatureGraph:
    """Edge list over feature indices, with an optional +/-1 sign per edge.

    Edges are (i, j) or (i, j, sign) tuples with 0-based indices; the sign
    defaults to +1.  Stored as index arrays for vectorized evaluation.
    """

    edges: Sequence[tuple]
    d: int
    i_idx: NDArray = field(init=False, repr=False)
    j_idx: NDArray = field(init=False, repr=False)
    signs: NDArray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("feature dimension must be positive")
        ii, jj, ss = [], [], []
        seen = set()
        for edge in self.edges:
            if len(edge) == 2:
                i, j = edge
                sign = 1
            elif len(edge) == 3:
                i, j, sign = edge
            else:
                raise ValueError(f"edge {edge!r} is not (i, j) or (i, j, sign)")
            i, j = int(i), int(j)
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise ValueError(f"edge ({i}, {j}) out of range for d={self.d}")
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) not allowed")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            if sign not in (1, -1):
                raise ValueError(f"edge sign must be +1 or -1, got {sign!r}")
            ii.append(i)
            jj.append(j)
            ss.append(float(sign))
        self.i_idx = np.asarray(ii, dtype=np.intp)
        self.j_idx = np.asarray(jj, dtype=np.intp)
        self.signs = np.asarray(ss, dtype=float)

    @property
    def n_edges(self) -> int:
        return len(self.i_idx)


@dataclass
class ConstraintSpec:
    """A constraint functional together with its level-set bound eta.

    A graph is required for the pairwise kinds.  For L1, `support`
    optionally restricts the sum to a subset of coordinates (so e.g. a
    single-coordinate bound |w_k| <= eta is expressible).
    """

    kind: ConstraintKind
    eta: float
    graph: FeatureGraph | None = None
    support: Sequence[int] | None = None

    def __post_init__(self):
        self.eta = float(self.eta)
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.kind in _GRAPH_KINDS and self.graph is None:
            raise ValueError(f"{self.kind.value} constraint requires a graph")
        if self.support is not None:
            if self.kind is not ConstraintKind.L1:
                raise ValueError("support restriction applies to L1 only")
            self.support = np.asarray(self.support, dtype=np.intp)

    def _check_w(self, w) -> NDArray:
        w = np.asarray(w, dtype=float)
        if w.ndim != 1:
            raise ValueError("w must be a 1-d vector")
        if self.graph is not None and w.shape[0] != self.graph.d:
            raise ValueError(
                f"w has dimension {w.shape[0]}, graph expects {self.graph.d}")
        if self.support is not None and len(self.support) and \
                self.support.max() >= w.shape[0]:
            raise ValueError("support index out of range")
        return w

    def value(self, w) -> float:
        """Evaluate the constraint functional at w."""
        w = self._check_w(w)
        if self.kind is ConstraintKind.L1:
            x = w if self.support is None else w[self.support]
            return float(np.sum(np.abs(x)))
        g = self.graph
        wi = w[g.i_idx]
        wj = w[g.j_idx]
        if self.kind is ConstraintKind.PAIRWISE_MAX:
            return float(np.sum(np.maximum(np.abs(wi), np.abs(wj))))
        if self.kind is ConstraintKind.PAIRWISE_DIFF:
            return float(np.sum(np.abs(wi - wj)))
        return float(np.sum(np.abs(wi - g.signs * wj)))

    def subgradient(self, w) -> NDArray:
        """One element of the subdifferential of the functional at w.

        Contributions accumulate per edge into both endpoints.  For the
        pairwise max, a tie at nonzero magnitude contributes the half-half
        convex combination of the two one-sided choices, which keeps the
        output a genuine subgradient of the edge term.
        """
        return self.value_and_subgradient(w)[1]

    def value_and_subgradient(self, w) -> tuple[float, NDArray]:
        """Value and subgradient in one pass (the projection hot path)."""
        w = self._check_w(w)
        if self.kind is ConstraintKind.L1:
            if self.support is None:
                return float(np.sum(np.abs(w))), np.sign(w)
            s = np.zeros_like(w)
            s[self.support] = np.sign(w[self.support])
            return float(np.sum(np.abs(w[self.support]))), s
        g = self.graph
        d = w.shape[0]
        wi = w[g.i_idx]
        wj = w[g.j_idx]
        if self.kind is ConstraintKind.PAIRWISE_MAX:
            ai = np.abs(wi)
            aj = np.abs(wj)
            value = float(np.sum(np.maximum(ai, aj)))
            gi = np.where(ai > aj, np.sign(wi), 0.0)
            gj = np.where(aj > ai, np.sign(wj), 0.0)
            tie = ai == aj
            gi[tie] = 0.5 * np.sign(wi[tie])
            gj[tie] = 0.5 * np.sign(wj[tie])
            s = (np.bincount(g.i_idx, weights=gi, minlength=d)
                 + np.bincount(g.j_idx, weights=gj, minlength=d))
            return value, s
        if self.kind is ConstraintKind.PAIRWISE_DIFF:
            diff = wi - wj
        else:
            diff = wi - g.signs * wj
        value = float(np.sum(np.abs(diff)))
        t = np.sign(diff)
        s = np.bincount(g.i_idx, weights=t, minlength=d)
        if self.kind is ConstraintKind.PAIRWISE_DIFF:
            s -= np.bincount(g.j_idx, weights=t, minlength=d)
        else:
            s -= np.bincount(g.j_idx, weights=g.signs * t, minlength=d)
        return value, s
