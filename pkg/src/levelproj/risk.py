"""Margin losses and the empirical risks built from them.

The classification risk is the sample mean of a convex margin loss
phi(y_i <x_i, w>).  Admissible losses are generated by an increasing link
f: R -> [0,1] with f(0) = 1/2 and f(t) + f(-t) = 1, via
phi(t) = -t + integral of f; consequently phi'(t) = f(t) - 1 and the link
doubles as a posterior class-probability estimate.  Two such losses are
provided (logistic and Matsusita), plus the quadratic regression risk
(1/2m) sum (<x_i, w> - y_i)^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray


class LossKind(Enum):
    LOGISTIC = "logistic"
    MATSUSITA = "matsusita"


class Task(Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


def _sigmoid(t: NDArray) -> NDArray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _maybe_scalar(out: NDArray, scalar: bool):
    return float(out[0]) if scalar else out


def loss_value(kind: LossKind, t) -> float | NDArray:
    """Evaluate the margin loss, overflow-safe for any finite margin.

    Logistic: ln(1 + exp(-t)), computed as max(-t, 0) + ln(1 + exp(-|t|)).
    Matsusita: (sqrt(1 + t^2) - t) / 2, rewritten for t > 0 as
    1 / (2 (sqrt(1 + t^2) + t)) to avoid cancellation.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if kind is LossKind.LOGISTIC:
        out = np.maximum(-t, 0.0) + np.log1p(np.exp(-np.abs(t)))
    else:
        r = np.hypot(1.0, t)
        out = np.empty_like(t)
        pos = t > 0
        out[pos] = 0.5 / (r[pos] + t[pos])
        out[~pos] = 0.5 * (r[~pos] - t[~pos])
    return _maybe_scalar(out, scalar)


def loss_derivative(kind: LossKind, t) -> float | NDArray:
    """Derivative of the margin loss; equals posterior(kind, t) - 1, in [-1, 0]."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if kind is LossKind.LOGISTIC:
        out = -_sigmoid(-t)
    else:
        out = 0.5 * (t / np.hypot(1.0, t) - 1.0)
    return _maybe_scalar(out, scalar)


def posterior(kind: LossKind, s) -> float | NDArray:
    """Link f(s): probability of the +1 class given a classifier score s."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    if kind is LossKind.LOGISTIC:
        out = _sigmoid(s)
    else:
        out = 0.5 * (s / np.hypot(1.0, s) + 1.0)
    return _maybe_scalar(out, scalar)


def curvature_at_zero(kind: LossKind) -> float:
    """Second derivative of the loss at 0, the maximum of its curvature."""
    return 0.25 if kind is LossKind.LOGISTIC else 0.5


def _power_iteration_sq_norm(X: NDArray, tol: float = 1e-10,
                             max_iters: int = 1000) -> float:
    """Largest eigenvalue of X^T X by power iteration with a fixed start.

    The start vector comes from a fixed Philox stream so the estimate is
    deterministic yet generic.  Rayleigh quotients are monotone from below,
    so callers inflate the result to keep an upper bound under truncation.
    """
    d = X.shape[1]
    rng = np.random.Generator(np.random.Philox(key=0x9E3779B97F4A7C15))
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        u = X.T @ (X @ v)
        lam_new = float(v @ u)
        norm_u = np.linalg.norm(u)
        if norm_u == 0.0:
            return 0.0
        v = u / norm_u
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


# Safety inflation covering power-iteration truncation error.
_SPECTRAL_SAFETY = 0.05


@dataclass
class RiskModel:
    """Samples, labels/responses and a loss; evaluates risk and gradient.

    X is the m-by-d sample matrix (one sample per row).  For classification
    y holds labels in {-1, +1} and `loss` selects the margin loss; for
    regression y holds real responses and the quadratic risk is used.
    Instances are immutable by convention and safe to share across threads.
    """

    X: NDArray
    y: NDArray
    task: Task
    loss: LossKind = LossKind.LOGISTIC

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d sample matrix")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError(
                f"y has shape {self.y.shape}, expected ({self.X.shape[0]},)")
        if self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise ValueError("need at least one sample and one feature")
        if self.task is Task.CLASSIFICATION and not np.all(np.abs(self.y) == 1.0):
            raise ValueError("classification labels must be -1 or +1")

    @classmethod
    def classification(cls, X, y, loss: LossKind = LossKind.LOGISTIC) -> "RiskModel":
        return cls(X, y, Task.CLASSIFICATION, loss)

    @classmethod
    def regression(cls, X, y) -> "RiskModel":
        return cls(X, y, Task.REGRESSION)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def _check_w(self, w) -> NDArray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.d,):
            raise ValueError(f"w has shape {w.shape}, expected ({self.d},)")
        return w

    def value(self, w) -> float:
        """Empirical risk at w."""
        w = self._check_w(w)
        scores = self.X @ w
        if self.task is Task.CLASSIFICATION:
            return float(np.mean(loss_value(self.loss, self.y * scores)))
        r = scores - self.y
        return float(0.5 * np.mean(r * r))

    def gradient(self, w) -> NDArray:
        """Gradient of the empirical risk at w."""
        w = self._check_w(w)
        scores = self.X @ w
        if self.task is Task.CLASSIFICATION:
            coeff = self.y * loss_derivative(self.loss, self.y * scores)
        else:
            coeff = scores - self.y
        return (self.X.T @ coeff) / self.m

    def value_and_gradient(self, w) -> tuple[float, NDArray]:
        """Risk and gradient sharing one pass over the scores."""
        w = self._check_w(w)
        scores = self.X @ w
        if self.task is Task.CLASSIFICATION:
            margins = self.y * scores
            value = float(np.mean(loss_value(self.loss, margins)))
            coeff = self.y * loss_derivative(self.loss, margins)
        else:
            coeff = scores - self.y
            value = float(0.5 * np.mean(coeff * coeff))
        return value, (self.X.T @ coeff) / self.m

    def lipschitz_bound(self) -> float:
        """Upper bound on the Lipschitz constant of the risk gradient.

        Classification: phi''(0) * sum ||x_i||^2 / m, which dominates the
        largest Hessian eigenvalue at every point.  Regression: sigma_1^2/m
        with sigma_1 the largest singular value of X, estimated by power
        iteration and inflated by 5% to stay an upper bound.
        """
        if self.task is Task.CLASSIFICATION:
            return curvature_at_zero(self.loss) * float(
                np.sum(self.X * self.X)) / self.m
        lam = _power_iteration_sq_norm(self.X)
        return (1.0 + _SPECTRAL_SAFETY) * lam / self.m
