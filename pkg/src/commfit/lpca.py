"""Stage 1: logistic factorization of the adjacency matrix, sigmoid(XY^T) ~= A.

The factors are unconstrained real matrices; interpretability enters later,
once they are converted to nonnegative form. L2 regularization of the
factors avoids overfitting, with an automatic weight of 10 times the mean
absolute entry of the factors at initialization.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import bce_with_logits, sigmoid
from .optim import FitConfig, minimize

__all__ = ["LpcaFactors", "lpca_objective", "fit_lpca", "resolve_reg_weight"]


@dataclass
class LpcaFactors:
    """Arbitrary-sign logit factors: edge logits are rows of x times rows of y."""

    x: np.ndarray
    y: np.ndarray
    k: int
    reg_weight_used: float

    def logits(self):
        return self.x @ self.y.T

    def probabilities(self):
        return sigmoid(self.logits())


def resolve_reg_weight(reg_weight, *matrices):
    """Turn a FitConfig reg_weight into a number.

    "auto" maps to 10 times the mean absolute entry of the given matrices,
    measured once (at initialization) and held fixed during training.
    """
    if isinstance(reg_weight, str):
        total = sum(m.size for m in matrices)
        if total == 0:
            return 0.0
        return 10.0 * sum(np.abs(m).sum() for m in matrices) / total
    return float(reg_weight)


def lpca_objective(x, y, a, reg_weight, mask=None):
    """Cross-entropy of sigmoid(xy^T) against a, plus L2 on the factors.

    Args:
        x, y: n x k factor matrices of equal shape.
        a: 0/1 adjacency matrix.
        reg_weight: L2 penalty weight (0 disables).
        mask: optional 0/1 matrix zeroing held-out entries.

    Returns:
        (loss, grad_x, grad_y).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"factor shapes differ: {x.shape} vs {y.shape}")
    loss, g = bce_with_logits(a, x @ y.T, mask)
    loss += reg_weight * (np.sum(x * x) + np.sum(y * y))
    grad_x = g @ y + 2.0 * reg_weight * x
    grad_y = g.T @ x + 2.0 * reg_weight * y
    return loss, grad_x, grad_y


def _check_adjacency(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("adjacency matrix must be square")
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency matrix must be symmetric")
    if np.any(np.diag(a) != 0.0):
        raise ValueError("adjacency matrix must have a zero diagonal")
    if not np.all((a == 0.0) | (a == 1.0)):
        raise ValueError("adjacency entries must be 0 or 1")
    return a


def fit_lpca(a, k, cfg=None, mask=None):
    """Fit the logistic factorization by quasi-Newton descent.

    Factors are initialized i.i.d. Gaussian with standard deviation
    1/sqrt(k) (seeded from cfg.seed), which keeps the initial logits O(1)
    regardless of k.

    Args:
        a: symmetric 0/1 adjacency matrix with zero diagonal.
        k: embedding rank, 1 <= k < n.
        cfg: FitConfig (defaults used when None).
        mask: optional symmetric 0/1 matrix restricting the loss to
            observed entries.

    Returns:
        (LpcaFactors, OptimResult).
    """
    a = _check_adjacency(a)
    n = a.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    cfg = cfg if cfg is not None else FitConfig()
    rng = np.random.default_rng(cfg.seed)
    x0 = rng.normal(0.0, 1.0 / np.sqrt(k), size=(n, k))
    y0 = rng.normal(0.0, 1.0 / np.sqrt(k), size=(n, k))
    reg = resolve_reg_weight(cfg.reg_weight, x0, y0)

    def objective(z):
        x = z[: n * k].reshape(n, k)
        y = z[n * k :].reshape(n, k)
        loss, gx, gy = lpca_objective(x, y, a, reg, mask)
        return loss, np.concatenate([gx.ravel(), gy.ravel()])

    result = minimize(objective, np.concatenate([x0.ravel(), y0.ravel()]), cfg=cfg)
    x = result.x[: n * k].reshape(n, k).copy()
    y = result.x[n * k :].reshape(n, k).copy()
    return LpcaFactors(x=x, y=y, k=k, reg_weight_used=reg), result
