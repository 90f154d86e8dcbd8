"""Stage 3: prune, fine-tune under nonnegativity, and convert to the
interpretable community form.

The final model is sigmoid(V diag(w) V^T): memberships V in [0, 1] and one
signed weight per community. A positive weight marks a homophilous
community (coparticipation multiplies edge odds by exp(w) > 1), a negative
weight a heterophilous one.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import bce_with_logits, sigmoid
from .lpca import resolve_reg_weight
from .nninit import NonnegFactors
from .optim import FitConfig, minimize

__all__ = [
    "CommunityModel",
    "prune_columns",
    "constrained_objective",
    "fit_constrained",
    "to_vw",
    "predict_prob",
    "logit_contributions",
    "build_threshold_witness",
    "scale_weights",
]


@dataclass
class CommunityModel:
    """Interpretable model: memberships v (n x k, in [0,1]) and weights w (k,)."""

    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.v.ndim != 2 or self.w.ndim != 1 or self.v.shape[1] != self.w.size:
            raise ValueError("memberships and weights disagree on the community count")
        if self.v.size and (self.v.min() < 0.0 or self.v.max() > 1.0):
            raise ValueError("memberships must lie in [0, 1]")

    @property
    def n(self):
        return self.v.shape[0]

    @property
    def k(self):
        return self.w.size

    def logits(self):
        return (self.v * self.w) @ self.v.T

    def probabilities(self):
        return sigmoid(self.logits())


def prune_columns(factors, k):
    """Keep the k columns with the largest Euclidean norms, pooled over both sides.

    Side membership and the original column order within each side are
    preserved. Ties break toward the B side, then toward the lower
    original index.

    Raises:
        ValueError: k <= 0 or k exceeds the available column count.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    total = factors.k_b + factors.k_c
    if k > total:
        raise ValueError(f"k={k} exceeds the {total} available columns")
    norms_b = np.linalg.norm(factors.b, axis=0)
    norms_c = np.linalg.norm(factors.c, axis=0)
    ranked = sorted(
        [(-norms_b[i], 0, i) for i in range(factors.k_b)]
        + [(-norms_c[i], 1, i) for i in range(factors.k_c)]
    )
    kept = ranked[:k]
    keep_b = sorted(i for _, side, i in kept if side == 0)
    keep_c = sorted(i for _, side, i in kept if side == 1)
    return NonnegFactors(b=factors.b[:, keep_b].copy(), c=factors.c[:, keep_c].copy())


def constrained_objective(b, c, a, reg_weight, mask=None):
    """Cross-entropy of sigmoid(bb^T - cc^T) against a, plus L2 on the factors.

    With g = sigmoid(bb^T - cc^T) - a (symmetric), the gradients are
    2 g b and -2 g c plus the regularization terms.

    Returns:
        (loss, grad_b, grad_c).
    """
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if b.ndim != 2 or c.ndim != 2 or b.shape[0] != c.shape[0]:
        raise ValueError("factor shapes are inconsistent")
    loss, g = bce_with_logits(a, b @ b.T - c @ c.T, mask)
    loss += reg_weight * (np.sum(b * b) + np.sum(c * c))
    grad_b = 2.0 * (g @ b) + 2.0 * reg_weight * b
    grad_c = -2.0 * (g @ c) + 2.0 * reg_weight * c
    return loss, grad_b, grad_c


def fit_constrained(a, f0, cfg=None, mask=None):
    """Fine-tune nonnegative factors under an exact nonnegativity constraint.

    Proceeds like stage 1 (same minimizer, same automatic regularization
    rule applied to the initialization f0), but with per-coordinate lower
    bound 0, so the output factors are exactly nonnegative.

    Args:
        a: symmetric 0/1 adjacency matrix.
        f0: nonnegative starting factors.
        cfg: FitConfig (defaults when None).
        mask: optional symmetric 0/1 matrix restricting the loss.

    Returns:
        (NonnegFactors, OptimResult).
    """
    cfg = cfg if cfg is not None else FitConfig()
    a = np.asarray(a, dtype=np.float64)
    n, kb, kc = f0.n, f0.k_b, f0.k_c
    if a.shape != (n, n):
        raise ValueError("adjacency shape does not match the factors")
    reg = resolve_reg_weight(cfg.reg_weight, f0.b, f0.c)

    def objective(z):
        b = z[: n * kb].reshape(n, kb)
        c = z[n * kb :].reshape(n, kc)
        loss, gb, gc = constrained_objective(b, c, a, reg, mask)
        return loss, np.concatenate([gb.ravel(), gc.ravel()])

    z0 = np.concatenate([f0.b.ravel(), f0.c.ravel()])
    result = minimize(objective, z0, lower_bounds=0.0, cfg=cfg)
    b = result.x[: n * kb].reshape(n, kb).copy()
    c = result.x[n * kb :].reshape(n, kc).copy()
    return NonnegFactors(b=b, c=c), result


def to_vw(factors):
    """Convert nonnegative factors to the membership/weight form, exactly.

    Each nonzero column is divided by its maximum m, which becomes a
    weight of +m*m (B side) or -m*m (C side); zero columns are dropped.
    The construction guarantees V diag(w) V^T = B B^T - C C^T and that
    every kept membership column has maximum exactly 1.
    """
    cols = []
    weights = []
    for j in range(factors.k_b):
        m = factors.b[:, j].max() if factors.n else 0.0
        if m > 0.0:
            cols.append(factors.b[:, j] / m)
            weights.append(m * m)
    for j in range(factors.k_c):
        m = factors.c[:, j].max() if factors.n else 0.0
        if m > 0.0:
            cols.append(factors.c[:, j] / m)
            weights.append(-m * m)
    v = np.column_stack(cols) if cols else np.zeros((factors.n, 0))
    return CommunityModel(v=v, w=np.asarray(weights, dtype=np.float64))


def _check_index(model, i):
    if not 0 <= i < model.n:
        raise IndexError(f"node id {i} out of range for n={model.n}")


def predict_prob(model, i, j):
    """Predicted link probability sigmoid(sum_c v_ic v_jc w_c)."""
    _check_index(model, i)
    _check_index(model, j)
    return sigmoid(float(np.dot(model.v[i] * model.w, model.v[j])))


def logit_contributions(model, i, j):
    """Per-community logit terms v_ic * v_jc * w_c for the pair (i, j).

    Their sum is the edge logit; exp of each term is the community's odds
    multiplier for this pair.
    """
    _check_index(model, i)
    _check_index(model, j)
    return model.v[i] * model.v[j] * model.w


def build_threshold_witness(b, c, t):
    """Community model that reproduces a threshold-rule graph exactly in sign.

    Converts the binary memberships with to_vw and appends an always-on
    community with weight 1/2 - t, so every pair's logit equals
    b_i . b_j - c_i . c_j + 1/2 - t: at least 1/2 in absolute value, and
    positive exactly when the threshold rule creates the edge.
    """
    b = np.asarray(b, dtype=np.float64)
    c = np.zeros((b.shape[0], 0)) if c is None else np.asarray(c, dtype=np.float64)
    base = to_vw(NonnegFactors(b=b, c=c))
    v = np.hstack([base.v, np.ones((b.shape[0], 1))])
    w = np.append(base.w, 0.5 - t)
    return CommunityModel(v=v, w=w)


def scale_weights(model, s):
    """Scale all community weights by s > 0.

    Memberships are unchanged; logit signs (and hence 0.5-threshold
    predictions and probability rankings) are preserved.
    """
    if s <= 0.0:
        raise ValueError("scale must be positive")
    return CommunityModel(v=model.v.copy(), w=s * model.w)
