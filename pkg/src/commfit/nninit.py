"""Stage 2: convert signed logit factors into nonnegative ones.

The bridge is the ReLU split identity

    v v^T = 2 relu(v) relu(v)^T + 2 relu(-v) relu(-v)^T - |v| |v|^T,

applied per eigencomponent of the symmetrized logit matrix
L = (XY^T + YX^T)/2. Each retained eigenpair contributes three nonnegative
columns, so a rank-r L yields factors with k_B + k_C = 3r and
B B^T - C C^T = L exactly (up to eigensolver tolerance).
"""

from dataclasses import dataclass

import numpy as np

from .linalg import low_rank_sym_eigen

__all__ = ["NonnegFactors", "relu_split_columns", "init_constrained"]


@dataclass
class NonnegFactors:
    """Nonnegative factor pair; edge logits are b b^T - c c^T.

    Either side may have width zero. Entries are required to be exactly
    nonnegative, not merely within tolerance.
    """

    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        if self.b.ndim != 2 or self.c.ndim != 2:
            raise ValueError("factors must be 2-d")
        if self.b.shape[0] != self.c.shape[0]:
            raise ValueError("factor row counts differ")
        if (self.b.size and self.b.min() < 0.0) or (self.c.size and self.c.min() < 0.0):
            raise ValueError("factors must be nonnegative")

    @property
    def n(self):
        return self.b.shape[0]

    @property
    def k_b(self):
        return self.b.shape[1]

    @property
    def k_c(self):
        return self.c.shape[1]

    def logits(self):
        return self.b @ self.b.T - self.c @ self.c.T


def relu_split_columns(v):
    """Split a signed matrix into nonnegative parts with an exact identity.

    Returns (p, neg) with p = [sqrt(2) relu(v) | sqrt(2) relu(-v)] and
    neg = |v|, so that p p^T - neg neg^T = v v^T exactly.
    """
    v = np.asarray(v, dtype=np.float64)
    root2 = np.sqrt(2.0)
    p = np.hstack([root2 * np.maximum(v, 0.0), root2 * np.maximum(-v, 0.0)])
    return p, np.abs(v)


def init_constrained(factors, eigen_tol=1e-9):
    """Build nonnegative factors whose logits match the symmetrized LPCA logits.

    Eigendecomposes L = (XY^T + YX^T)/2, scales the positive-eigenvalue
    vectors into B* and the negative ones into C*, and ReLU-splits both:

        B = [sqrt(2) relu(B*) | sqrt(2) relu(-B*) | |C*|]
        C = [sqrt(2) relu(C*) | sqrt(2) relu(-C*) | |B*|]

    Zero eigenvalues are truncated first (they only add zero columns), so
    the output width is 3 times the number of retained eigenpairs.

    Args:
        factors: LpcaFactors from stage 1.
        eigen_tol: relative eigendecomposition / truncation tolerance.

    Returns:
        NonnegFactors with b b^T - c c^T ~= (XY^T + YX^T)/2.
    """
    dec = low_rank_sym_eigen(factors.x, factors.y, eigen_tol)
    pos = dec.eigvals > 0.0
    neg = dec.eigvals < 0.0
    b_star = dec.eigvecs[:, pos] * np.sqrt(dec.eigvals[pos])
    c_star = dec.eigvecs[:, neg] * np.sqrt(-dec.eigvals[neg])
    b_split, b_abs = relu_split_columns(b_star)
    c_split, c_abs = relu_split_columns(c_star)
    return NonnegFactors(b=np.hstack([b_split, c_abs]), c=np.hstack([c_split, b_abs]))
