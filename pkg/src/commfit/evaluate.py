"""Metrics and experiment harnesses: reconstruction quality, agreement with
ground-truth communities, link prediction with a held-out pair split, and
the truncated-eigendecomposition (SVD) baseline.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .constrained import CommunityModel, scale_weights  # noqa: F401  (re-export convenience)
from .graphs import CommunityLabels, adjacency_dense
from .linalg import sigmoid, sym_eigen
from .optim import FitConfig
from .pipeline import fit_pipeline

__all__ = [
    "ReconReport",
    "HoldoutSplit",
    "LinkPredictionReport",
    "recon_report",
    "svd_baseline",
    "binarize_memberships",
    "community_f1",
    "make_holdout",
    "random_baseline_f1",
    "link_prediction_experiment",
    "reconstruction_sweep",
    "METRIC_COLUMNS",
    "rows_to_csv",
]

# One row per run; stable column order. Fields that do not apply to a given
# run are left empty in the CSV.
METRIC_COLUMNS = (
    "variant",
    "k",
    "seed",
    "frob_normalized",
    "ce_normalized",
    "rounded_errors",
    "f1",
    "precision",
    "recall",
    "random_baseline_f1",
    "tau",
)

_SVD_CLIP = 1e-6


@dataclass(frozen=True)
class ReconReport:
    """Reconstruction error of a probability matrix against an adjacency.

    frob_normalized: squared Frobenius error over sum(A) (twice the edges).
    ce_normalized: total cross-entropy over n^2.
    rounded_errors: entries misclassified at the 0.5 threshold.
    """

    frob_normalized: float
    ce_normalized: float
    rounded_errors: int


def _xlogy(x, y):
    """x * log(y) with the convention 0 * log(anything) = 0.

    For x > 0, y = 0 the result is -inf: a saturated wrong prediction has
    infinite cross-entropy.
    """
    safe = np.where(x == 0.0, 1.0, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0.0, 0.0, x * np.log(safe))


def _cross_entropy_probs(a, p):
    return float(-np.sum(_xlogy(a, p)) - np.sum(_xlogy(1.0 - a, 1.0 - p)))


def recon_report(a, p):
    """Score a matrix of edge probabilities against the true adjacency.

    Args:
        a: 0/1 adjacency matrix with at least one edge.
        p: probability matrix in [0, 1], same shape.

    Raises:
        ValueError: shape mismatch, p outside [0, 1], or an edgeless a
            (the Frobenius normalization divides by sum(a)).
    """
    a = np.asarray(a, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if a.shape != p.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {p.shape}")
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    denom = a.sum()
    if denom == 0.0:
        raise ValueError("adjacency has no edges; normalized error is undefined")
    frob = float(np.sum((a - p) ** 2)) / denom
    ce = _cross_entropy_probs(a, p) / a.size
    rounded = int(np.sum((p >= 0.5) != (a != 0.0)))
    return ReconReport(frob_normalized=frob, ce_normalized=ce, rounded_errors=rounded)


def svd_baseline(a, k):
    """Best rank-k symmetric approximation of a, by truncated eigendecomposition.

    Keeps the k eigenpairs of largest absolute eigenvalue (ties broken
    toward the positive eigenvalue), equivalent to truncated SVD for
    symmetric input. The output is a real matrix, not a probability matrix;
    when scoring cross-entropy, clip it to [1e-6, 1 - 1e-6] first.
    """
    a = np.asarray(a, dtype=np.float64)
    dec = sym_eigen(a, tol=1e-12)
    if dec.eigvals.size == 0:
        return np.zeros_like(a)
    order = np.lexsort((-dec.eigvals, -np.abs(dec.eigvals)))[: min(k, dec.eigvals.size)]
    vals = dec.eigvals[order]
    vecs = dec.eigvecs[:, order]
    return (vecs * vals) @ vecs.T


def binarize_memberships(model, tau):
    """Threshold soft memberships into communities: node i joins c iff v_ic >= tau.

    Empty communities are dropped, so the result may have fewer than k
    communities (or none at all).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie strictly between 0 and 1")
    members = []
    for c in range(model.k):
        group = frozenset(np.flatnonzero(model.v[:, c] >= tau).tolist())
        if group:
            members.append(group)
    return CommunityLabels(k_truth=len(members), members=tuple(members))


def _set_f1(x, y):
    inter = len(x & y)
    return 2.0 * inter / (len(x) + len(y))


def community_f1(detected, truth):
    """Symmetric average best-match F1 between two community collections.

    Averages (a) the mean over truth communities of the best F1 against any
    detected community and (b) the same with the roles swapped.

    Raises:
        ValueError: either collection is empty.
    """
    if detected.k_truth == 0 or truth.k_truth == 0:
        raise ValueError("community collections must be non-empty")
    scores = np.array(
        [[_set_f1(d, t) for t in truth.members] for d in detected.members]
    )
    return 0.5 * (scores.max(axis=0).mean() + scores.max(axis=1).mean())


@dataclass(frozen=True)
class HoldoutSplit:
    """Partition of all unordered node pairs into observed and held-out."""

    n: int
    observed: frozenset = field(repr=False)
    held_out: frozenset = field(repr=False)
    seed: int = 0

    def mask(self):
        """Symmetric 0/1 matrix: 1 on observed pairs and the diagonal."""
        m = np.ones((self.n, self.n))
        if self.held_out:
            idx = np.array(sorted(self.held_out))
            m[idx[:, 0], idx[:, 1]] = 0.0
            m[idx[:, 1], idx[:, 0]] = 0.0
        return m


def _pairs_from_indices(n, idx):
    """Map linear upper-triangle indices to (i, j) pairs, i < j."""
    idx = np.asarray(idx, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2.0).astype(np.int64)
    i = np.clip(i, 0, n - 2)

    def offset(row):
        return row * (2 * n - row - 1) // 2

    # float sqrt can be off by one either way
    for _ in range(2):
        i = np.where((i + 1 <= n - 2) & (offset(i + 1) <= idx), i + 1, i)
        i = np.where(offset(i) > idx, i - 1, i)
    j = idx - offset(i) + i + 1
    return np.column_stack([i, j])


def make_holdout(n, frac, seed):
    """Uniformly sample a fraction of all node pairs to hold out.

    Args:
        n: node count.
        frac: fraction of the n(n-1)/2 pairs to hold out, in (0, 1);
            the held-out count is round(frac * total).
        seed: RNG seed; the split is deterministic per seed.

    Raises:
        ValueError: frac out of range or a holdout that rounds to empty.
    """
    if not 0.0 < frac < 1.0:
        raise ValueError("frac must lie strictly between 0 and 1")
    total = n * (n - 1) // 2
    count = int(round(frac * total))
    if count == 0:
        raise ValueError("holdout is empty; increase frac or n")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(total, size=count, replace=False)
    chosen.sort()
    held_pairs = _pairs_from_indices(n, chosen)
    held = frozenset(map(tuple, held_pairs.tolist()))
    iu, ju = np.triu_indices(n, k=1)
    observed = frozenset(zip(iu.tolist(), ju.tolist())) - held
    return HoldoutSplit(n=n, observed=observed, held_out=held, seed=seed)


def random_baseline_f1(density):
    """Closed-form F1 of a fair-coin link predictor on held-out pairs.

    With positive density d: precision = d, recall = 1/2, so
    F1 = d / (d + 1/2).
    """
    return density / (density + 0.5)


@dataclass(frozen=True)
class LinkPredictionReport:
    f1: float
    precision: float
    recall: float
    random_baseline_f1: float


def link_prediction_experiment(g, split, k, cfg=None, variant="full"):
    """Train on observed pairs only, then predict the held-out pairs.

    Training sums the loss over observed pairs (both orientations) plus the
    diagonal; held-out entries contribute nothing to any stage. Held-out
    pairs are classified at probability threshold 0.5 and scored on the
    positive (link) class.

    Raises:
        ValueError: the holdout contains no positive pairs (F1 undefined;
            use a different seed).
    """
    a = adjacency_dense(g)
    pairs = np.array(sorted(split.held_out))
    truth = a[pairs[:, 0], pairs[:, 1]] != 0.0
    positives = int(truth.sum())
    if positives == 0:
        raise ValueError("holdout has no positive pairs; try another seed")
    result = fit_pipeline(a, k, cfg=cfg, mask=split.mask(), variant=variant)
    logits = result.model.logits()
    predicted = logits[pairs[:, 0], pairs[:, 1]] >= 0.0  # sigmoid(x) >= 0.5 iff x >= 0
    tp = int(np.sum(predicted & truth))
    fp = int(np.sum(predicted & ~truth))
    fn = int(np.sum(~predicted & truth))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn)
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    density = positives / len(pairs)
    return LinkPredictionReport(
        f1=f1,
        precision=precision,
        recall=recall,
        random_baseline_f1=random_baseline_f1(density),
    )


def _svd_row_metrics(a, k):
    recon = svd_baseline(a, k)
    frob = float(np.sum((a - recon) ** 2)) / a.sum()
    clipped = np.clip(recon, _SVD_CLIP, 1.0 - _SVD_CLIP)
    ce = _cross_entropy_probs(a, clipped) / a.size
    rounded = int(np.sum((recon >= 0.5) != (a != 0.0)))
    return frob, ce, rounded


def reconstruction_sweep(g, k_values, variants=("full", "homophily_only", "svd"),
                         cfg=None, seeds=(0,)):
    """Reconstruction error per (variant, k, seed), as plot-ready rows.

    Args:
        g: the graph to reconstruct.
        k_values: non-empty list of community counts / ranks to try.
        variants: any of "full", "homophily_only" (hyphens accepted), "svd".
        cfg: FitConfig template; its seed is replaced per run.
        seeds: seeds for the model variants (svd ignores them but still
            emits one row per seed, keeping the table rectangular).

    Returns:
        list of dicts with keys variant, k, seed, frob_normalized,
        ce_normalized, rounded_errors.
    """
    k_values = list(k_values)
    if not k_values:
        raise ValueError("k_values must be non-empty")
    variants = [v.replace("-", "_") for v in variants]
    cfg = cfg if cfg is not None else FitConfig()
    a = adjacency_dense(g)
    rows = []
    for k in k_values:
        for variant in variants:
            for seed in seeds:
                if variant == "svd":
                    frob, ce, rounded = _svd_row_metrics(a, k)
                else:
                    run_cfg = dataclasses.replace(cfg, seed=seed)
                    result = fit_pipeline(a, k, cfg=run_cfg, variant=variant)
                    report = recon_report(a, sigmoid(result.model.logits()))
                    frob, ce, rounded = (report.frob_normalized,
                                         report.ce_normalized,
                                         report.rounded_errors)
                rows.append({
                    "variant": variant,
                    "k": k,
                    "seed": seed,
                    "frob_normalized": frob,
                    "ce_normalized": ce,
                    "rounded_errors": rounded,
                })
    return rows


def rows_to_csv(rows):
    """Render metric rows with the stable METRIC_COLUMNS order.

    Missing fields are left empty; extra keys are ignored.
    """
    lines = [",".join(METRIC_COLUMNS)]
    for row in rows:
        cells = []
        for col in METRIC_COLUMNS:
            value = row.get(col, "")
            cells.append("" if value is None else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
