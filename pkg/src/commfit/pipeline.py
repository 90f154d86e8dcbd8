"""Three-stage fitting pipeline: logistic factors -> nonnegative factors ->
pruned, fine-tuned community model.

`fit_pipeline` is the one entry point used by the CLI, the evaluation
harnesses, and the demos. The "homophily_only" variant is the in-repo
stand-in for purely homophilous baselines: it keeps only B-side columns at
the pruning step and fine-tunes sigmoid(BB^T) with an empty C.
"""

from dataclasses import dataclass, field

import numpy as np

from .constrained import CommunityModel, fit_constrained, prune_columns, to_vw
from .lpca import LpcaFactors, fit_lpca
from .nninit import NonnegFactors, init_constrained
from .optim import FitConfig, OptimResult

__all__ = ["PipelineResult", "PipelineError", "fit_pipeline", "VARIANTS"]

VARIANTS = ("full", "homophily_only")


class PipelineError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, cause):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class PipelineResult:
    """Everything produced along the way, plus per-stage optimizer records."""

    lpca: LpcaFactors
    lpca_opt: OptimResult = field(repr=False)
    init: NonnegFactors
    pruned: NonnegFactors
    fitted: NonnegFactors
    fit_opt: OptimResult = field(repr=False)
    model: CommunityModel
    variant: str
    k_requested: int

    def stage_lines(self):
        """Human-readable per-stage summary (loss before/after, status)."""
        h1 = self.lpca_opt.loss_history
        h3 = self.fit_opt.loss_history
        return [
            f"stage1_lpca: k={self.lpca.k} reg={self.lpca.reg_weight_used:.6g} "
            f"initial={h1[0]:.6f} final={h1[-1]:.6f} iters={len(h1) - 1} "
            f"status={self.lpca_opt.status}",
            f"stage2_init: columns={self.init.k_b + self.init.k_c} "
            f"(b={self.init.k_b}, c={self.init.k_c})",
            f"prune: kept {self.pruned.k_b + self.pruned.k_c} "
            f"(b={self.pruned.k_b}, c={self.pruned.k_c}) of "
            f"{self.init.k_b + self.init.k_c} requested k={self.k_requested}",
            f"stage3_constrained: initial={h3[0]:.6f} final={h3[-1]:.6f} "
            f"iters={len(h3) - 1} status={self.fit_opt.status}",
            f"model: k={self.model.k} "
            f"(homophilous={int(np.sum(self.model.w > 0))}, "
            f"heterophilous={int(np.sum(self.model.w < 0))})",
        ]


def fit_pipeline(a, k, cfg=None, mask=None, variant="full", eigen_tol=1e-9):
    """Run the full three-stage fit on a dense adjacency matrix.

    Args:
        a: symmetric 0/1 adjacency matrix with zero diagonal.
        k: number of communities in the final model (stage 1 uses
            min(k, n-1) as its rank; stage 2 widens, pruning restores k).
        cfg: FitConfig shared by both optimization stages.
        mask: optional symmetric 0/1 matrix; entries with 0 are excluded
            from every stage's training loss (link-prediction holdout).
        variant: "full" or "homophily_only".
        eigen_tol: stage-2 eigendecomposition tolerance.

    Returns:
        PipelineResult.

    Raises:
        PipelineError: any stage failed; the message names the stage.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if k < 1:
        raise ValueError("k must be >= 1")
    cfg = cfg if cfg is not None else FitConfig()
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]

    k_stage1 = min(k, n - 1)
    try:
        factors, opt1 = fit_lpca(a, k_stage1, cfg, mask)
    except Exception as exc:
        raise PipelineError("stage1_lpca", exc) from exc

    try:
        init = init_constrained(factors, eigen_tol)
    except Exception as exc:
        raise PipelineError("stage2_init", exc) from exc

    try:
        if variant == "homophily_only":
            candidates = NonnegFactors(b=init.b, c=np.zeros((n, 0)))
        else:
            candidates = init
        total = candidates.k_b + candidates.k_c
        pruned = prune_columns(candidates, min(k, total)) if total else candidates
    except Exception as exc:
        raise PipelineError("prune", exc) from exc

    try:
        fitted, opt3 = fit_constrained(a, pruned, cfg, mask)
    except Exception as exc:
        raise PipelineError("stage3_constrained", exc) from exc

    model = to_vw(fitted)
    return PipelineResult(
        lpca=factors,
        lpca_opt=opt1,
        init=init,
        pruned=pruned,
        fitted=fitted,
        fit_opt=opt3,
        model=model,
        variant=variant,
        k_requested=k,
    )
