"""Bound-constrained limited-memory quasi-Newton minimizer.

Implements projected L-BFGS: search directions from the two-loop recursion,
trial points projected onto the feasible box (optional per-coordinate lower
bounds), and backtracking Armijo acceptance. Every iterate satisfies the
bounds exactly, and accepted objective values never increase.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FitConfig",
    "OptimResult",
    "minimize",
    "STATUS_CONVERGED_GRAD",
    "STATUS_CONVERGED_IMPROVE",
    "STATUS_MAX_ITERS",
]

STATUS_CONVERGED_GRAD = "converged_grad"
STATUS_CONVERGED_IMPROVE = "converged_improve"
STATUS_MAX_ITERS = "max_iters"

_ARMIJO_C1 = 1e-4
_MIN_STEP = 1e-16
_CURVATURE_MIN = 1e-10


@dataclass
class FitConfig:
    """Shared optimizer and fitting settings.

    reg_weight is either a nonnegative float or the string "auto", in which
    case fitting code sets it to 10 times the mean absolute entry of the
    factor matrices at initialization and holds it fixed.
    """

    max_iters: int = 200
    grad_tol: float = 1e-6
    rel_improve_tol: float = 1e-9
    memory: int = 10
    reg_weight: float | str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0 or self.rel_improve_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if isinstance(self.reg_weight, str):
            if self.reg_weight != "auto":
                raise ValueError("reg_weight must be a float >= 0 or 'auto'")
        elif self.reg_weight < 0:
            raise ValueError("reg_weight must be >= 0")


@dataclass
class OptimResult:
    x: np.ndarray
    loss_history: np.ndarray = field(repr=False)
    status: str = STATUS_MAX_ITERS


def _two_loop_direction(grad, s_hist, y_hist, rho_hist):
    """Approximate -H * grad from the stored curvature pairs."""
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if y_hist:
        s_last, y_last = s_hist[-1], y_hist[-1]
        q *= (s_last @ y_last) / (y_last @ y_last)
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def minimize(objective, x0, lower_bounds=None, cfg=None):
    """Minimize a smooth objective, optionally subject to lower bounds.

    Args:
        objective: callable mapping a flat parameter vector to
            (value, gradient).
        x0: starting point; must respect the bounds.
        lower_bounds: None for unconstrained, or a scalar / per-coordinate
            array of lower bounds. Iterates are clamped, so feasibility is
            exact rather than approximate.
        cfg: FitConfig; defaults are used when None.

    Returns:
        OptimResult with the final point, the history of accepted objective
        values (non-increasing), and a termination status.

    Raises:
        ValueError: objective is non-finite at x0.
        RuntimeError: no finite objective value found along a search
            direction for any step above 1e-16.
    """
    cfg = cfg if cfg is not None else FitConfig()
    x = np.asarray(x0, dtype=np.float64).copy()
    lb = None
    if lower_bounds is not None:
        lb = np.broadcast_to(np.asarray(lower_bounds, dtype=np.float64), x.shape)
        x = np.maximum(x, lb)
    f, g = objective(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise ValueError("objective is not finite at the starting point")
    g = np.asarray(g, dtype=np.float64)
    history = [float(f)]
    s_hist = deque(maxlen=cfg.memory)
    y_hist = deque(maxlen=cfg.memory)
    rho_hist = deque(maxlen=cfg.memory)
    status = STATUS_MAX_ITERS

    for _ in range(cfg.max_iters):
        pg = g if lb is None else x - np.maximum(x - g, lb)
        if x.size == 0 or np.max(np.abs(pg)) < cfg.grad_tol:
            status = STATUS_CONVERGED_GRAD
            break
        d = _two_loop_direction(g, s_hist, y_hist, rho_hist)
        if d @ g >= 0.0:  # not a descent direction; fall back to steepest descent
            d = -g

        step = 1.0
        accepted = False
        saw_finite = False
        x_new = f_new = g_new = None
        while step >= _MIN_STEP:
            x_trial = x + step * d if lb is None else np.maximum(x + step * d, lb)
            f_trial, g_trial = objective(x_trial)
            if np.isfinite(f_trial) and np.all(np.isfinite(g_trial)):
                saw_finite = True
                # min(0, .) keeps acceptance monotone even when projection
                # bends the step against the gradient
                if f_trial <= f + _ARMIJO_C1 * min(0.0, g @ (x_trial - x)):
                    accepted = True
                    x_new, f_new, g_new = x_trial, f_trial, np.asarray(g_trial, dtype=np.float64)
                    break
            step *= 0.5
        if not accepted:
            if not saw_finite:
                raise RuntimeError(
                    "line search found no finite objective value above the minimum step"
                )
            status = STATUS_CONVERGED_IMPROVE  # no acceptable monotone step remains
            break

        s = x_new - x
        y = g_new - g
        sy = s @ y
        if sy > _CURVATURE_MIN:
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
        else:
            # pair rejected: local curvature contradicts the stored model,
            # which would otherwise keep proposing the same frozen step
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()
        improvement = f - f_new
        rel_improvement = improvement / max(abs(f), 1.0)
        x, f, g = x_new, f_new, g_new
        history.append(float(f))
        if rel_improvement < cfg.rel_improve_tol:
            status = STATUS_CONVERGED_IMPROVE
            break

    return OptimResult(x=x, loss_history=np.asarray(history), status=status)
