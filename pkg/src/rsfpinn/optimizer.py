"""Limited-memory BFGS with a strong-Wolfe line search on flat vectors.

The optimizer state (curvature history) persists across calls, so the same
:class:`LbfgsState` can be driven through a sequence of objectives that
differ only in their collocation sample.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .autodiff import DomainError

log = logging.getLogger(__name__)

LossAndGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]


class NonFiniteLoss(FloatingPointError):
    pass


@dataclass
class LbfgsState:
    history_size: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    max_ls: int = 25
    tol_grad: float = 1e-9
    tol_change: float = 1e-12
    s_hist: deque = field(default_factory=deque, repr=False)
    y_hist: deque = field(default_factory=deque, repr=False)
    n_iter: int = 0
    n_evals: int = 0

    def reset(self):
        self.s_hist.clear()
        self.y_hist.clear()

    def push(self, s: np.ndarray, y: np.ndarray) -> bool:
        sy = float(s @ y)
        if sy <= 1e-10 * np.linalg.norm(s) * np.linalg.norm(y) or self.history_size <= 0:
            return False
        if len(self.s_hist) == self.history_size:
            self.s_hist.popleft()
            self.y_hist.popleft()
        self.s_hist.append(s)
        self.y_hist.append(y)
        return True

    def direction(self, g: np.ndarray) -> np.ndarray:
        """Two-loop recursion: -H g."""
        q = -g.copy()
        if not self.s_hist:
            return q
        rhos = [1.0 / float(y @ s) for s, y in zip(self.s_hist, self.y_hist)]
        alphas = []
        for s, y, rho in zip(reversed(self.s_hist), reversed(self.y_hist), reversed(rhos)):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * y
        s, y = self.s_hist[-1], self.y_hist[-1]
        q *= float(s @ y) / float(y @ y)
        for s, y, rho, a in zip(self.s_hist, self.y_hist, rhos, reversed(alphas)):
            b = rho * float(y @ q)
            q += (a - b) * s
        return q


def _safe_eval(fg: LossAndGrad, x: np.ndarray):
    try:
        f, g = fg(x)
    except (DomainError, FloatingPointError, OverflowError):
        return np.inf, None
    f = float(f)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        return np.inf, None
    return f, np.asarray(g, dtype=np.float64)


def _cubic_min(x1, f1, g1, x2, f2, g2, bounds=None):
    """Minimiser of the cubic interpolating two points with slopes."""
    lo, hi = bounds if bounds is not None else (min(x1, x2), max(x1, x2))
    vals = (x1, f1, g1, x2, f2, g2)
    if not all(np.isfinite(v) for v in vals):
        return 0.5 * (lo + hi)
    d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2)
    d2_sq = d1 * d1 - g1 * g2
    if d2_sq >= 0.0:
        d2 = np.sqrt(d2_sq)
        if x1 <= x2:
            pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        else:
            pos = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        if np.isfinite(pos):
            return float(min(max(pos, lo), hi))
    return 0.5 * (lo + hi)


@dataclass
class LineSearchResult:
    t: float
    f: float
    g: np.ndarray | None
    n_evals: int
    status: str  # "wolfe", "armijo" or "failed"


def strong_wolfe(fg: LossAndGrad, x, t, d, f, g, gtd, c1=1e-4, c2=0.9,
                 max_ls=25, tol_change=1e-9) -> LineSearchResult:
    """Bracketing + zoom search for a step satisfying the strong Wolfe conditions.

    Trial points where the loss is undefined count as +inf and shrink the
    bracket.  If the conditions are never met, the best point satisfying
    sufficient decrease is returned with status ``"armijo"``; with none,
    status is ``"failed"`` and ``t`` is 0.
    """
    d_norm = float(np.max(np.abs(d)))
    evals = 0
    t_prev, f_prev, g_prev, gtd_prev = 0.0, f, g, gtd
    best = (0.0, f, g)
    done = False
    bracket = None
    ls_iter = 0

    def armijo(tt, ff):
        return ff <= f + c1 * tt * gtd

    while ls_iter < max_ls:
        f_new, g_new = _safe_eval(fg, x + t * d)
        evals += 1
        ls_iter += 1
        gtd_new = float(g_new @ d) if g_new is not None else np.nan
        if armijo(t, f_new) and f_new < best[1]:
            best = (t, f_new, g_new)
        if not armijo(t, f_new) or (ls_iter > 1 and f_new >= f_prev):
            bracket = [(t_prev, f_prev, g_prev, gtd_prev), (t, f_new, g_new, gtd_new)]
            break
        if abs(gtd_new) <= -c2 * gtd:
            done = True
            break
        if gtd_new >= 0:
            bracket = [(t_prev, f_prev, g_prev, gtd_prev), (t, f_new, g_new, gtd_new)]
            break
        min_step = t + 0.01 * (t - t_prev)
        max_step = t * 10.0
        nxt = _cubic_min(t_prev, f_prev, gtd_prev, t, f_new, gtd_new, (min_step, max_step))
        t_prev, f_prev, g_prev, gtd_prev = t, f_new, g_new, gtd_new
        t = nxt

    insuf_progress = False
    if bracket is not None:
        # order so that index 0 holds the lower loss
        if bracket[0][1] > bracket[1][1]:
            bracket.reverse()
    while not done and bracket is not None and ls_iter < max_ls:
        (t_lo, f_lo, g_lo, gtd_lo), (t_hi, f_hi, g_hi, gtd_hi) = bracket
        if abs(t_hi - t_lo) * d_norm < tol_change:
            break
        t = _cubic_min(t_lo, f_lo, gtd_lo, t_hi, f_hi, gtd_hi)
        b_lo, b_hi = min(t_lo, t_hi), max(t_lo, t_hi)
        eps = 0.1 * (b_hi - b_lo)
        if min(b_hi - t, t - b_lo) < eps:
            if insuf_progress or t >= b_hi or t <= b_lo:
                t = b_hi - eps if abs(t - b_hi) < abs(t - b_lo) else b_lo + eps
                insuf_progress = False
            else:
                insuf_progress = True
        else:
            insuf_progress = False
        f_new, g_new = _safe_eval(fg, x + t * d)
        evals += 1
        ls_iter += 1
        gtd_new = float(g_new @ d) if g_new is not None else np.nan
        if armijo(t, f_new) and f_new < best[1]:
            best = (t, f_new, g_new)
        if not armijo(t, f_new) or f_new >= f_lo:
            bracket[1] = (t, f_new, g_new, gtd_new)
        else:
            if abs(gtd_new) <= -c2 * gtd:
                done = True
                break
            if gtd_new * (t_hi - t_lo) >= 0:
                bracket[1] = bracket[0]
            bracket[0] = (t, f_new, g_new, gtd_new)
        if bracket[0][1] > bracket[1][1]:
            bracket.reverse()

    if done:
        return LineSearchResult(t, f_new, g_new, evals, "wolfe")
    if best[0] > 0.0:
        return LineSearchResult(best[0], best[1], best[2], evals, "armijo")
    return LineSearchResult(0.0, f, g, evals, "failed")


@dataclass
class StepDiagnostics:
    loss: float
    step: float
    n_evals: int
    status: str
    grad_inf: float


def step(state: LbfgsState, theta: np.ndarray, fg: LossAndGrad, f=None, g=None, max_ls=None):
    """One L-BFGS iteration from ``theta``.

    ``f``/``g`` may be supplied if already known at ``theta``.  Returns
    ``(theta_new, loss, diagnostics, grad_new)``.
    """
    evals = 0
    if f is None or g is None:
        f, g = fg(theta)
        evals += 1
    f = float(f)
    g = np.asarray(g, dtype=np.float64)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NonFiniteLoss(f"non-finite loss or gradient at current parameters (loss={f})")
    g_inf = float(np.max(np.abs(g))) if g.size else 0.0
    if g_inf <= state.tol_grad:
        return theta, f, StepDiagnostics(f, 0.0, evals, "converged", g_inf), g

    d = state.direction(g)
    gtd = float(g @ d)
    if gtd > -1e-300 or not np.isfinite(gtd):
        state.reset()
        d = -g
        gtd = float(g @ d)
    if state.s_hist:
        t = 1.0
    else:
        t = min(1.0, 1.0 / float(np.sum(np.abs(g))))
    ls = strong_wolfe(fg, theta, t, d, f, g, gtd, state.c1, state.c2,
                      max_ls=state.max_ls if max_ls is None else max(1, max_ls))
    evals += ls.n_evals
    state.n_evals += evals
    state.n_iter += 1
    if ls.status == "failed":
        return theta, f, StepDiagnostics(f, 0.0, evals, "ls_failed", g_inf), g
    s = ls.t * d
    y = ls.g - g
    state.push(s, y)
    theta_new = theta + s
    g_new_inf = float(np.max(np.abs(ls.g)))
    status = ls.status
    if g_new_inf <= state.tol_grad:
        status = "converged"
    elif abs(ls.f - f) <= state.tol_change * max(abs(f), 1e-300):
        status = "converged"
    return theta_new, ls.f, StepDiagnostics(ls.f, ls.t, evals, status, g_new_inf), ls.g


@dataclass
class RunDiagnostics:
    iterations: int
    n_evals: int
    final_step: float
    status: str
    losses: list[float]


def minimize(state: LbfgsState, theta: np.ndarray, fg: LossAndGrad,
             max_evals: int = 20, max_iter: int | None = None):
    """Run L-BFGS iterations until the evaluation budget is spent or convergence.

    ``losses`` in the diagnostics starts with the loss at the initial point
    and records each accepted step, so it is non-increasing.
    """
    theta = np.asarray(theta, dtype=np.float64).copy()
    max_iter = max_evals if max_iter is None else max_iter
    f, g = fg(theta)
    evals = 1
    f = float(f)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NonFiniteLoss(f"non-finite loss at start of run (loss={f})")
    losses = [f]
    status, t_last, iters = "budget", 0.0, 0
    while iters < max_iter and evals < max_evals:
        theta, f, diag, g = step(state, theta, fg, f, g, max_ls=min(state.max_ls, max_evals - evals))
        iters += 1
        evals += diag.n_evals
        if diag.step > 0:
            losses.append(f)
            t_last = diag.step
        if diag.status in ("converged", "ls_failed"):
            status = diag.status
            break
    log.debug("lbfgs run: %d iterations, %d evals, status %s, loss %.3e", iters, evals, status, f)
    return theta, f, RunDiagnostics(iters, evals, t_last, status, losses)
