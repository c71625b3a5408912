"""Full-batch L-BFGS with a strong Wolfe line search.

The search direction comes from the two-loop recursion over the last
``memory`` curvature pairs; step lengths satisfy the strong Wolfe
conditions (bracketing then zoom with safeguarded cubic interpolation).
An accepted step is polished once by the minimizer of the cubic through
its end points; the polished step is kept only if it is itself a strong
Wolfe step with lower loss. On a quadratic this makes every line search
exact, so the method terminates in at most ``dim`` iterations.
When the line search cannot find such a step the iteration falls back to
a backtracking steepest-descent step and the memory is cleared.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


class LineSearchError(RuntimeError):
    pass


@dataclass
class Step:
    iteration: int
    loss: float
    grad_norm: float
    alpha: float
    kind: str  # "lbfgs" or "fallback"


@dataclass
class LbfgsResult:
    x: np.ndarray
    loss: float
    grad: np.ndarray
    steps: list[Step] = field(default_factory=list)
    converged: bool = False
    message: str = ""


def two_loop(grad: np.ndarray, pairs) -> np.ndarray:
    """Return -H g using the stored (s, y, rho) pairs, oldest first."""
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def _cubic_min(a, fa, da, b, fb, db):
    d1 = da + db - 3 * (fa - fb) / (a - b)
    rad = d1 * d1 - da * db
    if rad < 0:
        return None
    d2 = np.copysign(np.sqrt(rad), b - a)
    denom = db - da + 2 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


def strong_wolfe(
    phi: Callable[[float], tuple[float, float, np.ndarray]],
    f0: float,
    d0: float,
    alpha: float = 1.0,
    c1: float = 1e-4,
    c2: float = 0.9,
    alpha_max: float = 1e8,
    max_evals: int = 30,
    refine: bool = True,
):
    """Find alpha with f(a) <= f0 + c1 a d0 and |f'(a)| <= c2 |d0|.

    ``phi(a)`` returns (f, directional derivative, gradient). Returns
    ``(alpha, f, grad)`` or raises :class:`LineSearchError`.
    """
    if d0 >= 0:
        raise LineSearchError("not a descent direction")
    a, f, d, g = _bracket_zoom(phi, f0, d0, alpha, c1, c2, alpha_max, max_evals)
    if refine:
        t = _cubic_min(0.0, f0, d0, a, f, d)
        if t is not None and np.isfinite(t) and 0 < t < 10 * a and abs(t - a) > 1e-6 * a:
            ft, dt, gt = phi(t)
            if ft < f and ft <= f0 + c1 * t * d0 and abs(dt) <= -c2 * d0:
                return t, ft, gt
    return a, f, g


def _bracket_zoom(phi, f0, d0, alpha, c1, c2, alpha_max, max_evals):
    evals = 0

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        nonlocal evals
        while evals < max_evals:
            left, right = min(lo, hi), max(lo, hi)
            width = right - left
            if width <= 1e-14 * max(1.0, right):
                break
            a = None
            if np.isfinite(f_hi) and np.isfinite(d_hi):
                a = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
            if a is None or not np.isfinite(a) or not (left + 0.1 * width <= a <= right - 0.1 * width):
                a = 0.5 * (lo + hi)
            f, d, g = phi(a)
            evals += 1
            if not np.isfinite(f) or f > f0 + c1 * a * d0 or f >= f_lo:
                hi, f_hi, d_hi = a, f, d
            else:
                if abs(d) <= -c2 * d0:
                    return a, f, d, g
                if d * (hi - lo) >= 0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo = a, f, d
        raise LineSearchError("zoom did not converge")

    a_prev, f_prev, d_prev = 0.0, f0, d0
    while evals < max_evals:
        f, d, g = phi(alpha)
        evals += 1
        if not np.isfinite(f) or f > f0 + c1 * alpha * d0 or (a_prev > 0 and f >= f_prev):
            return zoom(a_prev, f_prev, d_prev, alpha, f, d)
        if abs(d) <= -c2 * d0:
            return alpha, f, d, g
        if d >= 0:
            return zoom(alpha, f, d, a_prev, f_prev, d_prev)
        a_prev, f_prev, d_prev = alpha, f, d
        alpha = min(2.0 * alpha, alpha_max)
    raise LineSearchError("bracketing phase exhausted its evaluations")


def backtracking(fun: Objective, x, f0, g0, c1=1e-4, shrink=0.5, max_evals=60):
    """Armijo backtracking along -g; returns (alpha, x_new, f, g) or None."""
    direction = -g0
    slope = -(g0 @ g0)
    alpha = 1.0 / max(1.0, np.abs(g0).sum())
    for _ in range(max_evals):
        x_new = x + alpha * direction
        f, g = fun(x_new)
        if np.isfinite(f) and f <= f0 + c1 * alpha * slope and f < f0:
            return alpha, x_new, f, g
        alpha *= shrink
    return None


def minimize(
    fun: Objective,
    x0: np.ndarray,
    max_iter: int = 500,
    memory: int = 10,
    c1: float = 1e-4,
    c2: float = 0.9,
    gtol: float = 1e-8,
    callback: Callable[[Step, np.ndarray], None] | None = None,
    refine: bool = True,
) -> LbfgsResult:
    """Minimize ``fun`` (returning loss and gradient) from ``x0``.

    Each accepted parameter update counts as one iteration; the loop ends
    after ``max_iter`` updates or once the gradient norm drops below
    ``gtol``. ``callback(step, x)`` runs after every update. ``refine``
    toggles the cubic polish of accepted line-search steps.
    """
    if not 0 < c1 < c2 < 1:
        raise ValueError("need 0 < c1 < c2 < 1")
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    if not np.isfinite(f):
        raise FloatingPointError("objective is not finite at the starting point")
    pairs: deque = deque(maxlen=memory)
    result = LbfgsResult(x, f, g)

    for it in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < gtol:
            result.converged = True
            result.message = "gradient norm below tolerance"
            break
        direction = two_loop(g, list(pairs))
        slope = float(direction @ g)
        if slope >= 0:
            pairs.clear()
            direction, slope = -g, -float(g @ g)
        alpha0 = 1.0 if pairs else min(1.0, 1.0 / np.abs(g).sum())

        def phi(a, x=x, direction=direction):
            fa, ga = fun(x + a * direction)
            return fa, float(ga @ direction), ga

        kind = "lbfgs"
        try:
            alpha, f_new, g_new = strong_wolfe(phi, f, slope, alpha0, c1, c2, refine=refine)
            x_new = x + alpha * direction
        except LineSearchError as exc:
            log.debug("iteration %d: line search failed (%s); steepest descent fallback", it, exc)
            pairs.clear()
            found = backtracking(fun, x, f, g, c1)
            if found is None:
                result.message = "no decrease possible along steepest descent"
                break
            alpha, x_new, f_new, g_new = found
            kind = "fallback"

        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(y @ y) and sy > 0:
            pairs.append((s, y, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        step = Step(it, f, float(np.linalg.norm(g)), float(alpha), kind)
        result.steps.append(step)
        if callback is not None:
            callback(step, x)
    else:
        result.message = "maximum number of iterations reached"

    if not result.converged and float(np.linalg.norm(g)) < gtol:
        result.converged = True
    result.x, result.loss, result.grad = x, f, g
    return result
