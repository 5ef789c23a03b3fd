"""BFGS with Armijo backtracking and central-difference gradients."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CalibrationError, InvalidArgumentError

logger = logging.getLogger(__name__)


class NonFiniteObjectiveError(CalibrationError):
    def __init__(self, index):
        super().__init__(f"objective not finite when probing coordinate {index}")
        self.index = index


@dataclass(frozen=True)
class MinimizeOptions:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-12
    fd_step_relative: float = 1e-6
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_halvings: int = 60
    workers: int = 1
    # stop as soon as f reaches this known lower bound (e.g. 0 for a distance)
    objective_floor: float = -np.inf

    def __post_init__(self):
        if self.max_iterations < 0:
            raise InvalidArgumentError("max_iterations must be >= 0")
        for name in ("gradient_tolerance", "step_tolerance", "fd_step_relative", "initial_step"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if not 0 < self.shrink < 1:
            raise InvalidArgumentError("shrink must lie in (0, 1)")
        if not 0 < self.sufficient_decrease <= 0.5:
            raise InvalidArgumentError("sufficient_decrease must lie in (0, 0.5]")
        if self.workers < 1:
            raise InvalidArgumentError("workers must be >= 1")


@dataclass
class MinimizeResult:
    x_star: np.ndarray
    f_star: float
    gradient_norm: float
    iterations: int
    converged: bool
    status: str
    trace: list = field(default_factory=list)  # (f, |g|) per accepted iterate, starting at x0


def numeric_gradient(
    f: Callable[[np.ndarray], float], x, h_rel: float = 1e-6, workers: int = 1
) -> np.ndarray:
    """Central differences with step h_rel * max(1, |x_i|) per coordinate."""
    x = np.asarray(x, dtype=float)
    h = h_rel * np.maximum(1.0, np.abs(x))

    def component(i):
        e = np.zeros_like(x)
        e[i] = h[i]
        fp, fm = f(x + e), f(x - e)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteObjectiveError(i)
        return (fp - fm) / (2.0 * h[i])

    if workers > 1:
        # each coordinate is computed independently, so results do not
        # depend on scheduling
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(component, range(x.size))))
    return np.array([component(i) for i in range(x.size)])


def _backtrack(f, x, fx, p, slope, opts):
    t = opts.initial_step
    for _ in range(opts.max_halvings + 1):
        x_new = x + t * p
        f_new = float(f(x_new))
        if np.isfinite(f_new) and f_new <= fx + opts.sufficient_decrease * t * slope and f_new < fx:
            return True, x_new, f_new
        t *= opts.shrink
    return False, x, fx


def bfgs_minimize(
    f: Callable[[np.ndarray], float],
    x0,
    opts: MinimizeOptions = MinimizeOptions(),
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    callback: Optional[Callable] = None,
) -> MinimizeResult:
    """Minimize ``f`` from ``x0``.

    ``callback(k, x, fx, g, H, s)`` is called after every accepted step with the
    updated inverse-Hessian estimate and the step just taken.
    """
    if grad is None:
        def grad(z):
            return numeric_gradient(f, z, opts.fd_step_relative, opts.workers)

    x = np.array(x0, dtype=float)
    fx = float(f(x))
    if not np.isfinite(fx):
        raise InvalidArgumentError("objective is not finite at x0")
    g = grad(x)
    n = x.size
    H = np.eye(n)
    scaled = False
    trace = [(fx, float(np.linalg.norm(g)))]
    status = "max_iterations"
    converged = False
    k = 0

    while True:
        gnorm = float(np.linalg.norm(g))
        if fx <= opts.objective_floor:
            status, converged = "objective_floor", True
            break
        if gnorm <= opts.gradient_tolerance:
            status, converged = "gradient_tolerance", True
            break
        if k >= opts.max_iterations:
            break

        p = -H @ g
        slope = float(g @ p)
        if slope >= 0:
            H = np.eye(n)
            p, slope = -g, -gnorm**2

        accepted, x_new, f_new = _backtrack(f, x, fx, p, slope, opts)
        if not accepted and not np.array_equal(p, -g):
            # quasi-Newton direction failed; retry once along steepest descent
            H = np.eye(n)
            p, slope = -g, -gnorm**2
            accepted, x_new, f_new = _backtrack(f, x, fx, p, slope, opts)
        if not accepted:
            status = "stagnated"
            break
        if f_new > fx:
            raise CalibrationError("line search accepted an increase")

        s = x_new - x
        g_new = grad(x_new)
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(y) * np.linalg.norm(s):
            if not scaled:
                H = np.eye(n) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            Hy = H @ y
            H = (
                H
                - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s)
            )
            H = 0.5 * (H + H.T)

        x, fx, g = x_new, f_new, g_new
        k += 1
        trace.append((fx, float(np.linalg.norm(g))))
        if callback is not None:
            callback(k, x, fx, g, H, s)
        logger.debug("iter %d f=%.9g |g|=%.3g step=%.3g", k, fx, trace[-1][1], np.linalg.norm(s))
        if np.linalg.norm(s) <= opts.step_tolerance:
            status, converged = "step_tolerance", True
            break

    return MinimizeResult(
        x_star=x,
        f_star=fx,
        gradient_norm=float(np.linalg.norm(g)),
        iterations=k,
        converged=converged,
        status=status,
        trace=trace,
    )
