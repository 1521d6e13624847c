import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.optimize import line_search

from soliton_vqe.models import OptimizerConfig

FloatArray = npt.NDArray[np.float64]
Objective = Callable[[FloatArray], float]
Gradient = Callable[[FloatArray], FloatArray]

BfgsStatus = Literal["converged", "max_iterations", "line_search_failed"]


class NonFiniteStart(ValueError):
    pass


@dataclass
class BfgsResult:
    theta: FloatArray
    value: float
    iterations: int
    status: BfgsStatus
    message: str
    trace: list[tuple[int, float]] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


class _GradientMemo:
    """The last gradient evaluated by the line search, reused at the accepted point."""

    def __init__(self, grad: Gradient) -> None:
        self._grad = grad
        self._x: FloatArray | None = None
        self._g: FloatArray | None = None

    def __call__(self, x: FloatArray) -> FloatArray:
        g = self._grad(x)
        self._x, self._g = np.array(x, dtype=np.float64), g
        return g

    def at(self, x: FloatArray) -> FloatArray:
        if self._g is not None and np.array_equal(self._x, x):
            return self._g
        return self._grad(x)


def _wolfe_step(
    objective: Objective,
    grad: _GradientMemo,
    x: FloatArray,
    p: FloatArray,
    g: FloatArray,
    f: float,
    old_f: float,
    cfg: OptimizerConfig,
) -> tuple[float | None, float | None, FloatArray | None]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        alpha, _, _, f_new, _, _ = line_search(
            objective, grad, x, p, gfk=g, old_fval=f, old_old_fval=old_f, c1=cfg.wolfe_c1, c2=cfg.wolfe_c2
        )
    if alpha is None:
        return None, None, None
    # scipy returns only the slope at the accepted point; its gradient is the last one evaluated there
    return float(alpha), float(f_new), np.asarray(grad.at(x + alpha * p), dtype=np.float64)


def minimize_bfgs(objective: Objective, grad: Gradient, theta0: npt.ArrayLike, cfg: OptimizerConfig) -> BfgsResult:
    """
    Quasi-Newton minimization with an inverse-Hessian BFGS update and a strong-Wolfe line search.
    Stops when the gradient inf-norm falls below cfg.convergence_grad_tol, at cfg.max_iterations,
    or when the line search cannot find an acceptable step even along steepest descent.
    """
    x = np.array(theta0, dtype=np.float64)
    f = float(objective(x))
    if not math.isfinite(f):
        raise NonFiniteStart(f"objective is {f} at the starting point")
    g = grad(x)
    memo = _GradientMemo(grad)

    n = x.size
    identity = np.eye(n)
    h_inv = identity.copy()
    first_update = True
    # same initial-step heuristic as scipy's own BFGS
    old_f = f + float(np.linalg.norm(g)) / 2

    trace = [(0, f)]
    status: BfgsStatus = "max_iterations"
    message = f"reached the cap of {cfg.max_iterations} iterations"
    iterations = 0

    while iterations < cfg.max_iterations:
        if np.max(np.abs(g)) < cfg.convergence_grad_tol:
            status, message = "converged", "gradient inf-norm below tolerance"
            break

        p = -h_inv @ g
        if g @ p >= 0:
            h_inv, first_update = identity.copy(), True
            p = -g

        alpha, f_new, g_new = _wolfe_step(objective, memo, x, p, g, f, old_f, cfg)
        if alpha is None and not first_update:
            logging.debug("line search failed at iteration %d, retrying along steepest descent", iterations)
            h_inv, first_update = identity.copy(), True
            p = -g
            alpha, f_new, g_new = _wolfe_step(objective, memo, x, p, g, f, old_f, cfg)
        if alpha is None or f_new is None or g_new is None:
            status, message = "line_search_failed", f"no strong-Wolfe step found at iteration {iterations}"
            logging.warning("BFGS stopped: %s (f=%.12g)", message, f)
            break

        s = alpha * p
        y = g_new - g
        x = x + s
        old_f, f, g = f, f_new, g_new
        iterations += 1
        trace.append((iterations, f))

        ys = float(y @ s)
        if ys > 1e-16:
            if first_update:
                h_inv = (ys / float(y @ y)) * identity
                first_update = False
            rho = 1.0 / ys
            left = identity - rho * np.outer(s, y)
            h_inv = left @ h_inv @ left.T + rho * np.outer(s, s)

        if iterations % 500 == 0:
            logging.debug("BFGS iteration %d: f=%.12g |g|=%.3e", iterations, f, np.max(np.abs(g)))
    else:
        if np.max(np.abs(g)) < cfg.convergence_grad_tol:
            status, message = "converged", "gradient inf-norm below tolerance"

    return BfgsResult(theta=x, value=f, iterations=iterations, status=status, message=message, trace=trace)
