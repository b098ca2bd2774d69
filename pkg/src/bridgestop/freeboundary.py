"""Free-boundary constant beta(alpha) and the optimal barrier."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import optimize

from .curves import CurveSpec
from .specfun import SpecialFnContext, h1, h1_log_derivative, h1_prime

ALPHA_MAX = 8.0
_MAX_DOUBLINGS = 60
_MAX_ITER = 200
_XTOL = 1e-12


class BoundaryError(RuntimeError):
    """Root bracketing or convergence failure."""


@dataclass(frozen=True)
class BoundarySolution:
    alpha: float
    x_alpha: Optional[float]
    beta: float
    residual: float
    bracket: tuple[float, float]

    @property
    def relative_residual(self) -> float:
        """Residual divided by ``h1(x_alpha)``; 0 for alpha = 0."""
        if self.x_alpha is None:
            return 0.0
        return stationarity_ratio(SpecialFnContext(self.alpha), self.x_alpha)


def stationarity_ratio(ctx: SpecialFnContext, x: float) -> float:
    """``(x h1'(x) - h1(x)) / h1(x)``; same sign as the unscaled condition."""
    return x * h1_log_derivative(ctx, x) - 1.0


def stationarity(ctx: SpecialFnContext, x: float) -> float:
    """``x h1'(x) - h1(x)``, zero exactly at the critical point of ``h1(x)/x``."""
    return x * h1_prime(ctx, x) - h1(ctx, x)


def _check_alpha(alpha: float) -> None:
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError(f"alpha must be a finite non-negative number, got {alpha}")
    if alpha > ALPHA_MAX:
        raise ValueError(f"alpha={alpha} outside the supported range (0, {ALPHA_MAX}]")


def solve_x_alpha(alpha: float) -> BoundarySolution:
    """Find the unique negative root of ``x h1'(x) = h1(x)``.

    The root is bracketed between 0 (where the condition is ``-h1(0) < 0``) and
    a left end expanded geometrically from -0.25; then Brent's method polishes
    it to an absolute width of 1e-12.
    """
    _check_alpha(alpha)
    if alpha == 0:
        raise ValueError("solve_x_alpha needs alpha > 0; beta(0) = 1 in closed form")
    ctx = SpecialFnContext(alpha)

    def q(x: float) -> float:
        return stationarity_ratio(ctx, x)

    hi = 0.0
    lo = -0.25
    for _ in range(_MAX_DOUBLINGS):
        if q(lo) > 0:
            break
        hi = lo
        lo *= 2.0
    else:
        raise BoundaryError(
            f"no sign change for alpha={alpha} down to x={lo}; h1 evaluation is suspect"
        )

    try:
        root, info = optimize.brentq(
            q, lo, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps, maxiter=_MAX_ITER,
            full_output=True,
        )
    except RuntimeError as exc:
        raise BoundaryError(f"root polish failed for alpha={alpha}: {exc}") from exc
    if not info.converged:
        raise BoundaryError(f"root polish did not converge for alpha={alpha}")

    return BoundarySolution(
        alpha=alpha,
        x_alpha=root,
        beta=-root / alpha,
        residual=stationarity(ctx, root),
        bracket=(lo, hi),
    )


def beta_of_alpha(alpha: float) -> float:
    """Barrier scale beta(alpha); exactly 1 at alpha = 0."""
    _check_alpha(alpha)
    if alpha == 0:
        return 1.0
    return solve_x_alpha(alpha).beta


def boundary_solution(alpha: float) -> BoundarySolution:
    """Like :func:`solve_x_alpha` but also accepts alpha = 0."""
    _check_alpha(alpha)
    if alpha == 0:
        return BoundarySolution(alpha=0.0, x_alpha=None, beta=1.0, residual=0.0, bracket=(0.0, 0.0))
    return solve_x_alpha(alpha)


def barrier(alpha: float, curve: CurveSpec, t: float) -> float:
    """Optimal stopping level gamma(t) = b(t) + gamma(1).

    The barrier does not depend on alpha once the diffusion scale is beta(alpha);
    the argument is kept so callers state which model they mean.
    """
    _check_alpha(alpha)
    return curve.gamma(t)


def sign_changes(alpha: float, lo: float = -10.0, hi: float = -1e-4, step: float = 1e-3) -> list[float]:
    """Brute-force scan for sign changes of the stationarity condition on [lo, hi].

    Returns the left grid point of each bracketing pair.  Used to confirm the
    root is unique.
    """
    ctx = SpecialFnContext(alpha)
    xs = np.arange(lo, hi, step)
    vals = np.array([stationarity_ratio(ctx, float(x)) for x in xs])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    return [float(xs[i]) for i in idx]


def beta_sweep(alphas: Iterable[float]) -> list[BoundarySolution]:
    """Independent solves on each alpha (no continuation between points)."""
    return [boundary_solution(float(a)) for a in alphas]


def sweep_csv(solutions: Iterable[BoundarySolution]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "beta", "x_alpha", "residual"])
    for sol in solutions:
        writer.writerow([
            repr(sol.alpha),
            repr(sol.beta),
            "" if sol.x_alpha is None else repr(sol.x_alpha),
            repr(sol.residual),
        ])
    return buf.getvalue()
