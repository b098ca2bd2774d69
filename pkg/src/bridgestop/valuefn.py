"""Closed-form value function of the view-bridge stopping problem.

With y = (x - gamma(1)) / b(t) the value is V(x, t) = gamma(1) + f(y) b(t) in
the continuation region x < gamma(t) and V = x otherwise, where

    f(y) = h1(-alpha beta y) / h1(-alpha beta)    (alpha > 0)
    f(y) = exp(y - 1)                             (alpha = 0)

for y < 1 and f(y) = y for y >= 1.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .curves import CurveSpec
from .freeboundary import beta_of_alpha
from .specfun import SpecialFnContext, log_h1, log_neg_h1_prime


class TerminalTimeWarning(UserWarning):
    """Value requested at t = 1, where it is fixed by the pinned endpoint."""


@dataclass(frozen=True)
class ValueContext:
    alpha: float
    curve: CurveSpec
    beta: Optional[float] = None
    special: Optional[SpecialFnContext] = field(init=False, default=None)
    log_normalization: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        if self.beta is None:
            object.__setattr__(self, "beta", beta_of_alpha(self.alpha))
        if self.alpha > 0:
            ctx = SpecialFnContext(self.alpha)
            object.__setattr__(self, "special", ctx)
            object.__setattr__(self, "log_normalization", log_h1(ctx, -self.alpha * self.beta))

    @property
    def normalization(self) -> float:
        """h1(-alpha beta); underflows to 0 for very small alpha, see log_normalization."""
        return math.exp(self.log_normalization) if self.alpha > 0 else 1.0


def f_reduced(ctx: ValueContext, y: float) -> float:
    if y >= 1.0:
        return float(y)
    if ctx.alpha == 0:
        return math.exp(y - 1.0)
    z = -ctx.alpha * ctx.beta * y
    return math.exp(log_h1(ctx.special, z) - ctx.log_normalization)


def f_reduced_prime(ctx: ValueContext, y: float) -> float:
    """df/dy from the closed-form derivative of h1 (left limit at y = 1)."""
    if y > 1.0:
        return 1.0
    if ctx.alpha == 0:
        return math.exp(y - 1.0)
    ab = ctx.alpha * ctx.beta
    return ab * math.exp(log_neg_h1_prime(ctx.special, -ab * y) - ctx.log_normalization)


def stop_region(ctx: ValueContext, x: float, t: float) -> bool:
    """True when (x, t) lies in the stopping region x >= gamma(t)."""
    return x >= ctx.curve.gamma(t)


def value(ctx: ValueContext, x: float, t: float) -> float:
    """V*(x, t).

    At t = 1 the pinned endpoint leaves nothing to optimise; max(x, gamma(1)) is
    returned with a :class:`TerminalTimeWarning`.
    """
    curve = ctx.curve
    g1 = curve.gamma_final
    if t == 1.0:
        warnings.warn("value at t = 1 is fixed by X_1 = gamma(1)", TerminalTimeWarning, stacklevel=2)
        return max(float(x), g1)
    bt = curve.b(t)
    if x >= bt + g1:
        return float(x)
    return g1 + f_reduced(ctx, (x - g1) / bt) * bt


def value_surface_csv(ctx: ValueContext, xs: Sequence[float], ts: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "t", "value", "region"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TerminalTimeWarning)
        for t in ts:
            for x in xs:
                region = "stop" if stop_region(ctx, x, t) else "continue"
                w.writerow([repr(float(x)), repr(float(t)), repr(value(ctx, x, t)), region])
    return buf.getvalue()
