"""Optimal stopping of generalised Brownian bridges ("view bridges")."""

from .curves import LinearFamily, PowerFamily, SqrtFamily, Tabulated
from .freeboundary import barrier, beta_of_alpha, solve_x_alpha
from .process import ModelParams
from .valuefn import ValueContext, f_reduced, value

__all__ = [
    "LinearFamily",
    "PowerFamily",
    "SqrtFamily",
    "Tabulated",
    "barrier",
    "beta_of_alpha",
    "solve_x_alpha",
    "ModelParams",
    "ValueContext",
    "f_reduced",
    "value",
]
