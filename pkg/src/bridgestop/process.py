"""Simulation of the view bridge

    dX = (1 + alpha^2) (X - gamma(1)) b'(s)/b(s) ds + sqrt(-2 b'(s) b(s) / beta^2) dB,

pinned at ``X_1 = gamma(1)``.  The transition law from (x, t) to s is Gaussian
and known in closed form, so paths are sampled exactly on any grid.  An
Euler-Maruyama sampler is kept as an independent cross-check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .curves import CurveSpec


class ProcessError(ValueError):
    """Bad time arguments or grid for the process."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    curve: CurveSpec

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ProcessError(f"alpha must be >= 0, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ProcessError(f"beta must be > 0, got {self.beta}")

    @classmethod
    def optimal(cls, alpha: float, curve: CurveSpec) -> "ModelParams":
        """Model whose diffusion scale is beta(alpha), i.e. the one the value
        function and barrier refer to."""
        from .freeboundary import beta_of_alpha

        return cls(alpha=alpha, beta=beta_of_alpha(alpha), curve=curve)

    @property
    def theta(self) -> float:
        """Mean-reversion speed of the underlying OU process."""
        return self.alpha**2

    @property
    def sigma(self) -> float:
        """Volatility of the underlying OU process."""
        return math.sqrt(2.0 / self.beta**2)

    @property
    def gamma_final(self) -> float:
        return self.curve.gamma_final


@dataclass(frozen=True)
class PathGrid:
    times: np.ndarray
    values: np.ndarray


def _var_factor(alpha: float, log_ratio: np.ndarray) -> np.ndarray:
    """(1 - r^(2 alpha^2)) / alpha^2 with r = exp(log_ratio); -2 ln r at alpha = 0."""
    if alpha == 0:
        return -2.0 * log_ratio
    a2 = alpha * alpha
    return -np.expm1(2.0 * a2 * log_ratio) / a2


def _transition_coeffs(params: ModelParams, t: np.ndarray, s: np.ndarray):
    """Per-step (mean multiplier, standard deviation) of X_s - gamma(1) given X_t."""
    bt = np.asarray(params.curve.b(t), dtype=float)
    bs = np.asarray(params.curve.b(s), dtype=float)
    if np.any(bt <= 0):
        raise ProcessError("transition start time must satisfy b(t) > 0 (t < 1)")
    pinned = bs <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(np.where(pinned, 1.0, bs) / bt)
        mult = np.exp((1.0 + params.alpha**2) * log_r)
        var = (np.where(pinned, 0.0, bs) / params.beta) ** 2 * _var_factor(params.alpha, log_r)
    mult = np.where(pinned, 0.0, mult)
    var = np.where(pinned, 0.0, np.maximum(var, 0.0))
    return mult, np.sqrt(var), var


def _check_times(t: float, s: float) -> None:
    if not (0.0 <= t <= s <= 1.0):
        raise ProcessError(f"need 0 <= t <= s <= 1, got t={t}, s={s}")
    if t == 1.0:
        raise ProcessError("transition undefined from t = 1 (b(1) = 0)")


def mean_var(params: ModelParams, x: float, t: float, s: float) -> tuple[float, float]:
    """Mean and variance of X_s given X_t = x."""
    _check_times(t, s)
    if s == t:
        return float(x), 0.0
    mult, _, var = _transition_coeffs(params, np.asarray(t), np.asarray(s))
    g1 = params.gamma_final
    return float(g1 + (x - g1) * mult), float(var)


def sample_transition(
    params: ModelParams, x: float, t: float, s: float, rng: np.random.Generator
) -> float:
    """One exact draw of X_s given X_t = x."""
    mean, var = mean_var(params, x, t, s)
    if var == 0.0:
        return mean
    return mean + math.sqrt(var) * float(rng.standard_normal())


def _check_grid(grid: Sequence[float], t: float) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ProcessError("grid needs at least two points")
    if g[0] != t:
        raise ProcessError(f"grid must start at t={t}, starts at {g[0]}")
    if g[-1] != 1.0:
        raise ProcessError("grid must end at 1")
    if np.any(np.diff(g) <= 0):
        raise ProcessError("grid must be strictly increasing")
    if t >= 1.0 or t < 0:
        raise ProcessError("start time must lie in [0, 1)")
    return g


class ExactStepper:
    """Precomputed exact transitions on a fixed grid, applied to many paths at once."""

    def __init__(self, params: ModelParams, grid: Sequence[float], t: Optional[float] = None):
        self.params = params
        self.grid = _check_grid(grid, float(grid[0]) if t is None else t)
        self.mult, self.sd, _ = _transition_coeffs(params, self.grid[:-1], self.grid[1:])

    @property
    def n_steps(self) -> int:
        return self.grid.size - 1

    def paths(self, x: float, normals: np.ndarray) -> np.ndarray:
        """Values on the grid for each row of ``normals`` (shape (n_paths, n_steps))."""
        normals = np.atleast_2d(normals)
        if normals.shape[1] != self.n_steps:
            raise ProcessError("normals must have one column per grid step")
        g1 = self.params.gamma_final
        out = np.empty((normals.shape[0], self.grid.size))
        dev = np.full(normals.shape[0], float(x) - g1)
        out[:, 0] = x
        for k in range(self.n_steps):
            dev = self.mult[k] * dev + self.sd[k] * normals[:, k]
            out[:, k + 1] = dev + g1
        out[:, -1] = g1
        return out


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Independent stream for one path, derived from (seed, path index) alone."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path_index,))))


def path_normals(seed: int, start: int, stop: int, n_steps: int) -> np.ndarray:
    """Standard normals for paths ``start..stop-1``, one independent stream each."""
    out = np.empty((stop - start, n_steps))
    for row, i in enumerate(range(start, stop)):
        out[row] = path_rng(seed, i).standard_normal(n_steps)
    return out


def simulate_path(
    params: ModelParams,
    x: float,
    t: float,
    grid: Sequence[float],
    rng: np.random.Generator,
) -> PathGrid:
    """Chain exact transitions over ``grid`` (which must start at t and end at 1)."""
    stepper = ExactStepper(params, grid, t)
    values = stepper.paths(x, rng.standard_normal(stepper.n_steps)[None, :])[0]
    return PathGrid(times=stepper.grid.copy(), values=values)


def uniform_grid(t: float, n_steps: int) -> np.ndarray:
    grid = np.linspace(t, 1.0, n_steps + 1)
    grid[-1] = 1.0
    return grid


def euler_path(
    params: ModelParams,
    x: float,
    t: float,
    n_steps: int,
    t_end: float,
    rng: np.random.Generator,
    n_paths: int = 1,
    diffusion_scale: float = 1.0,
) -> PathGrid:
    """Euler-Maruyama discretisation of the SDE on [t, t_end].

    ``values`` has shape (n_steps + 1,) for a single path, otherwise
    (n_paths, n_steps + 1).  ``diffusion_scale = 0`` gives the deterministic
    drift ODE.
    """
    if t_end > 1.0 - 1e-3:
        raise ProcessError("euler_path needs t_end <= 1 - 1e-3 (diffusion singular at 1)")
    if not (0.0 <= t < t_end):
        raise ProcessError("need 0 <= t < t_end")
    if n_steps < 1:
        raise ProcessError("n_steps must be positive")
    curve = params.curve
    times = np.linspace(t, t_end, n_steps + 1)
    dt = np.diff(times)
    s = times[:-1]
    b = np.asarray(curve.b(s))
    db = np.asarray(curve.db(s))
    drift_coef = (1.0 + params.alpha**2) * db / b
    diff_coef = diffusion_scale * np.sqrt(-2.0 * db * b / params.beta**2)
    g1 = curve.gamma_final

    values = np.empty((n_paths, n_steps + 1))
    values[:, 0] = x
    cur = np.full(n_paths, float(x))
    for k in range(n_steps):
        dB = math.sqrt(dt[k]) * rng.standard_normal(n_paths)
        cur = cur + drift_coef[k] * (cur - g1) * dt[k] + diff_coef[k] * dB
        values[:, k + 1] = cur
    return PathGrid(times=times, values=values[0] if n_paths == 1 else values)


def diffusion_coefficient(params: ModelParams, s: float) -> float:
    """sqrt(-2 b'(s) b(s) / beta^2)."""
    c = params.curve
    return math.sqrt(-2.0 * float(c.db(s)) * float(c.b(s)) / params.beta**2)


def paths_csv(paths: Iterable[PathGrid]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path_id", "t", "x"])
    for pid, p in enumerate(paths):
        for tt, xx in zip(p.times, p.values):
            w.writerow([pid, repr(float(tt)), repr(float(xx))])
    return buf.getvalue()
