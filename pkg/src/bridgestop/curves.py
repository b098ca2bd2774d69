"""Investor-view curves gamma(t) and their bridge offsets b(t) = gamma(t) - gamma(1).

Every curve works on scalars and numpy arrays alike.  ``b`` must be strictly
decreasing on [0, 1] with ``b(1) = 0``; :func:`validate` checks this.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

ArrayLike = Union[float, np.ndarray]


class CurveError(ValueError):
    """Invalid curve definition or out-of-domain evaluation."""


def _check_t(t: ArrayLike, *, closed: bool = True) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    bad = (arr < 0.0) | (arr > 1.0) if closed else (arr < 0.0) | (arr >= 1.0)
    if np.any(bad) or np.any(np.isnan(arr)):
        interval = "[0, 1]" if closed else "[0, 1)"
        raise CurveError(f"t must lie in {interval}, got {t}")
    return arr


def _out(arr: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(arr) if np.ndim(like) == 0 else arr


@dataclass(frozen=True)
class CurveSpec:
    """Base for all curves; subclasses implement ``_b`` and ``_db``."""

    gamma_final: float = 0.0

    def _b(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _db(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # True when b'(t) stays finite as t -> 1.
    derivative_bounded_at_end = False

    def b(self, t: ArrayLike) -> ArrayLike:
        return _out(self._b(_check_t(t)), t)

    def db(self, t: ArrayLike) -> ArrayLike:
        arr = _check_t(t, closed=self.derivative_bounded_at_end)
        return _out(self._db(arr), t)

    def gamma(self, t: ArrayLike) -> ArrayLike:
        return _out(self._b(_check_t(t)) + self.gamma_final, t)

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class SqrtFamily(CurveSpec):
    """b(t) = scale * sqrt(1 - t); the Brownian-bridge barrier shape."""

    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise CurveError("SqrtFamily scale must be positive")

    def _b(self, t):
        return self.scale * np.sqrt(1.0 - t)

    def _db(self, t):
        return -0.5 * self.scale / np.sqrt(1.0 - t)

    def describe(self) -> dict:
        return {"family": "sqrt", "scale": self.scale, "gamma_final": self.gamma_final}


@dataclass(frozen=True)
class PowerFamily(CurveSpec):
    """b(t) = scale * (1 - t)**exponent."""

    scale: float = 1.0
    exponent: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise CurveError("PowerFamily scale must be positive")
        if not self.exponent > 0:
            raise CurveError("PowerFamily exponent must be positive")

    @property
    def derivative_bounded_at_end(self) -> bool:  # type: ignore[override]
        return self.exponent >= 1.0

    def _b(self, t):
        return self.scale * (1.0 - t) ** self.exponent

    def _db(self, t):
        return -self.scale * self.exponent * (1.0 - t) ** (self.exponent - 1.0)

    def describe(self) -> dict:
        return {
            "family": "power",
            "scale": self.scale,
            "exponent": self.exponent,
            "gamma_final": self.gamma_final,
        }


@dataclass(frozen=True)
class LinearFamily(CurveSpec):
    """b(t) = scale * (1 - t)."""

    scale: float = 1.0
    derivative_bounded_at_end = True

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise CurveError("LinearFamily scale must be positive")

    def _b(self, t):
        return self.scale * (1.0 - t)

    def _db(self, t):
        return np.full_like(t, -self.scale)

    def describe(self) -> dict:
        return {"family": "linear", "scale": self.scale, "gamma_final": self.gamma_final}


@dataclass(frozen=True)
class Tabulated(CurveSpec):
    """Curve through breakpoints ``(t_i, gamma_i)`` with t running from 0 to 1.

    gamma(1) is the last tabulated value, so b(1) = 0 holds exactly.  The
    interpolant is PCHIP, which keeps monotone data monotone.
    """

    times: tuple[float, ...] = ()
    gammas: tuple[float, ...] = ()
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)
    _dinterp: PchipInterpolator = field(init=False, repr=False, compare=False)
    derivative_bounded_at_end = True

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        g = np.asarray(self.gammas, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.size != g.size:
            raise CurveError("tabulated curve needs at least two (t, gamma) pairs of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(g))):
            raise CurveError("tabulated curve contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise CurveError("tabulated times must be strictly increasing")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise CurveError("tabulated times must start at 0 and end at 1")
        object.__setattr__(self, "gamma_final", float(g[-1]))
        interp = PchipInterpolator(t, g - g[-1], extrapolate=False)
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_dinterp", interp.derivative())

    @classmethod
    def from_arrays(cls, times, gammas) -> "Tabulated":
        return cls(times=tuple(float(v) for v in times), gammas=tuple(float(v) for v in gammas))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Tabulated":
        """Read a ``t,gamma`` CSV file."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "gamma"]:
                raise CurveError(f"{path}: expected header 't,gamma'")
            times, gammas = [], []
            for lineno, row in enumerate(reader, start=2):
                try:
                    times.append(float(row["t"]))
                    gammas.append(float(row["gamma"]))
                except (TypeError, ValueError) as exc:
                    raise CurveError(f"{path}:{lineno}: bad number") from exc
        return cls.from_arrays(times, gammas)

    def _b(self, t):
        out = self._interp(t)
        # b(1) = 0 exactly; PCHIP already interpolates the endpoint but be explicit.
        return np.where(t == 1.0, 0.0, out)

    def _db(self, t):
        return self._dinterp(t)

    def describe(self) -> dict:
        return {"family": "file", "points": len(self.times), "gamma_final": self.gamma_final}


def b_value(curve: CurveSpec, t: ArrayLike) -> ArrayLike:
    return curve.b(t)


def b_derivative(curve: CurveSpec, t: ArrayLike) -> ArrayLike:
    return curve.db(t)


def validate(curve: CurveSpec, n_grid: int = 1000) -> list[str]:
    """Return a list of violations; empty means the curve is usable."""
    problems: list[str] = []
    if isinstance(curve, Tabulated):
        g = np.asarray(curve.gammas)
        for i in np.nonzero(np.diff(g) >= 0)[0]:
            problems.append(f"not decreasing at t={curve.times[i + 1]:g}")
    t = np.linspace(0.0, 1.0, n_grid)
    b = np.asarray(curve.b(t))
    if not np.all(np.isfinite(b)):
        problems.append("b(t) is not finite on [0, 1]")
        return problems
    end = float(curve.b(1.0))
    if abs(end) > 1e-12:
        problems.append(f"b(1) = {end!r}, expected 0")
    if np.any(b[:-1] <= 0):
        i = int(np.argmax(b[:-1] <= 0))
        problems.append(f"not positive at t={t[i]:g}")
    steps = np.diff(b)
    already = any(p.startswith("not decreasing") for p in problems)
    if np.any(steps >= 0) and not already:
        i = int(np.argmax(steps >= 0))
        problems.append(f"not decreasing at t={t[i + 1]:g}")
    return problems


def curve_from_options(
    family: str,
    scale: float | None = None,
    exponent: float | None = None,
    path: str | None = None,
    gamma_final: float = 0.0,
) -> CurveSpec:
    """Build a curve from CLI-style options."""
    if family == "file":
        if not path:
            raise CurveError("--curve file needs --curve-file")
        return Tabulated.from_csv(path)
    if scale is None:
        raise CurveError(f"--curve {family} needs --curve-scale")
    if family == "sqrt":
        return SqrtFamily(gamma_final=gamma_final, scale=scale)
    if family == "linear":
        return LinearFamily(gamma_final=gamma_final, scale=scale)
    if family == "power":
        return PowerFamily(gamma_final=gamma_final, scale=scale, exponent=1.0 if exponent is None else exponent)
    raise CurveError(f"unknown curve family {family!r}")


__all__ = [
    "CurveError",
    "CurveSpec",
    "SqrtFamily",
    "PowerFamily",
    "LinearFamily",
    "Tabulated",
    "b_value",
    "b_derivative",
    "validate",
    "curve_from_options",
]
