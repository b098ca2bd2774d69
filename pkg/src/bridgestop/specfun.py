"""Kummer function, log-gamma and the decaying solution ``h1``.

``h1`` is the solution of ``alpha^2 h'' = h + alpha^2 z h'`` that decays like
``z**(-2 xi)`` as ``z -> +inf`` (``xi = 1/(2 alpha^2)``).  Two evaluation routes
are used:

* the Kummer-series combination, exact in form but subject to cancellation
  for ``z > 0`` because both terms grow like ``exp(z^2/2)``;
* the integral ``h1(z) = 1/Gamma(2 xi) * int_0^inf t^(2xi-1) exp(-t^2/2 - z t) dt``,
  whose integrand is positive, so it has no cancellation.

The series is used whenever its cancellation loss is small enough; otherwise
the integral takes over.  Both agree to ~1e-12 where both are accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate

__all__ = [
    "SpecialFunctionError",
    "PrecisionError",
    "SpecialFnContext",
    "kummer_m",
    "log_gamma",
    "h1",
    "h1_prime",
    "h1_series",
    "h1_integral",
    "h1_prime_series",
    "log_h1",
    "log_neg_h1_prime",
    "h1_log_derivative",
    "Z_SWITCH",
    "Z_MAX",
]

Z_SWITCH = 4.0
Z_MAX = 50.0

# Largest tolerated ratio (largest series term / result) before the series
# route is abandoned; 1e3 keeps ~13 significant digits.
_MAX_CANCELLATION = 1e3
_TERM_RTOL = 1e-17
_MAX_TERMS = 100_000


class SpecialFunctionError(ArithmeticError):
    """Domain or overflow failure in a special-function evaluation."""


class PrecisionError(SpecialFunctionError):
    """Raised when the requested accuracy cannot be certified."""


def kummer_m(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric function M(a, b, z) by direct series summation.

    Summation stops once three consecutive terms are below 1e-17 of the running
    sum.  Intended for ``a, b > 0`` and ``z >= 0`` where all terms are positive;
    for negative ``z`` the series still converges but may lose digits.
    """
    if b <= 0 and float(b).is_integer():
        raise SpecialFunctionError(f"kummer_m: b={b} is a non-positive integer")
    if not math.isfinite(z):
        raise SpecialFunctionError("kummer_m: z must be finite")

    term = 1.0
    total = 1.0
    small = 0
    n = 0
    while small < 3:
        term *= (a + n) / (b + n) * z / (n + 1)
        n += 1
        if not math.isfinite(term):
            raise SpecialFunctionError(f"kummer_m overflow at a={a}, b={b}, z={z}")
        total += term
        if abs(term) < _TERM_RTOL * abs(total):
            small += 1
        else:
            small = 0
        if term == 0.0:
            break
        if n > _MAX_TERMS:
            raise SpecialFunctionError(f"kummer_m did not converge at a={a}, b={b}, z={z}")
    if not math.isfinite(total):
        raise SpecialFunctionError(f"kummer_m overflow at a={a}, b={b}, z={z}")
    return total


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise SpecialFunctionError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


@dataclass(frozen=True)
class SpecialFnContext:
    """Parameter bundle for ``h1`` at a given ``alpha > 0``.

    ``log_coef_even`` and ``log_coef_odd`` are the logs of the two prefactors
    in the series form, ``sqrt(pi) 2^-xi / Gamma(1/2 + xi)`` and
    ``sqrt(2 pi) 2^-xi / Gamma(xi)``.
    """

    alpha: float
    xi: float = field(default=math.nan)
    log_coef_even: float = field(init=False, repr=False)
    log_coef_odd: float = field(init=False, repr=False)
    log_gamma_2xi: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if math.isnan(self.xi):
            if not (self.alpha > 0 and math.isfinite(self.alpha)):
                raise ValueError(
                    "SpecialFnContext needs alpha > 0; alpha = 0 has the closed form exp(y - 1)"
                )
            object.__setattr__(self, "xi", 1.0 / (2.0 * self.alpha**2))
        elif not (self.xi > 0 and math.isfinite(self.xi)):
            raise ValueError(f"xi must be positive and finite, got {self.xi}")
        xi = self.xi
        half_log_pi = 0.5 * math.log(math.pi)
        object.__setattr__(
            self, "log_coef_even", half_log_pi - xi * math.log(2.0) - log_gamma(0.5 + xi)
        )
        object.__setattr__(
            self,
            "log_coef_odd",
            half_log_pi + (0.5 - xi) * math.log(2.0) - log_gamma(xi),
        )
        object.__setattr__(self, "log_gamma_2xi", log_gamma(2.0 * xi))

    @classmethod
    def from_xi(cls, xi: float) -> "SpecialFnContext":
        return cls(alpha=1.0 / math.sqrt(2.0 * xi), xi=xi)

    def shifted(self) -> "SpecialFnContext":
        """Context whose ``xi`` is larger by 1/2 (used for the derivative)."""
        return SpecialFnContext.from_xi(self.xi + 0.5)


def _log_sum(log_scale: float, terms: float) -> float:
    if not terms > 0.0:
        raise PrecisionError("series combination is not positive")
    return log_scale + math.log(terms)


def h1_series(ctx: SpecialFnContext, z: float) -> tuple[float, float]:
    """Series form of ``ln h1``; returns ``(log_value, cancellation_ratio)``.

    The ratio is ``max(|even|, |odd|) / |even - odd|``; anything much above
    one means digits were lost in the subtraction.
    """
    w = 0.5 * z * z
    even = kummer_m(ctx.xi, 0.5, w)
    odd = z * math.exp(ctx.log_coef_odd - ctx.log_coef_even) * kummer_m(ctx.xi + 0.5, 1.5, w)
    diff = even - odd
    if diff <= 0.0:
        return math.nan, math.inf
    return ctx.log_coef_even + math.log(diff), max(abs(even), abs(odd)) / diff


def h1_prime_series(ctx: SpecialFnContext, z: float) -> tuple[float, float]:
    """Series form of ``ln(-h1')`` via ``dM(a,b,w)/dw = (a/b) M(a+1,b+1,w)``.

    Returns ``(log_value, cancellation_ratio)`` like :func:`h1_series`.
    """
    xi = ctx.xi
    w = 0.5 * z * z
    even = math.exp(ctx.log_coef_even - ctx.log_coef_odd) * z * 2.0 * xi * kummer_m(xi + 1.0, 1.5, w)
    odd = kummer_m(xi + 0.5, 1.5, w) + z * z * (2.0 * xi + 1.0) / 3.0 * kummer_m(xi + 1.5, 2.5, w)
    diff = odd - even
    if diff <= 0.0:
        return math.nan, math.inf
    return ctx.log_coef_odd + math.log(diff), max(abs(even), odd) / diff


def h1_integral(ctx: SpecialFnContext, z: float) -> float:
    """Integral form of ``ln h1``, valid for every real z."""
    p = 2.0 * ctx.xi - 1.0  # power of t in the integrand
    if p > 0:
        peak = 0.5 * (-z + math.sqrt(z * z + 4.0 * p))
        log_peak = p * math.log(peak) - 0.5 * peak * peak - z * peak
    else:
        peak = max(-z, 0.0)
        log_peak = -0.5 * peak * peak - z * peak
    # Truncate where the integrand is below exp(-80) of its peak.
    upper = max(peak, 1.0)
    while True:
        log_at = -0.5 * upper * upper - z * upper + (p * math.log(upper) if p else 0.0)
        if log_at < log_peak - 80.0 and upper > peak:
            break
        upper *= 1.5

    opts = dict(epsabs=0.0, epsrel=1e-13, limit=500)
    if p >= 0:
        def integrand(t: float) -> float:
            if t <= 0.0:
                return 0.0 if p > 0 else math.exp(-log_peak)
            return math.exp(p * math.log(t) - 0.5 * t * t - z * t - log_peak)

        pts = [peak] if 0.0 < peak < upper else None
        val, _ = integrate.quad(integrand, 0.0, upper, points=pts, **opts)
    else:
        # t^p singular at 0: QAWS carries the algebraic weight.
        def integrand(t: float) -> float:
            return math.exp(-0.5 * t * t - z * t - log_peak)

        val, _ = integrate.quad(integrand, 0.0, upper, weight="alg", wvar=(p, 0.0), **opts)
    if not val > 0.0:
        raise PrecisionError(f"h1 quadrature failed at z={z}")
    return math.log(val) + log_peak - ctx.log_gamma_2xi


def _log_h1_asymptotic(ctx: SpecialFnContext, z: float) -> float:
    two_xi = 2.0 * ctx.xi
    return -two_xi * math.log(z) + math.log1p(-two_xi * (two_xi + 1.0) / (2.0 * z * z))


def log_h1(ctx: SpecialFnContext, z: float) -> float:
    """Natural log of :func:`h1`; stays finite where ``h1`` itself underflows."""
    z = float(z)
    if not math.isfinite(z):
        raise SpecialFunctionError("h1: z must be finite")
    if z > Z_MAX:
        return _log_h1_asymptotic(ctx, z)
    if z <= Z_SWITCH:
        try:
            value, ratio = h1_series(ctx, z)
        except SpecialFunctionError:
            ratio = math.inf
        if ratio <= _MAX_CANCELLATION:
            return value
    return h1_integral(ctx, z)


def log_neg_h1_prime(ctx: SpecialFnContext, z: float) -> float:
    """Natural log of ``-h1'(z)`` (``h1`` is strictly decreasing)."""
    z = float(z)
    if not math.isfinite(z):
        raise SpecialFunctionError("h1_prime: z must be finite")
    if z <= Z_SWITCH:
        try:
            value, ratio = h1_prime_series(ctx, z)
        except SpecialFunctionError:
            ratio = math.inf
        if ratio <= _MAX_CANCELLATION:
            return value
    # d/dz h1(z; xi) = -2 xi h1(z; xi + 1/2), from differentiating the integral.
    return math.log(2.0 * ctx.xi) + log_h1(ctx.shifted(), z)


def h1(ctx: SpecialFnContext, z: float) -> float:
    """Decaying solution of ``alpha^2 h'' = h + alpha^2 z h'``, normalised so
    that ``h1(z) z^(2 xi) -> 1`` as ``z -> +inf``.

    At ``alpha = 1`` this is the Mills ratio ``(1 - Phi(z)) / phi(z)``.
    Beyond ``z = 50`` the two-term asymptotic expansion is returned.
    """
    return math.exp(log_h1(ctx, z))


def h1_prime(ctx: SpecialFnContext, z: float) -> float:
    """Derivative of :func:`h1` in z."""
    return -math.exp(log_neg_h1_prime(ctx, z))


def h1_log_derivative(ctx: SpecialFnContext, z: float) -> float:
    """``h1'(z) / h1(z)``, computed without forming either factor."""
    return -math.exp(log_neg_h1_prime(ctx, z) - log_h1(ctx, z))
