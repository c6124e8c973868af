"""Normal and chi-square distribution functions via the regularized incomplete gamma."""

from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _stirling_error(a: float) -> float:
    # lgamma(a) - [(a - 1/2) log a - a + log(2 pi)/2]
    if a < 15.0:
        return math.lgamma(a) - (a - 0.5) * math.log(a) + a - 0.5 * math.log(2 * math.pi)
    inv = 1.0 / a
    inv2 = inv * inv
    return inv * (1 / 12 - inv2 * (1 / 360 - inv2 * (1 / 1260 - inv2 * (1 / 1680 - inv2 / 1188))))


def _prefactor(a: float, x: float) -> float:
    """x^a e^-x / Gamma(a), arranged so large a and x near a lose no digits."""
    t = (x - a) / a
    log_ratio = a * (math.log1p(t) - t) if abs(t) < 0.5 else a * (math.log(x) - math.log(a)) - (x - a)
    return math.exp(log_ratio - _stirling_error(a)) * math.sqrt(a / (2 * math.pi))


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by its power series; converges fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge for a={a}, x={x}")
    return total * _prefactor(a, x)


def _gamma_cont_frac(a: float, x: float) -> float:
    # Q(a, x) by modified Lentz evaluation of the continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction did not converge for a={a}, x={x}")
    return _prefactor(a, x) * h


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if not x >= 0:
        raise ValueError("argument must be nonnegative")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cont_frac(a, x)


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if not x >= 0:
        raise ValueError("argument must be nonnegative")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cont_frac(a, x)


def norm_cdf(z: float) -> float:
    if math.isnan(z):
        return math.nan
    if z == math.inf:
        return 1.0
    if z == -math.inf:
        return 0.0
    tail = 0.5 * gammainc_upper(0.5, 0.5 * z * z)
    return 1.0 - tail if z > 0 else tail


def norm_sf(z: float) -> float:
    """Upper tail 1 - Phi(z), accurate far into the tail."""
    return norm_cdf(-z)


def chi2_cdf(x: float, df: int) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    return gammainc_lower(0.5 * df, 0.5 * x) if x > 0 else 0.0


def chi2_sf(x: float, df: int) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    return gammainc_upper(0.5 * df, 0.5 * x) if x > 0 else 1.0
