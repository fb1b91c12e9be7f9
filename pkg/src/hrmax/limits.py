"""Limit laws for normalized bivariate Gaussian maxima.

The dependent family interpolates between the comonotone limit (lam = 0)
and the independent product of Gumbel margins (lam = inf). ``lam`` below
1e-8 or above 1e8 routes to the closed-form endpoint: the interpolating
formula would otherwise push (x - y) / (2 lam) into overflow while the
result is already indistinguishable from the endpoint.
"""

from __future__ import annotations

import math

from .special import std_normal_cdf

__all__ = [
    "LAMBDA_ZERO_CUTOFF",
    "LAMBDA_INF_CUTOFF",
    "husler_reiss_cdf",
    "husler_reiss_power_cdf",
    "frechet_cdf",
]

LAMBDA_ZERO_CUTOFF = 1e-8
LAMBDA_INF_CUTOFF = 1e8


def _check_lam(lam: float) -> float:
    if math.isnan(lam) or lam < 0.0:
        raise ValueError(f"lam must lie in [0, inf], got {lam!r}")
    return lam


def husler_reiss_cdf(x: float, y: float, lam: float) -> float:
    """Husler-Reiss max-stable CDF in Gumbel coordinates.

    H(x, y) = exp(-Phi(lam + (x-y)/(2 lam)) e^{-y}
              - Phi(lam + (y-x)/(2 lam)) e^{-x}) for lam in (0, inf), with
    the min/product closed forms at the endpoints.
    """
    _check_lam(lam)
    try:
        if lam <= LAMBDA_ZERO_CUTOFF:
            return math.exp(-math.exp(-min(x, y)))
        if lam >= LAMBDA_INF_CUTOFF:
            return math.exp(-(math.exp(-x) + math.exp(-y)))
        half = (x - y) / (2.0 * lam)
        t = std_normal_cdf(lam + half) * math.exp(-y) + std_normal_cdf(lam - half) * math.exp(-x)
        return math.exp(-t)
    except OverflowError:
        # exp(-x) or exp(-y) overflowed, so the exponent is -inf.
        return 0.0


def husler_reiss_power_cdf(x: float, y: float, lam: float) -> float:
    """The same family met by power-normalized maxima: H(ln x, ln y), x, y > 0."""
    _check_lam(lam)
    if x <= 0.0 or y <= 0.0:
        raise ValueError(f"power-domain arguments must be positive, got ({x!r}, {y!r})")
    if lam <= LAMBDA_ZERO_CUTOFF:
        return math.exp(-1.0 / min(x, y))
    if lam >= LAMBDA_INF_CUTOFF:
        return math.exp(-(1.0 / x + 1.0 / y))
    return husler_reiss_cdf(math.log(x), math.log(y), lam)


def frechet_cdf(x: float) -> float:
    """Unit Frechet CDF exp(-1/x), the univariate power-normalized limit."""
    if x <= 0.0:
        raise ValueError(f"Frechet CDF requires x > 0, got {x!r}")
    return math.exp(-1.0 / x)
