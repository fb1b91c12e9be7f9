"""Exact (to kernel precision) evaluation of normalized-maximum CDFs.

``F^n`` at normalized points is computed through the log domain:
``1 - F`` is assembled from univariate tails plus the joint survival
(inclusion-exclusion), never by subtracting the joint CDF from 1, because
``1 - F`` is of order 1/n and must keep ~10 significant digits at the
sample sizes used here. Then ``F^n = exp(n * log1p(-(1 - F)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .norming import NormingConstant, linear_norm, power_norm
from .special import RHO_DEGENERATE_EPS, bvn_survival, std_normal_cdf, std_normal_tail

__all__ = [
    "ActualValue",
    "max_cdf_power",
    "max_cdf_linear",
    "univariate_max_cdf_power",
]


@dataclass(frozen=True)
class ActualValue:
    """F^n together with its log (kept for diagnostics at extreme n)."""

    value: float
    log_value: float


def _one_minus_f(a: float, b: float, rho: float) -> float:
    """1 - F(a, b) with relative accuracy; routes degenerate correlations
    to closed forms before touching the quadrature kernel."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho!r}")
    if rho >= 1.0 - RHO_DEGENERATE_EPS:
        return std_normal_tail(min(a, b))
    if rho <= -1.0 + RHO_DEGENERATE_EPS:
        # F = max(0, Phi(a) + Phi(b) - 1); t may legitimately reach 1 here
        return min(1.0, std_normal_tail(a) + std_normal_tail(b))
    t = std_normal_tail(a) + std_normal_tail(b) - bvn_survival(a, b, rho)
    if t >= 1.0:
        raise RuntimeError(
            f"inclusion-exclusion produced 1 - F >= 1 at ({a}, {b}, rho={rho}); "
            "kernel inconsistency"
        )
    return max(0.0, t)


def _power_of_n(t: float, n: int) -> ActualValue:
    if t >= 1.0:
        return ActualValue(value=0.0, log_value=-math.inf)
    log_value = n * math.log1p(-t)
    return ActualValue(value=math.exp(log_value), log_value=log_value)


def max_cdf_power(x: float, y: float, nc: NormingConstant, rho: float) -> ActualValue:
    """F^n at power-normalized coordinates (bn x^{1/bn^2}, bn y^{1/bn^2})."""
    a = power_norm(x, nc)
    b = power_norm(y, nc)
    return _power_of_n(_one_minus_f(a, b, rho), nc.n)


def max_cdf_linear(x: float, y: float, nc: NormingConstant, rho: float) -> ActualValue:
    """F^n at linearly normalized coordinates (bn + x/bn, bn + y/bn)."""
    a = linear_norm(x, nc)
    b = linear_norm(y, nc)
    return _power_of_n(_one_minus_f(a, b, rho), nc.n)


def univariate_max_cdf_power(x: float, nc: NormingConstant) -> ActualValue:
    """Phi^n at the power-normalized coordinate."""
    u = power_norm(x, nc)
    return _power_of_n(std_normal_tail(u), nc.n)
