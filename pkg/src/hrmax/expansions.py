"""Second-order correction terms and the resulting approximants.

Two variants of the joint power-domain correction are provided. They differ
only in whether the density term carries the 1/x factor:

* ``"tail_scaled"`` includes it. This is the variant consistent with the
  x-anchored tail expansion combined with the log-weighted tail integral
  (see ``anchored_joint_correction`` and ``log_weighted_tail_integral``), it
  is symmetric in (x, y), and it is the one the numerical rate probes select
  as the true limit. It is the default.
* ``"unscaled"`` omits it. It is asymmetric and does not match the measured
  limit, but it is the formula behind the bundled reference tables, so it
  stays available for reproducing them cell by cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .limits import (
    LAMBDA_INF_CUTOFF,
    LAMBDA_ZERO_CUTOFF,
    husler_reiss_cdf,
    husler_reiss_power_cdf,
)
from .norming import NormingConstant, RegimeParams
from .special import std_normal_cdf, std_normal_pdf, std_normal_tail

__all__ = [
    "KAPPA_VARIANTS",
    "DEFAULT_KAPPA_VARIANT",
    "power_correction",
    "linear_correction",
    "power_joint_correction",
    "anchored_joint_correction",
    "linear_joint_correction",
    "log_weighted_tail_integral",
    "Approximant",
    "approximant_power",
    "approximant_linear",
]

KappaVariant = Literal["tail_scaled", "unscaled"]
KAPPA_VARIANTS: tuple[KappaVariant, ...] = ("tail_scaled", "unscaled")
DEFAULT_KAPPA_VARIANT: KappaVariant = "tail_scaled"


def power_correction(x: float) -> float:
    """Per-coordinate second-order term under power normalization:
    ((ln x)^2 + ln x) / x."""
    if x <= 0.0:
        raise ValueError(f"power correction requires x > 0, got {x!r}")
    lx = math.log(x)
    return (lx * lx + lx) / x


def linear_correction(x: float) -> float:
    """Per-coordinate second-order term under linear normalization:
    (x^2 + 2x) e^{-x} / 2."""
    return 0.5 * (x * x + 2.0 * x) * math.exp(-x)


def _check_joint_args(x: float, y: float, lam: float) -> None:
    if x <= 0.0 or y <= 0.0:
        raise ValueError(f"joint correction requires x, y > 0, got ({x!r}, {y!r})")
    if not 0.0 < lam < math.inf:
        raise ValueError(f"joint correction requires lam in (0, inf), got {lam!r}")


def power_joint_correction(
    x: float, y: float, lam: float, tau: float, variant: KappaVariant = DEFAULT_KAPPA_VARIANT
) -> float:
    """Joint second-order correction in the power domain (both variants)."""
    _check_joint_args(x, y, lam)
    if variant not in KAPPA_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {KAPPA_VARIANTS}")
    lx, ly = math.log(x), math.log(y)
    half = (ly - lx) / (2.0 * lam)
    phi_term = (2.0 * tau - lam**3 - 2.0 * lam - lam * ly - lam * lx) * std_normal_pdf(lam + half)
    if variant == "tail_scaled":
        phi_term /= x
    return (
        (lx * lx + lx) / x * std_normal_cdf(lam + half)
        + (ly * ly + ly) / y * std_normal_cdf(lam - half)
        + phi_term
    )


def anchored_joint_correction(x: float, y: float, lam: float, tau: float) -> float:
    """Second-order expansion of the x-anchored truncated tail integral.

    Not symmetric in (x, y) by construction; used as the independent piece
    of the reconstruction identity that pins the joint correction variant:
    power_correction(x) + anchored_joint_correction(x, y, lam, tau)
    - log_weighted_tail_integral(x, y, lam) equals the tail_scaled variant.
    """
    _check_joint_args(x, y, lam)
    lx, ly = math.log(x), math.log(y)
    half = (ly - lx) / (2.0 * lam)
    return (4.0 * lam**4 + 2.0 * lam**2 - 4.0 * lam**2 * lx) / x * std_normal_tail(lam + half) + (
        2.0 * tau - 5.0 * lam**3 + lam * ly + lam * lx
    ) / x * std_normal_pdf(lam + half)


def linear_joint_correction(x: float, y: float, lam: float, tau: float) -> float:
    """Joint second-order correction in the linear domain; symmetric in (x, y)."""
    if not 0.0 < lam < math.inf:
        raise ValueError(f"joint correction requires lam in (0, inf), got {lam!r}")
    half = (y - x) / (2.0 * lam)
    return (
        linear_correction(x) * std_normal_cdf(lam + half)
        + linear_correction(y) * std_normal_cdf(lam - half)
        + (2.0 * tau - lam * (lam**2 + x + y + 2.0)) * math.exp(-x) * std_normal_pdf(lam + half)
    )


def log_weighted_tail_integral(x: float, y: float, lam: float) -> float:
    """Closed form of int_y^inf Phi(lam + ln(x/z)/(2 lam)) z^{-2}
    (1 + ln z - (ln z)^2) dz, obtained by partial integration."""
    _check_joint_args(x, y, lam)
    lx, ly = math.log(x), math.log(y)
    half = (ly - lx) / (2.0 * lam)
    return (
        (lx * lx + lx - 4.0 * lam**2 * lx + 2.0 * lam**2 + 4.0 * lam**4)
        / x
        * std_normal_tail(lam + half)
        + (2.0 * lam + 2.0 * lam * ly + 2.0 * lam * lx - 4.0 * lam**3) / x * std_normal_pdf(lam + half)
        - (ly * ly + ly) / y * std_normal_cdf(lam - half)
    )


@dataclass(frozen=True)
class Approximant:
    """An asymptotic approximation value; not clamped to [0, 1] on purpose,
    second-order expansions may legitimately escape the unit interval."""

    order: int
    normalization: Literal["power", "linear"]
    regime: RegimeParams
    value: float


def _second_order_factor(correction: float, nc: NormingConstant) -> float:
    b2 = nc.bn_squared
    if b2 == 0.0:
        raise ValueError(f"second-order approximant undefined at bn=0 (n={nc.n})")
    return 1.0 + correction / b2


def _require_tau(regime: RegimeParams) -> float:
    if regime.tau is None:
        raise ValueError("second-order approximant with lam in (0, inf) requires tau")
    return regime.tau


def approximant_power(
    x: float,
    y: float,
    nc: NormingConstant,
    regime: RegimeParams,
    order: int,
    kappa_variant: KappaVariant = DEFAULT_KAPPA_VARIANT,
) -> Approximant:
    """First- or second-order approximant in the power domain."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    lam = regime.lam
    if order == 1:
        value = husler_reiss_power_cdf(x, y, lam)
    elif lam <= LAMBDA_ZERO_CUTOFF:
        value = husler_reiss_power_cdf(x, y, lam) * _second_order_factor(
            power_correction(min(x, y)), nc
        )
    elif lam >= LAMBDA_INF_CUTOFF:
        value = husler_reiss_power_cdf(x, y, lam) * _second_order_factor(
            power_correction(x) + power_correction(y), nc
        )
    else:
        tau = _require_tau(regime)
        value = husler_reiss_power_cdf(x, y, lam) * _second_order_factor(
            power_joint_correction(x, y, lam, tau, kappa_variant), nc
        )
    return Approximant(order=order, normalization="power", regime=regime, value=value)


def approximant_linear(
    x: float,
    y: float,
    nc: NormingConstant,
    regime: RegimeParams,
    order: int,
) -> Approximant:
    """First- or second-order approximant in the linear domain."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    lam = regime.lam
    if order == 1:
        value = husler_reiss_cdf(x, y, lam)
    elif lam <= LAMBDA_ZERO_CUTOFF:
        value = husler_reiss_cdf(x, y, lam) * _second_order_factor(
            linear_correction(min(x, y)), nc
        )
    elif lam >= LAMBDA_INF_CUTOFF:
        value = husler_reiss_cdf(x, y, lam) * _second_order_factor(
            linear_correction(x) + linear_correction(y), nc
        )
    else:
        tau = _require_tau(regime)
        value = husler_reiss_cdf(x, y, lam) * _second_order_factor(
            linear_joint_correction(x, y, lam, tau), nc
        )
    return Approximant(order=order, normalization="linear", regime=regime, value=value)
