"""Norming constants, normalization maps, and correlation schedules.

The norming constant ``b_n`` is the (1 - 1/n)-quantile of the standard
normal, defined implicitly by ``n * (1 - Phi(b_n)) = 1``. Solutions are
cached per ``n`` behind a lock; cached values are immutable.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .special import std_normal_pdf, std_normal_quantile, std_normal_tail

__all__ = [
    "NormingConstant",
    "solve_bn",
    "power_norm",
    "linear_norm",
    "RegimeParams",
    "RhoResult",
    "CorrelationModel",
    "FixedRho",
    "SecondOrderRho",
    "SequenceRho",
    "rho_of_n",
    "hr_lambda",
]

BN_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class NormingConstant:
    """Sample size paired with its norming constant."""

    n: int
    bn: float

    @property
    def bn_squared(self) -> float:
        return self.bn * self.bn

    def residual(self) -> float:
        """Defect of the defining equation, n * (1 - Phi(bn)) - 1."""
        return self.n * std_normal_tail(self.bn) - 1.0


_cache: dict[int, NormingConstant] = {}
_cache_lock = threading.Lock()


def _solve(n: int) -> float:
    # Seed from the tail quantile (avoids forming 1 - 1/n), then polish with
    # Newton steps on g(b) = n * tail(b) - 1, g'(b) = -n * pdf(b).
    b = -std_normal_quantile(1.0 / n)
    for _ in range(8):
        g = n * std_normal_tail(b) - 1.0
        if abs(g) <= 1e-14:
            break
        b += g / (n * std_normal_pdf(b))
    if abs(n * std_normal_tail(b) - 1.0) > BN_RESIDUAL_TOL:
        raise RuntimeError(f"norming solve failed to converge for n={n}")
    return b + 0.0  # normalizes -0.0 (n = 2) to 0.0


def solve_bn(n: int) -> NormingConstant:
    """Solve n * (1 - Phi(bn)) = 1. Requires n >= 2; results are cached."""
    if n != int(n):
        raise ValueError(f"sample size must be an integer, got {n!r}")
    n = int(n)
    if n < 2:
        raise ValueError(
            f"norming constant requires n >= 2 (b_1 would be the 0-quantile), got n={n}"
        )
    with _cache_lock:
        hit = _cache.get(n)
    if hit is not None:
        return hit
    nc = NormingConstant(n=n, bn=_solve(n))
    with _cache_lock:
        return _cache.setdefault(n, nc)


def power_norm(x: float, nc: NormingConstant) -> float:
    """Power normalization map x -> bn * x**(1/bn^2), for x > 0."""
    if x <= 0.0:
        raise ValueError(f"power normalization requires x > 0, got x={x!r}")
    if x == 1.0:
        return nc.bn
    if nc.bn <= 0.0:
        raise ValueError(f"power normalization undefined for bn={nc.bn} (n={nc.n}) at x != 1")
    return nc.bn * math.exp(math.log(x) / (nc.bn * nc.bn))


def linear_norm(x: float, nc: NormingConstant) -> float:
    """Linear normalization map x -> bn + x/bn."""
    if nc.bn <= 0.0:
        raise ValueError(f"linear normalization undefined for bn={nc.bn} (n={nc.n})")
    return nc.bn + x / nc.bn


@dataclass(frozen=True)
class RegimeParams:
    """Dependence regime: lam in [0, inf] plus the second-order shift tau.

    ``lam = math.inf`` and ``lam = 0`` act as symbolic tags for the product
    and comonotone limit families; arithmetic never runs on an infinite lam.
    ``tau`` is required only for second-order work with lam in (0, inf).
    """

    lam: float
    tau: float | None = None

    def __post_init__(self):
        if math.isnan(self.lam) or self.lam < 0.0:
            raise ValueError(f"lam must lie in [0, inf], got {self.lam!r}")
        if self.tau is not None:
            if not (0.0 < self.lam < math.inf):
                raise ValueError("tau is only meaningful for lam in (0, inf)")
            if not math.isfinite(self.tau):
                raise ValueError(f"tau must be finite, got {self.tau!r}")

    @classmethod
    def from_fixed_rho(cls, rho: float) -> "RegimeParams":
        """Regime implied by a constant correlation: rho < 1 gives the
        independent-product limit, rho = 1 the comonotone one."""
        if not -1.0 <= rho <= 1.0:
            raise ValueError(f"correlation must lie in [-1, 1], got {rho!r}")
        return cls(lam=0.0) if rho == 1.0 else cls(lam=math.inf)


class RhoResult(NamedTuple):
    value: float
    clamped: bool


class CorrelationModel:
    """How the row correlation rho_n is produced."""

    def rho(self, nc: NormingConstant) -> RhoResult:
        raise NotImplementedError


@dataclass(frozen=True)
class FixedRho(CorrelationModel):
    rho_value: float

    def __post_init__(self):
        if not -1.0 <= self.rho_value <= 1.0:
            raise ValueError(f"correlation must lie in [-1, 1], got {self.rho_value!r}")

    def rho(self, nc: NormingConstant) -> RhoResult:
        return RhoResult(self.rho_value, False)

    def regime(self) -> RegimeParams:
        return RegimeParams.from_fixed_rho(self.rho_value)


@dataclass(frozen=True)
class SecondOrderRho(CorrelationModel):
    """rho_n = 1 - 2*lam^2/bn^2 + 4*tau*lam/bn^4 - 2*tau^2/bn^6.

    Chosen so that bn^2 * (lam - lam_n) equals tau exactly once bn^2 is
    large enough; values escaping [-1, 1] at very small n are clamped with
    the flag set rather than silently.
    """

    lam: float
    tau: float

    def __post_init__(self):
        if not (0.0 < self.lam < math.inf):
            raise ValueError(f"second-order model needs lam in (0, inf), got {self.lam!r}")
        if not math.isfinite(self.tau):
            raise ValueError(f"tau must be finite, got {self.tau!r}")

    def rho(self, nc: NormingConstant) -> RhoResult:
        b2 = nc.bn_squared
        if b2 == 0.0:
            raise ValueError(f"correlation model undefined at bn=0 (n={nc.n})")
        raw = 1.0 - 2.0 * self.lam**2 / b2 + 4.0 * self.tau * self.lam / b2**2 - 2.0 * self.tau**2 / b2**3
        if raw > 1.0:
            return RhoResult(1.0, True)
        if raw < -1.0:
            return RhoResult(-1.0, True)
        return RhoResult(raw, False)

    def regime(self) -> RegimeParams:
        return RegimeParams(lam=self.lam, tau=self.tau)


@dataclass(frozen=True)
class SequenceRho(CorrelationModel):
    """User-supplied schedule n -> rho_n; every value must lie in [-1, 1]."""

    fn: Callable[[int], float]

    def rho(self, nc: NormingConstant) -> RhoResult:
        value = float(self.fn(nc.n))
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"sequence produced rho={value!r} outside [-1, 1] at n={nc.n}")
        return RhoResult(value, False)


def rho_of_n(model: CorrelationModel, nc: NormingConstant) -> RhoResult:
    """Evaluate a correlation model at a given sample size."""
    return model.rho(nc)


def hr_lambda(rho: float, nc: NormingConstant) -> float:
    """Row dependence index lam_n = sqrt(bn^2 * (1 - rho) / 2)."""
    if rho > 1.0:
        raise ValueError(f"correlation must satisfy rho <= 1, got {rho!r}")
    return nc.bn * math.sqrt((1.0 - rho) / 2.0)
