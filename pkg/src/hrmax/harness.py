"""Numerical verification of the limit theorems at growing sample size.

Every probe evaluates the scaled difference ``scale(n) * (F^n - H)`` along an
increasing n-grid and compares it with its closed-form target. Limits are
estimated by iterated two-point Richardson extrapolation in the variable
``1/bn^2``: the corrections are O(bn^-2) with a regular expansion in that
variable, so successive pairwise eliminations cancel the leading residuals.
Only the last few grid entries enter the extrapolation; the coarse entries
sit too far from the asymptotic regime to help.

The kernel's absolute CDF accuracy (~1e-15) bounds the usable sample size:
the error transported into a scaled difference is about bn^2 * n * 1e-15,
reported here as ``noise_floor``. Signals are O(1), so n beyond ~1e9 starts
to drown; the reports carry the floor instead of silently exceeding it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

from .actuals import max_cdf_power, univariate_max_cdf_power
from .expansions import (
    KAPPA_VARIANTS,
    KappaVariant,
    power_correction,
    power_joint_correction,
)
from .limits import LAMBDA_INF_CUTOFF, LAMBDA_ZERO_CUTOFF, frechet_cdf, husler_reiss_power_cdf
from .norming import (
    CorrelationModel,
    NormingConstant,
    RegimeParams,
    SecondOrderRho,
    SequenceRho,
    rho_of_n,
    solve_bn,
)

__all__ = [
    "KERNEL_EPS",
    "DEFAULT_N_GRID",
    "RateProbe",
    "ProbeRecord",
    "probe",
    "probe_target",
    "richardson_limit",
    "loglog_slope",
    "noise_floor",
    "UnivariateRateReport",
    "verify_univariate_rate",
    "PointEvidence",
    "VariantSelection",
    "select_kappa_variant",
    "UniformReport",
    "verify_uniform_convergence",
    "TargetReport",
    "verify_limit_targets",
    "product_limit_precondition",
    "comonotone_limit_precondition",
    "slow_drift_scenario",
    "oscillating_drift_model",
    "write_probe_csv",
]

KERNEL_EPS = 1e-15
DEFAULT_N_GRID = (10**3, 10**4, 10**5, 10**6, 10**7)


def noise_floor(nc: NormingConstant) -> float:
    """Numeric-noise bound on a bn^2-scaled difference at this sample size."""
    return nc.bn_squared * nc.n * KERNEL_EPS


@dataclass(frozen=True)
class RateProbe:
    model: CorrelationModel
    regime: RegimeParams
    point: tuple[float, float]
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    scaling: Literal["bn_squared"] | Callable[[NormingConstant], float] = "bn_squared"

    def __post_init__(self):
        if len(self.n_grid) < 3:
            raise ValueError("n_grid needs at least 3 entries")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")


@dataclass(frozen=True)
class ProbeRecord:
    n: int
    bn: float
    rho: float
    limit_value: float
    scaled_diff: float
    flag: str | None = None

    @property
    def bn_squared(self) -> float:
        return self.bn * self.bn


def probe(p: RateProbe) -> list[ProbeRecord]:
    """Evaluate scale(n) * (F^n - H) along the probe's n-grid, in order."""
    x, y = p.point
    h = husler_reiss_power_cdf(x, y, p.regime.lam)
    records = []
    for n in p.n_grid:
        nc = solve_bn(n)
        rho_res = rho_of_n(p.model, nc)
        flag = "rho_clamped" if rho_res.clamped else None
        if h == 0.0:
            records.append(ProbeRecord(n, nc.bn, rho_res.value, h, math.nan, "underflow"))
            continue
        scale = nc.bn_squared if p.scaling == "bn_squared" else p.scaling(nc)
        f = max_cdf_power(x, y, nc, rho_res.value).value
        records.append(ProbeRecord(n, nc.bn, rho_res.value, h, scale * (f - h), flag))
    return records


def probe_target(
    point: tuple[float, float], regime: RegimeParams, variant: KappaVariant = "tail_scaled"
) -> float:
    """Closed-form limit of the bn^2-scaled difference: correction * H."""
    x, y = point
    lam = regime.lam
    h = husler_reiss_power_cdf(x, y, lam)
    if lam <= LAMBDA_ZERO_CUTOFF:
        return power_correction(min(x, y)) * h
    if lam >= LAMBDA_INF_CUTOFF:
        return (power_correction(x) + power_correction(y)) * h
    if regime.tau is None:
        raise ValueError("probe target with lam in (0, inf) requires tau")
    return power_joint_correction(x, y, lam, regime.tau, variant) * h


def richardson_limit(bn_squared: Sequence[float], values: Sequence[float], levels: int = 3) -> float:
    """Iterated two-point Richardson extrapolation in t = 1/bn^2.

    Uses the last ``levels`` entries (default 3, i.e. two elimination
    stages); with ``levels=2`` this is the plain two-point formula.
    """
    if len(bn_squared) != len(values) or len(values) < 2:
        raise ValueError("need matching sequences with at least 2 entries")
    k = min(levels, len(values))
    ts = [1.0 / b2 for b2 in bn_squared[-k:]]
    est = list(values[-k:])
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            est[i] = est[i] + (est[i] - est[i - 1]) * ts[i] / (ts[i - j] - ts[i])
    return est[-1]


def loglog_slope(bn_squared: Sequence[float], residuals: Sequence[float], top: int = 3) -> float:
    """Least-squares slope of ln(residual) against ln(bn^2), over the last
    ``top`` entries. Residuals must be positive."""
    xs = [math.log(b2) for b2 in bn_squared[-top:]]
    ys = [math.log(r) for r in residuals[-top:]]
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    return sxy / sxx


@dataclass(frozen=True)
class UnivariateRateReport:
    x: float
    target: float
    rows: tuple[tuple[int, float, float, float], ...]  # (n, bn^2, scaled_diff, residual)

    @property
    def residuals(self) -> tuple[float, ...]:
        return tuple(r[3] for r in self.rows)

    @property
    def decreasing(self) -> bool:
        res = self.residuals
        return all(b < a for a, b in zip(res, res[1:]))

    @property
    def final_ratio(self) -> float | None:
        """Final residual relative to |target|; None where the target is 0."""
        if self.target == 0.0:
            return None
        return self.residuals[-1] / abs(self.target)


def verify_univariate_rate(x: float, n_grid: Sequence[int] = (10**3, 10**4, 10**5, 10**6)) -> UnivariateRateReport:
    """Check bn^2 (Phi^n(u_n(x)) - exp(-1/x)) against its limit s(x) exp(-1/x)."""
    lim = frechet_cdf(x)
    target = power_correction(x) * lim
    rows = []
    for n in n_grid:
        nc = solve_bn(n)
        scaled = nc.bn_squared * (univariate_max_cdf_power(x, nc).value - lim)
        rows.append((n, nc.bn_squared, scaled, abs(scaled - target)))
    return UnivariateRateReport(x=x, target=target, rows=tuple(rows))


@dataclass(frozen=True)
class PointEvidence:
    point: tuple[float, float]
    extrapolated: float
    deviations: dict[KappaVariant, float]
    tie: bool


@dataclass(frozen=True)
class VariantSelection:
    status: Literal["selected", "inconclusive"]
    variant: KappaVariant | None
    aggregate: dict[KappaVariant, float]
    evidence: tuple[PointEvidence, ...]
    margin: float

    def __str__(self) -> str:
        lines = [f"variant selection: {self.status}"
                 + (f" -> {self.variant}" if self.variant else "")]
        for variant in KAPPA_VARIANTS:
            lines.append(f"  aggregate deviation ({variant}): {self.aggregate[variant]:.3e}")
        lines.append(f"  margin: {self.margin:.1f}x")
        for ev in self.evidence:
            tie = " (tie, excluded)" if ev.tie else ""
            devs = ", ".join(f"{v}={ev.deviations[v]:.3e}" for v in KAPPA_VARIANTS)
            lines.append(f"  point {ev.point}: extrapolated={ev.extrapolated:.6f} {devs}{tie}")
        return "\n".join(lines)


def select_kappa_variant(
    points: Sequence[tuple[float, float]],
    lam: float,
    tau: float,
    n_grid: Sequence[int] = DEFAULT_N_GRID,
    margin_required: float = 2.0,
) -> VariantSelection:
    """Pick the joint-correction variant matching the measured limit.

    For each point, the limit of bn^2 (F^n - H)/H is estimated by Richardson
    extrapolation and compared against both closed-form variants. Points
    where the variants coincide (x = 1) carry no information and are
    excluded from the aggregate. If the aggregates are within
    ``margin_required`` of each other the result is explicitly inconclusive.
    """
    model = SecondOrderRho(lam, tau)
    regime = RegimeParams(lam, tau)
    evidence = []
    aggregate: dict[KappaVariant, float] = {v: 0.0 for v in KAPPA_VARIANTS}
    n_decision = 0
    for point in points:
        records = probe(RateProbe(model, regime, point, tuple(n_grid)))
        usable = [r for r in records if r.flag != "underflow"]
        ratios = [r.scaled_diff / r.limit_value for r in usable]
        extrapolated = richardson_limit([r.bn_squared for r in usable], ratios)
        x, y = point
        kappas = {v: power_joint_correction(x, y, lam, tau, v) for v in KAPPA_VARIANTS}
        spread = abs(kappas["tail_scaled"] - kappas["unscaled"])
        tie = spread <= 1e-9 * (1.0 + max(abs(k) for k in kappas.values()))
        deviations = {v: abs(extrapolated - kappas[v]) for v in KAPPA_VARIANTS}
        evidence.append(PointEvidence(point, extrapolated, deviations, tie))
        if not tie:
            n_decision += 1
            for v in KAPPA_VARIANTS:
                aggregate[v] += deviations[v]
    if n_decision == 0:
        return VariantSelection("inconclusive", None, aggregate, tuple(evidence), 1.0)
    best = min(KAPPA_VARIANTS, key=lambda v: aggregate[v])
    other = max(KAPPA_VARIANTS, key=lambda v: aggregate[v])
    margin = aggregate[other] / aggregate[best] if aggregate[best] > 0 else math.inf
    if margin < margin_required:
        return VariantSelection("inconclusive", None, aggregate, tuple(evidence), margin)
    return VariantSelection("selected", best, aggregate, tuple(evidence), margin)


@dataclass(frozen=True)
class UniformReport:
    rows: tuple[tuple[int, float], ...]  # (n, sup over grid of |F^n - H|)

    @property
    def sups(self) -> tuple[float, ...]:
        return tuple(r[1] for r in self.rows)

    @property
    def decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.sups, self.sups[1:]))

    def passed(self, eps: float) -> bool:
        return self.decreasing and self.sups[-1] < eps


def verify_uniform_convergence(
    model: CorrelationModel,
    regime: RegimeParams,
    grid: Sequence[tuple[float, float]],
    n_grid: Sequence[int] = (10**3, 10**4, 10**5, 10**6),
) -> UniformReport:
    """Track the grid sup of |F^n - H| along the n-grid."""
    rows = []
    for n in n_grid:
        nc = solve_bn(n)
        rho = rho_of_n(model, nc).value
        sup = max(
            abs(max_cdf_power(x, y, nc, rho).value - husler_reiss_power_cdf(x, y, regime.lam))
            for x, y in grid
        )
        rows.append((n, sup))
    return UniformReport(rows=tuple(rows))


@dataclass(frozen=True)
class TargetReport:
    """Scaled differences against closed-form targets over a point grid."""

    points: tuple[tuple[float, float], ...]
    n_grid: tuple[int, ...]
    bn_squared: tuple[float, ...]
    residuals: dict[tuple[float, float], tuple[float, ...]]

    @property
    def median_residuals(self) -> tuple[float, ...]:
        per_n = []
        for i in range(len(self.n_grid)):
            vals = sorted(self.residuals[p][i] for p in self.points)
            mid = len(vals) // 2
            per_n.append(vals[mid] if len(vals) % 2 else 0.5 * (vals[mid - 1] + vals[mid]))
        return tuple(per_n)

    @property
    def median_slope(self) -> float:
        return loglog_slope(self.bn_squared, self.median_residuals)


def verify_limit_targets(
    model: CorrelationModel,
    regime: RegimeParams,
    grid: Sequence[tuple[float, float]],
    n_grid: Sequence[int] = (10**3, 10**4, 10**5, 10**6),
    variant: KappaVariant = "tail_scaled",
) -> TargetReport:
    """Residuals of bn^2 (F^n - H) against correction * H on a grid."""
    residuals: dict[tuple[float, float], tuple[float, ...]] = {}
    b2s: tuple[float, ...] = tuple(solve_bn(n).bn_squared for n in n_grid)
    for point in grid:
        target = probe_target(point, regime, variant)
        records = probe(RateProbe(model, regime, point, tuple(n_grid)))
        residuals[point] = tuple(abs(r.scaled_diff - target) for r in records)
    return TargetReport(
        points=tuple(grid), n_grid=tuple(n_grid), bn_squared=b2s, residuals=residuals
    )


def product_limit_precondition(model: CorrelationModel, n_grid: Sequence[int]) -> list[float]:
    """Monitor ln(bn) / (bn^2 (1 - rho_n)); must tend to 0 for the product
    (lam = inf) second-order expansion to apply."""
    out = []
    for n in n_grid:
        nc = solve_bn(n)
        rho = rho_of_n(model, nc).value
        out.append(math.log(nc.bn) / (nc.bn_squared * (1.0 - rho)))
    return out


def comonotone_limit_precondition(model: CorrelationModel, n_grid: Sequence[int]) -> list[float]:
    """Monitor bn^6 (1 - rho_n); must tend to 0 for the comonotone (lam = 0)
    second-order expansion to apply. Identically 0 for fixed rho = 1."""
    out = []
    for n in n_grid:
        nc = solve_bn(n)
        rho = rho_of_n(model, nc).value
        out.append(nc.bn ** 6 * (1.0 - rho))
    return out


def slow_drift_scenario(lam: float, c: float):
    """Correlation schedule whose dependence index drifts like c / bn.

    Here bn^2 (lam - lam_n) = c * bn diverges, so the bn^2-scaled difference
    has no finite limit; rescaling by gamma_n = bn / c instead yields
    2 x^{-1} pdf(lam + ln(y/x)/(2 lam)) H as the limit. Returns the model,
    the gamma scaling (as a callable on NormingConstant), and the target
    function of a point.
    """
    if not 0.0 < lam < math.inf or c <= 0.0:
        raise ValueError("slow drift scenario needs lam in (0, inf) and c > 0")

    def rho_fn(n: int) -> float:
        bn = solve_bn(n).bn
        lam_n = lam - c / bn
        return 1.0 - 2.0 * lam_n * lam_n / (bn * bn)

    def gamma(nc: NormingConstant) -> float:
        return nc.bn / c

    def target(point: tuple[float, float]) -> float:
        from .special import std_normal_pdf

        x, y = point
        arg = lam + math.log(y / x) / (2.0 * lam)
        return 2.0 / x * std_normal_pdf(arg) * husler_reiss_power_cdf(x, y, lam)

    return SequenceRho(rho_fn), gamma, target


def oscillating_drift_model(lam: float, c: float) -> SequenceRho:
    """Demo schedule with no single convergence rate: even sample sizes
    follow the exact second-order schedule (tau = 0), odd ones the slow
    drift. Scaled differences then oscillate between the two regimes'
    limits instead of settling."""
    exact = SecondOrderRho(lam, 0.0)
    drift, _, _ = slow_drift_scenario(lam, c)

    def rho_fn(n: int) -> float:
        if n % 2 == 0:
            return exact.rho(solve_bn(n)).value
        return drift.fn(n)

    return SequenceRho(rho_fn)


def write_probe_csv(fh, scenario: str, point: tuple[float, float], records: Sequence[ProbeRecord], target: float) -> None:
    """Probe records in the report CSV layout."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["scenario", "x", "y", "n", "bn", "scaled_diff", "target", "residual"])
    x, y = point
    for r in records:
        resid = abs(r.scaled_diff - target) if not math.isnan(r.scaled_diff) else math.nan
        writer.writerow(
            [scenario, f"{x:g}", f"{y:g}", r.n, f"{r.bn:.17g}", f"{r.scaled_diff:.17g}",
             f"{target:.17g}", f"{resid:.17g}"]
        )
