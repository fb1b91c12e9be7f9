"""Acceptance gate: each criterion runs at its stated tolerance and prints
one PASS/FAIL line (run with ``pytest -s`` to see the lines inline).

Criterion 4 is implemented faithfully and is expected to fail at x = 0.5 and
x = 5: the scaled univariate residual is O(bn^-2) as claimed, but its
constant is large relative to s(x) there, so the 5% bar at n = 1e6 is
unreachable (exact high-precision computation gives 20.3% and 6.9%; see the
assertion messages). x = 2 passes at 4.6%.
"""

import math
import random
import time

import pytest

from hrmax.expansions import approximant_linear, approximant_power, power_joint_correction
from hrmax.harness import (
    DEFAULT_N_GRID,
    RateProbe,
    probe,
    richardson_limit,
    select_kappa_variant,
    verify_limit_targets,
    verify_univariate_rate,
)
from hrmax.limits import husler_reiss_power_cdf
from hrmax.norming import FixedRho, RegimeParams, SecondOrderRho, solve_bn
from hrmax.special import bvn_cdf, std_normal_cdf, std_normal_pdf, std_normal_tail
from hrmax.tables import (
    builtin_table_spec,
    compare_under_both_variants,
    generate_table,
    load_reference,
)
from oracles import bn_bisection, bvn_cdf_quadrature


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


class TestCriterion1Norming:
    def test_norming_constants(self):
        t0 = time.perf_counter()
        residuals = {}
        for n in (2, 10**3, 10**4, 10**6, 10**8):
            residuals[n] = abs(solve_bn(n).residual())
        quantile_gap = abs(solve_bn(1000).bn - bn_bisection(1000))
        elapsed = time.perf_counter() - t0
        ok = all(r <= 1e-12 for r in residuals.values()) and quantile_gap <= 1e-12
        report(
            "criterion 1 (norming constants)",
            ok,
            f"max residual={max(residuals.values()):.2e}, b_1000 oracle gap={quantile_gap:.2e}, "
            f"{elapsed * 1e3:.1f} ms",
        )
        assert all(r <= 1e-12 for r in residuals.values())
        assert quantile_gap <= 1e-12


class TestCriterion2Kernel:
    def test_bivariate_kernel(self):
        t0 = time.perf_counter()
        rng = random.Random(20240817)
        worst = 0.0
        for _ in range(200):
            a = rng.uniform(-4.0, 4.0)
            b = rng.uniform(-4.0, 4.0)
            rho = rng.uniform(-0.99, 0.99)
            worst = max(worst, abs(bvn_cdf(a, b, rho) - bvn_cdf_quadrature(a, b, rho)))
        sheppard = max(
            abs(bvn_cdf(0.0, 0.0, r / 10) - (0.25 + math.asin(r / 10) / (2 * math.pi)))
            for r in range(-9, 10)
        )
        degenerate = 0.0
        for a, b in ((0.3, -1.2), (2.0, 2.0), (-3.0, 1.0)):
            degenerate = max(degenerate, abs(bvn_cdf(a, b, 1.0) - std_normal_cdf(min(a, b))))
            expected = max(0.0, std_normal_cdf(a) + std_normal_cdf(b) - 1.0)
            degenerate = max(degenerate, abs(bvn_cdf(a, b, -1.0) - expected))
        elapsed = time.perf_counter() - t0
        ok = worst <= 1e-10 and sheppard <= 1e-14 and degenerate <= 1e-15
        report(
            "criterion 2 (bivariate kernel)",
            ok,
            f"200-triple worst={worst:.2e}, sheppard={sheppard:.2e}, "
            f"degenerate={degenerate:.2e}, {elapsed:.1f} s",
        )
        assert worst <= 1e-10
        assert sheppard <= 1e-14
        assert degenerate <= 1e-15
        assert elapsed < 10.0


class TestCriterion3Tables:
    def test_table_reproduction(self):
        t0 = time.perf_counter()
        comparisons = {
            tid: compare_under_both_variants(builtin_table_spec(tid), load_reference(tid), 5e-4)
            for tid in (1, 2, 3, 4)
        }
        # table 1 is the only one where the variants differ; its recorded
        # reproduction variant governs the literal-reproduction metric
        repro_variant = comparisons[1].reproduction_variant

        def fractions(variant):
            first = second = first_n = second_n = 0
            for vc in comparisons.values():
                rep = vc.reports[variant]
                for c in rep.cells:
                    if c.metric in ("delta1p", "delta1l"):
                        first_n += 1
                        first += c.deviation <= 5e-4
                    else:
                        second_n += 1
                        second += c.deviation <= 5e-4
            return first / first_n, second / second_n

        first_frac, second_repro = fractions(repro_variant)
        _, second_true = fractions("tail_scaled")
        unexplained = [c for vc in comparisons.values() for c in vc.failing_both]
        elapsed = time.perf_counter() - t0

        ok = first_frac >= 0.95 and second_repro >= 0.90
        report(
            "criterion 3 (table reproduction)",
            ok,
            f"delta1: {first_frac:.1%}; second-order: {second_repro:.1%} under "
            f"reproduction variant '{repro_variant}' ({second_true:.1%} under the "
            f"measured-limit variant 'tail_scaled'); "
            f"{len(unexplained)} cells unexplained under both variants; {elapsed:.1f} s",
        )
        for c in unexplained:
            print(
                f"    unexplained cell: point={c.point} metric={c.metric} n={c.n} "
                f"computed={c.computed:.6g} reference={c.reference:.6g}"
            )
        # spot values quoted with the criterion
        t1 = {r.point: r for r in generate_table(builtin_table_spec(1), repro_variant)}
        assert t1[(0.5, 0.5)].delta("delta1p", 1000) == pytest.approx(0.00133, abs=5e-4)
        assert t1[(0.5, 0.5)].delta("delta1l", 1000) == pytest.approx(0.01646, abs=5e-4)
        t2 = {r.point: r for r in generate_table(builtin_table_spec(2))}
        assert t2[(20.0, 20.0)].delta("delta1l", 10000) == pytest.approx(4.12e-9, abs=5e-11)

        assert first_frac >= 0.95
        assert second_repro >= 0.90
        # the two known reference transcription defects are reported, not waived
        assert {(c.point, c.metric, c.n) for c in unexplained} == {
            ((2.0, 3.0), "delta2l", 10000),
            ((25.0, 20.0), "delta2p", 10000),
        }
        assert elapsed < 60.0


class TestCriterion4UnivariateRate:
    """Implemented faithfully as stated; the 5% bound is unreachable for
    x = 0.5 and x = 5 (spec defect; exact arithmetic gives the same ratios
    to four digits). See the decisions ledger."""

    @pytest.mark.parametrize("x", [0.5, 2.0, 5.0])
    def test_scaled_residual(self, x):
        rep = verify_univariate_rate(x, n_grid=(10**3, 10**4, 10**5, 10**6))
        ratio = rep.final_ratio
        ok = rep.decreasing and ratio < 0.05
        report(
            f"criterion 4 (univariate rate, x={x:g})",
            ok,
            f"decreasing={rep.decreasing}, final residual = {ratio:.2%} of |target| "
            f"(bound 5%)",
        )
        assert rep.decreasing
        b2 = solve_bn(10**6).bn_squared
        required_b2 = ratio / 0.05 * b2
        required_n = 1.0 / std_normal_tail(math.sqrt(required_b2))
        assert ratio < 0.05, (
            f"residual at n=1e6 is {ratio:.2%} of |s({x}) exp(-1/{x})|; the residual is "
            f"O(bn^-2) as claimed but its constant is {ratio * b2:.2f}|s(x)|, so meeting "
            f"the 5% bound needs bn^2 >= {required_b2:.1f}, i.e. n ~ {required_n:.1e}, far "
            f"beyond the stated n = 1e6. Recorded in the decisions ledger."
        )


class TestCriterion5SecondOrderTargets:
    GRID = [(x, y) for x in (0.5, 1.5, 3.0, 5.0, 8.0) for y in (0.5, 1.5, 3.0, 5.0, 8.0)]

    @pytest.mark.parametrize(
        "label,model,regime",
        [
            ("rho=0", FixedRho(0.0), RegimeParams(lam=math.inf)),
            ("rho=1", FixedRho(1.0), RegimeParams(lam=0.0)),
        ],
    )
    def test_grid_convergence(self, label, model, regime):
        t0 = time.perf_counter()
        rep = verify_limit_targets(model, regime, self.GRID, n_grid=(10**3, 10**4, 10**5, 10**6))
        slope = rep.median_slope
        med = rep.median_residuals
        decreasing = all(b < a for a, b in zip(med, med[1:]))
        elapsed = time.perf_counter() - t0
        ok = decreasing and -1.3 <= slope <= -0.7
        report(
            f"criterion 5 (second-order target, {label})",
            ok,
            f"median residual slope={slope:.3f} (band [-1.3, -0.7]), "
            f"decreasing={decreasing}, {elapsed:.1f} s",
        )
        assert decreasing
        assert -1.3 <= slope <= -0.7


class TestCriterion6Disambiguation:
    def test_variant_selection(self):
        t0 = time.perf_counter()
        sel = select_kappa_variant([(2.0, 1.0), (1.0, 2.0), (3.0, 5.0)], 2.0, 3.0, DEFAULT_N_GRID)
        elapsed = time.perf_counter() - t0
        ok = sel.status == "selected" and sel.variant == "tail_scaled" and sel.margin >= 5.0
        report(
            "criterion 6 (variant disambiguation)",
            ok,
            f"selected={sel.variant}, aggregate deviations "
            f"tail_scaled={sel.aggregate['tail_scaled']:.2e} vs "
            f"unscaled={sel.aggregate['unscaled']:.2e} (margin {sel.margin:.0f}x >= 5x), "
            f"{elapsed:.1f} s",
        )
        assert sel.status == "selected"
        assert sel.variant == "tail_scaled"
        assert sel.margin >= 5.0
        assert elapsed < 60.0

    def test_shared_value_at_unit_point(self):
        records = probe(
            RateProbe(SecondOrderRho(2.0, 3.0), RegimeParams(2.0, 3.0), (1.0, 1.0), DEFAULT_N_GRID)
        )
        est = richardson_limit(
            [r.bn_squared for r in records], [r.scaled_diff for r in records]
        )
        shared = -6.0 * std_normal_pdf(2.0) * math.exp(-2.0 * std_normal_cdf(2.0))
        rel = abs(est - shared) / abs(shared)
        ok = rel <= 0.02
        report(
            "criterion 6 (shared value at (1,1))",
            ok,
            f"extrapolated={est:.6f} vs -6 pdf(2) exp(-2 Phi(2)) = {shared:.6f} "
            f"({rel:.2%}, bound 2%)",
        )
        assert rel <= 0.02


class TestCriterion7StructuralEqualities:
    def test_equal_min_rows(self):
        rows = {r.point: r for r in generate_table(builtin_table_spec(4))}
        pairs = [((3.0, 3.0), (3.0, 5.0)), ((5.0, 5.0), (5.0, 8.0)), ((10.0, 10.0), (10.0, 20.0))]
        identical = all(
            rows[a].delta(metric, n) == rows[b].delta(metric, n)
            for a, b in pairs
            for metric in ("delta1p", "delta2p")
            for n in (1000, 10000)
        )
        report("criterion 7 (equal-min rows identical)", identical, f"pairs checked: {pairs}")
        assert identical

    def test_corrections_vanish_at_zero_points(self):
        nc = solve_bn(1000)
        checks = []
        # power domain: correction vanishes at x = 1
        for regime in (RegimeParams(lam=0.0), RegimeParams(lam=math.inf)):
            l1 = approximant_power(1.0, 1.0, nc, regime, 1).value
            l2 = approximant_power(1.0, 1.0, nc, regime, 2).value
            checks.append(l1 == l2)
        # linear domain: correction vanishes at x = 0 and x = -2
        for point in (0.0, -2.0):
            l1 = approximant_linear(point, point, nc, RegimeParams(lam=0.0), 1).value
            l2 = approximant_linear(point, point, nc, RegimeParams(lam=0.0), 2).value
            checks.append(l1 == l2)
        ok = all(checks)
        report("criterion 7 (corrections vanish at zero points)", ok, f"checks={checks}")
        assert ok

    def test_second_order_better_at_small_x_pattern(self):
        # qualitative pattern behind the curve/contour reports: second order
        # wins at small x, first order at large x (both in the reference
        # data and in the regenerated cells)
        ref = load_reference(1)
        assert ref.value((0.5, 0.5), "delta2p", 1000) < ref.value((0.5, 0.5), "delta1p", 1000)
        assert ref.value((100.0, 100.0), "delta2p", 1000) > ref.value((100.0, 100.0), "delta1p", 1000)
        rows = {r.point: r for r in generate_table(builtin_table_spec(1), "unscaled")}
        assert rows[(0.5, 0.5)].delta("delta2p", 1000) < rows[(0.5, 0.5)].delta("delta1p", 1000)
        assert rows[(100.0, 100.0)].delta("delta2p", 1000) > rows[(100.0, 100.0)].delta("delta1p", 1000)
