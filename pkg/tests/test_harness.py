import io
import math

import pytest

from hrmax.expansions import power_joint_correction
from hrmax.harness import (
    DEFAULT_N_GRID,
    ProbeRecord,
    RateProbe,
    comonotone_limit_precondition,
    loglog_slope,
    noise_floor,
    oscillating_drift_model,
    probe,
    probe_target,
    product_limit_precondition,
    richardson_limit,
    select_kappa_variant,
    slow_drift_scenario,
    verify_limit_targets,
    verify_uniform_convergence,
    verify_univariate_rate,
    write_probe_csv,
)
from hrmax.limits import husler_reiss_power_cdf
from hrmax.norming import FixedRho, RegimeParams, SecondOrderRho, SequenceRho, solve_bn
from hrmax.special import std_normal_cdf, std_normal_pdf
from hrmax.tables import builtin_table_spec

E = math.e
SMALL_GRID = (10**3, 10**4, 10**5, 10**6)


class TestProbe:
    def test_comonotone_at_unit_point_tends_to_zero(self):
        records = probe(RateProbe(FixedRho(1.0), RegimeParams(lam=0.0), (1.0, 1.0), SMALL_GRID))
        assert abs(records[-1].scaled_diff) < 1e-4

    def test_product_point_target(self):
        regime = RegimeParams(lam=math.inf)
        target = probe_target((E, E), regime)
        assert target == pytest.approx(2.0 * (2.0 / E) * math.exp(-2.0 / E), rel=1e-14)
        records = probe(RateProbe(FixedRho(0.0), regime, (E, E), SMALL_GRID))
        resids = [abs(r.scaled_diff - target) for r in records]
        assert all(b < a for a, b in zip(resids, resids[1:]))
        assert resids[-1] / target < 0.04  # measured 0.0323 at n=1e6

    def test_joint_correction_point(self):
        regime = RegimeParams(2.0, 3.0)
        records = probe(RateProbe(SecondOrderRho(2.0, 3.0), regime, (1.0, 1.0), DEFAULT_N_GRID))
        ratios = [r.scaled_diff / r.limit_value for r in records]
        est = richardson_limit([r.bn_squared for r in records], ratios)
        shared = -6.0 * std_normal_pdf(2.0)
        assert est == pytest.approx(shared, rel=0.02)  # measured 0.43%

    def test_underflow_flagged_not_crashed(self):
        records = probe(RateProbe(FixedRho(0.0), RegimeParams(lam=math.inf), (1e-3, 1e-3), SMALL_GRID))
        assert all(r.flag == "underflow" for r in records)
        assert all(math.isnan(r.scaled_diff) for r in records)

    def test_clamped_rho_flagged(self):
        records = probe(RateProbe(SecondOrderRho(2.0, 3.0), RegimeParams(2.0, 3.0), (1.0, 1.0), (3, 4, 10**3)))
        assert records[0].flag == "rho_clamped"
        assert records[-1].flag is None

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            RateProbe(FixedRho(0.0), RegimeParams(lam=math.inf), (1.0, 1.0), (10, 100))
        with pytest.raises(ValueError):
            RateProbe(FixedRho(0.0), RegimeParams(lam=math.inf), (1.0, 1.0), (10, 10, 100))

    def test_probe_target_requires_tau(self):
        with pytest.raises(ValueError):
            probe_target((1.0, 1.0), RegimeParams(lam=2.0))


class TestRichardson:
    def test_exact_on_polynomial_in_inverse_scale(self):
        # d(t) = 5 - 3 t + 2 t^2 with t = 1/b2 must extrapolate exactly
        b2s = [10.0, 20.0, 40.0]
        ds = [5.0 - 3.0 / b2 + 2.0 / b2**2 for b2 in b2s]
        assert richardson_limit(b2s, ds) == pytest.approx(5.0, rel=1e-12)

    def test_two_point_level(self):
        b2s = [10.0, 20.0]
        ds = [5.0 - 3.0 / b2 for b2 in b2s]
        assert richardson_limit(b2s, ds, levels=2) == pytest.approx(5.0, rel=1e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            richardson_limit([1.0], [2.0])
        with pytest.raises(ValueError):
            richardson_limit([1.0, 2.0], [1.0])

    def test_loglog_slope_recovers_power(self):
        b2s = [10.0, 20.0, 40.0, 80.0]
        resids = [7.0 * b2**-1.0 for b2 in b2s]
        assert loglog_slope(b2s, resids) == pytest.approx(-1.0, abs=1e-12)


class TestUnivariateRate:
    def test_unit_point_limit_zero(self):
        rep = verify_univariate_rate(1.0)
        assert rep.target == 0.0
        assert rep.final_ratio is None
        assert rep.residuals[-1] < 1e-4

    def test_x2_measured_ratios(self):
        rep = verify_univariate_rate(2.0)
        assert rep.decreasing
        assert rep.final_ratio == pytest.approx(0.046036, abs=1e-4)

    def test_x_half_sign_and_ratio(self):
        rep = verify_univariate_rate(0.5)
        # limit is negative: s(0.5) = 2((ln 2)^2 - ln 2) < 0
        assert rep.target < 0.0
        assert rep.target == pytest.approx(
            2.0 * (math.log(0.5) ** 2 + math.log(0.5)) * math.exp(-2.0), rel=1e-12
        )
        assert rep.decreasing
        assert rep.final_ratio == pytest.approx(0.203273, abs=1e-4)


class TestVariantSelection:
    def test_selects_tail_scaled(self):
        sel = select_kappa_variant([(2.0, 1.0), (1.0, 2.0), (3.0, 5.0)], 2.0, 3.0)
        assert sel.status == "selected"
        assert sel.variant == "tail_scaled"
        assert sel.margin >= 5.0
        assert sel.aggregate["tail_scaled"] * 5.0 <= sel.aggregate["unscaled"]

    def test_x_equal_one_points_are_ties(self):
        # the variants differ only through the 1/x factor, so any point with
        # x = 1 carries no discriminating information
        sel = select_kappa_variant([(1.0, 2.0), (1.0, 1.0)], 2.0, 3.0)
        assert sel.status == "inconclusive"
        assert all(ev.tie for ev in sel.evidence)

    def test_swapped_point_selects_same_variant(self):
        a = select_kappa_variant([(2.0, 1.0)], 2.0, 3.0, n_grid=SMALL_GRID)
        b = select_kappa_variant([(2.0, 1.0), (1.0, 2.0)], 2.0, 3.0, n_grid=SMALL_GRID)
        assert a.variant == b.variant == "tail_scaled"

    def test_evidence_is_reported(self):
        sel = select_kappa_variant([(3.0, 5.0)], 2.0, 3.0, n_grid=SMALL_GRID)
        text = str(sel)
        assert "aggregate deviation" in text and "(3.0, 5.0)" in text


class TestUniformConvergence:
    def test_paper_grid_sup(self):
        points = builtin_table_spec(3).points
        rep = verify_uniform_convergence(FixedRho(0.0), RegimeParams(lam=math.inf), points)
        assert rep.decreasing
        # largest first-order gap on this grid at n = 1e4 is the (6,7) cell
        assert rep.rows[1][1] == pytest.approx(0.07826, abs=5e-4)

    def test_sup_shrinks_roughly_like_bn_squared(self):
        points = [(x, y) for x in (0.5, 2.0, 5.0) for y in (0.5, 2.0, 5.0)]
        rep = verify_uniform_convergence(
            FixedRho(0.0), RegimeParams(lam=math.inf), points, n_grid=(10**3, 10**5)
        )
        shrink = rep.sups[0] / rep.sups[1]
        b2_ratio = solve_bn(10**5).bn_squared / solve_bn(10**3).bn_squared
        assert shrink == pytest.approx(b2_ratio, rel=0.35)

    def test_comonotone_grid_matches_univariate(self):
        rep = verify_uniform_convergence(
            FixedRho(1.0), RegimeParams(lam=0.0), [(2.0, 2.0), (2.0, 7.0)], n_grid=SMALL_GRID
        )
        uni = verify_univariate_rate(2.0, SMALL_GRID)
        # on x = y = 2 style points the sup is exactly the univariate gap
        assert rep.sups[-1] == pytest.approx(
            abs(uni.rows[-1][2]) / solve_bn(10**6).bn_squared, rel=1e-12
        )
        assert rep.passed(eps=0.1)


class TestLimitTargets:
    def test_product_regime_slope_in_band(self):
        grid = [(x, y) for x in (0.5, 1.5, 3.0, 5.0, 8.0) for y in (0.5, 1.5, 3.0, 5.0, 8.0)]
        rep = verify_limit_targets(FixedRho(0.0), RegimeParams(lam=math.inf), grid)
        assert -1.3 <= rep.median_slope <= -0.7
        med = rep.median_residuals
        assert all(b < a for a, b in zip(med, med[1:]))

    def test_comonotone_regime_slope_in_band(self):
        grid = [(x, y) for x in (0.5, 1.5, 3.0, 5.0, 8.0) for y in (0.5, 1.5, 3.0, 5.0, 8.0)]
        rep = verify_limit_targets(FixedRho(1.0), RegimeParams(lam=0.0), grid)
        assert -1.3 <= rep.median_slope <= -0.7

    def test_synthetic_near_comonotone_schedule(self):
        # rho_n = 1 - bn^-8 satisfies the bn^6 (1 - rho_n) -> 0 precondition
        # and must land on the same limit as exact rho = 1 (also exercises
        # the near-degenerate kernel branch)
        seq = SequenceRho(lambda n: 1.0 - solve_bn(n).bn ** -8)
        regime = RegimeParams(lam=0.0)
        records = probe(RateProbe(seq, regime, (2.0, 5.0), SMALL_GRID))
        target = probe_target((2.0, 5.0), regime)
        rel = [abs(r.scaled_diff - target) / abs(target) for r in records]
        assert all(b < a for a, b in zip(rel, rel[1:]))
        assert rel[-1] < 0.05  # measured 0.046
        pre = comonotone_limit_precondition(seq, SMALL_GRID)
        assert all(b < a for a, b in zip(pre, pre[1:]))

    def test_preconditions(self):
        pre = product_limit_precondition(FixedRho(0.0), (10**3, 10**5, 10**7))
        assert all(b < a for a, b in zip(pre, pre[1:]))
        assert comonotone_limit_precondition(FixedRho(1.0), (10**3,)) == [0.0]


class TestRateScenarios:
    def test_slow_drift_reproduces_custom_scaled_target(self):
        model, gamma, target = slow_drift_scenario(2.0, 2.0)
        point = (2.0, 1.0)
        grid = (10**4, 10**5, 10**6, 10**7, 10**8)
        records = probe(RateProbe(model, RegimeParams(lam=2.0), point, grid, scaling=gamma))
        t = target(point)
        # bn^2 / gamma_n must diverge for this regime to apply
        ratios = [solve_bn(n).bn_squared / gamma(solve_bn(n)) for n in grid]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        # the drift dies like 1/bn, so extrapolate in 1/bn rather than 1/bn^2
        est = richardson_limit([r.bn for r in records], [r.scaled_diff for r in records], levels=2)
        assert est == pytest.approx(t, rel=0.05)  # measured 2.3%

    def test_slow_drift_validation(self):
        with pytest.raises(ValueError):
            slow_drift_scenario(0.0, 1.0)
        with pytest.raises(ValueError):
            slow_drift_scenario(2.0, -1.0)

    def test_oscillating_demo_has_no_single_rate(self):
        model = oscillating_drift_model(2.0, 2.0)
        even = [model.rho(solve_bn(n)).value for n in (10**4, 10**6)]
        odd = [model.rho(solve_bn(n)).value for n in (10**4 + 1, 10**6 + 1)]
        # parity switches between schedules: neighboring n give far-apart rho
        assert abs(even[0] - odd[0]) > 0.05
        exact = SecondOrderRho(2.0, 0.0)
        assert even[0] == exact.rho(solve_bn(10**4)).value


class TestReporting:
    def test_probe_csv_layout(self):
        records = probe(RateProbe(FixedRho(0.0), RegimeParams(lam=math.inf), (E, E), (10**3, 10**4, 10**5)))
        target = probe_target((E, E), RegimeParams(lam=math.inf))
        buf = io.StringIO()
        write_probe_csv(buf, "rho=0", (E, E), records, target)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "scenario,x,y,n,bn,scaled_diff,target,residual"
        assert len(lines) == 4
        assert lines[1].startswith("rho=0,")

    def test_noise_floor_monotone_in_n(self):
        floors = [noise_floor(solve_bn(n)) for n in (10**3, 10**6, 10**9)]
        assert floors[0] < floors[1] < floors[2]
        assert floors[1] < 1e-7  # far below O(1) signals at n = 1e6
