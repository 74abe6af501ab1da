import copy
import math

import numpy as np
import pytest

from pground.calculus import GridFunction
from pground.geometry import Interval, Rectangle, build_grid
from pground.iteration import (Custom, PositiveConstant, RandomPositive,
                               barrier_sup_bound, check_barrier,
                               check_monotonicity, consistency_estimators,
                               inverse_iterate, make_initial)
from pground.oracles import lambda2_reference


@pytest.fixture(scope="module")
def p2_trace():
    return inverse_iterate(Interval(0.0, 1.0), 31, 2.0, PositiveConstant())


@pytest.fixture(scope="module")
def p3_trace():
    return inverse_iterate(Interval(0.0, 1.0), 31, 3.0, RandomPositive(seed=1))


class TestInitPolicies:
    def test_positive_constant(self, interval_grid):
        u = make_initial(interval_grid, PositiveConstant(2.5))
        assert np.all(u.values[interval_grid.interior] == 2.5)

    def test_constant_must_be_positive(self):
        with pytest.raises(ValueError):
            PositiveConstant(0.0)

    def test_random_positive_and_seeded(self, interval_grid):
        u = make_initial(interval_grid, RandomPositive(seed=4))
        v = make_initial(interval_grid, RandomPositive(seed=4))
        w = make_initial(interval_grid, RandomPositive(seed=5))
        vals = u.values[interval_grid.interior]
        assert np.all(vals > 0)
        assert np.array_equal(u.values, v.values)
        assert not np.array_equal(u.values, w.values)

    def test_custom_grid_mismatch(self, interval_grid, square_grid):
        u = GridFunction.constant(square_grid, 1.0)
        with pytest.raises(ValueError):
            make_initial(interval_grid, Custom(u))


class TestIteration:
    def test_matches_linear_eigenvalue(self, p2_trace):
        lam, _ = lambda2_reference(Interval(0.0, 1.0), 31)
        assert p2_trace.converged
        assert abs(p2_trace.lambda_R - lam) <= 1e-10 * lam

    def test_trace_shape(self, p2_trace):
        ks = [s.k for s in p2_trace.steps]
        assert ks == list(range(len(ks)))
        assert p2_trace.num_steps == len(ks) - 1
        first = p2_trace.steps[0]
        assert math.isnan(first.N) and math.isnan(first.Q)
        assert first.norm_factor == 1.0

    def test_iterates_normalized(self, p2_trace):
        for s in p2_trace.steps:
            # unit L^p norm after renormalization
            assert s.report.norm_p == pytest.approx(1.0, rel=1e-12)

    def test_estimator_gap(self, p3_trace):
        assert p3_trace.converged
        assert consistency_estimators(p3_trace) <= 1e-6

    def test_mu_definition(self, p3_trace):
        p = p3_trace.p
        assert p3_trace.mu == pytest.approx(
            p3_trace.lambda_R ** (1.0 / (p - 1)), rel=1e-13)

    def test_gap_requires_convergence(self, p3_trace):
        tr = copy.copy(p3_trace)
        tr.converged = False
        with pytest.raises(ValueError):
            consistency_estimators(tr)

    def test_cfg_p_mismatch(self):
        from pground.inner import SolverConfig
        with pytest.raises(ValueError):
            inverse_iterate(Interval(0.0, 1.0), 15, 3.0, PositiveConstant(),
                            cfg=SolverConfig(p=2.0))

    def test_min_steps_delays_stop(self):
        tr = inverse_iterate(Interval(0.0, 1.0), 15, 2.0, PositiveConstant(),
                             min_steps=6)
        assert tr.num_steps >= 6
        with pytest.raises(ValueError):
            inverse_iterate(Interval(0.0, 1.0), 15, 2.0, PositiveConstant(),
                            min_steps=1)

    def test_final_iterate_recorded(self, p2_trace):
        assert p2_trace.final is not None
        last = p2_trace.steps[-1].report
        assert np.abs(p2_trace.final.values).max() == pytest.approx(
            last.sup_norm)

    def test_2d_converges(self):
        tr = inverse_iterate(Rectangle(0.0, 1.0, 0.0, 1.0), 12, 3.0,
                             PositiveConstant())
        assert tr.converged
        assert tr.lambda_R > 0


class TestMonotonicityChecks:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_claims_hold(self, p, seed):
        tr = inverse_iterate(Interval(0.0, 1.0), 31, p,
                             RandomPositive(seed=seed))
        report = check_monotonicity(tr)
        assert report.all_passed, str(report)

    def test_claims_hold_2d(self):
        tr = inverse_iterate(Rectangle(0.0, 1.0, 0.0, 1.0), 12, 3.0,
                             RandomPositive(seed=0))
        assert check_monotonicity(tr).all_passed

    def test_detects_tampered_quotient(self, p3_trace):
        tr = copy.deepcopy(p3_trace)
        k_bad = 2
        s = tr.steps[k_bad]
        tr.steps[k_bad] = type(s)(k=s.k, report=s.report, R=1.5 * s.R, N=s.N,
                                  Q=s.Q, norm_factor=s.norm_factor,
                                  inner_iters=s.inner_iters)
        report = check_monotonicity(tr)
        claim_a = report.claims[0]
        assert not claim_a.passed
        # the violation is the drop from the inflated R_2 back to R_3
        assert claim_a.worst_index in (k_bad, k_bad + 1)

    def test_detects_tampered_norm_ratio(self, p3_trace):
        tr = copy.deepcopy(p3_trace)
        s = tr.steps[-1]
        tr.steps[-1] = type(s)(k=s.k, report=s.report, R=s.R, N=2.0 * s.N,
                               Q=s.Q, norm_factor=s.norm_factor,
                               inner_iters=s.inner_iters)
        report = check_monotonicity(tr)
        assert not report.all_passed
        names_failed = [c.name for c in report.claims if not c.passed]
        assert any("(b)" in n for n in names_failed)

    def test_too_short_trace_rejected(self, p3_trace):
        tr = copy.copy(p3_trace)
        tr.steps = p3_trace.steps[:3]
        with pytest.raises(ValueError):
            check_monotonicity(tr)

    def test_report_string(self, p3_trace):
        text = str(check_monotonicity(p3_trace))
        assert "PASS" in text and "FAIL" not in text


class TestBarrier:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 6.0])
    def test_first_step_bounded(self, p):
        tr = inverse_iterate(Interval(0.0, 1.0), 31, p, PositiveConstant())
        result = check_barrier(tr)
        assert result.passed
        assert tr.first_step_sup < tr.barrier_bound

    def test_first_step_bounded_2d(self):
        tr = inverse_iterate(Rectangle(0.0, 1.0, 0.0, 1.0), 12, 3.0,
                             PositiveConstant())
        assert check_barrier(tr).passed

    def test_bound_value_1d(self, interval_grid):
        # comparison point one spacing left of 0; farthest node is x = 1
        p = 2.0
        q = p / (p - 1)
        expect = (1.0 + interval_grid.h) ** q / q
        assert barrier_sup_bound(interval_grid, p) == pytest.approx(expect)

    def test_bound_value_2d(self, square_grid):
        # comparison point just below the bottom midpoint; the farthest nodes
        # are the top corners at distance sqrt(1/4 + (1 + h)^2)
        h = square_grid.h
        d = math.sqrt(0.25 + (1.0 + h) ** 2)
        assert barrier_sup_bound(square_grid, 2.0) == pytest.approx(d * d / 4.0)


class TestScaleCovariance:
    def test_init_scale_invariance(self):
        base = make_initial(build_grid(Interval(0.0, 1.0), 31),
                            RandomPositive(seed=6))
        tr1 = inverse_iterate(Interval(0.0, 1.0), 31, 3.0, Custom(base))
        tr2 = inverse_iterate(Interval(0.0, 1.0), 31, 3.0,
                              Custom(base.scaled(137.0)))
        assert abs(tr1.lambda_R - tr2.lambda_R) <= 1e-12 * tr1.lambda_R
        for s1, s2 in zip(tr1.steps, tr2.steps):
            assert abs(s1.R - s2.R) <= 1e-12 * abs(s1.R)

    def test_sign_flip_exact(self):
        base = make_initial(build_grid(Interval(0.0, 1.0), 31),
                            RandomPositive(seed=7))
        tr1 = inverse_iterate(Interval(0.0, 1.0), 31, 3.0, Custom(base))
        tr2 = inverse_iterate(Interval(0.0, 1.0), 31, 3.0,
                              Custom(base.scaled(-1.0)))
        for s1, s2 in zip(tr1.steps, tr2.steps):
            assert s2.R == s1.R
            assert s2.norm_factor == s1.norm_factor
