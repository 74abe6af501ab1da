import csv
import math

import numpy as np
import pytest

from pground import traceio
from pground.calculus import GridFunction
from pground.geometry import Interval
from pground.infinity import sweep
from pground.iteration import PositiveConstant, check_monotonicity, \
    inverse_iterate

from conftest import hat_function


@pytest.fixture(scope="module")
def trace():
    return inverse_iterate(Interval(0.0, 1.0), 31, 3.0, PositiveConstant())


class TestTraceCsv:
    def test_header(self, tmp_path, trace):
        path = tmp_path / "run.trace.csv"
        traceio.write_trace_csv(path, trace)
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["k", "R_k", "N_k", "Q_k", "sup_norm", "grad_sup",
                          "norm_factor", "inner_iters"]

    def test_round_trip_bit_exact(self, tmp_path, trace):
        path = tmp_path / "run.trace.csv"
        traceio.write_trace_csv(path, trace)
        back = traceio.read_trace_csv(path, p=trace.p, h=trace.h,
                                      tol_grad=trace.tol_grad)
        assert len(back.steps) == len(trace.steps)
        for a, b in zip(trace.steps, back.steps):
            assert b.k == a.k
            assert b.R == a.R
            assert (b.N == a.N) or (math.isnan(a.N) and math.isnan(b.N))
            assert b.norm_factor == a.norm_factor
            assert b.inner_iters == a.inner_iters
            assert b.report.sup_norm == a.report.sup_norm
            assert b.report.grad_sup == a.report.grad_sup

    def test_checks_run_on_read_trace(self, tmp_path, trace):
        path = tmp_path / "run.trace.csv"
        traceio.write_trace_csv(path, trace)
        back = traceio.read_trace_csv(path, p=trace.p, h=trace.h,
                                      tol_grad=trace.tol_grad)
        back.lambda_R = trace.lambda_R
        assert check_monotonicity(back).all_passed

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            traceio.read_trace_csv(path, p=2.0, h=0.1)


class TestSummaryJson:
    def test_round_trip(self, tmp_path, trace):
        path = tmp_path / "run.summary.json"
        traceio.write_summary_json(path, trace)
        back = traceio.read_summary_json(path)
        assert set(back) == {"p", "h", "lambda_R", "lambda_Q", "mu", "steps",
                             "converged"}
        assert back["lambda_R"] == trace.lambda_R
        assert back["steps"] == trace.num_steps
        assert back["converged"] is True


class TestSweepCsv:
    def test_header_and_rows(self, tmp_path):
        result = sweep(Interval(0.0, 1.0), 16, (4.0, 8.0))
        path = tmp_path / "out.sweep.csv"
        traceio.write_sweep_csv(path, result)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["p", "lambda_R", "lambda_root", "final_ratio",
                           "inradius_reciprocal", "converged"]
        assert len(rows) == 3
        assert float(rows[1][0]) == 4.0
        assert float(rows[1][4]) == pytest.approx(2.0)
        assert rows[1][5] == "1"


class TestGridFunctionCsv:
    def test_round_trip_1d(self, tmp_path, interval_grid):
        u = hat_function(interval_grid)
        path = tmp_path / "u.csv"
        traceio.write_gridfunction_csv(path, u)
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["x", "value"]
        back = traceio.read_gridfunction_csv(path, interval_grid)
        assert np.array_equal(back.values, u.values)

    def test_round_trip_2d(self, tmp_path, square_grid):
        rng = np.random.default_rng(0)
        u = GridFunction.from_interior(
            square_grid, rng.standard_normal(square_grid.num_interior))
        path = tmp_path / "u2.csv"
        traceio.write_gridfunction_csv(path, u)
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["x", "y", "value"]
        back = traceio.read_gridfunction_csv(path, square_grid)
        assert np.array_equal(back.values, u.values)

    def test_dimension_mismatch(self, tmp_path, interval_grid, square_grid):
        path = tmp_path / "u.csv"
        traceio.write_gridfunction_csv(path, hat_function(interval_grid))
        with pytest.raises(ValueError):
            traceio.read_gridfunction_csv(path, square_grid)

    def test_off_grid_coordinate_rejected(self, tmp_path, interval_grid):
        path = tmp_path / "u.csv"
        path.write_text("x,value\n0.123456,1.0\n")
        with pytest.raises(ValueError):
            traceio.read_gridfunction_csv(path, interval_grid)

    def test_seventeen_digit_floats(self, tmp_path, interval_grid):
        vals = np.zeros(interval_grid.shape)
        vals[5] = 1.0 / 3.0
        traceio.write_gridfunction_csv(tmp_path / "u.csv",
                                       GridFunction(interval_grid, vals))
        text = (tmp_path / "u.csv").read_text()
        assert "0.33333333333333331" in text
