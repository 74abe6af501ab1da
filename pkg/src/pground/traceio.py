"""CSV / JSON serialization for traces, sweeps, and grid functions.

Floats are printed with 17 significant digits so that a written trace reads
back bit-identically.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .calculus import EnergyReport, GridFunction
from .geometry import Grid
from .infinity import SweepResult
from .iteration import IterationTrace, TraceStep

TRACE_COLUMNS = ["k", "R_k", "N_k", "Q_k", "sup_norm", "grad_sup",
                 "norm_factor", "inner_iters"]
SWEEP_COLUMNS = ["p", "lambda_R", "lambda_root", "final_ratio",
                 "inradius_reciprocal", "converged"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trace_csv(path, trace: IterationTrace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for s in trace.steps:
            w.writerow([s.k, _fmt(s.R), _fmt(s.N), _fmt(s.Q),
                        _fmt(s.report.sup_norm), _fmt(s.report.grad_sup),
                        _fmt(s.norm_factor), s.inner_iters])


def read_trace_csv(path, p: float, h: float,
                   tol_grad: float = 1e-10) -> IterationTrace:
    """Rebuild a trace (numeric columns only) from a CSV written by
    write_trace_csv; Dirichlet/norm entries of the per-step reports are not
    stored in the CSV and read back as nan."""
    trace = IterationTrace(p=p, h=h, tol_grad=tol_grad)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected trace header {header}")
        for row in r:
            k = int(row[0])
            rep = EnergyReport(dirichlet_p=math.nan, norm_p=math.nan,
                               sup_norm=float(row[4]), grad_sup=float(row[5]))
            trace.steps.append(TraceStep(
                k=k, report=rep, R=float(row[1]), N=float(row[2]),
                Q=float(row[3]), norm_factor=float(row[6]),
                inner_iters=int(row[7])))
    return trace


def trace_summary(trace: IterationTrace) -> dict:
    return {
        "p": trace.p,
        "h": trace.h,
        "lambda_R": trace.lambda_R,
        "lambda_Q": trace.lambda_Q,
        "mu": trace.mu,
        "steps": trace.num_steps,
        "converged": trace.converged,
    }


def write_summary_json(path, trace: IterationTrace) -> None:
    with open(path, "w") as fh:
        json.dump(trace_summary(trace), fh, indent=2)
        fh.write("\n")


def read_summary_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_sweep_csv(path, result: SweepResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for e in result.entries:
            w.writerow([_fmt(e.p), _fmt(e.lambda_R), _fmt(e.lambda_root),
                        _fmt(e.final_ratio), _fmt(result.inradius_reciprocal),
                        int(e.converged)])


def write_gridfunction_csv(path, u: GridFunction) -> None:
    """Node coordinates and values: header "x,value" (1D) or "x,y,value"."""
    g = u.grid
    coords = g.node_coords()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        carried = g.interior | g.boundary
        if g.dim == 1:
            w.writerow(["x", "value"])
            for i in np.nonzero(carried)[0]:
                w.writerow([_fmt(coords[i]), _fmt(u.values[i])])
        else:
            w.writerow(["x", "y", "value"])
            for i, j in zip(*np.nonzero(carried)):
                w.writerow([_fmt(coords[i, j, 0]), _fmt(coords[i, j, 1]),
                            _fmt(u.values[i, j])])


def read_gridfunction_csv(path, grid: Grid) -> GridFunction:
    """Read node values for an existing grid; coordinates must match grid
    nodes to within 1e-9 of the spacing."""
    vals = np.zeros(grid.shape)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header not in (["x", "value"], ["x", "y", "value"]):
            raise ValueError(f"{path}: unexpected header {header}")
        expect_dim = 1 if header == ["x", "value"] else 2
        if expect_dim != grid.dim:
            raise ValueError(f"{path}: dimension {expect_dim} != grid {grid.dim}")
        tol = 1e-9 * grid.h
        for row in r:
            pos = [float(c) for c in row[:-1]]
            idx = []
            for d, x in enumerate(pos):
                fi = (x - grid.origin[d]) / grid.h
                i = int(round(fi))
                if abs(fi - i) * grid.h > tol or not 0 <= i < grid.shape[d]:
                    raise ValueError(f"{path}: {pos} is not a grid node")
                idx.append(i)
            vals[tuple(idx)] = float(row[-1])
    vals[~grid.interior] = 0.0
    return GridFunction(grid, vals)
