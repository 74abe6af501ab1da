"""Outer inverse iteration for the smallest p-Rayleigh quotient.

Each step solves the p-Laplace problem whose right-hand side is the signed
(p-1)-power of the previous iterate, records the norm ratio, and renormalizes
to unit L^p norm.  Renormalization is legitimate because the step map is
positively 1-homogeneous; the un-normalized sequence (and all quantities
defined on it) is reconstructed from the stored norm factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .calculus import (EnergyReport, GridFunction, energy_report, p_norm_pow,
                       rayleigh_quotient)
from .geometry import DomainSpec, Grid, Rectangle, build_grid
from .inner import SolverConfig, signed_power, solve_step_with_stats


class DegenerateIterate(RuntimeError):
    """An iterate's L^p norm underflowed; the iteration cannot continue."""


@dataclass(frozen=True)
class PositiveConstant:
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("constant init must be positive")


@dataclass(frozen=True)
class RandomPositive:
    seed: int = 0


@dataclass(frozen=True)
class Custom:
    function: GridFunction


InitPolicy = Union[PositiveConstant, RandomPositive, Custom]


def make_initial(grid: Grid, init: InitPolicy) -> GridFunction:
    if isinstance(init, PositiveConstant):
        return GridFunction.constant(grid, init.value)
    if isinstance(init, RandomPositive):
        rng = np.random.default_rng(init.seed)
        return GridFunction.from_interior(
            grid, rng.uniform(0.5, 1.5, size=grid.num_interior))
    if isinstance(init, Custom):
        if init.function.grid.shape != grid.shape:
            raise ValueError("custom init lives on a different grid")
        return init.function
    raise TypeError(f"unknown init policy {type(init).__name__}")


@dataclass(frozen=True)
class TraceStep:
    k: int
    report: EnergyReport
    R: float            # Rayleigh quotient of the normalized iterate
    N: float            # norm-power ratio before normalization (nan at k=0)
    Q: float            # N ** (1 - 1/p) (nan at k=0)
    norm_factor: float  # L^p norm of the raw iterate (1.0 at k=0)
    inner_iters: int


@dataclass
class IterationTrace:
    p: float
    h: float
    steps: list = field(default_factory=list)
    lambda_R: float = math.nan
    lambda_Q: float = math.nan
    mu: float = math.nan
    converged: bool = False
    tol_grad: float = math.nan   # resolved inner tolerance, for slack budgets
    barrier_bound: float = math.nan     # sup|w|_inf * sup|u_0|
    first_step_sup: float = math.nan    # raw sup|u_1|
    final: "GridFunction | None" = None  # last normalized iterate

    @property
    def num_steps(self) -> int:
        return len(self.steps) - 1  # step 0 is the initial function


def barrier_sup_bound(grid: Grid, p: float) -> float:
    """Sup over nodes of |x - y|^q / (q * dim^(1/(p-1))), with the comparison
    point y placed one spacing outside the midpoint of the longest side."""
    q = p / (p - 1)
    coords = grid.node_coords()
    spec = grid.spec
    if grid.dim == 1:
        y = np.array([spec.a - grid.h])
        dist = np.abs(coords - y[0])
    else:
        if isinstance(spec, Rectangle):
            lx, ly = spec.bx - spec.ax, spec.by - spec.ay
            if lx >= ly:
                y = np.array([0.5 * (spec.ax + spec.bx), spec.ay - grid.h])
            else:
                y = np.array([spec.ax - grid.h, 0.5 * (spec.ay + spec.by)])
        else:
            # mask: below the midpoint of the bounding box bottom side
            w = grid.h * (grid.shape[0] - 1)
            y = np.array([0.5 * w, -grid.h])
        dist = np.sqrt((coords[..., 0] - y[0]) ** 2
                       + (coords[..., 1] - y[1]) ** 2)
    in_domain = grid.interior | grid.boundary
    return float((dist[in_domain].max() ** q) / (q * grid.dim ** (1.0 / (p - 1))))


def inverse_iterate(spec: DomainSpec, n: int, p: float, init: InitPolicy,
                    K_max: int = 100, tol_outer: float = 1e-10,
                    cfg: SolverConfig | None = None,
                    grid: Grid | None = None,
                    min_steps: int = 2,
                    verbose: bool = False) -> IterationTrace:
    """Run the normalized inverse iteration and record its trace.

    The Cauchy stop on the Rayleigh quotient is suppressed before min_steps
    outer steps, which is useful for observing a fixed point over a set
    number of steps."""
    if K_max < 2:
        raise ValueError("K_max must be at least 2")
    if tol_outer <= 0:
        raise ValueError("tol_outer must be positive")
    if min_steps < 2:
        raise ValueError("min_steps must be at least 2")
    if cfg is None:
        cfg = SolverConfig(p=p)
    elif cfg.p != p:
        raise ValueError(f"cfg.p={cfg.p} disagrees with p={p}")
    if grid is None:
        grid = build_grid(spec, n)

    u = make_initial(grid, init)
    norm0 = p_norm_pow(u, p) ** (1.0 / p)
    if not (norm0 > 0 and math.isfinite(norm0)):
        raise DegenerateIterate("initial function has zero or non-finite L^p norm")
    u = u.scaled(1.0 / norm0)

    trace = IterationTrace(p=p, h=grid.h)
    trace.tol_grad = cfg.resolved_tol(1.0)
    trace.steps.append(TraceStep(
        k=0, report=energy_report(u, p), R=rayleigh_quotient(u, p),
        N=math.nan, Q=math.nan, norm_factor=1.0, inner_iters=0))
    trace.barrier_bound = barrier_sup_bound(grid, p) * np.abs(u.values).max()

    mu_est = None
    for k in range(1, K_max + 1):
        f = signed_power(u, p)
        # warm start at the expected scale of the raw next iterate
        R_prev = trace.steps[-1].R
        scale = R_prev ** (-1.0 / (p - 1)) if math.isfinite(R_prev) else 1.0
        guess = u.scaled(scale) if k > 1 else None
        raw, iters = solve_step_with_stats(f, cfg, initial=guess,
                                           verbose=verbose)
        c = p_norm_pow(raw, p) ** (1.0 / p)
        if not (c > 0 and math.isfinite(c)):
            raise DegenerateIterate(f"iterate {k} has L^p norm {c}")
        N = math.exp(-p * math.log(c))  # previous iterate is normalized
        u = raw.scaled(1.0 / c)
        R = rayleigh_quotient(u, p)
        trace.steps.append(TraceStep(
            k=k, report=energy_report(u, p), R=R, N=N,
            Q=N ** (1 - 1 / p), norm_factor=c, inner_iters=iters))
        if k == 1:
            trace.first_step_sup = c * np.abs(u.values).max()
        if verbose:
            print(f"step {k}: R={R:.12e} N={N:.6e} inner_iters={iters}")
        if abs(R - R_prev) <= tol_outer * R and k >= min_steps:
            trace.converged = True
            break

    last = trace.steps[-1]
    trace.lambda_R = last.R
    trace.lambda_Q = last.Q
    trace.mu = trace.lambda_R ** (1.0 / (p - 1))
    trace.final = u
    return trace


@dataclass(frozen=True)
class ClaimResult:
    name: str
    passed: bool
    worst_margin: float     # most negative slack observed (>= 0 means pass)
    worst_index: int        # step index where the worst margin occurred
    detail: str = ""


@dataclass(frozen=True)
class MonotonicityReport:
    claims: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def __str__(self):
        lines = []
        for c in self.claims:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name}: worst margin {c.worst_margin:.3e}"
                         f" at k={c.worst_index} {c.detail}")
        return "\n".join(lines)


def _monotone_claim(name, values, slack):
    """Check values[k] >= values[k+1] (relative slack); report worst margin.

    values[0] corresponds to outer step 1, and the reported index is the
    outer step of the later element of the worst pair."""
    worst, worst_k, ok = math.inf, -1, True
    for k in range(len(values) - 1):
        a, b = values[k], values[k + 1]
        margin = (a - b) / abs(a) + slack
        if margin < worst:
            worst, worst_k = margin, k + 2
        if margin < 0:
            ok = False
    return ClaimResult(name, ok, worst, worst_k)


def check_monotonicity(trace: IterationTrace,
                       slack: float | None = None) -> MonotonicityReport:
    """Verify the iteration's proven inequalities on a recorded trace:
    (a) the Rayleigh quotients are nonincreasing,
    (b) the norm-power ratios are nonincreasing,
    (c) both sequences stay above the limit values they converge to,
    (d) the scaled Dirichlet energies decay at least by the factor mu^p.
    """
    if len(trace.steps) < 4:
        raise ValueError("trace needs at least 3 iteration steps")
    if slack is None:
        slack = 100.0 * trace.tol_grad
    p = trace.p
    R = [s.R for s in trace.steps[1:]]
    N = [s.N for s in trace.steps[1:]]

    a = _monotone_claim("(a) Rayleigh quotient nonincreasing", R, slack)
    b = _monotone_claim("(b) norm ratio nonincreasing", N, slack)

    lam = trace.lambda_R
    lam_conj = math.exp(p / (p - 1) * math.log(lam))
    worst, worst_k, ok, which = math.inf, -1, True, ""
    for k, (r, nn) in enumerate(zip(R, N), start=1):
        for val, bound, tag in ((r, lam, "R"), (nn, lam_conj, "N")):
            margin = (val - bound) / bound + slack
            if margin < worst:
                worst, worst_k, which = margin, k, tag
            if margin < 0:
                ok = False
    c = ClaimResult("(c) bounded below by the limit values", ok, worst,
                    worst_k, f"({which} sequence)")

    # (d): with E_k the raw Dirichlet energy, mu^p E_{k+1} <= E_k reduces to
    # mu^p R_{k+1} / N_{k+1} <= R_k after factoring out the norm products.
    mu_p = lam ** (1.0 / (p - 1)) if lam > 0 else math.nan
    worst, worst_k, ok = math.inf, -1, True
    for k in range(1, len(R)):
        lhs = p * math.log(mu_p) + math.log(R[k]) - math.log(N[k])
        rhs = math.log(R[k - 1])
        margin = rhs - lhs + slack
        if margin < worst:
            worst, worst_k = margin, k + 1
        if margin < 0:
            ok = False
    d = ClaimResult("(d) scaled Dirichlet energy decay", ok, worst, worst_k)

    return MonotonicityReport(claims=(a, b, c, d))


def consistency_estimators(trace: IterationTrace) -> float:
    """Relative gap between the Rayleigh-quotient estimate of the smallest
    eigenvalue and the norm-ratio estimate."""
    if not trace.converged:
        raise ValueError("estimator consistency needs a converged trace")
    return abs(trace.lambda_R - trace.lambda_Q) / trace.lambda_R


def check_barrier(trace: IterationTrace) -> ClaimResult:
    """First-step sup bound from the explicit p-superharmonic comparison
    function: sup|u_1| <= sup|w| * sup|u_0|."""
    ok = trace.first_step_sup <= trace.barrier_bound
    margin = (trace.barrier_bound - trace.first_step_sup) / trace.barrier_bound
    return ClaimResult("barrier sup bound", ok, margin, 1)
