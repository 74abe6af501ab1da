"""Independent reference computations used to validate the iteration.

Three routes, each avoiding the inverse-iteration code path:
  * smallest eigenpair of the linear (p=2) stencil via shifted inverse power
    iteration with a sparse factorization, dense-checked on small grids;
  * a 1D shooting method for general p, bisecting the eigenvalue until the
    first zero of the ODE solution lands on the right endpoint;
  * brute-force multistart minimization of the discrete Rayleigh quotient on
    tiny grids.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize
from scipy.sparse.linalg import factorized

from .calculus import GridFunction, p_norm_pow, rayleigh_quotient, \
    _raw_functional_gradient
from .geometry import DomainSpec, Grid, build_grid
from .inner import dirichlet_laplacian_matrix


class SizeExceeded(ValueError):
    """Grid too large for the requested dense/direct code path."""


def lambda2_reference(spec: DomainSpec, n: int,
                      grid: Grid | None = None) -> tuple[float, GridFunction]:
    """Smallest eigenvalue and (positive, unit L^2) eigenvector of the
    discrete Dirichlet Laplacian on the grid."""
    if grid is None:
        grid = build_grid(spec, n)
    m = grid.num_interior
    if m > 20_000:
        raise SizeExceeded(f"{m} interior nodes exceeds the dense-path cap")
    A = dirichlet_laplacian_matrix(grid)

    # shifted inverse power iteration (shift 0: A is positive definite)
    solve = factorized(A)
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(m)
    x /= np.linalg.norm(x)
    lam_old = math.inf
    for _ in range(10_000):
        y = solve(x)
        x = y / np.linalg.norm(y)
        lam = float(x @ (A @ x))
        if abs(lam - lam_old) <= 1e-14 * lam:
            break
        lam_old = lam
    if m <= 400:
        dense_vals = np.linalg.eigvalsh(A.toarray())
        if abs(dense_vals[0] - lam) > 1e-9 * max(1.0, abs(lam)):
            raise AssertionError(
                f"inverse power {lam} disagrees with dense {dense_vals[0]}")
    if x.sum() < 0:
        x = -x
    vec = GridFunction.from_interior(grid, x)
    vec = vec.scaled(1.0 / p_norm_pow(vec, 2.0) ** 0.5)
    return lam, vec


def _first_zero(p: float, lam: float, x_end: float = 3.0):
    """Location of the first positive zero of the 1D eigenfunction ODE started
    with unit conjugate variable, or None if no zero before x_end.

    The system is integrated in (u, s) with s the (p-1)-power of u'; s is
    smooth through critical points of u even for p < 2.
    """
    q = p / (p - 1)

    def rhs(x, z):
        u, s = z
        du = math.copysign(abs(s) ** (q - 1), s) if s != 0 else 0.0
        ds = -lam * (math.copysign(abs(u) ** (p - 1), u) if u != 0 else 0.0)
        return [du, ds]

    def hit_zero(x, z):
        return z[0]
    hit_zero.terminal = True
    hit_zero.direction = -1

    sol = solve_ivp(rhs, (0.0, x_end), [0.0, 1.0], events=hit_zero,
                    rtol=1e-12, atol=1e-14, dense_output=True, max_step=0.01)
    if sol.t_events[0].size:
        return float(sol.t_events[0][0]), sol
    return None, sol


def lambda_p_shooting_1d(p: float, tol: float = 1e-10) -> float:
    """First Dirichlet eigenvalue of the 1D p-Laplacian on (0, 1) by shooting
    and bisection on the eigenvalue."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = None, None
    lam = math.pi ** 2  # reasonable starting scale for every p
    for _ in range(200):
        z, _ = _first_zero(p, lam)
        if z is None or z > 1.0:
            lo = lam
            if hi is not None:
                break
            lam *= 2.0
        else:
            hi = lam
            if lo is not None:
                break
            lam *= 0.5
    if lo is None or hi is None:
        raise RuntimeError("failed to bracket the first eigenvalue")
    while (hi - lo) > tol * lo:
        mid = 0.5 * (lo + hi)
        z, _ = _first_zero(p, mid)
        if z is None or z > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shooting_profile(p: float, lam: float, num: int = 513):
    """Sampled eigenfunction candidate for eigenvalue lam: (x, u(x)) on a
    uniform grid of [0, 1], normalized to unit sup."""
    _, sol = _first_zero(p, lam, x_end=1.0)
    x = np.linspace(0.0, 1.0, num)
    u = sol.sol(x)[0]
    return x, u / np.abs(u).max()


def rayleigh_bruteforce(spec: DomainSpec, n: int, p: float,
                        restarts: int = 64, seed: int = 0,
                        grid: Grid | None = None) -> float:
    """Global minimum of the discrete Rayleigh quotient on a tiny grid by
    multistart local minimization over random sign patterns."""
    if grid is None:
        grid = build_grid(spec, n)
    m = grid.num_interior
    if m > 12:
        raise SizeExceeded(f"{m} interior nodes exceeds the brute-force cap")
    hd = grid.h ** grid.dim
    zero_rhs = np.zeros(grid.shape)

    def quotient_and_grad(z):
        u = GridFunction.from_interior(grid, z)
        E = rayleigh_quotient(u, p)  # raises on the zero function
        Np = p_norm_pow(u, p)
        # dE_total = p * gradient of (1/p) Dirichlet energy
        dE = p * _raw_functional_gradient(grid, u.values, zero_rhs, p, 0.0)
        ui = u.values[grid.interior]
        dNp = p * np.abs(ui) ** (p - 2) * ui * hd
        dR = (dE[grid.interior] - E * dNp) / Np
        return E, dR

    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(restarts):
        z0 = rng.standard_normal(m)
        z0 *= rng.choice([-1.0, 1.0])
        res = minimize(quotient_and_grad, z0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12})
        if res.fun < best:
            best = float(res.fun)
    return best
