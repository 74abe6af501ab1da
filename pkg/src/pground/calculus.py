"""Discrete energies on grid functions.

The gradient lives on cells: in 1D the forward difference per cell, in 2D the
pair of forward differences along the two edges at the cell's lower-left
corner.  Both p-integrals use the rectangle rule.  The resulting discrete
p-Dirichlet energy is convex and exactly differentiable, which is what the
iteration's monotonicity arguments need.

Energy sums factor out the largest cell gradient before exponentiation so
that large exponents (p up to 64 and beyond) stay inside double range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Grid


class DegenerateFunction(ValueError):
    """Operation undefined for the identically-zero function."""


@dataclass(frozen=True)
class GridFunction:
    """Node values on a grid, zero on boundary (and exterior) nodes."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function has non-finite values")
        outside = ~self.grid.interior
        if np.any(vals[outside] != 0.0):
            raise ValueError("grid function must vanish outside the interior")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_interior(cls, grid: Grid, interior_values: np.ndarray) -> "GridFunction":
        vals = np.zeros(grid.shape)
        vals[grid.interior] = interior_values
        return cls(grid, vals)

    @classmethod
    def constant(cls, grid: Grid, c: float = 1.0) -> "GridFunction":
        vals = np.zeros(grid.shape)
        vals[grid.interior] = c
        return cls(grid, vals)

    @classmethod
    def zero(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)


@dataclass(frozen=True)
class EnergyReport:
    """Summary norms of one grid function."""

    dirichlet_p: float
    norm_p: float
    sup_norm: float
    grad_sup: float


def gradient_field(u: GridFunction) -> np.ndarray:
    """Per-cell gradient; shape (ncells,) in 1D, (ncx, ncy, 2) in 2D.

    Cells outside the domain report zero.
    """
    g = u.grid
    v = u.values
    if g.dim == 1:
        out = (v[1:] - v[:-1]) / g.h
        out[~g.cell_mask] = 0.0
        return out
    gx = (v[1:, :-1] - v[:-1, :-1]) / g.h
    gy = (v[:-1, 1:] - v[:-1, :-1]) / g.h
    out = np.stack([gx, gy], axis=-1)
    out[~g.cell_mask] = 0.0
    return out


def _cell_grad_sq(u: GridFunction) -> np.ndarray:
    """Squared Euclidean norm of the cell gradient, zero off-domain."""
    f = gradient_field(u)
    if u.grid.dim == 1:
        return f * f
    return f[..., 0] ** 2 + f[..., 1] ** 2


def _stable_pow_sum(base_sq: np.ndarray, p: float, weight: float) -> float:
    """weight * sum(base_sq ** (p/2)), factoring out the max to avoid overflow."""
    m2 = float(base_sq.max()) if base_sq.size else 0.0
    if m2 == 0.0:
        return 0.0
    s = float(np.sum((base_sq / m2) ** (p / 2)))
    log_val = 0.5 * p * math.log(m2) + math.log(s) + math.log(weight)
    if log_val > 700.0:
        return math.inf
    return math.exp(log_val)


def p_dirichlet_energy(u: GridFunction, p: float) -> float:
    """Rectangle-rule value of the integral of |grad u|^p."""
    _require_p(p)
    return _stable_pow_sum(_cell_grad_sq(u), p, u.grid.h ** u.grid.dim)


def p_norm_pow(u: GridFunction, p: float) -> float:
    """Rectangle-rule value of the integral of |u|^p (p-th power of the norm)."""
    _require_p(p)
    vi = u.values[u.grid.interior]
    return _stable_pow_sum(vi * vi, p, u.grid.h ** u.grid.dim)


def p_norm(u: GridFunction, p: float) -> float:
    return p_norm_pow(u, p) ** (1.0 / p)


def rayleigh_quotient(u: GridFunction, p: float) -> float:
    """Ratio of the p-Dirichlet energy to the p-norm power; scale invariant."""
    _require_p(p)
    gsq = _cell_grad_sq(u)
    vi = u.values[u.grid.interior]
    num_m2 = float(gsq.max()) if gsq.size else 0.0
    den_m2 = float(np.max(vi * vi)) if vi.size else 0.0
    if den_m2 == 0.0:
        raise DegenerateFunction("Rayleigh quotient of the zero function")
    if num_m2 == 0.0:
        return 0.0
    # work in logs: both sums can individually overflow for large p
    log_num = 0.5 * p * math.log(num_m2) + math.log(np.sum((gsq / num_m2) ** (p / 2)))
    log_den = 0.5 * p * math.log(den_m2) + math.log(np.sum((vi * vi / den_m2) ** (p / 2)))
    return math.exp(log_num - log_den)


def sup_norm(u: GridFunction) -> float:
    return float(np.abs(u.values).max())


def grad_sup(u: GridFunction) -> float:
    return float(np.sqrt(_cell_grad_sq(u).max()))


def energy_report(u: GridFunction, p: float) -> EnergyReport:
    return EnergyReport(
        dirichlet_p=p_dirichlet_energy(u, p),
        norm_p=p_norm_pow(u, p),
        sup_norm=sup_norm(u),
        grad_sup=grad_sup(u),
    )


def functional_value(v: GridFunction, f: GridFunction, p: float,
                     eps: float = 0.0) -> float:
    """Value of the inner objective:
    sum over cells of (1/p)(|grad v|^2 + eps^2)^(p/2) h^d minus sum of f v h^d.
    """
    _require_p(p)
    hd = v.grid.h ** v.grid.dim
    gsq = _cell_grad_sq(v)
    mask = v.grid.cell_mask
    with np.errstate(over="ignore"):
        bulk = np.sum((gsq[mask] + eps * eps) ** (p / 2)) / p * hd
    load = float(np.sum(f.values * v.values)) * hd
    return float(bulk) - load


def functional_gradient(v: GridFunction, f: GridFunction, p: float,
                        eps: float = 0.0) -> GridFunction:
    """Exact gradient of the inner objective w.r.t. interior node values."""
    grad = _raw_functional_gradient(v.grid, v.values, f.values, p, eps)
    return GridFunction(v.grid, grad)


def _raw_functional_gradient(grid: Grid, v: np.ndarray, f: np.ndarray,
                             p: float, eps: float) -> np.ndarray:
    """Array-level gradient; zero outside the interior."""
    h, hd = grid.h, grid.h ** grid.dim
    out = np.zeros(grid.shape)
    if grid.dim == 1:
        g = (v[1:] - v[:-1]) / h
        g[~grid.cell_mask] = 0.0
        w = (g * g + eps * eps) ** (p / 2 - 1)
        flux = np.where(grid.cell_mask, w * g, 0.0)
        out[:-1] -= flux * (hd / h)
        out[1:] += flux * (hd / h)
    else:
        gx = (v[1:, :-1] - v[:-1, :-1]) / h
        gy = (v[:-1, 1:] - v[:-1, :-1]) / h
        mask = grid.cell_mask
        gsq = np.where(mask, gx * gx + gy * gy, 0.0)
        w = (gsq + eps * eps) ** (p / 2 - 1)
        fx = np.where(mask, w * gx, 0.0) * (hd / h)
        fy = np.where(mask, w * gy, 0.0) * (hd / h)
        out[:-1, :-1] -= fx + fy
        out[1:, :-1] += fx
        out[:-1, 1:] += fy
    out -= f * hd
    out[~grid.interior] = 0.0
    return out


def _require_p(p: float) -> None:
    if not p > 1:
        raise ValueError(f"exponent p must exceed 1, got {p}")
