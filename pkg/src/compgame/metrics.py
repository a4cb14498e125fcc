"""Wasserstein-1 distances between measures on a 1-D grid.

``wasserstein1_grid`` uses the CDF closed form.  ``wasserstein1_lp_oracle``
solves the same transport problem independently, by exact north-west
corner matching in rational arithmetic, and exists to check the closed form.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import InputError

__all__ = [
    "check_measure",
    "wasserstein1_grid",
    "wasserstein1_lp_oracle",
    "equilibrium_gap",
    "ORACLE_MAX_POINTS",
]

ORACLE_MAX_POINTS = 12


def check_measure(mu, size=None, atol=1e-9, name="measure"):
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1:
        raise InputError(f"{name} must be one-dimensional")
    if size is not None and mu.shape[0] != size:
        raise InputError(f"{name} has length {mu.shape[0]}, expected {size}")
    if np.any(mu < 0) or not np.all(np.isfinite(mu)):
        raise InputError(f"{name} has negative or non-finite weights")
    if abs(mu.sum() - 1.0) > atol:
        raise InputError(f"{name} sums to {mu.sum()!r}, not 1")
    return mu


def _check_grid(grid, size):
    grid = np.asarray(grid, dtype=float)
    if grid.shape != (size,):
        raise InputError(f"grid has {grid.size} points, measures have {size}")
    if size > 1 and not np.all(np.diff(grid) > 0):
        raise InputError("grid must be strictly increasing")
    return grid


def wasserstein1_grid(mu, nu, grid) -> float:
    """W1 between two measures on the same grid via the CDF formula.

    Sum over intervals of |F_mu(x_i) - F_nu(x_i)| * (x_{i+1} - x_i), with
    right-continuous CDFs; the last CDF entry carries no interval.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise InputError(f"length mismatch: {mu.shape} vs {nu.shape}")
    mu = check_measure(mu, name="mu")
    nu = check_measure(nu, name="nu")
    grid = _check_grid(grid, mu.shape[0])
    cdf_gap = np.cumsum(mu - nu)[:-1]
    return float(np.abs(cdf_gap) @ np.diff(grid))


def wasserstein1_lp_oracle(mu, nu, grid) -> float:
    """Exact optimal transport cost for small grids.

    Both marginals are converted to exact fractions and renormalized, then
    matched greedily in sorted order (the north-west corner rule, which is
    optimal for the convex cost |x - y| on a line).
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise InputError(f"length mismatch: {mu.shape} vs {nu.shape}")
    n = mu.shape[0]
    if n > ORACLE_MAX_POINTS:
        raise InputError(f"oracle refuses grids above {ORACLE_MAX_POINTS} points (got {n})")
    check_measure(mu, name="mu")
    check_measure(nu, name="nu")
    grid = _check_grid(grid, n)

    xs = [Fraction(float(x)) for x in grid]
    a = [Fraction(float(w)) for w in mu]
    b = [Fraction(float(w)) for w in nu]
    sa, sb = sum(a), sum(b)
    a = [w / sa for w in a]
    b = [w / sb for w in b]

    cost = Fraction(0)
    i = j = 0
    while i < n and j < n:
        if a[i] == 0:
            i += 1
            continue
        if b[j] == 0:
            j += 1
            continue
        moved = min(a[i], b[j])
        cost += moved * abs(xs[i] - xs[j])
        a[i] -= moved
        b[j] -= moved
    return float(cost)


def equilibrium_gap(a, b, grid) -> float:
    """Sup over time of W1 between the slices of two measure paths."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2:
        raise InputError("measure paths must be 2-D (time x grid)")
    if a.shape[0] != b.shape[0]:
        raise InputError(f"horizon mismatch: {a.shape[0]} vs {b.shape[0]} slices")
    if a.shape[1] != b.shape[1]:
        raise InputError(f"grid mismatch: {a.shape[1]} vs {b.shape[1]} points")
    for name, path in (("a", a), ("b", b)):
        if np.any(path < 0) or np.any(np.abs(path.sum(axis=1) - 1.0) > 1e-9):
            raise InputError(f"path {name} has a slice that is not a probability measure")
    grid = _check_grid(grid, a.shape[1])
    cdf_gap = np.cumsum(a - b, axis=1)[:, :-1]
    return float((np.abs(cdf_gap) @ np.diff(grid)).max())
