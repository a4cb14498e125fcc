"""Finite-N agent simulation against a mean-field policy.

Each agent follows the precomputed feedback policy, reading the control at
its nearest grid node, with Gaussian increments of variance ``2 sigma dt``
and reflection at the ends of the interval.  The binned empirical measure
is compared with the mean-field measure path in W1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .metrics import wasserstein1_grid
from .mfg import picard_solve
from .scenario import GridScenario

__all__ = [
    "SimResult",
    "empirical_measure",
    "simulate_agents",
    "convergence_scan",
]


@dataclass
class SimResult:
    empirical: np.ndarray  # (T_steps + 1, M)
    per_agent_cost: np.ndarray  # (N,)
    seed: int
    w1_to_reference: float | None = None
    final_positions: np.ndarray | None = None


def empirical_measure(positions, grid) -> np.ndarray:
    """Histogram of positions on their nearest grid nodes, ties to the lower node."""
    grid = np.asarray(grid, dtype=float)
    x = np.asarray(positions, dtype=float).ravel()
    if x.size == 0:
        raise InputError("need at least one position")
    if np.any(x < grid[0]) or np.any(x > grid[-1]) or not np.all(np.isfinite(x)):
        raise InputError("position outside the grid bounds")
    hi = np.clip(np.searchsorted(grid, x, side="left"), 1, grid.size - 1)
    lo = hi - 1
    if grid.size == 1:
        idx = np.zeros(x.size, dtype=int)
    else:
        idx = np.where(x - grid[lo] <= grid[hi] - x, lo, hi)
    counts = np.bincount(idx, minlength=grid.size)
    return counts / x.size


def _reflect(x, lo, hi):
    span = hi - lo
    # fold onto [lo, lo + 2*span) then mirror the upper half
    y = np.mod(x - lo, 2.0 * span)
    y = np.where(y > span, 2.0 * span - y, y)
    return lo + y


def simulate_agents(
    scenario: GridScenario, N: int, seed: int, policy, reference=None
) -> SimResult:
    """Simulate N agents under ``policy`` from independent draws of mu0.

    ``reference``, if given, is a mean-field measure path; its final slice
    is compared with the final empirical slice.
    """
    if N < 1:
        raise InputError("N must be >= 1")
    T, M = scenario.T_steps, scenario.M
    policy = np.asarray(policy)
    if policy.shape != (T, M):
        raise InputError(f"policy must have shape {(T, M)}, got {policy.shape}")
    grid = scenario.grid
    controls = scenario.controls_array
    K = scenario.kernel_matrix
    c0 = scenario.base_cost
    rng = np.random.default_rng(seed)

    start = rng.choice(M, size=N, p=scenario.initial_measure())
    x = grid[start].copy()
    noise_sd = np.sqrt(2.0 * scenario.sigma * scenario.dt)

    empirical = np.empty((T + 1, M))
    cost = np.zeros(N)
    for t in range(T):
        mu_hat = empirical_measure(x, grid)
        empirical[t] = mu_hat
        node = scenario.nearest_index(x)
        running = c0[node] + scenario.lam * (K @ mu_hat)[node] + np.abs(x - scenario.y_star)
        cost += running * scenario.dt
        x = x + controls[policy[t, node]] * scenario.dt
        if noise_sd > 0:
            x = x + noise_sd * rng.standard_normal(N)
        x = _reflect(x, scenario.x_min, scenario.x_max)
    empirical[T] = empirical_measure(x, grid)
    cost += np.abs(x - scenario.y_star)

    w1 = None
    if reference is not None:
        reference = np.asarray(reference, dtype=float)
        w1 = wasserstein1_grid(empirical[T], reference[-1], grid)
    return SimResult(empirical, cost, seed, w1, x)


def convergence_scan(scenario: GridScenario, N_list, seeds, solution=None):
    """Median final-time W1 between empirical and mean-field measures, per N.

    Returns rows ``(N, median_w1)`` sorted by N.  The mean-field solution is
    computed with ``picard_solve`` unless supplied.
    """
    N_list = sorted(int(n) for n in N_list)
    seeds = [int(s) for s in seeds]
    if not N_list:
        raise InputError("N_list must be nonempty")
    if not seeds:
        raise InputError("seeds must be nonempty")
    if N_list[0] < 1:
        raise InputError("every N must be >= 1")
    if solution is None:
        solution = picard_solve(scenario)
    rows = []
    for N in N_list:
        w1 = [
            simulate_agents(scenario, N, s, solution.policy, solution.mu).w1_to_reference
            for s in seeds
        ]
        rows.append((N, float(np.median(w1))))
    return rows
