"""Discrete-time, 1-D grid mean-field game solver.

The value function is computed by a backward Bellman sweep over a finite
set of velocity controls, the population by a forward pushforward of the
measure under the resulting policy.  Both sweeps share one transition
kernel: drift by ``a * dt`` with linear interpolation onto the two nearest
grid points, then the three-point diffusion stencil.  ``picard_solve``
alternates the two sweeps with damping until the measure path is
self-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .metrics import equilibrium_gap
from .scenario import GridScenario

__all__ = [
    "MfgSolution",
    "drift_matrix",
    "smoothing_matrix",
    "transition_matrices",
    "running_cost",
    "solve_hjb",
    "solve_fp",
    "best_response_path",
    "picard_solve",
    "energy",
    "path_potential",
    "relaxation_time",
]

_SNAP = 1e-9
_TIE = 1e-12


@dataclass
class MfgSolution:
    phi: np.ndarray  # (T_steps + 1, M)
    policy: np.ndarray  # (T_steps, M) control indices
    mu: np.ndarray  # (T_steps + 1, M)
    residuals: list[float]
    iterations: int
    converged: bool
    iterates: list[np.ndarray] | None = None


def drift_matrix(scenario: GridScenario, a: float) -> np.ndarray:
    """Row-stochastic matrix moving grid point i by a*dt, split linearly."""
    M = scenario.M
    pos = np.arange(M) + a * scenario.dt / scenario.h
    pos = np.clip(pos, 0.0, M - 1)
    near = np.rint(pos)
    pos = np.where(np.abs(pos - near) < _SNAP, near, pos)
    lo = np.minimum(np.floor(pos).astype(int), M - 2)
    frac = pos - lo
    D = np.zeros((M, M))
    rows = np.arange(M)
    D[rows, lo] += 1.0 - frac
    D[rows, lo + 1] += frac
    return D


def smoothing_matrix(scenario: GridScenario) -> np.ndarray:
    """Column-stochastic diffusion step built from the [s, 1-2s, s] stencil.

    Mass pushed past an end node stays on that node (no-flux boundary).
    """
    M = scenario.M
    repeats, s = scenario.diffusion_stencil
    S = np.eye(M) * (1.0 - 2.0 * s)
    idx = np.arange(M - 1)
    S[idx, idx + 1] = s
    S[idx + 1, idx] = s
    S[0, 0] += s
    S[-1, -1] += s
    if repeats > 1:
        S = np.linalg.matrix_power(S, repeats)
    return S


def transition_matrices(scenario: GridScenario) -> np.ndarray:
    """One-step kernels P[a, i, j] = Pr(i -> j | control a)."""
    cache = scenario._cache
    if "transitions" not in cache:
        drifts = [drift_matrix(scenario, a) for a in scenario.controls]
        if scenario.sigma > 0:
            S = smoothing_matrix(scenario)
            drifts = [D @ S.T for D in drifts]
        P = np.stack(drifts)
        P.setflags(write=False)
        cache["transitions"] = P
    return cache["transitions"]


def running_cost(scenario: GridScenario, mu: np.ndarray) -> np.ndarray:
    """c(x, mu) = c0(x) + lambda * (K * mu)(x) for one slice or a whole path."""
    mu = np.asarray(mu, dtype=float)
    congestion = mu @ scenario.kernel_matrix.T
    return scenario.base_cost + scenario.lam * congestion


def _control_order(scenario: GridScenario) -> np.ndarray:
    return np.array(
        sorted(range(len(scenario.controls)), key=lambda k: (abs(scenario.controls[k]), k))
    )


def _check_path(scenario, mu, name="mu"):
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (scenario.T_steps + 1, scenario.M):
        raise InputError(
            f"{name} must have shape {(scenario.T_steps + 1, scenario.M)}, got {mu.shape}"
        )
    return mu


def solve_hjb(scenario: GridScenario, mu) -> tuple[np.ndarray, np.ndarray]:
    """Backward Bellman sweep given the population path ``mu``.

    Returns ``(phi, policy)`` where ``phi[T] = |x - y*|`` and ``policy[t, x]``
    indexes the minimizing control (ties: smallest |a|, then smallest index).
    """
    mu = _check_path(scenario, mu)
    T, M = scenario.T_steps, scenario.M
    P = transition_matrices(scenario)
    order = _control_order(scenario)
    P_ordered = P[order]
    d = scenario.target_distance
    stage = (running_cost(scenario, mu) + d) * scenario.dt

    phi = np.empty((T + 1, M))
    policy = np.empty((T, M), dtype=int)
    phi[T] = d
    cols = np.arange(M)
    for t in range(T - 1, -1, -1):
        q = P_ordered @ phi[t + 1]  # (n_controls, M)
        best = q.min(axis=0)
        near_best = q <= best + _TIE * (1.0 + np.abs(best))
        k = np.argmax(near_best, axis=0)
        policy[t] = order[k]
        phi[t] = stage[t] + q[k, cols]
    return phi, policy


def solve_fp(scenario: GridScenario, policy, mu0) -> np.ndarray:
    """Forward pushforward of ``mu0`` under ``policy``; returns (T+1, M)."""
    T, M = scenario.T_steps, scenario.M
    policy = np.asarray(policy)
    if policy.shape != (T, M):
        raise InputError(f"policy must have shape {(T, M)}, got {policy.shape}")
    n_controls = len(scenario.controls)
    if policy.size and (policy.min() < 0 or policy.max() >= n_controls):
        raise InputError("policy refers to a control outside the scenario")
    mu0 = np.asarray(mu0, dtype=float)
    if mu0.shape != (M,):
        raise InputError(f"mu0 must have length {M}, got {mu0.shape}")
    P = transition_matrices(scenario)

    mu = np.empty((T + 1, M))
    mu[0] = mu0
    for t in range(T):
        nxt = np.zeros(M)
        for k in range(n_controls):
            mask = policy[t] == k
            if mask.any():
                nxt += mu[t, mask] @ P[k, mask]
        mu[t + 1] = nxt
    return mu


def best_response_path(scenario: GridScenario, mu, mu0=None):
    """One application of HJB then FP: the population's reply to ``mu``."""
    if mu0 is None:
        mu0 = scenario.initial_measure()
    phi, policy = solve_hjb(scenario, mu)
    return phi, policy, solve_fp(scenario, policy, mu0)


def picard_solve(
    scenario: GridScenario, init=None, record_iterates=False
) -> MfgSolution:
    """Damped Picard iteration for a mean-field equilibrium.

    ``mu^(k+1) = (1 - omega) mu^(k) + omega FP(HJB(mu^(k)))`` starting from the
    constant-in-time ``mu0`` path, or from ``init`` when given.  The residual
    of iteration k is the sup-over-time W1 gap between the best-response path
    ``nu = FP(HJB(mu^(k)))`` and its own best response ``FP(HJB(nu))``, i.e.
    how far ``nu`` is from being self-consistent.  Convergence requires the
    residual to fall strictly below ``tol``.  The returned ``mu`` is ``nu``
    and ``phi``/``policy`` are ``HJB(nu)``.
    """
    T, M = scenario.T_steps, scenario.M
    mu0 = scenario.initial_measure()
    grid = scenario.grid
    if init is None:
        current = np.tile(mu0, (T + 1, 1))
    else:
        current = _check_path(scenario, init, name="init").copy()

    residuals = []
    iterates = [current.copy()] if record_iterates else None
    converged = False
    nu = current
    phi, policy = solve_hjb(scenario, current)
    for _ in range(scenario.max_iters):
        _, _, nu = best_response_path(scenario, current, mu0)
        phi, policy, reply = best_response_path(scenario, nu, mu0)
        residual = equilibrium_gap(reply, nu, grid)
        residuals.append(residual)
        current = (1.0 - scenario.omega) * current + scenario.omega * nu
        if record_iterates:
            iterates.append(current.copy())
        if residual < scenario.tol:
            converged = True
            break
    return MfgSolution(
        phi=phi,
        policy=policy,
        mu=nu,
        residuals=residuals,
        iterations=len(residuals),
        converged=converged,
        iterates=iterates,
    )


def energy(scenario: GridScenario, mu, kind: str = "paper") -> float:
    """Population energy of one measure slice.

    ``paper``:      sum_x c(x, mu) mu(x), with c = c0 + lambda K*mu.
    ``potential``:  sum_x c0(x) mu(x) + lambda/2 mu^T K mu.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (scenario.M,):
        raise InputError(f"measure must have length {scenario.M}, got {mu.shape}")
    base = float(scenario.base_cost @ mu)
    quad = float(mu @ scenario.kernel_matrix @ mu)
    if kind == "paper":
        return base + scenario.lam * quad
    if kind == "potential":
        return base + 0.5 * scenario.lam * quad
    raise InputError(f"unknown energy kind {kind!r}")


def path_potential(scenario: GridScenario, mu) -> float:
    """Potential of a whole measure path: congestion potential plus distance cost.

    dt * sum_{t<T} [potential(mu_t) + d . mu_t] + d . mu_T, with d = |x - y*|.
    Damped Picard iterates do not increase it (the per-slice energy alone
    can go either way).
    """
    mu = _check_path(scenario, mu)
    d = scenario.target_distance
    running = sum(energy(scenario, m, "potential") + float(d @ m) for m in mu[:-1])
    return scenario.dt * running + float(d @ mu[-1])


def relaxation_time(residuals, epsilon: float) -> int | None:
    """First 1-based iteration whose residual is <= epsilon, else None."""
    if not epsilon > 0:
        raise InputError("epsilon must be > 0")
    for k, r in enumerate(residuals, start=1):
        if r <= epsilon:
            return k
    return None
