"""Deterministic search versus witness verification, measured.

The needle family hides one index among ``2**n``.  A deterministic scan
pays ``hidden + 1`` equality queries; a verifier handed the witness checks
it in ``n`` bit comparisons.  ``mfg_gap_scan`` does the mean-field analogue:
it compares Picard solutions seeded from ``mu0`` against solutions seeded
from a path concentrated at the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, MalformedWitnessError
from .game import ApproxGame
from .metrics import equilibrium_gap
from .mfg import picard_solve, relaxation_time
from .scenario import GridScenario

__all__ = [
    "MAX_BITS",
    "NeedleInstance",
    "ScalingTable",
    "GapRow",
    "generate_needle",
    "needle_game",
    "deterministic_solve",
    "witness_verify",
    "scaling_report",
    "congestion_family",
    "witness_path",
    "mfg_gap_scan",
]

MAX_BITS = 24
_MAX_GAME_BITS = 10


@dataclass(frozen=True)
class NeedleInstance:
    n: int
    hidden: int
    witness: int

    @property
    def space_size(self) -> int:
        return 1 << self.n


@dataclass
class ScalingTable:
    rows: list[tuple[int, int, int]]  # (n, deterministic_worst_steps, verifier_steps)
    det_log2_slope: float
    verifier_slope: float


def generate_needle(n: int, hidden: int) -> NeedleInstance:
    if not 0 <= n <= MAX_BITS:
        raise InputError(f"n must lie in [0, {MAX_BITS}], got {n}")
    if not 0 <= hidden < (1 << n):
        raise InputError(f"hidden must lie in [0, 2^{n}), got {hidden}")
    return NeedleInstance(n, hidden, hidden)


def needle_game(inst: NeedleInstance) -> ApproxGame:
    """Game view: every index is a strategy, discrete metric, cost = queries."""
    if inst.n > _MAX_GAME_BITS:
        raise InputError(f"game view limited to n <= {_MAX_GAME_BITS}")
    size = inst.space_size
    dist = 1.0 - np.eye(size)
    cost = {x: float(x + 1) for x in range(size)}
    return ApproxGame.from_arrays(dist, range(size), [inst.hidden], cost)


def deterministic_solve(inst: NeedleInstance) -> tuple[int, int]:
    """Scan 0, 1, 2, ... with an equality oracle; returns (found, queries)."""
    queries = 0
    for candidate in range(inst.space_size):
        queries += 1
        if candidate == inst.hidden:
            return candidate, queries
    raise AssertionError("hidden index outside the search space")


def witness_verify(inst: NeedleInstance, witness: int) -> tuple[bool, int]:
    """Compare witness and hidden value bit by bit; returns (accepted, steps)."""
    if not 0 <= witness < inst.space_size:
        raise MalformedWitnessError(f"witness {witness} outside [0, 2^{inst.n})")
    if inst.n == 0:
        return True, 1
    accepted = True
    steps = 0
    for bit in range(inst.n):
        steps += 1
        if (witness >> bit) & 1 != (inst.hidden >> bit) & 1:
            accepted = False
    return accepted, steps


def scaling_report(n_range) -> ScalingTable:
    """Worst-case deterministic queries and verifier steps over ``n_range``."""
    ns = sorted(set(int(n) for n in n_range))
    if len(ns) < 2:
        raise InputError("need at least 2 sizes to fit a slope")
    rows = []
    for n in ns:
        inst = generate_needle(n, (1 << n) - 1)
        _, det = deterministic_solve(inst)
        _, ver = witness_verify(inst, inst.witness)
        rows.append((n, det, ver))
    arr = np.array(rows, dtype=float)
    det_slope = np.polyfit(arr[:, 0], np.log2(arr[:, 1]), 1)[0]
    ver_slope = np.polyfit(arr[:, 0], arr[:, 2], 1)[0]
    return ScalingTable(rows, float(det_slope), float(ver_slope))


def congestion_family(base: GridScenario):
    """Refinements of ``base``: M = 51 n + 1, T_steps = 50 n, same horizon."""
    horizon = base.T_steps * base.dt

    def member(n: int) -> GridScenario:
        if n < 1:
            raise InputError("family index n must be >= 1")
        steps = 50 * n
        return base.replace(M=51 * n + 1, T_steps=steps, dt=horizon / steps)

    return member


def witness_path(scenario: GridScenario) -> np.ndarray:
    """Constant-in-time path with all mass on the node nearest y*."""
    path = np.zeros((scenario.T_steps + 1, scenario.M))
    path[:, int(scenario.nearest_index(scenario.y_star))] = 1.0
    return path


@dataclass
class GapRow:
    n: int
    gap: float
    tau_deterministic: int | None
    tau_witness: int | None
    converged_deterministic: bool
    converged_witness: bool


def mfg_gap_scan(family, n_range, witness_init=witness_path) -> list[GapRow]:
    """Equilibrium gap between mu0-seeded and witness-seeded Picard solutions.

    ``witness_init(scenario)`` returns the seed path; returning None seeds
    from mu0, which makes both runs identical.  Non-converged runs are kept.
    """
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        raise InputError("n_range must be nonempty")
    rows = []
    for n in ns:
        scenario = family(n)
        det = picard_solve(scenario)
        wit = picard_solve(scenario, init=witness_init(scenario))
        gap = equilibrium_gap(det.mu, wit.mu, scenario.grid)
        eps = scenario.tol if scenario.tol > 0 else None
        rows.append(
            GapRow(
                n,
                gap,
                relaxation_time(det.residuals, eps) if eps else None,
                relaxation_time(wit.residuals, eps) if eps else None,
                det.converged,
                wit.converged,
            )
        )
    return rows
