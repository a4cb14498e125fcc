"""The zero-sum approximation game between an Algorithm and Nature.

The Algorithm picks an approximation ``x`` and earns
``u_A(x, y) = -cost(x) - dist(x, y)`` against the true value ``y`` chosen by
Nature, whose payoff is ``-u_A``.  Strategies are identified by point
index; "lowest strategy index" means position in the declared strategy list.

Game text format::

    point p0
    point p1
    astrat p0
    nstrat p1
    cost p0 0.5
    dist p0 p1 1.0
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, StrategyError

__all__ = [
    "ApproxGame",
    "EquilibriumResult",
    "utility",
    "nature_utility",
    "validate_metric",
    "payoff_matrix",
    "find_pure_equilibria",
    "best_response_dynamics",
    "parse_game_text",
    "load_game",
    "equilibria_csv",
]

_METRIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ApproxGame:
    points: tuple[str, ...]
    strategies_A: tuple[int, ...]
    strategies_N: tuple[int, ...]
    cost: dict[int, float]
    dist: np.ndarray

    def __post_init__(self):
        dist = np.array(self.dist, dtype=float)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "strategies_A", tuple(int(x) for x in self.strategies_A))
        object.__setattr__(self, "strategies_N", tuple(int(y) for y in self.strategies_N))
        n = len(self.points)
        if dist.shape != (n, n):
            raise InputError(f"dist must be {n}x{n}, got {dist.shape}")
        if not self.strategies_A or not self.strategies_N:
            raise InputError("strategy sets must be nonempty")
        for s in self.strategies_A + self.strategies_N:
            if not 0 <= s < n:
                raise InputError(f"strategy {s} is not a point")
        if len(set(self.strategies_A)) != len(self.strategies_A):
            raise InputError("duplicate Algorithm strategy")
        if len(set(self.strategies_N)) != len(self.strategies_N):
            raise InputError("duplicate Nature strategy")
        cost = {int(x): float(self.cost.get(x, 0.0)) for x in self.strategies_A}
        for x, c in cost.items():
            if not c >= 0:
                raise InputError(f"cost of {self.points[x]} must be >= 0, got {c}")
        object.__setattr__(self, "cost", cost)
        ok, axiom, witness = validate_metric(dist)
        if not ok:
            names = tuple(self.points[i] for i in witness)
            raise InputError(f"dist violates {axiom} at {names}")

    @classmethod
    def from_arrays(cls, dist, strategies_A, strategies_N, cost=None):
        n = np.asarray(dist).shape[0]
        if cost is None:
            cost = {}
        elif not isinstance(cost, dict):
            cost = dict(zip(strategies_A, cost))
        return cls(tuple(f"p{i}" for i in range(n)), strategies_A, strategies_N, cost, dist)


@dataclass
class EquilibriumResult:
    pure_equilibria: list[tuple[int, int]]
    maximin: float
    minimax: float
    has_pure_saddle: bool


def _check(game, x, y):
    if x not in game.strategies_A:
        raise StrategyError(f"{x!r} is not an Algorithm strategy")
    if y not in game.strategies_N:
        raise StrategyError(f"{y!r} is not a Nature strategy")


def utility(game: ApproxGame, x: int, y: int) -> float:
    """Algorithm payoff -cost(x) - dist(x, y)."""
    _check(game, x, y)
    return -game.cost[x] - float(game.dist[x, y])


def nature_utility(game: ApproxGame, x: int, y: int) -> float:
    return -utility(game, x, y)


def validate_metric(dist, tol=_METRIC_TOL):
    """Check identity, symmetry, nonnegativity and the triangle inequality.

    Returns ``(True, None, None)`` or ``(False, axiom, witness_indices)``.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    for i in range(n):
        if d[i, i] != 0:
            return False, "identity", (i,)
    for i in range(n):
        for j in range(n):
            if d[i, j] < 0 or not math.isfinite(d[i, j]):
                return False, "nonnegativity", (i, j)
            if d[i, j] != d[j, i]:
                return False, "symmetry", (i, j)
    for i in range(n):
        for k in range(n):
            for j in range(n):
                if d[i, j] > d[i, k] + d[k, j] + tol:
                    return False, "triangle", (i, k, j)
    return True, None, None


def payoff_matrix(game: ApproxGame) -> np.ndarray:
    """u_A over S_A x S_N, rows and columns in declared strategy order."""
    A = list(game.strategies_A)
    N = list(game.strategies_N)
    cost = np.array([game.cost[x] for x in A])
    return -cost[:, None] - game.dist[np.ix_(A, N)]


def find_pure_equilibria(game: ApproxGame) -> EquilibriumResult:
    """All pure pairs where x maximizes u_A given y and y minimizes it given x."""
    U = payoff_matrix(game)
    col_best = U.max(axis=0)
    row_worst = U.min(axis=1)
    eq = [
        (game.strategies_A[i], game.strategies_N[j])
        for i in range(U.shape[0])
        for j in range(U.shape[1])
        if U[i, j] == col_best[j] and U[i, j] == row_worst[i]
    ]
    maximin = float(row_worst.max())
    minimax = float(col_best.min())
    return EquilibriumResult(sorted(eq), maximin, minimax, bool(eq))


def _best_response_A(game, U, j):
    return game.strategies_A[int(np.argmax(U[:, j]))]


def _best_response_N(game, U, i):
    return game.strategies_N[int(np.argmin(U[i, :]))]


def best_response_dynamics(game: ApproxGame, start, max_rounds: int):
    """Alternating best responses, Algorithm first, lowest-index ties.

    The trajectory records the start and every single-player move, so one
    round appends two pairs.  Converged means a full round changed nothing.
    """
    x, y = start
    _check(game, x, y)
    if max_rounds < 0:
        raise InputError("max_rounds must be >= 0")
    U = payoff_matrix(game)
    row = {s: i for i, s in enumerate(game.strategies_A)}
    col = {s: j for j, s in enumerate(game.strategies_N)}
    trajectory = [(x, y)]
    if max_rounds == 0:
        return trajectory, (x, y) in find_pure_equilibria(game).pure_equilibria
    for _ in range(max_rounds):
        x_new = _best_response_A(game, U, col[y])
        trajectory.append((x_new, y))
        y_new = _best_response_N(game, U, row[x_new])
        trajectory.append((x_new, y_new))
        if (x_new, y_new) == (x, y):
            return trajectory, True
        x, y = x_new, y_new
    return trajectory, False


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def parse_game_text(text: str, source: str | None = None) -> ApproxGame:
    points: list[str] = []
    astrat: list[int] = []
    nstrat: list[int] = []
    cost: dict[int, float] = {}
    dist: dict[tuple[int, int], tuple[float, int]] = {}

    def point(tok, lineno):
        if tok not in points:
            raise InputError(f"undeclared point {tok!r}", lineno, source)
        return points.index(tok)

    def number(tok, lineno):
        try:
            v = float(tok)
        except ValueError:
            raise InputError(f"expected a number, got {tok!r}", lineno, source) from None
        if not math.isfinite(v):
            raise InputError("value must be finite", lineno, source)
        return v

    arities = {"point": 1, "astrat": 1, "nstrat": 1, "cost": 2, "dist": 3}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        kind, args = parts[0], parts[1:]
        if kind not in arities:
            raise InputError(f"unknown directive {kind!r}", lineno, source)
        if len(args) != arities[kind]:
            raise InputError(
                f"{kind} takes {arities[kind]} argument(s), got {len(args)}", lineno, source
            )
        if kind == "point":
            if not _NAME.match(args[0]):
                raise InputError(f"invalid point name {args[0]!r}", lineno, source)
            if args[0] in points:
                raise InputError(f"duplicate point {args[0]!r}", lineno, source)
            points.append(args[0])
        elif kind in ("astrat", "nstrat"):
            target = astrat if kind == "astrat" else nstrat
            p = point(args[0], lineno)
            if p in target:
                raise InputError(f"duplicate {kind} {args[0]!r}", lineno, source)
            target.append(p)
        elif kind == "cost":
            p = point(args[0], lineno)
            c = number(args[1], lineno)
            if c < 0:
                raise InputError("cost must be >= 0", lineno, source)
            cost[p] = c
        else:
            a, b = point(args[0], lineno), point(args[1], lineno)
            v = number(args[2], lineno)
            key = (min(a, b), max(a, b))
            if key in dist and dist[key][0] != v:
                raise InputError(
                    f"dist {args[0]} {args[1]} conflicts with line {dist[key][1]}", lineno, source
                )
            if a == b and v != 0:
                raise InputError("dist of a point to itself must be 0", lineno, source)
            dist[key] = (v, lineno)

    if not points:
        raise InputError("no points declared", None, source)
    if not astrat or not nstrat:
        raise InputError("need at least one astrat and one nstrat", None, source)
    for p in cost:
        if p not in astrat:
            raise InputError(f"cost given for non-Algorithm point {points[p]!r}", None, source)
    n = len(points)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in dist:
                raise InputError(f"missing dist {points[i]} {points[j]}", None, source)
            D[i, j] = D[j, i] = dist[(i, j)][0]
    ok, axiom, witness = validate_metric(D)
    if not ok:
        names = " ".join(points[i] for i in witness)
        raise InputError(f"dist violates the {axiom} axiom at ({names})", None, source)
    return ApproxGame(tuple(points), tuple(astrat), tuple(nstrat), cost, D)


def load_game(path) -> ApproxGame:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read game file: {exc.strerror}", None, str(path)) from None
    return parse_game_text(text, source=str(path))


def equilibria_csv(game: ApproxGame, result: EquilibriumResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "u_A"])
    for x, y in result.pure_equilibria:
        w.writerow([game.points[x], game.points[y], repr(utility(game, x, y))])
    return buf.getvalue()
