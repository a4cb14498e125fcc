"""Independent references for the game tests (no shared code with compgame.game)."""

import numpy as np

from compgame.game import ApproxGame


def random_metric(rng, n):
    """Shortest-path closure of random edge weights: always a metric."""
    w = rng.integers(1, 6, size=(n, n)).astype(float)
    d = np.minimum(w, w.T)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def random_game(rng, max_strats=6):
    n = int(rng.integers(1, 9))
    dist = random_metric(rng, n)
    kA = int(rng.integers(1, min(n, max_strats) + 1))
    kN = int(rng.integers(1, min(n, max_strats) + 1))
    SA = [int(v) for v in rng.permutation(n)[:kA]]
    SN = [int(v) for v in rng.permutation(n)[:kN]]
    cost = {x: float(rng.integers(0, 4)) for x in SA}
    return ApproxGame.from_arrays(dist, SA, SN, cost)


def definition_equilibria(game):
    """Pairs satisfying both arg-max / arg-min conditions, by direct loops."""
    def u(x, y):
        return -game.cost[x] - game.dist[x][y]

    found = []
    for x in game.strategies_A:
        for y in game.strategies_N:
            a_ok = all(u(x, y) >= u(x2, y) for x2 in game.strategies_A)
            n_ok = all(u(x, y) <= u(x, y2) for y2 in game.strategies_N)
            if a_ok and n_ok:
                found.append((x, y))
    return sorted(found)


def definition_values(game):
    def u(x, y):
        return -game.cost[x] - game.dist[x][y]

    maximin = max(min(u(x, y) for y in game.strategies_N) for x in game.strategies_A)
    minimax = min(max(u(x, y) for x in game.strategies_A) for y in game.strategies_N)
    return maximin, minimax
