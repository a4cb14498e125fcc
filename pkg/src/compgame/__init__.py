"""Game-theoretic model of computation, at desk scale.

Kleene iteration on finite posets, pure equilibria of the
Algorithm-versus-Nature approximation game, a grid mean-field game solver,
finite-N agent simulation and deterministic-versus-witness scaling runs.
"""

__version__ = "0.1.0"
