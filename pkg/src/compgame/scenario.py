"""Grid scenarios for the discretized mean-field game.

A scenario fixes the 1-D state grid, the horizon, the finite set of
velocity controls, the congestion cost and the initial population.
Scenario files are line oriented ``key = value`` text::

    x_min = 0
    x_max = 1
    M = 101
    controls = -1, -0.5, 0, 0.5, 1
    kernel = gaussian 0.1
    mu0 = delta 0.2

Unknown keys are fatal.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError

__all__ = [
    "GridScenario",
    "parse_scenario",
    "load_scenario",
    "format_scenario",
]


@dataclass(frozen=True)
class GridScenario:
    x_min: float
    x_max: float
    M: int
    T_steps: int
    dt: float
    y_star: float
    controls: tuple[float, ...]
    c0: float | tuple[float, ...] = 0.0
    lam: float = 0.0
    kernel: tuple = ("local",)
    sigma: float = 0.0
    omega: float = 0.5
    tol: float = 1e-6
    max_iters: int = 500
    mu0: tuple = ("uniform",)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(float(a) for a in self.controls))
        if not isinstance(self.c0, (int, float)):
            object.__setattr__(self, "c0", tuple(float(v) for v in self.c0))
        self.validate()

    def validate(self):
        if self.M < 2:
            raise InputError(f"M must be >= 2, got {self.M}")
        if not self.x_max > self.x_min:
            raise InputError("x_max must exceed x_min")
        if self.T_steps < 0:
            raise InputError("T_steps must be >= 0")
        if not self.dt > 0:
            raise InputError("dt must be > 0")
        if not self.x_min <= self.y_star <= self.x_max:
            raise InputError("y_star must lie in [x_min, x_max]")
        if not self.controls:
            raise InputError("controls must be nonempty")
        if 0.0 not in self.controls:
            raise InputError("controls must contain 0")
        span = self.x_max - self.x_min
        for a in self.controls:
            if abs(a) * self.dt > span:
                raise InputError(f"control {a} drifts beyond the grid in one step")
        if self.lam < 0:
            raise InputError("lambda must be >= 0")
        if self.sigma < 0:
            raise InputError("sigma must be >= 0")
        if not 0 < self.omega <= 1:
            raise InputError("omega must lie in (0, 1]")
        if self.tol < 0:
            raise InputError("tol must be >= 0")
        if self.max_iters < 0:
            raise InputError("max_iters must be >= 0")
        if isinstance(self.c0, tuple):
            if len(self.c0) != self.M:
                raise InputError(f"c0 needs {self.M} values, got {len(self.c0)}")
        kind = self.kernel[0]
        if kind == "gaussian":
            if len(self.kernel) != 2 or not self.kernel[1] > 0:
                raise InputError("gaussian kernel needs a positive width")
        elif kind != "local":
            raise InputError(f"unknown kernel {kind!r}")
        mkind = self.mu0[0]
        if mkind == "delta":
            if not self.x_min <= self.mu0[1] <= self.x_max:
                raise InputError("mu0 delta location outside the grid")
        elif mkind == "weights":
            w = np.asarray(self.mu0[1], dtype=float)
            if w.shape != (self.M,) or np.any(w < 0) or not w.sum() > 0:
                raise InputError(f"mu0 weights must be {self.M} nonnegative values")
        elif mkind != "uniform":
            raise InputError(f"unknown mu0 spec {mkind!r}")

    def replace(self, **changes) -> GridScenario:
        return dataclasses.replace(self, **changes)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.M - 1)

    @property
    def grid(self) -> np.ndarray:
        if "grid" not in self._cache:
            g = np.linspace(self.x_min, self.x_max, self.M)
            g.setflags(write=False)
            self._cache["grid"] = g
        return self._cache["grid"]

    @property
    def controls_array(self) -> np.ndarray:
        return np.array(self.controls)

    @property
    def base_cost(self) -> np.ndarray:
        if isinstance(self.c0, tuple):
            return np.array(self.c0)
        return np.full(self.M, float(self.c0))

    @property
    def target_distance(self) -> np.ndarray:
        """d(x, y*) = |x - y*| on the grid."""
        return np.abs(self.grid - self.y_star)

    @property
    def kernel_matrix(self) -> np.ndarray:
        """Congestion kernel K(x_i, x_j) on the grid."""
        if "kernel" not in self._cache:
            if self.kernel[0] == "local":
                K = np.eye(self.M)
            else:
                # Normalized to unit mass on the infinite lattice, so interior
                # rows sum to ~1 and the zero-width limit is the local kernel.
                width = self.kernel[1]
                diff = self.grid[:, None] - self.grid[None, :]
                reach = int(np.ceil(40.0 * width / self.h))
                lattice = np.arange(-reach, reach + 1) * self.h
                Z = np.exp(-0.5 * (lattice / width) ** 2).sum()
                K = np.exp(-0.5 * (diff / width) ** 2) / Z
            K.setflags(write=False)
            self._cache["kernel"] = K
        return self._cache["kernel"]

    @property
    def diffusion_stencil(self) -> tuple[int, float]:
        """(repeats, side weight) of the [s, 1-2s, s] smoothing per time step.

        The raw weight sigma*dt/h^2 is split over enough repeats that each
        stays <= 1/2; the composed kernel keeps the variance 2*sigma*dt.
        """
        raw = self.sigma * self.dt / self.h**2
        if raw <= 0.5:
            return 1, raw
        repeats = math.ceil(raw / 0.5)
        return repeats, raw / repeats

    def nearest_index(self, x) -> np.ndarray:
        """Nearest grid index, ties to the lower index."""
        pos = (np.asarray(x, dtype=float) - self.x_min) / self.h
        idx = np.ceil(pos - 0.5).astype(int)
        return np.clip(idx, 0, self.M - 1)

    def initial_measure(self) -> np.ndarray:
        kind = self.mu0[0]
        if kind == "uniform":
            return np.full(self.M, 1.0 / self.M)
        if kind == "delta":
            mu = np.zeros(self.M)
            mu[int(self.nearest_index(self.mu0[1]))] = 1.0
            return mu
        w = np.asarray(self.mu0[1], dtype=float)
        return w / w.sum()

    def as_params(self) -> dict[str, str]:
        """Resolved parameters, rendered in scenario-file syntax."""
        return dict(_render(self))


_FIELD_FOR_KEY = {
    "x_min": "x_min",
    "x_max": "x_max",
    "M": "M",
    "T_steps": "T_steps",
    "dt": "dt",
    "y_star": "y_star",
    "controls": "controls",
    "c0": "c0",
    "lambda": "lam",
    "kernel": "kernel",
    "sigma": "sigma",
    "omega": "omega",
    "tol": "tol",
    "max_iters": "max_iters",
    "mu0": "mu0",
}
_REQUIRED = ("x_min", "x_max", "M", "T_steps", "dt", "y_star", "controls", "mu0")


def _float(text, key, line, source):
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"{key}: expected a number, got {text!r}", line, source) from None
    if not math.isfinite(value):
        raise InputError(f"{key}: value must be finite", line, source)
    return value


def _int(text, key, line, source):
    try:
        return int(text)
    except ValueError:
        raise InputError(f"{key}: expected an integer, got {text!r}", line, source) from None


def _floats(text, key, line, source):
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise InputError(f"{key}: expected a list of numbers", line, source)
    return tuple(_float(p, key, line, source) for p in parts)


def _parse_value(key, text, line, source):
    if key in ("M", "T_steps", "max_iters"):
        return _int(text, key, line, source)
    if key == "controls":
        return _floats(text, key, line, source)
    if key == "c0":
        values = _floats(text, key, line, source)
        return values[0] if len(values) == 1 else values
    if key == "kernel":
        parts = text.split()
        if parts == ["local"]:
            return ("local",)
        if len(parts) == 2 and parts[0] == "gaussian":
            return ("gaussian", _float(parts[1], key, line, source))
        raise InputError(f"kernel: expected 'local' or 'gaussian <width>', got {text!r}", line, source)
    if key == "mu0":
        parts = text.split(maxsplit=1)
        if parts == ["uniform"]:
            return ("uniform",)
        if len(parts) == 2 and parts[0] == "delta":
            return ("delta", _float(parts[1], key, line, source))
        if len(parts) == 2 and parts[0] == "weights":
            return ("weights", _floats(parts[1], key, line, source))
        raise InputError(
            f"mu0: expected 'delta <x>', 'uniform' or 'weights <w...>', got {text!r}", line, source
        )
    return _float(text, key, line, source)


def parse_scenario(text: str, source: str | None = None) -> GridScenario:
    """Parse scenario text; every error carries the offending line number."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InputError(f"expected 'key = value', got {stripped!r}", lineno, source)
        key, _, value = (s.strip() for s in stripped.partition("="))
        if key not in _FIELD_FOR_KEY:
            raise InputError(f"unknown key {key!r}", lineno, source)
        if key in values:
            raise InputError(f"duplicate key {key!r}", lineno, source)
        values[key] = _parse_value(key, value, lineno, source)
        lines[key] = lineno
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise InputError(f"missing required keys: {', '.join(missing)}", None, source)
    kwargs = {_FIELD_FOR_KEY[k]: v for k, v in values.items()}
    try:
        return GridScenario(**kwargs)
    except InputError as exc:
        raise InputError(str(exc), None, source) from None


def load_scenario(path) -> GridScenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read scenario: {exc.strerror}", None, str(path)) from None
    return parse_scenario(text, source=str(path))


def _fmt(x: float) -> str:
    return repr(float(x))


def _render(s: GridScenario):
    yield "x_min", _fmt(s.x_min)
    yield "x_max", _fmt(s.x_max)
    yield "M", str(s.M)
    yield "T_steps", str(s.T_steps)
    yield "dt", _fmt(s.dt)
    yield "y_star", _fmt(s.y_star)
    yield "controls", ", ".join(_fmt(a) for a in s.controls)
    if isinstance(s.c0, tuple):
        yield "c0", ", ".join(_fmt(v) for v in s.c0)
    else:
        yield "c0", _fmt(s.c0)
    yield "lambda", _fmt(s.lam)
    yield "kernel", "local" if s.kernel[0] == "local" else f"gaussian {_fmt(s.kernel[1])}"
    yield "sigma", _fmt(s.sigma)
    yield "omega", _fmt(s.omega)
    yield "tol", _fmt(s.tol)
    yield "max_iters", str(s.max_iters)
    if s.mu0[0] == "delta":
        yield "mu0", f"delta {_fmt(s.mu0[1])}"
    elif s.mu0[0] == "weights":
        yield "mu0", "weights " + " ".join(_fmt(v) for v in s.mu0[1])
    else:
        yield "mu0", "uniform"


def format_scenario(s: GridScenario) -> str:
    """Render a scenario back to file syntax (round-trips through parse_scenario)."""
    return "".join(f"{k} = {v}\n" for k, v in _render(s))
