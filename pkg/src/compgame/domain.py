"""Finite posets, monotone self-maps and Kleene least-fixed-point iteration.

On a finite poset every directed set has a top element, so directed
completeness is automatic and Scott continuity reduces to monotonicity.

Text format (one directive per line, ``#`` comments)::

    elem bot
    elem a
    cover bot a      # bot is covered by a
    bottom bot
    map bot a        # f(bot) = a
    map a a
"""

from __future__ import annotations

import itertools
import re
from pathlib import Path

import numpy as np

from .errors import InputError, MalformedMapError

__all__ = [
    "PosetError",
    "NotMonotoneError",
    "FinitePoset",
    "MonotoneMap",
    "check_monotone",
    "kleene_lfp",
    "brute_force_fixed_points",
    "least_element",
    "enumerate_posets",
    "enumerate_maps",
    "parse_poset_text",
    "load_poset",
]


class PosetError(InputError):
    """An order relation fails a partial-order axiom; ``witness`` shows where."""

    def __init__(self, message, axiom, witness, line=None, source=None):
        self.axiom = axiom
        self.witness = witness
        super().__init__(message, line, source)


class NotMonotoneError(InputError):
    def __init__(self, message, witness):
        self.witness = witness
        super().__init__(message)


def _closure(leq: np.ndarray) -> np.ndarray:
    leq = leq.copy()
    n = leq.shape[0]
    np.fill_diagonal(leq, True)
    for k in range(n):
        leq |= leq[:, k, None] & leq[None, k, :]
    return leq


class FinitePoset:
    """A finite partial order stored as its full ``leq`` table."""

    def __init__(self, leq, bottom=None, names=None):
        leq = np.array(leq, dtype=bool)
        if leq.ndim != 2 or leq.shape[0] != leq.shape[1] or leq.shape[0] < 1:
            raise InputError("leq must be a nonempty square table")
        n = leq.shape[0]
        if names is None:
            names = tuple(str(i) for i in range(n))
        names = tuple(names)
        if len(names) != n:
            raise InputError(f"{len(names)} names for {n} elements")
        _validate_order(leq, names)
        if bottom is None:
            below_all = [i for i in range(n) if leq[i].all()]
            if not below_all:
                raise PosetError("poset has no bottom element", "bottom", None)
            bottom = below_all[0]
        if not 0 <= bottom < n:
            raise InputError(f"bottom index {bottom} out of range")
        if not leq[bottom].all():
            j = int(np.argmin(leq[bottom]))
            raise PosetError(
                f"declared bottom {names[bottom]} is not below {names[j]}",
                "bottom",
                (bottom, j),
            )
        leq.setflags(write=False)
        self.leq = leq
        self.bottom = int(bottom)
        self.names = names

    @classmethod
    def from_covers(cls, n, covers, bottom=None, names=None):
        """Build from cover pairs (a, b) meaning a is directly below b."""
        rel = np.zeros((n, n), dtype=bool)
        for a, b in covers:
            if not (0 <= a < n and 0 <= b < n):
                raise InputError(f"cover ({a}, {b}) out of range")
            rel[a, b] = True
        return cls(_closure(rel), bottom=bottom, names=names)

    @classmethod
    def chain(cls, n):
        return cls.from_covers(n, [(i, i + 1) for i in range(n - 1)], bottom=0)

    @property
    def size(self) -> int:
        return self.leq.shape[0]

    def le(self, i, j) -> bool:
        return bool(self.leq[i, j])

    def height(self) -> int:
        """Number of strict steps in a longest chain."""
        n = self.size
        strict = self.leq & ~np.eye(n, dtype=bool)
        # elements sorted by down-set size form a linear extension
        order = sorted(range(n), key=lambda i: int(self.leq[:, i].sum()))
        longest = [0] * n
        for j in order:
            below = [longest[i] + 1 for i in range(n) if strict[i, j]]
            longest[j] = max(below, default=0)
        return max(longest)

    def index(self, name) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown element {name!r}") from None


def _validate_order(leq, names):
    n = leq.shape[0]
    for i in range(n):
        if not leq[i, i]:
            raise PosetError(f"not reflexive at {names[i]}", "reflexivity", (i,))
    both = leq & leq.T
    np.fill_diagonal(both, False)
    if both.any():
        i, j = (int(v) for v in np.argwhere(both)[0])
        raise PosetError(
            f"not antisymmetric: {names[i]} <= {names[j]} <= {names[i]}",
            "antisymmetry",
            (i, j),
        )
    for i, j in zip(*np.nonzero(leq)):
        missing = leq[j] & ~leq[i]
        if missing.any():
            k = int(np.argmax(missing))
            raise PosetError(
                f"not transitive: {names[i]} <= {names[j]} <= {names[k]}",
                "transitivity",
                (int(i), int(j), k),
            )


class MonotoneMap:
    """A total self-map of a poset, given as a table of element indices.

    Monotonicity is not enforced at construction; use ``check_monotone``.
    """

    def __init__(self, poset, table):
        table = tuple(int(v) for v in table)
        if len(table) != poset.size:
            raise MalformedMapError(f"map has {len(table)} entries for {poset.size} elements")
        for i, v in enumerate(table):
            if not 0 <= v < poset.size:
                raise MalformedMapError(f"f({i}) = {v} is outside the poset")
        self.poset = poset
        self.table = table

    def __call__(self, i: int) -> int:
        return self.table[i]


def check_monotone(fmap: MonotoneMap) -> tuple[bool, tuple[int, int] | None]:
    """Return (True, None) or (False, (i, j)) with i <= j but f(i) not <= f(j)."""
    leq, f = fmap.poset.leq, fmap.table
    n = fmap.poset.size
    for i in range(n):
        for j in range(n):
            if leq[i, j] and not leq[f[i], f[j]]:
                return False, (i, j)
    return True, None


def kleene_lfp(fmap: MonotoneMap) -> tuple[int, list[int]]:
    """Iterate bottom, f(bottom), f(f(bottom)), ... to the least fixed point."""
    ok, witness = check_monotone(fmap)
    if not ok:
        i, j = witness
        names = fmap.poset.names
        raise NotMonotoneError(
            f"map is not monotone: {names[i]} <= {names[j]} "
            f"but f({names[i]}) not <= f({names[j]})",
            witness,
        )
    x = fmap.poset.bottom
    trace = [x]
    while fmap(x) != x:
        x = fmap(x)
        trace.append(x)
    return x, trace


def brute_force_fixed_points(fmap: MonotoneMap) -> frozenset[int]:
    return frozenset(e for e in range(fmap.poset.size) if fmap(e) == e)


def least_element(poset: FinitePoset, elements) -> int | None:
    """The member of ``elements`` below all others, or None."""
    elements = list(elements)
    for e in elements:
        if all(poset.leq[e, o] for o in elements):
            return e
    return None


def enumerate_posets(n: int):
    """Every partial order with a bottom on labels 0..n-1 (labeled, not up to iso).

    Element 0 is fixed as the bottom; every poset with a bottom is isomorphic
    to one of these.
    """
    pairs = [(i, j) for i in range(1, n) for j in range(1, n) if i != j]
    for bits in itertools.product((False, True), repeat=len(pairs)):
        leq = np.eye(n, dtype=bool)
        leq[0, :] = True
        for (i, j), b in zip(pairs, bits):
            leq[i, j] = b
        if (leq & leq.T & ~np.eye(n, dtype=bool)).any():
            continue
        if not (_closure(leq) == leq).all():
            continue
        yield FinitePoset(leq, bottom=0)


def enumerate_maps(poset: FinitePoset, monotone_only=True):
    n = poset.size
    for table in itertools.product(range(n), repeat=n):
        fmap = MonotoneMap(poset, table)
        if not monotone_only or check_monotone(fmap)[0]:
            yield fmap


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def parse_poset_text(text: str, source: str | None = None):
    """Parse the poset/map format; returns ``(poset, map_or_None)``."""
    names: list[str] = []
    covers = []
    maps = {}
    bottom = None
    bottom_line = None

    def need_name(tok, lineno):
        if not _NAME.match(tok):
            raise InputError(f"invalid element name {tok!r}", lineno, source)
        if tok not in names:
            raise InputError(f"undeclared element {tok!r}", lineno, source)
        return names.index(tok)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        kind, args = parts[0], parts[1:]
        arity = {"elem": 1, "cover": 2, "map": 2, "bottom": 1}.get(kind)
        if arity is None:
            raise InputError(f"unknown directive {kind!r}", lineno, source)
        if len(args) != arity:
            raise InputError(f"{kind} takes {arity} argument(s), got {len(args)}", lineno, source)
        if kind == "elem":
            name = args[0]
            if not _NAME.match(name):
                raise InputError(f"invalid element name {name!r}", lineno, source)
            if name in names:
                raise InputError(f"duplicate element {name!r}", lineno, source)
            names.append(name)
        elif kind == "cover":
            covers.append((need_name(args[0], lineno), need_name(args[1], lineno), lineno))
        elif kind == "map":
            a = need_name(args[0], lineno)
            if a in maps:
                raise InputError(f"f({args[0]}) defined twice", lineno, source)
            maps[a] = need_name(args[1], lineno)
        else:
            if bottom is not None:
                raise InputError("bottom declared twice", lineno, source)
            bottom, bottom_line = need_name(args[0], lineno), lineno

    if not names:
        raise InputError("no elements declared", None, source)
    n = len(names)
    rel = np.zeros((n, n), dtype=bool)
    for a, b, _ in covers:
        rel[a, b] = True
    closed = _closure(rel)
    try:
        poset = FinitePoset(closed, bottom=bottom, names=names)
    except PosetError as exc:
        line = bottom_line if exc.axiom == "bottom" and bottom_line else None
        if exc.axiom == "antisymmetry":
            line = next((ln for a, b, ln in covers if a != b and closed[b, a]), None)
        raise PosetError(str(exc), exc.axiom, exc.witness, line, source) from None

    fmap = None
    if maps:
        missing = [names[i] for i in range(n) if i not in maps]
        if missing:
            raise MalformedMapError(f"map undefined on: {', '.join(missing)}", None, source)
        fmap = MonotoneMap(poset, [maps[i] for i in range(n)])
    return poset, fmap


def load_poset(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read poset file: {exc.strerror}", None, str(path)) from None
    return parse_poset_text(text, source=str(path))
