"""Boolean configurations, maps, strategies and asynchronous iterations.

Component ``i`` (1-based) of a configuration of ``n`` components is stored
at bit ``n - i`` of its integer encoding, so ``x_1`` is the most
significant bit and ``0011`` encodes 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_COMPONENTS = 16

PAPER_F = (0, 0, 2, 3, 13, 13, 6, 3, 8, 9, 10, 11, 8, 13, 14, 15)
PAPER_G = (11, 14, 13, 14, 11, 10, 1, 8, 7, 6, 5, 4, 3, 2, 1, 0)


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_COMPONENTS:
        raise ValueError(f"component count must be in [1, {MAX_COMPONENTS}], got {n!r}")


def component_mask(n: int, i: int) -> int:
    """Bit mask selecting component ``i`` (1-based) of an ``n``-component config."""
    if not 1 <= i <= n:
        raise ValueError(f"component {i} out of range [1, {n}]")
    return 1 << (n - i)


@dataclass(frozen=True)
class BoolConfig:
    """A configuration ``x`` in B^n, kept as its integer encoding."""

    n: int
    value: int

    def __post_init__(self):
        _check_n(self.n)
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} out of range for n={self.n}")

    @classmethod
    def from_bits(cls, bits: Sequence[int | bool]) -> BoolConfig:
        n = len(bits)
        _check_n(n)
        value = 0
        for b in bits:
            if b not in (0, 1, True, False):
                raise ValueError(f"not a Boolean: {b!r}")
            value = (value << 1) | int(b)
        return cls(n, value)

    @classmethod
    def parse(cls, text: str) -> BoolConfig:
        """Read a bit string such as ``"0011"`` (``x_1`` first)."""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_bits([int(c) for c in text])

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.n - i)) & 1 for i in range(1, self.n + 1))

    def __getitem__(self, i: int) -> int:
        """Component ``x_i`` with 1-based ``i``."""
        if not 1 <= i <= self.n:
            raise IndexError(f"component {i} out of range [1, {self.n}]")
        return (self.value >> (self.n - i)) & 1

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b")


@dataclass(frozen=True)
class Strategy:
    """A finite prefix ``(S^0, ..., S^{l-1})`` of a strategy, 1-based terms."""

    terms: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(int(t) for t in self.terms))
        if any(t < 1 for t in self.terms):
            raise ValueError(f"strategy terms must be >= 1: {self.terms}")

    @classmethod
    def parse(cls, text: str) -> Strategy:
        """Read a comma-separated word such as ``"1,2,4"``."""
        text = text.strip()
        if not text:
            return cls(())
        return cls(tuple(int(t) for t in text.split(",")))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, t):
        return self.terms[t]

    def shift(self) -> Strategy:
        """Drop the first term (the shift function)."""
        if not self.terms:
            raise ValueError("cannot shift an empty strategy")
        return Strategy(self.terms[1:])

    def check(self, n: int) -> None:
        bad = [t for t in self.terms if t > n]
        if bad:
            raise ValueError(f"strategy terms {bad} exceed n={n}")

    def __str__(self) -> str:
        return ",".join(map(str, self.terms))


@dataclass(frozen=True)
class SystemPoint:
    """A point ``(S, x)`` of the phase space of G_f."""

    strategy: Strategy
    config: BoolConfig


class BooleanMap:
    """A total map f: B^n -> B^n given by its truth table.

    ``table[v(x)] == v(f(x))``. Instances are treated as immutable.
    """

    __slots__ = ("n", "table", "name", "_array")

    def __init__(self, n: int, table: Iterable[int], name: str | None = None):
        _check_n(n)
        table = tuple(int(v) for v in table)
        size = 1 << n
        if len(table) != size:
            raise ValueError(f"truth table needs {size} entries, got {len(table)}")
        if any(not 0 <= v < size for v in table):
            raise ValueError("truth table entry out of range")
        self.n = n
        self.table = table
        self.name = name
        arr = np.asarray(table, dtype=np.int64)
        arr.flags.writeable = False
        self._array = arr

    @property
    def array(self) -> np.ndarray:
        return self._array

    def __call__(self, x: BoolConfig) -> BoolConfig:
        return apply_map(self, x)

    def component(self, i: int, x: BoolConfig) -> int:
        """f_i(x)."""
        _same_n(self, x)
        return 1 if self.table[x.value] & component_mask(self.n, i) else 0

    def fixed_points(self) -> list[BoolConfig]:
        return [BoolConfig(self.n, v) for v, w in enumerate(self.table) if v == w]

    def __eq__(self, other):
        if not isinstance(other, BooleanMap):
            return NotImplemented
        return self.n == other.n and self.table == other.table

    def __hash__(self):
        return hash((self.n, self.table))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<BooleanMap{label} n={self.n}>"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(f"{self.n}\n{' '.join(map(str, self.table))}\n")

    @classmethod
    def load(cls, path: str | Path) -> BooleanMap:
        """Read the two-line map file format (n, then 2^n table entries)."""
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
        if len(lines) != 2:
            raise ValueError(f"{path}: expected 2 non-empty lines, got {len(lines)}")
        try:
            n = int(lines[0])
            table = [int(tok) for tok in lines[1].split()]
        except ValueError as exc:
            raise ValueError(f"{path}: malformed map file ({exc})") from None
        return cls(n, table, name=Path(path).stem)


def _same_n(f: BooleanMap, x: BoolConfig) -> None:
    if x.n != f.n:
        raise ValueError(f"dimension mismatch: map has n={f.n}, config has n={x.n}")


def builtin_map(name: str, n: int | None = None) -> BooleanMap:
    """Maps used throughout: ``f0``, ``f1`` (any n), ``paper_f``, ``paper_g`` (n=4).

    ``name`` may carry the size inline, e.g. ``"f0(6)"``.
    """
    key = name.strip()
    if "(" in key and key.endswith(")"):
        key, arg = key[:-1].split("(", 1)
        n = int(arg)
    if key in ("paper_f", "paper_g"):
        if n not in (None, 4):
            raise ValueError(f"{key} is only defined for n=4")
        return BooleanMap(4, PAPER_F if key == "paper_f" else PAPER_G, name=key)
    if key not in ("f0", "f1"):
        raise ValueError(f"unknown map {name!r}")
    if n is None:
        n = 4
    _check_n(n)
    size = 1 << n
    v = np.arange(size, dtype=np.int64)
    if key == "f0":
        table = size - 1 - v
    else:
        # (not x1, x1, x2, ..., x_{n-1}): shift right, then complement the top bit
        top = 1 << (n - 1)
        table = (v >> 1) | (~v & top)
    return BooleanMap(n, table.tolist(), name=f"{key}({n})")


def resolve_map(spec: str) -> BooleanMap:
    """A builtin name or a path to a map file."""
    try:
        return builtin_map(spec)
    except ValueError:
        if Path(spec).is_file():
            return BooleanMap.load(spec)
        raise


def apply_map(f: BooleanMap, x: BoolConfig) -> BoolConfig:
    _same_n(f, x)
    return BoolConfig(f.n, f.table[x.value])


def step_value(table: Sequence[int], n: int, s: int, v: int) -> int:
    """Integer form of F_f(s, x): copy bit ``s`` of f(x) into x."""
    mask = 1 << (n - s)
    return (v & ~mask) | (table[v] & mask)


def f_step(f: BooleanMap, s: int, x: BoolConfig) -> BoolConfig:
    """F_f(s, x): update component ``s`` only."""
    _same_n(f, x)
    if not 1 <= s <= f.n:
        raise ValueError(f"component {s} out of range [1, {f.n}]")
    return BoolConfig(f.n, step_value(f.table, f.n, s, x.value))


def iterate_async(f: BooleanMap, x0: BoolConfig, strategy: Strategy, m: int | None = None) -> list[BoolConfig]:
    """Return ``(x^1, ..., x^m)`` driven by the first ``m`` strategy terms."""
    _same_n(f, x0)
    if m is None:
        m = len(strategy)
    if m < 0 or m > len(strategy):
        raise ValueError(f"need {m} strategy terms, strategy has {len(strategy)}")
    strategy.check(f.n)
    orbit = []
    v = x0.value
    for s in strategy.terms[:m]:
        v = step_value(f.table, f.n, s, v)
        orbit.append(BoolConfig(f.n, v))
    return orbit


def gf_step(f: BooleanMap, p: SystemPoint) -> SystemPoint:
    """One step of G_f: ``(S, x) -> (shift(S), F_f(S^0, x))``."""
    if not p.strategy.terms:
        raise ValueError("G_f is undefined on a point with an empty strategy prefix")
    return SystemPoint(p.strategy.shift(), f_step(f, p.strategy[0], p.config))
