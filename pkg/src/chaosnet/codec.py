"""Learning datasets built from iterations of G_f.

A sample pairs an input ``(x, S, m)`` with the output
``(x^m, sigma^m(S))``: the configuration after ``m`` asynchronous steps and
what is left of the strategy. Two codings are supported:

* scheme ``"1"``: one input per component bit, then the strategy number and m;
  outputs are the n bits of x^m and the remaining-strategy number;
* scheme ``"2"``: the configuration as the Gray code of its integer value;
  ``"2-split"`` is the same data, learned one output per network.

Strategies are numbers in base n+1 with S^0 as the most significant digit.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import BooleanMap, Strategy, step_value

SCHEMES = ("1", "2", "2-split")
SPLIT_FRACTIONS = (0.65, 0.10, 0.25)


def gray_encode(v: int, n: int | None = None) -> int:
    """Reflected binary Gray code of ``v``."""
    if v < 0 or (n is not None and v >= 1 << n):
        raise ValueError(f"{v} out of range")
    return v ^ (v >> 1)


def gray_decode(g: int, n: int | None = None) -> int:
    if g < 0 or (n is not None and g >= 1 << n):
        raise ValueError(f"{g} out of range")
    v = g
    shift = g >> 1
    while shift:
        v ^= shift
        shift >>= 1
    return v


def strategy_encode(S: Strategy | Sequence[int], n: int) -> int:
    """Base-(n+1) number of a strategy word, first term most significant."""
    code = 0
    for s in S:
        if not 1 <= s <= n:
            raise ValueError(f"strategy term {s} out of range [1, {n}]")
        code = code * (n + 1) + s
    return code


def strategy_decode(code: int, length: int, n: int) -> Strategy:
    if code < 0:
        raise ValueError("negative strategy code")
    digits = []
    for _ in range(length):
        code, d = divmod(code, n + 1)
        if d == 0:
            raise ValueError("digit 0 does not occur in a valid strategy code")
        digits.append(d)
    if code:
        raise ValueError(f"code has more than {length} digits")
    return Strategy(tuple(reversed(digits)))


def omega(n: int, k: int) -> int:
    """Number of (m, S) pairs: sum over l in [2, k] of (l-1) * n^l."""
    return sum((l - 1) * n**l for l in range(2, k + 1))


def omega_closed_form(n: int, k: int) -> Fraction:
    n, k = Fraction(n), Fraction(k)
    return (k - 1) * n ** (k + 1) / (n - 1) - (n ** (k + 1) - n**2) / (n - 1) ** 2


def count_pairs(n: int, k: int) -> tuple[int, int]:
    """(omega, total) with total = 2^n * omega input-output pairs."""
    if n < 2 or k < 2:
        raise ValueError("count_pairs needs n >= 2 and k >= 2")
    w = omega(n, k)
    return w, (1 << n) * w


@dataclass(frozen=True)
class OutputSpec:
    name: str
    kind: str  # "bit" or "code"
    group: str  # "config" or "strategy"
    lo: int = 0
    hi: int = 1


@dataclass(frozen=True)
class Sample:
    inputs: tuple[float, ...]
    outputs: tuple[float, ...]
    provenance: tuple[int, tuple[int, ...], int]


@dataclass(eq=False)
class Dataset:
    """Enumerated samples plus the whole-dataset input ranges used for scaling.

    ``provenance[i] = (v(x), S, m)``. Subsets keep the parent's ranges.
    """

    scheme: str
    n: int
    k: int
    inputs: np.ndarray
    outputs: np.ndarray
    provenance: list[tuple[int, tuple[int, ...], int]]
    input_names: list[str]
    output_specs: list[OutputSpec]
    x_min: np.ndarray = field(default=None)
    x_max: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.x_min is None:
            self.x_min = self.inputs.min(axis=0) if len(self.inputs) else np.zeros(self.inputs.shape[1])
        if self.x_max is None:
            self.x_max = self.inputs.max(axis=0) if len(self.inputs) else np.ones(self.inputs.shape[1])

    def __len__(self) -> int:
        return len(self.provenance)

    def __getitem__(self, i: int) -> Sample:
        return Sample(tuple(self.inputs[i]), tuple(self.outputs[i]), self.provenance[i])

    @property
    def samples(self) -> list[Sample]:
        return [self[i] for i in range(len(self))]

    @property
    def p(self) -> int:
        return self.inputs.shape[1]

    @property
    def q(self) -> int:
        return self.outputs.shape[1]

    def scaled_inputs(self) -> np.ndarray:
        return scale(self.inputs, self.x_min, self.x_max)

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            self.scheme, self.n, self.k,
            self.inputs[idx], self.outputs[idx],
            [self.provenance[i] for i in idx],
            self.input_names, self.output_specs,
            self.x_min, self.x_max,
        )

    def select_output(self, j: int) -> Dataset:
        """Same samples, keeping only output column ``j``."""
        return Dataset(
            self.scheme, self.n, self.k,
            self.inputs, self.outputs[:, [j]],
            self.provenance, self.input_names, [self.output_specs[j]],
            self.x_min, self.x_max,
        )

    def write_csv(self, path: str | Path) -> None:
        header = (
            [f"in_{i + 1}" for i in range(self.p)]
            + [f"out_{j + 1}" for j in range(self.q)]
            + ["x", "S", "m"]
        )
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row_in, row_out, (x, S, m) in zip(self.inputs, self.outputs, self.provenance):
                w.writerow(
                    [_fmt(v) for v in row_in]
                    + [_fmt(v) for v in row_out]
                    + [format(x, f"0{self.n}b"), "-".join(map(str, S)), m]
                )


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def scale(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Min-max scale columns to [0, 1]; constant columns map to 0."""
    span = np.where(hi > lo, hi - lo, 1.0)
    return (x - lo) / span


def _specs(scheme: str, n: int, k: int) -> tuple[list[str], list[OutputSpec]]:
    code_hi = (n + 1) ** (k - 1) - 1
    strat = OutputSpec("strategy", "code", "strategy", 1, code_hi)
    if scheme == "1":
        names = [f"x{i}" for i in range(1, n + 1)] + ["strategy", "m"]
        specs = [OutputSpec(f"out{i}", "bit", "config") for i in range(1, n + 1)] + [strat]
    else:
        names = ["config", "strategy", "m"]
        specs = [OutputSpec("config", "code", "config", 0, (1 << n) - 1), strat]
    return names, specs


def enumerate_dataset(f: BooleanMap, n: int, k: int, scheme: str) -> Dataset:
    """Every (x, S, m) with |S| = l in [2, k] and m in [1, l-1], in that nesting order."""
    scheme = str(scheme)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if f.n != n:
        raise ValueError(f"map has n={f.n}, dataset asks for n={n}")
    if k < 2:
        raise ValueError("k must be >= 2")
    shifts = [n - i for i in range(1, n + 1)]
    ins, outs, prov = [], [], []
    for x in range(1 << n):
        for l in range(2, k + 1):
            for S in itertools.product(range(1, n + 1), repeat=l):
                code = strategy_encode(S, n)
                v = x
                for m in range(1, l):
                    v = step_value(f.table, n, S[m - 1], v)
                    rest = strategy_encode(S[m:], n)
                    if scheme == "1":
                        ins.append([(x >> b) & 1 for b in shifts] + [code, m])
                        outs.append([(v >> b) & 1 for b in shifts] + [rest])
                    else:
                        ins.append([gray_encode(x), code, m])
                        outs.append([gray_encode(v), rest])
                    prov.append((x, S, m))
    names, specs = _specs(scheme, n, k)
    return Dataset(
        scheme, n, k,
        np.asarray(ins, dtype=float), np.asarray(outs, dtype=float),
        prov, names, specs,
    )


def step_dataset(f: BooleanMap) -> Dataset:
    """All n * 2^n pairs ``(x bits, s) -> F_f(s, x) bits`` for training a CI-MLP."""
    n = f.n
    shifts = [n - i for i in range(1, n + 1)]
    ins, outs, prov = [], [], []
    for s in range(1, n + 1):
        for x in range(1 << n):
            y = step_value(f.table, n, s, x)
            ins.append([(x >> b) & 1 for b in shifts] + [s])
            outs.append([(y >> b) & 1 for b in shifts])
            prov.append((x, (s,), 1))
    names = [f"x{i}" for i in range(1, n + 1)] + ["s"]
    specs = [OutputSpec(f"out{i}", "bit", "config") for i in range(1, n + 1)]
    return Dataset("step", n, 1, np.asarray(ins, float), np.asarray(outs, float), prov, names, specs)


def split_sizes(total: int, fractions: Sequence[float] = SPLIT_FRACTIONS) -> tuple[int, int, int]:
    """Round validation and test sizes half-up; training takes the remainder."""
    val = math.floor(total * fractions[1] + 0.5)
    test = math.floor(total * fractions[2] + 0.5)
    return total - val - test, val, test


def split_dataset(ds: Dataset, seed: int) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded 65/10/25 holdout partition into (train, validation, test)."""
    if len(ds) == 0:
        raise ValueError("cannot split an empty dataset")
    n_train, n_val, _ = split_sizes(len(ds))
    perm = np.random.default_rng(seed).permutation(len(ds))
    return (
        ds.subset(perm[:n_train]),
        ds.subset(perm[n_train:n_train + n_val]),
        ds.subset(perm[n_train + n_val:]),
    )


def read_dataset_csv(path: str | Path, scheme: str | None = None) -> Dataset:
    """Load a CSV written by :meth:`Dataset.write_csv`.

    The scheme is inferred from the column count unless given; ``n`` and
    ``k`` come from the provenance columns.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    p = sum(h.startswith("in_") for h in header)
    q = sum(h.startswith("out_") for h in header)
    if not body:
        raise ValueError(f"{path}: no samples")
    data = np.array([[float(v) for v in r[: p + q]] for r in body])
    prov = [(int(r[p + q], 2), tuple(int(s) for s in r[p + q + 1].split("-")), int(r[p + q + 2])) for r in body]
    n = len(body[0][p + q])
    k = max(len(S) for _, S, _ in prov)
    if scheme is None:
        scheme = "1" if p == n + 2 else "2"
    names, specs = _specs(scheme, n, k)
    if len(names) != p or len(specs) != q:
        raise ValueError(f"{path}: {p} inputs / {q} outputs do not match scheme {scheme}")
    return Dataset(scheme, n, k, data[:, :p], data[:, p:], prov, names, specs)
