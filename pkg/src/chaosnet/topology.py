"""The phase-space metric of G_f and finite-scale topological probes.

Distances are exact: the strategy part is a :class:`fractions.Fraction`, so
``floor(total) == d_e`` and the triangle inequality hold without rounding
slack. Infinite strategies are represented by finite prefixes; positions
past the end of either prefix contribute nothing, and ``tail_bound`` gives
the largest amount the ignored tail could add.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dynamics import BoolConfig, BooleanMap, Strategy, SystemPoint, step_value
from .graph import IterationGraph


def config_distance(x: BoolConfig, y: BoolConfig) -> int:
    """Hamming distance between two configurations."""
    if x.n != y.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {y.n}")
    return (x.value ^ y.value).bit_count()


def tail_bound(n: int, horizon: int) -> Fraction:
    """Largest possible contribution of strategy terms at positions >= horizon."""
    return Fraction(n - 1, 2 * n) / 10**horizon


def _strategy_numerator(a: Sequence[int], b: Sequence[int], horizon: int) -> int:
    # sum |a_t - b_t| * 10^(horizon-1-t), positions beyond either prefix count as equal
    total = 0
    for t in range(min(horizon, len(a), len(b))):
        total += abs(a[t] - b[t]) * 10 ** (horizon - 1 - t)
    return total


def strategy_distance(S: Strategy, T: Strategy, n: int, horizon: int | None = None) -> Fraction:
    """d_s(S, T) = 9/(2n) * sum_{t < horizon} |S^t - T^t| / 10^(t+1)."""
    if horizon is None:
        horizon = min(len(S), len(T))
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    S.check(n)
    T.check(n)
    num = _strategy_numerator(S.terms, T.terms, horizon)
    return Fraction(9 * num, 2 * n * 10**horizon)


@dataclass(frozen=True)
class DistanceValue:
    n: int
    d_e: int
    d_s: Fraction
    horizon: int

    @property
    def total(self) -> Fraction:
        return self.d_e + self.d_s

    @property
    def tail_bound(self) -> Fraction:
        return tail_bound(self.n, self.horizon)

    def __float__(self) -> float:
        return float(self.total)


def point_distance(p: SystemPoint, q: SystemPoint, horizon: int | None = None) -> DistanceValue:
    n = p.config.n
    if q.config.n != n:
        raise ValueError(f"dimension mismatch: {n} vs {q.config.n}")
    if horizon is None:
        horizon = min(len(p.strategy), len(q.strategy))
    d_s = strategy_distance(p.strategy, q.strategy, n, horizon)
    return DistanceValue(n, config_distance(p.config, q.config), d_s, horizon)


# -- expansivity -----------------------------------------------------------


@dataclass(frozen=True)
class ExpansivityReport:
    pairs_examined: int
    horizon: int
    min_separation: int | None

    def __str__(self) -> str:
        if self.pairs_examined == 0:
            return "no pairs examined"
        return (
            f"{self.pairs_examined} pairs, horizon {self.horizon}: "
            f"minimum separation {self.min_separation}"
        )


def _max_separation(table, n: int, x: int, y: int, word: Sequence[int]) -> int:
    best = 0
    for s in word:
        x = step_value(table, n, s, x)
        y = step_value(table, n, s, y)
        best = max(best, (x ^ y).bit_count())
    return best


def expansivity_probe(
    f: BooleanMap,
    trials: int,
    horizon: int,
    seed: int = 0,
    exhaustive: bool = False,
) -> ExpansivityReport:
    """Minimum over pairs of the largest config separation along a shared strategy.

    Pairs start from distinct configurations and follow the same strategy
    word, so the strategy part of the distance stays zero and only the
    Hamming part is measured (steps 1..horizon). With ``exhaustive`` every
    pair of distinct configurations is combined with every word of length
    ``horizon``; otherwise ``trials`` random pairs are drawn.
    """
    n, table = f.n, f.table
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    seps = []
    if exhaustive:
        if n**horizon * (1 << n) ** 2 > 5_000_000:
            raise ValueError("exhaustive probe too large; lower horizon or sample instead")
        words = list(itertools.product(range(1, n + 1), repeat=horizon))
        for x, y in itertools.combinations(range(1 << n), 2):
            seps.append(min(_max_separation(table, n, x, y, w) for w in words))
    else:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            x, y = rng.choice(1 << n, size=2, replace=False)
            word = rng.integers(1, n + 1, size=horizon)
            seps.append(_max_separation(table, n, int(x), int(y), word.tolist()))
    return ExpansivityReport(len(seps), horizon, min(seps) if seps else None)


# -- separated sets (entropy lower bounds) ----------------------------------


@dataclass(frozen=True)
class SeparatedSetReport:
    t: int
    epsilon: float
    sample_size: int
    h_lower: int


class _Orbits:
    """Precomputed iterates of sample points under G_f."""

    def __init__(self, f: BooleanMap, points: Sequence[SystemPoint], steps: int):
        self.n = f.n
        self.points = points
        self.configs = []
        for p in points:
            if len(p.strategy) < steps:
                raise ValueError(f"strategy prefix of length {len(p.strategy)} cannot be iterated {steps} times")
            v = p.config.value
            row = [v]
            for s in p.strategy.terms[:steps]:
                v = step_value(f.table, f.n, s, v)
                row.append(v)
            self.configs.append(row)

    def distance(self, a: int, b: int, i: int) -> Fraction:
        """d(G^i(p_a), G^i(p_b))."""
        sa = self.points[a].strategy.terms[i:]
        sb = self.points[b].strategy.terms[i:]
        h = min(len(sa), len(sb))
        d_e = (self.configs[a][i] ^ self.configs[b][i]).bit_count()
        num = _strategy_numerator(sa, sb, h)
        return d_e + Fraction(9 * num, 2 * self.n * 10**h)

    def separated(self, a: int, b: int, t: int, eps: Fraction) -> bool:
        """Whether d_t(p_a, p_b) = max_{i<t} d(G^i p_a, G^i p_b) reaches eps."""
        return any(self.distance(a, b, i) >= eps for i in range(t))


def sample_points(n: int, sample_size: int, strategy_length: int, seed: int) -> list[SystemPoint]:
    rng = np.random.default_rng(seed)
    configs = rng.integers(0, 1 << n, size=sample_size)
    words = rng.integers(1, n + 1, size=(sample_size, strategy_length))
    return [
        SystemPoint(Strategy(tuple(w.tolist())), BoolConfig(n, int(v)))
        for v, w in zip(configs, words)
    ]


def separated_set_curve(
    f: BooleanMap,
    ts: Sequence[int],
    epsilon: float,
    sample_size: int = 200,
    seed: int = 0,
    strategy_length: int | None = None,
    points: Sequence[SystemPoint] | None = None,
) -> list[SeparatedSetReport]:
    """Greedy (t, epsilon)-separated subsets of one sample, for each t in ``ts``.

    The set found for horizon t stays separated for every larger horizon
    (d_t only grows with t), so the search at t starts from it and extends
    it greedily in sample order. Each reported ``h_lower`` is therefore
    maximal by inclusion at its own t and nondecreasing in t.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    ts = sorted(set(int(t) for t in ts))
    if not ts or ts[0] < 1:
        raise ValueError("horizons must be >= 1")
    t_max = ts[-1]
    if points is None:
        if strategy_length is None:
            strategy_length = t_max + 6
        points = sample_points(f.n, sample_size, strategy_length, seed)
    orbits = _Orbits(f, points, t_max - 1)
    eps = Fraction(epsilon).limit_denominator(10**12) if isinstance(epsilon, float) else Fraction(epsilon)

    chosen: list[int] = []
    reports = []
    for t in ts:
        members = set(chosen)
        for a in range(len(points)):
            if a in members:
                continue
            if all(orbits.separated(a, b, t, eps) for b in chosen):
                chosen.append(a)
                members.add(a)
        reports.append(SeparatedSetReport(t, float(epsilon), len(points), len(chosen)))
    return reports


def separated_set_estimate(
    f: BooleanMap,
    t: int,
    epsilon: float,
    sample_size: int = 200,
    seed: int = 0,
    strategy_length: int | None = None,
    points: Sequence[SystemPoint] | None = None,
) -> SeparatedSetReport:
    """Lower bound on the largest (t, epsilon)-separated set, from a seeded sample."""
    return separated_set_curve(
        f, range(1, t + 1), epsilon, sample_size, seed, strategy_length, points
    )[-1]


# -- mixing ---------------------------------------------------------------


@dataclass(frozen=True)
class MixingReport:
    max_length: int
    lengths: tuple[int, ...]
    n0: int | None


def mixing_probe(graph: IterationGraph, x: BoolConfig, y: BoolConfig, max_length: int) -> MixingReport:
    """Word lengths L <= max_length for which some strategy of exactly L terms drives x to y.

    ``n0`` is the smallest length from which every longer length up to
    ``max_length`` works, or None when the last length fails. Self-loops of
    the iteration graph are what let a word be padded to any longer length.
    """
    lengths = []
    frontier = {x.value}
    for L in range(max_length + 1):
        if y.value in frontier:
            lengths.append(L)
        frontier = {int(w) for v in frontier for w in graph.arcs[v]}
    n0 = None
    for L in range(max_length, -1, -1):
        if L in lengths:
            n0 = L
        else:
            break
    return MixingReport(max_length, tuple(lengths), n0)

