"""Iteration graph of a Boolean map and strong-connectivity certificates.

Iterations of G_f are chaotic in Devaney's sense exactly when the iteration
graph is strongly connected, so certification reduces to an SCC
decomposition over the 2^n configurations.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dynamics import BoolConfig, BooleanMap, Strategy


@dataclass(frozen=True, eq=False)
class IterationGraph:
    """Labeled digraph: ``arcs[v, i-1]`` is the target of the arc labeled ``i`` leaving ``v``.

    Every vertex has exactly ``n`` outgoing arcs; an arc is a self-loop when
    updating that component leaves the configuration unchanged.
    """

    n: int
    arcs: np.ndarray

    @property
    def size(self) -> int:
        return self.arcs.shape[0]

    def successors(self, v: int) -> list[int]:
        """Distinct non-loop successors of ``v``."""
        return sorted({int(w) for w in self.arcs[v] if w != v})

    def target(self, v: int, label: int) -> int:
        return int(self.arcs[v, label - 1])


def build_graph(f: BooleanMap) -> IterationGraph:
    n = f.n
    v = np.arange(1 << n, dtype=np.int64)[:, None]
    masks = (1 << (n - np.arange(1, n + 1, dtype=np.int64)))[None, :]
    fx = f.array[:, None]
    arcs = (v & ~masks) | (fx & masks)
    arcs.flags.writeable = False
    return IterationGraph(n, arcs)


def strongly_connected_components(graph: IterationGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    size = graph.size
    index = np.full(size, -1, dtype=np.int64)
    low = np.zeros(size, dtype=np.int64)
    on_stack = np.zeros(size, dtype=bool)
    stack: list[int] = []
    components: list[list[int]] = []
    succ = [graph.successors(v) for v in range(size)]
    counter = 0

    for root in range(size):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))
    return components


@dataclass
class ChaosCertificate:
    """Outcome of the strong-connectivity check for one map."""

    n: int
    verdict: bool
    scc_count: int
    fixed_points: list[int]
    components: list[list[int]] = field(repr=False)
    witness: tuple[int, int] | None = None

    @property
    def evidence(self) -> str | tuple[BoolConfig, BoolConfig]:
        if self.verdict:
            return "strongly connected"
        x, y = self.witness
        return BoolConfig(self.n, x), BoolConfig(self.n, y)

    def _bits(self, v: int) -> str:
        return format(v, f"0{self.n}b")

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "verdict": self.verdict,
            "scc_count": self.scc_count,
            "fixed_points": [self._bits(v) for v in self.fixed_points],
            "witness": None if self.witness is None else [self._bits(v) for v in self.witness],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    def report(self, name: str = "f") -> str:
        lines = [f"map: {name} (n={self.n}, {1 << self.n} configurations)"]
        if self.verdict:
            lines.append("iteration graph is strongly connected: iterations of G_f are chaotic (Devaney)")
        else:
            x, y = self.witness
            lines.append(f"iteration graph has {self.scc_count} strongly connected components: NOT chaotic")
            lines.append(f"witness: no path from {self._bits(x)} to {self._bits(y)}")
        fps = ", ".join(self._bits(v) for v in self.fixed_points) or "none"
        lines.append(f"fixed points: {fps}")
        return "\n".join(lines)


def certify_chaos(f: BooleanMap, graph: IterationGraph | None = None) -> ChaosCertificate:
    if graph is None:
        graph = build_graph(f)
    comps = strongly_connected_components(graph)
    fixed = [v for v, w in enumerate(f.table) if v == w]
    witness = None
    if len(comps) > 1:
        # the first Tarjan component is a sink: nothing outside it is reachable
        sink = comps[0]
        inside = set(sink)
        outside = next(v for v in range(graph.size) if v not in inside)
        witness = (sink[0], outside)
    return ChaosCertificate(
        n=f.n,
        verdict=len(comps) == 1,
        scc_count=len(comps),
        fixed_points=fixed,
        components=comps,
        witness=witness,
    )


def steer(graph: IterationGraph, x: BoolConfig, y: BoolConfig) -> Strategy | None:
    """Shortest strategy word driving ``x`` to ``y``, or None when unreachable.

    Among shortest words the lexicographically smallest is returned: a FIFO
    BFS that expands labels in increasing order discovers every vertex first
    through its lexicographically smallest shortest word.
    """
    if not x.n == y.n == graph.n:
        raise ValueError("dimension mismatch between graph and configurations")
    src, dst = x.value, y.value
    if src == dst:
        return Strategy(())
    parent = {src: (None, 0)}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for label in range(1, graph.n + 1):
            w = int(graph.arcs[v, label - 1])
            if w in parent:
                continue
            parent[w] = (v, label)
            if w == dst:
                word = []
                while w != src:
                    w, lab = parent[w]
                    word.append(lab)
                return Strategy(tuple(reversed(word)))
            queue.append(w)
    return None


def reachable_in_exactly(graph: IterationGraph, x: BoolConfig, length: int) -> set[int]:
    """Configurations reachable from ``x`` by words of exactly ``length`` terms."""
    frontier = {x.value}
    for _ in range(length):
        frontier = {int(w) for v in frontier for w in graph.arcs[v]}
    return frontier
