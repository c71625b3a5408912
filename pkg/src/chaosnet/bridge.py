"""Recurrent CI-MLP view of a network: extract its Boolean map, run it, certify it.

A network oracle answers ``query(s, x)`` with the configuration the network
outputs after its input layer is set to the component index ``s`` and the
bits of ``x``. Feeding that output back as the next ``x`` makes the network
a dynamical system driven by the strategy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .dynamics import BoolConfig, BooleanMap, Strategy, f_step, iterate_async
from .graph import ChaosCertificate, certify_chaos


class NetworkOracle(Protocol):
    n: int

    def query(self, s: int, x: BoolConfig) -> BoolConfig: ...


class MapOracle:
    """Exact oracle computing F_f(s, x) for a known map."""

    def __init__(self, f: BooleanMap):
        self.f = f
        self.n = f.n

    def query(self, s: int, x: BoolConfig) -> BoolConfig:
        return f_step(self.f, s, x)


class FunctionOracle:
    """Wrap a plain ``(s, bits) -> bits`` callable."""

    def __init__(self, n: int, fn: Callable[[int, tuple[int, ...]], tuple[int, ...]]):
        self.n = n
        self.fn = fn

    def query(self, s: int, x: BoolConfig) -> BoolConfig:
        out = self.fn(s, x.bits)
        if len(out) != self.n:
            raise ValueError(f"oracle returned {len(out)} components, expected {self.n}")
        return BoolConfig.from_bits(tuple(out))


class MlpOracle:
    """A trained perceptron seen through a 0.5 threshold on each output.

    Inputs are laid out as the ``n`` bits of ``x`` followed by ``s`` and
    min-max scaled with the normalization stored alongside the model (the
    layout produced by :func:`chaosnet.codec.step_dataset`).
    """

    def __init__(self, model, n: int | None = None):
        from .mlp import forward_batch

        self.model = model
        self.n = model.q if n is None else n
        if model.p != self.n + 1 or model.q != self.n:
            raise ValueError(
                f"model dims ({model.p}->{model.q}) do not fit a {self.n}-component step network"
            )
        self._forward = forward_batch

    def _inputs(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        n = self.n
        shifts = n - np.arange(1, n + 1)
        bits = (x[:, None] >> shifts) & 1
        raw = np.column_stack([bits, s]).astype(float)
        return self.model.scale_inputs(raw)

    def query(self, s: int, x: BoolConfig) -> BoolConfig:
        if x.n != self.n or not 1 <= s <= self.n:
            raise ValueError("query outside [1, n] x B^n")
        out = self._forward(self.model, self._inputs(np.array([s]), np.array([x.value])))[0]
        return BoolConfig.from_bits([int(o >= 0.5) for o in out])


def extract_map(oracle: NetworkOracle) -> BooleanMap:
    """f_j(x) := bit j of query(j, x); uses exactly n * 2^n queries."""
    n = oracle.n
    table = []
    for v in range(1 << n):
        x = BoolConfig(n, v)
        fx = 0
        for j in range(1, n + 1):
            y = oracle.query(j, x)
            if not isinstance(y, BoolConfig) or y.n != n:
                raise ValueError(f"oracle response to ({j}, {x}) is not a {n}-component configuration")
            fx |= y.value & (1 << (n - j))
        table.append(fx)
    return BooleanMap(n, table, name="extracted")


@dataclass(frozen=True)
class RecurrentRun:
    x0: BoolConfig
    strategy: Strategy
    orbit: tuple[BoolConfig, ...]


def recurrent_run(oracle: NetworkOracle, x0: BoolConfig, strategy: Strategy) -> RecurrentRun:
    """Feed each response back as the next input state.

    The whole response vector becomes the next state, so an inexact network
    may also disturb components other than ``S^t``.
    """
    if not strategy.terms:
        raise ValueError("recurrent run needs a nonempty strategy")
    strategy.check(oracle.n)
    x = x0
    orbit = []
    for s in strategy:
        x = oracle.query(s, x)
        orbit.append(x)
    return RecurrentRun(x0, strategy, tuple(orbit))


def certify_network(oracle: NetworkOracle) -> ChaosCertificate:
    return certify_chaos(extract_map(oracle))


@dataclass(frozen=True)
class EquivalenceReport:
    trials: int
    horizon: int
    mismatches: int
    first_mismatch: tuple[BoolConfig, Strategy] | None = None


def equivalence_check(
    oracle: NetworkOracle, f: BooleanMap, trials: int, horizon: int, seed: int = 0
) -> EquivalenceReport:
    """Compare recurrent runs of the oracle with asynchronous iterations of f."""
    if oracle.n != f.n:
        raise ValueError(f"dimension mismatch: oracle n={oracle.n}, map n={f.n}")
    rng = np.random.default_rng(seed)
    mismatches = 0
    first = None
    for _ in range(trials):
        x0 = BoolConfig(f.n, int(rng.integers(0, 1 << f.n)))
        S = Strategy(tuple(rng.integers(1, f.n + 1, size=horizon).tolist()))
        run = recurrent_run(oracle, x0, S)
        if list(run.orbit) != iterate_async(f, x0, S):
            mismatches += 1
            if first is None:
                first = (x0, S)
    return EquivalenceReport(trials, horizon, mismatches, first)
