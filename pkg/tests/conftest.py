import numpy as np
import pytest

from chaosnet.dynamics import BooleanMap, builtin_map


@pytest.fixture(scope="session")
def f0():
    return builtin_map("f0", 4)


@pytest.fixture(scope="session")
def f1():
    return builtin_map("f1", 4)


@pytest.fixture(scope="session")
def paper_f():
    return builtin_map("paper_f")


@pytest.fixture(scope="session")
def paper_g():
    return builtin_map("paper_g")


def random_tables(n, count, seed):
    rng = np.random.default_rng(seed)
    return [BooleanMap(n, rng.integers(0, 1 << n, size=1 << n).tolist()) for _ in range(count)]


def bits_of(v, n):
    return [int(c) for c in format(v, f"0{n}b")]


def closure_strongly_connected(f):
    """Brute force: boolean reachability matrix squared until it stops changing."""
    n, size = f.n, 1 << f.n
    reach = np.eye(size, dtype=bool)
    for v in range(size):
        fx = bits_of(f.table[v], n)
        for i in range(n):
            y = bits_of(v, n)
            y[i] = fx[i]
            reach[v, int("".join(map(str, y)), 2)] = True
    while True:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if (nxt == reach).all():
            return bool(reach.all())
        reach = nxt


_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
