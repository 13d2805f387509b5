"""Independent brute-force oracles shared by the test modules.

Nothing here calls the package's optimised paths: triangles are stepped
with plain lists, protocol trees are searched recursively and fooling
sets by subset enumeration.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest


def table_fn(number: int):
    return lambda a, b, c: (number >> (4 * a + 2 * b + c)) & 1


def naive_rows(f, letters):
    rows = [list(letters)]
    while len(rows[-1]) >= 3:
        r = rows[-1]
        rows.append([f(r[k - 1], r[k], r[k + 1]) for k in range(1, len(r) - 1)])
    return rows


def naive_trace(f, letters):
    rows = naive_rows(f, letters)
    return tuple(r[len(r) // 2] for r in rows)


def naive_hat(f, z, u, v):
    """u, v as letter tuples (u is u_-n..u_-1, v is v_1..v_n)."""
    return 0 if naive_trace(f, tuple(u) + (z[0],) + tuple(v)) == tuple(z) else 1


def naive_matrix(f, q, z):
    n = len(z) - 1
    side = q ** n

    def digits(i):
        return [(i // q ** k) % q for k in range(n)]

    out = np.zeros((side, side), dtype=np.uint8)
    for i in range(side):
        u = tuple(reversed(digits(i)))  # digit 0 is u_-1
        for j in range(side):
            v = tuple(digits(j))  # digit 0 is v_1
            out[i, j] = naive_hat(f, z, u, v)
    return out


def brute_depth(hat: np.ndarray) -> int:
    """Protocol-tree depth by plain recursion; a leaf is a rectangle on
    which one player already knows the answer."""
    hat = np.asarray(hat)
    rows, cols = hat.shape

    def knows(R, C):
        vals = {tuple(int(hat[r, c]) for c in C) for r in R}
        if len({v for row in vals for v in row}) <= 1:
            return True
        alice = all(len(set(row)) == 1 for row in vals)
        bob = all(len({int(hat[r, c]) for r in R}) == 1 for c in C)
        return alice or bob

    def splits(items):
        items = tuple(items)
        first, rest = items[0], items[1:]
        for k in range(len(rest) + 1):
            for extra in combinations(rest, k):
                a = (first,) + extra
                b = tuple(x for x in items if x not in a)
                if b:
                    yield a, b

    @lru_cache(maxsize=None)
    def depth(R, C):
        if knows(R, C):
            return 0
        best = math.inf
        for a, b in splits(R):
            best = min(best, 1 + max(depth(a, C), depth(b, C)))
        for a, b in splits(C):
            best = min(best, 1 + max(depth(R, a), depth(R, b)))
        return best

    return depth(tuple(range(rows)), tuple(range(cols)))


def brute_max_fooling(hat: np.ndarray) -> int:
    hat = np.asarray(hat)
    cells = [(i, j) for i in range(hat.shape[0]) for j in range(hat.shape[1])]
    best = 1
    for common in (0, 1):
        pool = [c for c in cells if hat[c] == common]
        for size in range(best + 1, min(hat.shape) + 1):
            found = False
            for subset in combinations(pool, size):
                if all(
                    hat[x2, y] != common or hat[x, y2] != common
                    for (x, y), (x2, y2) in combinations(subset, 2)
                ) and len({x for x, _ in subset}) == size and len({y for _, y in subset}) == size:
                    found = True
                    break
            if not found:
                break
            best = size
    return best


@pytest.fixture
def budget(monkeypatch):
    def set_budget(value: int) -> None:
        monkeypatch.setenv("TRACECC_BUDGET", str(value))

    return set_budget


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
