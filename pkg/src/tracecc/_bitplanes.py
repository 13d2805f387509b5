"""Bit-parallel evaluation of all computation triangles of a given size.

Every input word gets one bit lane.  A cell of the triangle is held as q
one-hot planes (packed ``uint64`` arrays), so one rule application costs a
fixed number of word-level AND/OR operations per 64 inputs.

Input index layout (``side = q**n``):

* centre fixed:  ``g = i * side + j``
* centre free:   ``g = (i * q + w0) * side + j``

with ``i = sum u[-1-k] q**k`` (Alice) and ``j = sum v[1+k] q**k`` (Bob).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np

from .ca_core import Rule

Planes = list  # list[np.ndarray] of length q


def pack(mask: np.ndarray) -> np.ndarray:
    raw = np.packbits(mask.astype(bool, copy=False), bitorder="little")
    pad = (-raw.size) % 8
    if pad:
        raw = np.concatenate([raw, np.zeros(pad, dtype=np.uint8)])
    return raw.view(np.uint64)


def unpack(plane: np.ndarray, count: int) -> np.ndarray:
    return np.unpackbits(plane.view(np.uint8), count=count, bitorder="little")


def letters_of(planes: Planes, count: int) -> np.ndarray:
    out = np.zeros(count, dtype=np.uint8)
    for a in range(1, len(planes)):
        out += unpack(planes[a], count) * np.uint8(a)
    return out


def total_inputs(q: int, n: int, center: int | None) -> int:
    return q ** (2 * n) * (q if center is None else 1)


def _weight(q: int, n: int, free_center: bool, p: int) -> int:
    side = q ** n
    if p > 0:
        return q ** (p - 1)
    if p == 0:
        return side
    return side * (q if free_center else 1) * q ** (-1 - p)


def _digits(q: int, weight: int, start: int, stop: int) -> np.ndarray:
    block = np.repeat(np.arange(q, dtype=np.uint8), weight)
    period = block.size
    offset = start % period
    reps = -(-(offset + stop - start) // period)
    return np.tile(block, reps)[offset : offset + stop - start]


@lru_cache(maxsize=6)
def _input_planes(q: int, n: int, center: int | None, start: int, stop: int) -> dict[int, tuple]:
    count = stop - start
    words = -(-count // 64)
    planes: dict[int, tuple] = {}
    for p in range(-n, n + 1):
        if p == 0 and center is not None:
            cells = [np.zeros(words, dtype=np.uint64) for _ in range(q)]
            cells[center] = ~cells[center]
        else:
            digits = _digits(q, _weight(q, n, center is None, p), start, stop)
            cells = [pack(digits == a) for a in range(q)]
        for arr in cells:
            arr.flags.writeable = False
        planes[p] = tuple(cells)
    return planes


def apply_rule(rule: Rule, left: Planes, mid: Planes, right: Planes) -> Planes:
    q = rule.q
    words = left[0].size
    acc = [np.zeros(words, dtype=np.uint64) for _ in range(q)]
    for a, b in product(range(q), repeat=2):
        outs = [rule(a, b, c) for c in range(q)]
        if not any(outs):
            continue
        ab = left[a] & mid[b]
        for c, d in enumerate(outs):
            if d:
                acc[d] |= ab & right[c]
    rest = acc[1].copy()
    for d in range(2, q):
        rest |= acc[d]
    acc[0] = ~rest
    return acc


def triangle_planes(
    rule: Rule,
    n: int,
    center: int | None,
    start: int,
    stop: int,
    want: Callable[[int, int], bool],
    on_row: Callable[[int, dict[int, Planes]], None] | None = None,
) -> dict[tuple[int, int], Planes]:
    """Run all triangles with inputs ``start <= g < stop``.

    Returns the planes of every cell (column, time) accepted by ``want``.
    ``on_row(t, row)`` sees each full row as it is produced.
    """
    row: dict[int, Planes] = {p: list(v) for p, v in _input_planes(rule.q, n, center, start, stop).items()}
    kept: dict[tuple[int, int], Planes] = {}
    for t in range(n + 1):
        if t > 0:
            row = {p: apply_rule(rule, row[p - 1], row[p], row[p + 1]) for p in range(t - n, n - t + 1)}
        for p, planes in row.items():
            if want(p, t):
                kept[(p, t)] = planes
        if on_row is not None:
            on_row(t, row)
    return kept


def run_target(
    rule: Rule,
    z: tuple[int, ...],
    start: int,
    stop: int,
    extra: Callable[[int, int], bool] = lambda p, t: False,
) -> tuple[np.ndarray, dict[tuple[int, int], Planes]]:
    """Triangles of u z0 v for lanes in [start, stop).

    Returns the packed mismatch plane (lane bit set iff the central trace
    differs from ``z``) and the kept cells: the top cell (0, n) plus any
    cell accepted by ``extra``.
    """
    n = len(z) - 1
    words = -(-(stop - start) // 64)
    mismatch = np.zeros(words, dtype=np.uint64)

    def on_row(t: int, row: dict[int, Planes]) -> None:
        nonlocal mismatch
        mismatch |= ~row[0][z[t]]

    kept = triangle_planes(
        rule, n, z[0], start, stop, lambda p, t: (p == 0 and t == n) or extra(p, t), on_row
    )
    return mismatch, kept


def table_array(rule: Rule) -> np.ndarray:
    return np.asarray(rule.table, dtype=np.uint8)


def step_letters(table: np.ndarray, q: int, left: np.ndarray, mid: np.ndarray, right: np.ndarray) -> np.ndarray:
    idx = (left.astype(np.intp) * q + mid) * q + right
    return table[idx]
