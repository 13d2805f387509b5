"""Column languages next to a fixed central trace, and trace-language counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _bitplanes as bp
from .ca_core import Rule, Word, as_letters, mirror_word
from .errors import check_budget

SIDES = ("right", "left")


@dataclass(frozen=True)
class ColumnWord:
    side: str
    values: tuple[int, ...]

    def __str__(self) -> str:
        from .ca_core import letters_to_str

        return letters_to_str(self.values)


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")


def _oriented(rule: Rule, side: str) -> Rule:
    return rule if side == "right" else rule.mirrored()


def forward_letters(rule: Rule, z: tuple[int, ...], v: tuple[int, ...]) -> tuple[int, ...]:
    """Cell 1 over times 0..n-1 when column 0 is forced to ``z``.

    ``v`` holds the letters of cells 1..n.  At time t only cells 1..n-t are
    alive; cell 1 reads ``z[t]`` as its left neighbour.
    """
    n = len(v)
    cur = list(v)
    out = [cur[0]]
    for t in range(n - 1):
        left = (z[t],) + tuple(cur)
        cur = [rule(left[k], left[k + 1], left[k + 2]) for k in range(len(cur) - 1)]
        out.append(cur[0])
    return tuple(out)


def forward_column(rule: Rule, z, word: Word, side: str = "right") -> ColumnWord:
    """T_{f->z}(v) for ``side='right'`` (v on [1..n]); the mirror image
    T_{f<-z}(u) for ``side='left'`` (u on [-n..-1])."""
    _check_side(side)
    z = as_letters(z)
    n = len(z) - 1
    if side == "right":
        if word.interval != (1, n):
            raise ValueError(f"right input must sit on [1..{n}], got {word.interval}")
        letters = word.letters
    else:
        if word.interval != (-n, -1):
            raise ValueError(f"left input must sit on [{-n}..-1], got {word.interval}")
        letters = mirror_word(word).letters
    if n < 1:
        raise ValueError("z must have length at least 2")
    return ColumnWord(side, forward_letters(_oriented(rule, side), z, letters))


def forward_columns_all(rule: Rule, z, side: str = "right") -> np.ndarray:
    """Columns for every input at once: row ``j`` is the column of the input
    with index ``j`` (digit k is the letter next-but-k to the centre)."""
    _check_side(side)
    z = as_letters(z)
    n = len(z) - 1
    q = rule.q
    check_budget(q ** n, "forward column enumeration")
    f = _oriented(rule, side)
    table = bp.table_array(f)
    idx = np.arange(q ** n, dtype=np.int64)
    cells = [((idx // q ** k) % q).astype(np.uint8) for k in range(n)]
    cols = np.empty((q ** n, n), dtype=np.uint8)
    cols[:, 0] = cells[0]
    for t in range(n - 1):
        boundary = np.full_like(cells[0], z[t])
        padded = [boundary] + cells
        cells = [bp.step_letters(table, q, padded[k], padded[k + 1], padded[k + 2]) for k in range(len(cells) - 1)]
        cols[:, t + 1] = cells[0]
    return cols


def forward_image(rule: Rule, z, side: str = "right") -> frozenset[tuple[int, ...]]:
    cols = forward_columns_all(rule, z, side)
    return frozenset(map(tuple, np.unique(cols, axis=0).tolist()))


def forward_image_size(rule: Rule, z, side: str = "right") -> int:
    return int(np.unique(forward_columns_all(rule, z, side), axis=0).shape[0])


def tau_set(rule: Rule, z, side: str = "right") -> frozenset[tuple[int, ...]]:
    """Columns found next to ``z`` in full valid triangles (column 1 for
    the right side, column -1 read as seen from the centre for the left)."""
    _check_side(side)
    z = as_letters(z)
    n = len(z) - 1
    if n < 1:
        raise ValueError("z must have length at least 2")
    q = rule.q
    if any(not 0 <= a < q for a in z):
        raise ValueError("z is not a word over the rule's alphabet")
    total = q ** (2 * n)
    check_budget(total, "tau enumeration")
    col = 1 if side == "right" else -1
    mismatch, kept = bp.run_target(rule, z, 0, total, lambda p, t: p == col and t < n)
    valid = bp.unpack(mismatch, total) == 0
    if not valid.any():
        return frozenset()
    stack = np.stack([bp.letters_of(kept[(col, t)], total)[valid] for t in range(n)], axis=1)
    return frozenset(map(tuple, np.unique(stack, axis=0).tolist()))


def trace_language(rule: Rule, width: int, n: int) -> np.ndarray:
    """Distinct traces over columns [0, width) of all words on [-n..n]."""
    if width < 1:
        raise ValueError("width must be positive")
    if width - 1 > n:
        raise ValueError(f"columns [0..{width - 1}] do not fit in [-{n}..{n}]")
    q = rule.q
    total = q ** (2 * n + 1)
    check_budget(total, "trace language enumeration")
    horizon = n - (width - 1)
    kept = bp.triangle_planes(rule, n, None, 0, total, lambda p, t: 0 <= p < width and t <= horizon)
    stack = np.stack(
        [bp.letters_of(kept[(p, t)], total) for t in range(horizon + 1) for p in range(width)], axis=1
    )
    return np.unique(stack, axis=0)


def trace_language_count(rule: Rule, width: int, n: int) -> int:
    return int(trace_language(rule, width, n).shape[0])


@dataclass(frozen=True)
class EntropyEstimate:
    width: int
    points: tuple[tuple[int, int, float], ...]
    equicontinuity_like: bool
    ceiling: float

    def csv_rows(self, rule_label: str) -> list[list[str]]:
        return [[rule_label, str(self.width), str(n), str(c), f"{s:.6f}"] for n, c, s in self.points]


def entropy_estimate(rule: Rule, width: int, n_max: int) -> EntropyEstimate:
    """Finite-n slopes log2|T^{[0,width)}| / n for n = width..n_max.

    ``equicontinuity_like`` is a finite-scale heuristic: the counts do not
    move over the upper half of the sampled range.
    """
    if n_max < width:
        raise ValueError("n_max must be at least the width")
    points = []
    for n in range(width, n_max + 1):
        count = trace_language_count(rule, width, n)
        points.append((n, count, math.log2(count) / n))
    top = [c for _, c, _ in points[len(points) // 2 :]]
    return EntropyEstimate(width, tuple(points), len(set(top)) == 1, width * math.log2(rule.q))
