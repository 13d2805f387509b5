"""Traced communication matrices and their complexity measures."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _bitplanes as bp
from .ca_core import Rule, Word, as_letters
from .errors import ResourceError, check_budget

MULTIROUND_SIDE_CAP = 8
EXACT_FOOLING_SIDE_CAP = 16
RATIONAL_RANK_WORK_CAP = 4_000_000
MAGIC = b"TCCM"


def ceil_log2(count: int) -> int:
    if count < 1:
        raise ValueError("ceil_log2 needs a positive count")
    return (count - 1).bit_length()


def index_word(index: int, q: int, n: int, side: str) -> Word:
    """Input word for a matrix row (``side='left'``) or column index."""
    digits = [(index // q ** k) % q for k in range(n)]
    if side == "left":
        return Word(-n, tuple(reversed(digits)))
    return Word(1, tuple(digits))


def word_index(word: Word, q: int) -> int:
    """Inverse of :func:`index_word`; the cell next to the centre is the
    least significant digit."""
    if word.end == -1:
        return sum(word[-1 - k] * q ** k for k in range(len(word)))
    if word.start == 1:
        return sum(word[1 + k] * q ** k for k in range(len(word)))
    raise ValueError(f"{word.interval} is neither Alice's nor Bob's half")


def hat_value(rule: Rule, z, u: Word, v: Word) -> int:
    """0 if the central trace of u z0 v equals z, else 1.

    Scalar reference path; stops at the first mismatching time step.
    """
    z = as_letters(z)
    n = len(z) - 1
    if u.interval != (-n, -1) or v.interval != (1, n):
        raise ValueError("u must sit on [-n..-1] and v on [1..n]")
    row = list(u.letters) + [z[0]] + list(v.letters)
    for t in range(1, n + 1):
        row = [rule(row[k - 1], row[k], row[k + 1]) for k in range(1, len(row) - 1)]
        if row[len(row) // 2] != z[t]:
            return 1
    return 0


@dataclass(frozen=True, eq=False)
class CcMatrix:
    """f-hat_z over A^n x A^n with the top-cell overlay.

    ``hat[i, j]`` is the indicator and ``top[i, j]`` the letter f^n(u z0 v)
    for row index ``i`` (Alice's u) and column index ``j`` (Bob's v).
    """

    rule: Rule
    z: tuple[int, ...]
    hat: np.ndarray
    top: np.ndarray

    @property
    def n(self) -> int:
        return len(self.z) - 1

    @property
    def q(self) -> int:
        return self.rule.q

    @property
    def shape(self) -> tuple[int, int]:
        return self.hat.shape

    def row_word(self, i: int) -> Word:
        return index_word(i, self.q, self.n, "left")

    def col_word(self, j: int) -> Word:
        return index_word(j, self.q, self.n, "right")

    def value(self, i: int, j: int) -> int:
        return int(self.hat[i, j])

    def to_bytes(self) -> bytes:
        header = MAGIC + bytes([self.q, self.n]) + bytes(self.z)
        cells = np.empty(self.hat.size * 2, dtype=np.uint8)
        cells[0::2] = self.hat.ravel()
        cells[1::2] = self.top.ravel()
        return header + cells.tobytes()


def load_matrix(data: bytes, rule: Rule) -> CcMatrix:
    if data[:4] != MAGIC:
        raise ValueError("not a matrix dump (bad magic)")
    q, n = data[4], data[5]
    if q != rule.q:
        raise ValueError(f"dump is over {q} letters, rule over {rule.q}")
    z = tuple(data[6 : 7 + n])
    side = q ** n
    body = np.frombuffer(data, dtype=np.uint8, offset=7 + n)
    if body.size != 2 * side * side:
        raise ValueError("truncated matrix dump")
    hat = body[0::2].reshape(side, side).copy()
    top = body[1::2].reshape(side, side).copy()
    return _frozen(rule, z, hat, top)


def _frozen(rule: Rule, z: tuple[int, ...], hat: np.ndarray, top: np.ndarray) -> CcMatrix:
    hat.flags.writeable = False
    top.flags.writeable = False
    return CcMatrix(rule, z, hat, top)


def _matrix_rows(rule: Rule, z: tuple[int, ...], r0: int, r1: int) -> tuple[np.ndarray, np.ndarray]:
    side = rule.q ** (len(z) - 1)
    start, stop = r0 * side, r1 * side
    count = stop - start
    mismatch, kept = bp.run_target(rule, z, start, stop)
    hat = bp.unpack(mismatch, count).reshape(r1 - r0, side)
    top = bp.letters_of(kept[(0, len(z) - 1)], count).reshape(r1 - r0, side)
    return hat, top


def build_matrix(rule: Rule, z, workers: int = 1) -> CcMatrix:
    """Exact f-hat_z matrix, computed bit-parallel over all inputs.

    With ``workers > 1`` disjoint row ranges are evaluated concurrently;
    the result does not depend on the split.
    """
    z = as_letters(z)
    n = len(z) - 1
    if n < 1:
        raise ValueError("z must have length n+1 with n >= 1")
    if any(not 0 <= a < rule.q for a in z):
        raise ValueError("z is not a word over the rule's alphabet")
    side = rule.q ** n
    check_budget(side * side, "matrix cells")
    chunks = max(1, min(workers, side))
    bounds = [side * k // chunks for k in range(chunks + 1)]
    spans = [(bounds[k], bounds[k + 1]) for k in range(chunks) if bounds[k] < bounds[k + 1]]
    if len(spans) == 1:
        hat, top = _matrix_rows(rule, z, 0, side)
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            parts = list(pool.map(lambda s: _matrix_rows(rule, z, *s), spans))
        hat = np.concatenate([p[0] for p in parts])
        top = np.concatenate([p[1] for p in parts])
    return _frozen(rule, z, np.ascontiguousarray(hat), np.ascontiguousarray(top))


# ---------------------------------------------------------------- one round


def _distinct(rows: np.ndarray) -> int:
    packed = np.packbits(rows, axis=1)
    return len({r.tobytes() for r in packed})


def distinct_rows(m: CcMatrix) -> int:
    return _distinct(m.hat)


def distinct_cols(m: CcMatrix) -> int:
    return _distinct(np.ascontiguousarray(m.hat.T))


def one_round_cc(m: CcMatrix, side: str) -> int:
    """Whole-bit one-round CC: ``left`` (Alice speaks) counts distinct rows,
    ``right`` counts distinct columns."""
    if side == "left":
        return ceil_log2(distinct_rows(m))
    if side == "right":
        return ceil_log2(distinct_cols(m))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


# ---------------------------------------------------------------- multi round


@lru_cache(maxsize=None)
def _splits(size: int) -> tuple[tuple[int, int, int], ...]:
    # (S, S1, S2) with S1 holding the lowest element of S, S2 = S - S1 non-empty
    out = []
    for s in range(1, 1 << size):
        low = s & -s
        rest = s ^ low
        sub = rest
        while True:
            s1 = sub | low
            if s1 != s:
                out.append((s, s1, s ^ s1))
            if sub == 0:
                break
            sub = (sub - 1) & rest
    return tuple(out)


@lru_cache(maxsize=None)
def _nonempty_subsets_of(size: int) -> tuple[int, ...]:
    # bitmask over subsets C (bit C set) of C inside X, for every X
    out = []
    for x in range(1 << size):
        acc = 0
        sub = x
        while sub:
            acc |= 1 << sub
            sub = (sub - 1) & x
        out.append(acc)
    return tuple(out)


def _transpose(table: list[int], n_rows: int, n_cols: int) -> list[int]:
    nbytes = -(-n_cols // 8)
    raw = b"".join(x.to_bytes(nbytes, "little") for x in table)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little").reshape(n_rows, nbytes * 8)
    bits = np.ascontiguousarray(bits[:, :n_cols].T)
    packed = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def protocol_depth(hat: np.ndarray) -> int:
    """Minimal depth of a deterministic protocol tree for a 0/1 matrix.

    Each internal node lets one player split their current index set into
    two non-empty parts with one bit.  A leaf is a rectangle where one
    player already knows the answer: all its rows agree (Bob answers) or
    every row is constant (Alice answers).  Computed by level-wise
    relaxation over all (row set, column set) pairs, each level stored as
    one bitset of column sets per row set.
    """
    hat = np.asarray(hat, dtype=np.uint8)
    nr, nc = hat.shape
    full_r, full_c = (1 << nr) - 1, (1 << nc) - 1
    ones = [sum(1 << j for j in range(nc) if hat[i, j]) for i in range(nr)]
    sub = _nonempty_subsets_of(nc)
    constant_row = [sub[o] | sub[full_c ^ o] for o in ones]
    union = [0] * (1 << nr)
    inter = [full_c] * (1 << nr)
    alice_knows = [sub[full_c]] * (1 << nr)
    for s in range(1, 1 << nr):
        low = (s & -s).bit_length() - 1
        rest = s & (s - 1)
        union[s] = union[rest] | ones[low]
        inter[s] = inter[rest] & ones[low]
        alice_knows[s] = alice_knows[rest] & constant_row[low]
    level = [0] + [sub[full_c & ~(union[s] ^ inter[s])] | alice_knows[s] for s in range(1, 1 << nr)]
    row_splits = _splits(nr)
    col_splits = _splits(nc)
    depth = 0
    while not (level[full_r] >> full_c) & 1:
        by_rows = list(level)
        for s, s1, s2 in row_splits:
            by_rows[s] |= level[s1] & level[s2]
        cols = _transpose(level, 1 << nr, 1 << nc)
        by_cols = list(cols)
        for c, c1, c2 in col_splits:
            by_cols[c] |= cols[c1] & cols[c2]
        back = _transpose(by_cols, 1 << nc, 1 << nr)
        level = [a | b for a, b in zip(by_rows, back)]
        depth += 1
        if depth > nr + nc:
            raise RuntimeError("protocol search failed to converge")
    return depth


def multiround_exact(m: CcMatrix) -> int:
    rows, cols = m.shape
    if rows > MULTIROUND_SIDE_CAP or cols > MULTIROUND_SIDE_CAP:
        raise ResourceError(
            f"exact multi-round CC is capped at {MULTIROUND_SIDE_CAP} per side, matrix is {rows}x{cols}"
        )
    return protocol_depth(m.hat)


# ---------------------------------------------------------------- fooling sets


@dataclass(frozen=True)
class FoolingSet:
    pairs: tuple[tuple[int, int], ...]
    common_value: int
    rule: Rule | None = field(default=None, compare=False)
    z: tuple[int, ...] | None = None

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def bound_bits(self) -> int:
        return ceil_log2(len(self.pairs)) if self.pairs else 0


def fooling_violation(
    value: Callable[[int, int], int], pairs: Sequence[tuple[int, int]], common: int
) -> tuple | None:
    """First violated condition, or None when ``pairs`` is a fooling set."""
    for x, y in pairs:
        if value(x, y) != common:
            return ("value", (x, y))
    for k, (x, y) in enumerate(pairs):
        for x2, y2 in pairs[k + 1 :]:
            if (x, y) == (x2, y2):
                return ("duplicate", (x, y))
            if value(x2, y) == common and value(x, y2) == common:
                return ("cross", (x, y), (x2, y2))
    return None


def _compatible(hat: np.ndarray, a: tuple[int, int], b: tuple[int, int], common: int) -> bool:
    (x, y), (x2, y2) = a, b
    return x != x2 and y != y2 and (hat[x2, y] != common or hat[x, y2] != common)


def _greedy(hat: np.ndarray, common: int) -> list[tuple[int, int]]:
    kept: list[tuple[int, int]] = []
    rows, cols = hat.shape
    for x in range(rows):
        for y in range(cols):
            if hat[x, y] == common and all(_compatible(hat, (x, y), p, common) for p in kept):
                kept.append((x, y))
    return kept


class _Found(Exception):
    pass


def _max_clique(adj: list[int], cap: int, node_limit: int) -> list[int]:
    best: list[int] = []
    nodes = 0

    def colour(p: int) -> tuple[list[int], list[int]]:
        order, bounds = [], []
        k = 0
        while p:
            k += 1
            q = p
            while q:
                v = (q & -q).bit_length() - 1
                q &= ~adj[v] & ~(1 << v)
                p &= ~(1 << v)
                order.append(v)
                bounds.append(k)
        return order, bounds

    def expand(clique: list[int], p: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if nodes > node_limit:
            raise ResourceError(f"exact fooling-set search exceeded {node_limit} nodes")
        order, bounds = colour(p)
        for v, bound in zip(reversed(order), reversed(bounds)):
            if len(clique) + bound <= len(best):
                return
            grown = clique + [v]
            rest = p & adj[v]
            if rest:
                expand(grown, rest)
            elif len(grown) > len(best):
                best = grown
                if len(best) >= cap:
                    raise _Found
            p &= ~(1 << v)

    try:
        expand([], (1 << len(adj)) - 1)
    except _Found:
        pass
    return best


def _exact(hat: np.ndarray, common: int, cap: int, node_limit: int) -> list[tuple[int, int]]:
    cells = [tuple(c) for c in np.argwhere(hat == common).tolist()]
    if not cells:
        return []
    adj = [0] * len(cells)
    for a in range(len(cells)):
        for b in range(a + 1, len(cells)):
            if _compatible(hat, cells[a], cells[b], common):
                adj[a] |= 1 << b
                adj[b] |= 1 << a
    return sorted(cells[v] for v in _max_clique(adj, cap, node_limit))


def fooling_set(m: CcMatrix, mode: str = "greedy", node_limit: int = 2_000_000) -> FoolingSet:
    """Largest fooling set found by a row-major greedy scan or by exact
    branch and bound; both values of f-hat are tried and the larger set
    (value 0 on ties) is returned after validation."""
    hat = m.hat
    if mode == "greedy":
        found = [(_greedy(hat, b), b) for b in (0, 1)]
    elif mode == "exact":
        rows, cols = hat.shape
        if rows > EXACT_FOOLING_SIDE_CAP or cols > EXACT_FOOLING_SIDE_CAP:
            raise ResourceError(f"exact fooling search is capped at {EXACT_FOOLING_SIDE_CAP} per side")
        cap = min(distinct_rows(m), distinct_cols(m))
        found = []
        for b in (0, 1):
            found.append((_exact(hat, b, cap, node_limit), b))
            if len(found[-1][0]) >= cap:
                break
    else:
        raise ValueError(f"unknown fooling mode {mode!r}")
    pairs, common = max(found, key=lambda item: (len(item[0]), -item[1]))
    result = FoolingSet(tuple(pairs), common, m.rule, m.z)
    bad = fooling_violation(m.value, result.pairs, common)
    if bad is not None:
        raise RuntimeError(f"internal error: produced invalid fooling set ({bad})")
    return result


def validate_fooling_words(rule: Rule, z, pairs: Sequence[tuple[Word, Word]], common: int = 0) -> tuple | None:
    """Check a fooling set given as (u, v) words against the scalar oracle."""
    z = as_letters(z)
    lefts = [u for u, _ in pairs]
    rights = [v for _, v in pairs]
    cache: dict[tuple[int, int], int] = {}

    def value(i: int, j: int) -> int:
        if (i, j) not in cache:
            cache[(i, j)] = hat_value(rule, z, lefts[i], rights[j])
        return cache[(i, j)]

    return fooling_violation(value, [(k, k) for k in range(len(pairs))], common)


# ---------------------------------------------------------------- ranks


def rank_gf2(hat: np.ndarray) -> int:
    rows = sorted({int.from_bytes(np.packbits(r, bitorder="little").tobytes(), "little") for r in np.asarray(hat, dtype=np.uint8)})
    rank = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        if pivot == 0:
            continue
        rank += 1
        top = 1 << (pivot.bit_length() - 1)
        rows = [r ^ pivot if r & top else r for r in rows]
        rows = [r for r in rows if r]
    return rank


def rank_rational(hat: np.ndarray) -> int | None:
    """Exact rank over Q by fraction-free elimination on the matrix with
    duplicate rows and columns removed; ``None`` when that reduced matrix
    is too large for exact arithmetic."""
    a = np.asarray(hat, dtype=np.uint8)
    if a.size == 0:
        return 0
    a = np.unique(a, axis=0)
    a = np.unique(a, axis=1)
    r, c = a.shape
    if r * c * min(r, c) > RATIONAL_RANK_WORK_CAP:
        return None
    m = [[int(x) for x in row] for row in a.tolist()]
    rank, prev = 0, 1
    for col in range(c):
        pivot = next((i for i in range(rank, r) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, r):
            lead = m[i][col]
            row = m[i]
            prow = m[rank]
            for k in range(col + 1, c):
                row[k] = (row[k] * p - lead * prow[k]) // prev
            row[col] = 0
        prev = p
        rank += 1
        if rank == r:
            break
    return rank


def rank_diagnostics(m: CcMatrix) -> tuple[int, int | None]:
    return rank_gf2(m.hat), rank_rational(m.hat)


# ---------------------------------------------------------------- report


@dataclass(frozen=True)
class BoundsReport:
    rule: str
    n: int
    z: str
    distinct_rows: int
    distinct_cols: int
    left_cc_bits: int
    right_cc_bits: int
    multiround_exact_bits: int | None
    fooling_size: int
    fooling_bound_bits: int
    fooling_mode: str
    rank_gf2: int
    rank_rational: int | None
    forward_image_right: int | None
    forward_image_left: int | None
    tau_right: int | None
    tau_left: int | None
    trace_protocol_bounds: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        from dataclasses import asdict

        out = asdict(self)
        out["notes"] = list(self.notes)
        return out


def _assert(cond: bool, message: str) -> None:
    if not cond:
        raise AssertionError(message)


def cc_bounds(rule: Rule, z, workers: int = 1) -> BoundsReport:
    """Every lower and upper bound the library knows for f-hat_z.

    Fields that would exceed a budget are left as ``None`` and explained in
    ``notes``; present fields are exact.
    """
    from . import trace_lang as tl
    from .ca_core import letters_to_str

    z = as_letters(z)
    n = len(z) - 1
    m = build_matrix(rule, z, workers=workers)
    notes: list[str] = []
    rows, cols = distinct_rows(m), distinct_cols(m)
    left, right = ceil_log2(rows), ceil_log2(cols)
    side = m.shape[0]

    exact = None
    try:
        exact = multiround_exact(m)
    except ResourceError as err:
        notes.append(f"multiround_exact: {err}")

    mode = "exact" if side <= MULTIROUND_SIDE_CAP else "greedy"
    try:
        fool = fooling_set(m, mode)
    except ResourceError as err:
        notes.append(f"fooling exact: {err}; greedy used")
        mode = "greedy"
        fool = fooling_set(m, mode)

    gf2, rat = rank_diagnostics(m)
    if rat is None:
        notes.append("rank_rational: reduced matrix too large for exact elimination")

    counts: dict[str, int | None] = {}
    for key, fn, s in (
        ("forward_image_right", tl.forward_image_size, "right"),
        ("forward_image_left", tl.forward_image_size, "left"),
        ("tau_right", lambda r, zz, s: len(tl.tau_set(r, zz, s)), "right"),
        ("tau_left", lambda r, zz, s: len(tl.tau_set(r, zz, s)), "left"),
    ):
        try:
            counts[key] = fn(rule, z, s)
        except ResourceError as err:
            counts[key] = None
            notes.append(f"{key}: {err}")
    proto = {}
    for s in ("right", "left"):
        img, tau = counts[f"forward_image_{s}"], counts[f"tau_{s}"]
        proto[f"column_{s}"] = None if img is None else ceil_log2(img)
        proto[f"tau_{s}"] = None if tau is None else ceil_log2(tau + 1)

    if exact is not None:
        _assert(fool.bound_bits <= exact <= min(left, right), "bound ordering violated")
        if rat:
            _assert(rat <= 2 ** exact, "rank bound violated")
    for s, measured in (("right", right), ("left", left)):
        for key in (f"column_{s}", f"tau_{s}"):
            if proto[key] is not None:
                _assert(measured <= proto[key], f"{key} protocol bound below measured CC")

    return BoundsReport(
        rule=rule.label,
        n=n,
        z=letters_to_str(z),
        distinct_rows=rows,
        distinct_cols=cols,
        left_cc_bits=left,
        right_cc_bits=right,
        multiround_exact_bits=exact,
        fooling_size=len(fool),
        fooling_bound_bits=fool.bound_bits,
        fooling_mode=mode,
        rank_gf2=gf2,
        rank_rational=rat,
        forward_image_right=counts["forward_image_right"],
        forward_image_left=counts["forward_image_left"],
        tau_right=counts["tau_right"],
        tau_left=counts["tau_left"],
        trace_protocol_bounds=proto,
        notes=tuple(notes),
    )


