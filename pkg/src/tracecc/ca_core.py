"""Radius-1 rules, finite words, computation triangles and traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class Rule:
    """A total local map A^3 -> A over the alphabet {0, .., q-1}.

    ``table[a*q*q + b*q + c]`` is the image of the neighbourhood (a, b, c),
    where ``a`` is the left neighbour.  ``origin`` is ``"elementary"``,
    ``"grouped"`` (with ``inner`` set) or ``"custom"``.
    """

    q: int
    table: tuple[int, ...]
    origin: str = field(default="custom", compare=False)
    inner: Rule | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.q < 2:
            raise ValueError("alphabet size must be at least 2")
        if len(self.table) != self.q ** 3:
            raise ValueError(f"table must have {self.q ** 3} entries, got {len(self.table)}")
        if any(not 0 <= d < self.q for d in self.table):
            raise ValueError("table entries must be letters of the alphabet")

    def __call__(self, a: int, b: int, c: int) -> int:
        q = self.q
        return self.table[(a * q + b) * q + c]

    @property
    def letters(self) -> range:
        return range(self.q)

    @property
    def number(self) -> int | None:
        return rule_to_number(self) if self.q == 2 else None

    @property
    def label(self) -> str:
        if self.origin == "grouped" and self.inner is not None:
            return f"g2:{self.inner.label}"
        if self.q == 2:
            return str(rule_to_number(self))
        return f"custom(q={self.q})"

    def mirrored(self) -> Rule:
        """The rule read right-to-left: (a, b, c) -> f(c, b, a)."""
        q = self.q
        table = tuple(self(c, b, a) for a, b, c in product(range(q), repeat=3))
        return Rule(q, table, "custom")

    def is_mirror_symmetric(self) -> bool:
        return all(self(a, b, c) == self(c, b, a) for a, b, c in product(self.letters, repeat=3))


def rule_from_number(q: int, number: int) -> Rule:
    """Elementary rule from its canonical number sum f(abc) 2^(4a+2b+c)."""
    if q != 2:
        raise ValueError("canonical numbers exist only for the binary alphabet")
    if not 0 <= number <= 255:
        raise ValueError(f"elementary rule number out of range: {number}")
    table = tuple((number >> (4 * a + 2 * b + c)) & 1 for a, b, c in product((0, 1), repeat=3))
    return Rule(2, table, "elementary")


def elementary(number: int) -> Rule:
    return rule_from_number(2, number)


def rule_to_number(rule: Rule) -> int:
    if rule.q != 2:
        raise ValueError("only binary rules carry a canonical number")
    return sum(rule(a, b, c) << (4 * a + 2 * b + c) for a, b, c in product((0, 1), repeat=3))


def rule_from_function(q: int, fn) -> Rule:
    return Rule(q, tuple(fn(a, b, c) for a, b, c in product(range(q), repeat=3)), "custom")


def group2(rule: Rule) -> Rule:
    """2-grouped rule on pairs (x, y) encoded as the letter q*x + y.

    The image of ((x-1, y-1), (x0, y0), (x1, y1)) is
    (f(y-1, x0, y0), f(x0, y0, x1)).
    """
    q = rule.q
    Q = q * q
    table = []
    for left, mid, right in product(range(Q), repeat=3):
        y_l = left % q
        x0, y0 = divmod(mid, q)
        x1 = right // q
        table.append(q * rule(y_l, x0, y0) + rule(x0, y0, x1))
    return Rule(Q, tuple(table), "grouped", rule)


def format_rule_table(rule: Rule) -> str:
    lines = [str(rule.q)]
    for a, b, c in product(rule.letters, repeat=3):
        lines.append(f"{a} {b} {c} -> {rule(a, b, c)}")
    return "\n".join(lines) + "\n"


def parse_rule_table(text: str) -> Rule:
    """Parse the ``q`` + ``a b c -> d`` text format (lexicographic order)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty rule table")
    q = int(lines[0])
    body = lines[1:]
    if len(body) != q ** 3:
        raise ValueError(f"expected {q ** 3} table lines, got {len(body)}")
    table = []
    for expected, line in zip(product(range(q), repeat=3), body):
        lhs, sep, rhs = line.partition("->")
        if not sep:
            raise ValueError(f"malformed table line: {line!r}")
        triple = tuple(int(tok) for tok in lhs.split())
        if triple != expected:
            raise ValueError(f"table line {line!r} out of order, expected {expected}")
        table.append(int(rhs))
    return Rule(q, tuple(table), "custom")


# ---------------------------------------------------------------- words


@dataclass(frozen=True)
class Word:
    """Letters indexed by the absolute positions start..end."""

    start: int
    letters: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.letters:
            raise ValueError("words are non-empty")

    @property
    def end(self) -> int:
        return self.start + len(self.letters) - 1

    @property
    def interval(self) -> tuple[int, int]:
        return self.start, self.end

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, k: int) -> int:
        if not self.start <= k <= self.end:
            raise IndexError(f"position {k} outside [{self.start}..{self.end}]")
        return self.letters[k - self.start]

    def restrict(self, i: int, j: int) -> Word:
        if not (self.start <= i <= j <= self.end):
            raise ValueError(f"[{i}..{j}] not inside [{self.start}..{self.end}]")
        return Word(i, self.letters[i - self.start : j - self.start + 1])

    def __str__(self) -> str:
        return letters_to_str(self.letters)

    @classmethod
    def from_str(cls, text: str, start: int = 0) -> Word:
        return cls(start, str_to_letters(text))

    @classmethod
    def centered(cls, letters: str | Sequence[int]) -> Word:
        seq = str_to_letters(letters) if isinstance(letters, str) else tuple(letters)
        if len(seq) % 2 != 1:
            raise ValueError("centered words have odd length")
        return cls(-(len(seq) // 2), seq)

    def concat(self, other: Word) -> Word:
        if other.start != self.end + 1:
            raise ValueError("words are not adjacent")
        return Word(self.start, self.letters + other.letters)


def str_to_letters(text: str) -> tuple[int, ...]:
    try:
        return tuple(DIGITS.index(ch) for ch in text.strip().lower())
    except ValueError:
        raise ValueError(f"not a word: {text!r}") from None


def letters_to_str(letters: Iterable[int]) -> str:
    return "".join(DIGITS[a] for a in letters)


def as_letters(z: str | Sequence[int] | Word) -> tuple[int, ...]:
    if isinstance(z, Word):
        return z.letters
    if isinstance(z, str):
        return str_to_letters(z)
    return tuple(int(a) for a in z)


def mirror_word(w: Word) -> Word:
    """Reflect through the origin: the result holds w_k at position -k."""
    return Word(-w.end, w.letters[::-1])


# ---------------------------------------------------------------- dynamics


def _step_packed(number: int, x: int, length: int) -> int:
    # bit k of x is the letter at relative position k
    a, b, c = x, x >> 1, x >> 2
    mask = (1 << (length - 2)) - 1
    na, nb, nc = ~a, ~b, ~c
    out = 0
    for code in range(8):
        if (number >> code) & 1:
            term = (a if code & 4 else na) & (b if code & 2 else nb) & (c if code & 1 else nc)
            out |= term
    return out & mask


def _pack(letters: Sequence[int]) -> int:
    return sum(bit << k for k, bit in enumerate(letters))


def _unpack(x: int, length: int) -> tuple[int, ...]:
    return tuple((x >> k) & 1 for k in range(length))


def apply_step(rule: Rule, w: Word, left_boundary: int | None = None) -> Word:
    """One synchronous update.

    Without a boundary the word on [i..j] maps to [i+1..j-1].  With a left
    boundary letter, position i sees that letter at i-1 and the result
    covers [i..j-1].
    """
    letters = w.letters
    if left_boundary is None:
        if len(letters) < 3:
            raise ValueError("word too short for one step")
        out = tuple(rule(letters[k - 1], letters[k], letters[k + 1]) for k in range(1, len(letters) - 1))
        return Word(w.start + 1, out)
    if len(letters) < 2:
        raise ValueError("word too short for one bounded step")
    padded = (left_boundary,) + letters
    out = tuple(rule(padded[k - 1], padded[k], padded[k + 1]) for k in range(1, len(padded) - 1))
    return Word(w.start, out)


@dataclass(frozen=True)
class Triangle:
    base: Word
    rows: tuple[Word, ...]

    @property
    def n(self) -> int:
        return len(self.rows) - 1

    def cell(self, t: int, k: int) -> int:
        return self.rows[t][k]

    def central(self) -> tuple[int, ...]:
        return tuple(row[0] for row in self.rows)


def build_triangle(rule: Rule, w: Word) -> Triangle:
    if w.start != -w.end:
        raise ValueError(f"base word must be centered, got [{w.start}..{w.end}]")
    n = w.end
    rows = [w]
    if rule.q == 2 and n > 0:
        number = rule_to_number(rule)
        x, length = _pack(w.letters), len(w)
        for t in range(1, n + 1):
            x = _step_packed(number, x, length)
            length -= 2
            rows.append(Word(t - n, _unpack(x, length)))
    else:
        for _ in range(n):
            rows.append(apply_step(rule, rows[-1]))
    return Triangle(w, tuple(rows))


@dataclass(frozen=True)
class TraceWord:
    interval: tuple[int, int]
    values: tuple[Word, ...]

    def column(self, k: int) -> tuple[int, ...]:
        return tuple(v[k] for v in self.values)


def compute_trace(rule: Rule, w: Word, columns: tuple[int, int]) -> TraceWord:
    i, j = columns
    n = w.end
    if i > j or w.start != -n or i < -n or j > n:
        raise ValueError(f"column interval [{i}..{j}] outside [{-n}..{n}]")
    tri = build_triangle(rule, w)
    horizon = n - max(abs(i), abs(j))
    return TraceWord((i, j), tuple(tri.rows[t].restrict(i, j) for t in range(horizon + 1)))


def central_trace(rule: Rule, w: Word) -> tuple[int, ...]:
    return build_triangle(rule, w).central()


def all_words(q: int, length: int) -> Iterable[tuple[int, ...]]:
    return product(range(q), repeat=length)
