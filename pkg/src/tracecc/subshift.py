"""Subshifts of finite type, expansivity and hardness via fooling sets.

A subshift is given by finitely many forbidden factors.  Languages are
enumerated by prefix extension, pruning as soon as a suffix is forbidden.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

from .ca_core import Rule, Word, as_letters, build_triangle, central_trace, letters_to_str, mirror_word, str_to_letters
from .cc_engine import FoolingSet, validate_fooling_words, word_index
from .errors import NotApplicable, check_budget


@dataclass(frozen=True)
class SubshiftSpec:
    """Words over range(q) avoiding every factor in ``forbidden``.

    ``width`` records the working width a truncated infinite family was
    generated for; stability checks do not look past it.
    """

    forbidden: tuple[tuple[int, ...], ...] = ()
    q: int = 2
    width: int | None = None

    def __post_init__(self) -> None:
        for w in self.forbidden:
            if not w or any(not 0 <= a < self.q for a in w):
                raise ValueError(f"forbidden word {letters_to_str(w)!r} is not over the alphabet")

    @property
    def is_full(self) -> bool:
        return not self.forbidden

    @property
    def longest(self) -> int:
        return max((len(w) for w in self.forbidden), default=0)

    def allows(self, word: Sequence[int]) -> bool:
        word = tuple(word)
        for f in self.forbidden:
            k = len(f)
            if any(word[i : i + k] == f for i in range(len(word) - k + 1)):
                return False
        return True

    def to_text(self) -> str:
        return f"@q {self.q}\n" + "".join(letters_to_str(w) + "\n" for w in self.forbidden)


def full_shift(q: int = 2) -> SubshiftSpec:
    return SubshiftSpec((), q)


def oddgap_family(width: int) -> SubshiftSpec:
    """{11} together with 1 0^{2k} 1 for every 2k+2 <= width."""
    words = [(1, 1)] + [(1,) + (0,) * (2 * k) + (1,) for k in range(1, (width - 2) // 2 + 1)]
    return SubshiftSpec(tuple(words), 2, width)


def parse_subshift(text: str) -> SubshiftSpec:
    """One forbidden word per line; ``@oddgap W`` expands the odd-gap
    family, ``@q Q`` sets the alphabet size; ``#`` starts a comment."""
    q, width = 2, None
    words: list[tuple[int, ...]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            key, _, arg = line.partition(" ")
            if key == "@oddgap":
                width = int(arg)
                words.extend(oddgap_family(width).forbidden)
            elif key == "@q":
                q = int(arg)
            else:
                raise ValueError(f"unknown directive {key!r}")
            continue
        words.append(str_to_letters(line))
    return SubshiftSpec(tuple(dict.fromkeys(words)), q, width)


def _suffix_ok(spec: SubshiftSpec, word: tuple[int, ...]) -> bool:
    return not any(word[len(word) - len(f) :] == f for f in spec.forbidden if len(f) <= len(word))


def sigma_words(spec: SubshiftSpec, length: int) -> Iterator[tuple[int, ...]]:
    """Words of the given length in lexicographic order."""
    if length < 0:
        raise ValueError("negative length")
    check_budget(spec.q ** length, "subshift enumeration")
    stack: list[tuple[int, ...]] = [()]
    while stack:
        w = stack.pop()
        if len(w) == length:
            yield w
            continue
        for a in reversed(range(spec.q)):
            nxt = w + (a,)
            if _suffix_ok(spec, nxt):
                stack.append(nxt)


def enumerate_sigma(spec: SubshiftSpec, interval: tuple[int, int]) -> tuple[int, Iterator[Word]]:
    i, j = interval
    length = j - i + 1
    if length < 1:
        raise ValueError(f"empty interval [{i}..{j}]")
    count = sum(1 for _ in sigma_words(spec, length))
    return count, (Word(i, w) for w in sigma_words(spec, length))


def sigma_count(spec: SubshiftSpec, length: int) -> int:
    return sum(1 for _ in sigma_words(spec, length))


def check_subautomaton(rule: Rule, spec: SubshiftSpec) -> bool:
    """Images of Sigma-words of widths 3..L+2 avoid all forbidden factors.

    For a truncated family the widths stop at the working width: longer
    preimages may contain factors the truncation no longer forbids.
    """
    if rule.q != spec.q:
        raise ValueError("alphabet mismatch")
    top = max(spec.longest, 1) + 2
    if spec.width is not None:
        top = min(top, max(spec.width, 3))
    for width in range(3, top + 1):
        for w in sigma_words(spec, width):
            image = tuple(rule(*w[k : k + 3]) for k in range(width - 2))
            if not spec.allows(image):
                return False
    return True


def check_legal(rule: Rule, spec: SubshiftSpec, zero: int = 0) -> bool:
    """Mirror-symmetric on Sigma's radius-1 words, and f(a 0 a) = 0."""
    if not 0 <= zero < rule.q:
        raise ValueError("zero is not a letter")
    for u in sigma_words(spec, 3):
        if not spec.allows(u[::-1]) or rule(*u[::-1]) != rule(*u):
            return False
        if u[1] == zero and u[0] == u[2] and rule(*u) != zero:
            return False
    return True


# ---------------------------------------------------------------- expansivity


@dataclass(frozen=True)
class ExpansivityCertificate:
    side: str
    t: int | None
    checked_up_to: int
    witness: tuple[Word, Word] | None = None

    @property
    def expansive(self) -> bool:
        return self.t is not None

    def __str__(self) -> str:
        if self.t is not None:
            return f"{self.side}: t = {self.t}"
        pair = " / ".join(str(w) for w in self.witness) if self.witness else "-"
        return f"{self.side}: refuted up to {self.checked_up_to} (witness {pair})"


def near_trace(rule: Rule, w: Word) -> tuple[int, ...]:
    """Trace of columns -1 and 0 of a word on [-t..t]: column 0 at times
    0..t and column -1 at times 0..t-1 (all cells that exist)."""
    tri = build_triangle(rule, w)
    t = tri.n
    return tuple(tri.cell(s, 0) for s in range(t + 1)) + tuple(tri.cell(s, -1) for s in range(t))


def _expansive_at(rule: Rule, spec: SubshiftSpec, t: int) -> tuple[Word, Word] | None:
    """None when the near trace determines cell 1, else a conflicting pair
    (preferring two words that differ only at cell 1)."""
    words = [Word(-t, w) for w in sigma_words(spec, 2 * t + 1)]
    traces = {w.letters: near_trace(rule, w) for w in words}
    seen: dict[tuple, Word] = {}
    conflict = None
    for w in words:
        key = traces[w.letters]
        other = seen.setdefault(key, w)
        if other[1] != w[1]:
            conflict = (other, w)
            break
    if conflict is None:
        return None
    for w in words:
        for a in range(rule.q):
            if a == w[1]:
                continue
            alt = list(w.letters)
            alt[t + 1] = a
            alt = tuple(alt)
            if alt in traces and traces[alt] == traces[w.letters]:
                return w, Word(-t, alt)
    return conflict


def detect_expansivity(rule: Rule, spec: SubshiftSpec | None = None, side: str = "right", t_max: int = 4) -> ExpansivityCertificate:
    """Least t <= t_max such that all Sigma-words on [-t..t] sharing their
    near trace agree at cell 1 (``right``) or cell -1 (``left``)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if t_max < 1:
        raise ValueError("t_max must be positive")
    spec = spec or full_shift(rule.q)
    if spec.q != rule.q:
        raise ValueError("alphabet mismatch")
    f, sub = rule, spec
    if side == "left":
        f = rule.mirrored()
        sub = SubshiftSpec(tuple(w[::-1] for w in spec.forbidden), spec.q, spec.width)
    witness = None
    for t in range(1, t_max + 1):
        witness = _expansive_at(f, sub, t)
        if witness is None:
            return ExpansivityCertificate(side, t, t)
    if side == "left":
        witness = tuple(mirror_word(w) for w in witness)
    return ExpansivityCertificate(side, None, t_max, witness)


# ---------------------------------------------------------------- fooling sets from W_z


@dataclass(frozen=True)
class WzSet:
    z: tuple[int, ...]
    interval: tuple[int, int]
    members: tuple[Word, ...]
    witnesses: tuple[Word, ...]  # full words on [-n..n] extending each member

    def __len__(self) -> int:
        return len(self.members)


def _times(rule: Rule, spec: SubshiftSpec, t_left: int | None, t_right: int | None, t_max: int) -> tuple[int, int]:
    out = []
    for side, given in (("left", t_left), ("right", t_right)):
        if given is None:
            cert = detect_expansivity(rule, spec, side, t_max)
            if not cert.expansive:
                raise NotApplicable(f"rule is not {side}-expansive up to t = {t_max}")
            given = cert.t
        out.append(given)
    return out[0], out[1]


def wz_set(rule: Rule, spec: SubshiftSpec | None, z, t_left: int | None = None, t_right: int | None = None) -> WzSet:
    spec = spec or full_shift(rule.q)
    z = as_letters(z)
    n = len(z) - 1
    tl_, tr_ = _times(rule, spec, t_left, t_right, max(n, 1))
    a, b = n // tl_, n // tr_
    members: dict[tuple[int, ...], Word] = {}
    for letters in sigma_words(spec, 2 * n + 1):
        w = Word(-n, letters)
        if central_trace(rule, w) != z:
            continue
        core = letters[n - a : n + b + 1]
        members.setdefault(core, w)  # lexicographically first extension
    cores = sorted(members)
    return WzSet(z, (-a, b), tuple(Word(-a, c) for c in cores), tuple(members[c] for c in cores))


def _checked(rule: Rule, z, pairs: list[tuple[Word, Word]]) -> FoolingSet:
    bad = validate_fooling_words(rule, z, pairs, common=0)
    if bad is not None:
        kind, *where = bad
        shown = [tuple(f"{p[0]}|{p[1]}" for p in (pairs[i] for i in idx)) for idx in where]
        raise ValueError(f"fooling validation failed ({kind}) at {shown}")
    q = rule.q
    idx = tuple((word_index(u, q), word_index(v, q)) for u, v in pairs)
    return FoolingSet(idx, 0, rule, as_letters(z))


def seeded_words(blocks: Sequence[str], m: int) -> list[tuple[int, ...]]:
    """All concatenations of m blocks, e.g. (0100+0001)^m."""
    out = []
    for choice in product(blocks, repeat=m):
        out.append(str_to_letters("".join(choice)))
    return sorted(set(out))


def build_wz_fooling(
    rule: Rule,
    spec: SubshiftSpec | None,
    z,
    seed: Sequence[Sequence[int]] | None = None,
    t_left: int | None = None,
    t_right: int | None = None,
) -> FoolingSet:
    """Fooling set certified against the f-hat_z oracle.

    Without ``seed`` the pairs are gamma(W_z): each member of W_z split
    around the centre inside its stored extension.  With ``seed`` (the
    legal construction) the pairs are (mirror(u), u) for u in the seed,
    each of which must lie in Sigma with central trace z.
    """
    spec = spec or full_shift(rule.q)
    z = as_letters(z)
    n = len(z) - 1
    pairs: list[tuple[Word, Word]] = []
    if seed is None:
        ws = wz_set(rule, spec, z, t_left, t_right)
        for full in ws.witnesses:
            pairs.append((full.restrict(-n, -1), full.restrict(1, n)))
    else:
        for letters in seed:
            u = Word(1, tuple(letters))
            if len(u) != n:
                raise ValueError(f"seed word {u} must have length {n}")
            left = mirror_word(u)
            full = left.concat(Word(0, (z[0],))).concat(u)
            if not spec.allows(full.letters):
                raise ValueError(f"{full} is not in the subshift")
            if central_trace(rule, full) != z:
                raise ValueError(f"{full} does not have central trace {letters_to_str(z)}")
            pairs.append((left, u))
    return _checked(rule, z, pairs)


def fooling_pairs_as_words(fs: FoolingSet, q: int, n: int) -> list[tuple[str, str]]:
    from .cc_engine import index_word

    return [(str(index_word(i, q, n, "left")), str(index_word(j, q, n, "right"))) for i, j in fs.pairs]


# ---------------------------------------------------------------- counting


@dataclass(frozen=True)
class HardnessBound:
    proof_bound: Fraction
    statement_bound: Fraction
    m: Fraction | None
    prop_applicable: bool
    prop_bound: Fraction | None

    def as_dict(self) -> dict:
        def s(x):
            return None if x is None else str(x)

        return {
            "proof_bound": s(self.proof_bound),
            "statement_bound": s(self.statement_bound),
            "m": s(self.m),
            "prop_applicable": self.prop_applicable,
            "prop_bound": s(self.prop_bound),
        }


def hardness_counts(
    big: int, right: int, q: int, n: int, k: int, t_left: int | None = None, t_right: int | None = None, full: bool = False
) -> HardnessBound:
    """Lower bound on the number of z with CC > log2 k.

    ``big`` = |Sigma[-n/t_left .. n/t_right]|, ``right`` = |Sigma[1..n]|.
    ``proof_bound`` carries the |A|^{n+1} factor from the counting
    argument; ``statement_bound`` omits it.  For full shifts with m > 0 the
    closed form |A|^{n+1}(|A|^{nm} - k)/(|A|^n - k) is also reported.
    """
    if not 1 <= k < right:
        raise ValueError(f"k must satisfy 1 <= k < {right}")
    proof = Fraction(big - q ** (n + 1) * k, right - k)
    statement = Fraction(big - k, right - k)
    m = None
    applicable = False
    prop = None
    if t_left and t_right:
        m = Fraction(1, t_right) + Fraction(1, t_left) - 1
        applicable = m > 0
        if applicable and full:
            # |A|^{nm} is taken with the floored interval, so it is exact
            span = n // t_left + n // t_right - n
            prop = Fraction(q ** (n + 1) * (q ** span - k), q ** n - k)
    return HardnessBound(proof, statement, m, applicable, prop)


def hardness_for(rule: Rule, spec: SubshiftSpec | None, n: int, k: int, t_max: int = 4) -> HardnessBound:
    spec = spec or full_shift(rule.q)
    t_left, t_right = _times(rule, spec, None, None, t_max)
    big = sigma_count(spec, n // t_left + n // t_right + 1)
    right = sigma_count(spec, n)
    return hardness_counts(big, right, rule.q, n, k, t_left, t_right, full=spec.is_full)
