"""Structural predicates on local rules, with bit-pattern cross-checks."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable

from .ca_core import Rule, letters_to_str, rule_to_number

SIDES = ("left", "right")

# Families of elementary rule numbers, written MSB (bit 7) first.  Equal
# variable names force equal bits.
PATTERN_FAMILIES = {
    "onesided0": ("a7a6a4a4a3a2a0a0", "a7a6a1a0a3a2a1a0"),
    "spreading": ("a7a611a3a2a1a0", "a7a61a4a3a21a0"),
    "stagnating_pair": ("a7a6a50a3a200",),
    "star_onesided0": ("a7a6a5a4a2a2a0a0", "a7a2a5a0a3a2a1a0"),
}


def _subset(rule: Rule, B: Iterable[int]) -> frozenset[int]:
    B = frozenset(B)
    if not B:
        raise ValueError("B must be non-empty")
    if not B <= set(rule.letters):
        raise ValueError(f"B={sorted(B)} is not a subset of the alphabet")
    return B


def onesidedness(rule: Rule, B: Iterable[int], mode: str = "plain") -> str:
    """``left``, ``right``, ``both`` or ``none``.

    plain: B-leftsided means f(abc) = f(abd) whenever the middle b is in B.
    star:  B*leftsided means the same whenever the left cell a is in B.
    Rightsided versions ignore the left neighbour instead.
    """
    B = _subset(rule, B)
    A = rule.letters
    if mode == "plain":
        left = all(rule(a, b, c) == rule(a, b, d) for a, c, d in product(A, A, A) for b in B)
        right = all(rule(a, b, c) == rule(d, b, c) for a, c, d in product(A, A, A) for b in B)
    elif mode == "star":
        left = all(rule(a, b, c) == rule(a, b, d) for b, c, d in product(A, A, A) for a in B)
        right = all(rule(a, b, c) == rule(d, b, c) for a, b, d in product(A, A, A) for c in B)
    else:
        raise ValueError(f"mode must be 'plain' or 'star', got {mode!r}")
    return {(True, True): "both", (True, False): "left", (False, True): "right"}.get((left, right), "none")


@dataclass(frozen=True)
class SpreadingFlags:
    left_semi_strong: bool
    left_weak: bool
    right_semi_strong: bool
    right_weak: bool

    @property
    def semi_strong(self) -> bool:
        return self.left_semi_strong or self.right_semi_strong


def spreading_status(rule: Rule, B: Iterable[int]) -> SpreadingFlags:
    """B spreads leftwards semi-strongly if f(A cB B) is inside B, weakly if
    f(cB cB B) is (cB the complement); rightwards symmetrically."""
    B = _subset(rule, B)
    comp = frozenset(rule.letters) - B
    if not comp:
        raise ValueError("B must be a proper subalphabet")
    A = rule.letters
    return SpreadingFlags(
        left_semi_strong=all(rule(a, x, b) in B for a in A for x in comp for b in B),
        left_weak=all(rule(a, x, b) in B for a in comp for x in comp for b in B),
        right_semi_strong=all(rule(b, x, a) in B for a in A for x in comp for b in B),
        right_weak=all(rule(b, x, a) in B for a in comp for x in comp for b in B),
    )


def permutivity(rule: Rule) -> str:
    A = rule.letters
    q = rule.q
    left = all(len({rule(a, b, c) for a in A}) == q for b, c in product(A, A))
    right = all(len({rule(a, b, c) for c in A}) == q for a, b in product(A, A))
    return {(True, True): "bi", (True, False): "left", (False, True): "right"}.get((left, right), "none")


def quiescent_letters(rule: Rule) -> tuple[int, ...]:
    return tuple(a for a in rule.letters if rule(a, a, a) == a)


def is_stagnating(rule: Rule, word: tuple[int, ...]) -> bool:
    A = rule.letters
    for a, b in product(A, A):
        ext = (a,) + tuple(word) + (b,)
        if tuple(rule(*ext[k : k + 3]) for k in range(len(word))) != tuple(word):
            return False
    return True


def stagnating_words(rule: Rule, max_length: int = 2) -> tuple[tuple[int, ...], ...]:
    return tuple(
        w for length in range(1, max_length + 1) for w in product(rule.letters, repeat=length) if is_stagnating(rule, w)
    )


def first_appearance_letters(rule: Rule, side: str) -> tuple[int, ...]:
    """Binary letters a with f(0a0) = f(0a1) = a (right) or f(0a0) = f(1a0) = a
    (left); such a letter, once next to a zero column, never changes."""
    if rule.q != 2:
        return ()
    if side == "right":
        return tuple(a for a in (0, 1) if rule(0, a, 0) == rule(0, a, 1) == a)
    return tuple(a for a in (0, 1) if rule(0, a, 0) == rule(1, a, 0) == a)


def legal_on_full_shift(rule: Rule, zero: int) -> bool:
    return rule.is_mirror_symmetric() and all(rule(a, zero, a) == zero for a in rule.letters)


def _tokens(pattern: str) -> list[str]:
    toks = re.findall(r"a\d|[01]", pattern)
    if len(toks) != 8 or "".join(toks) != pattern:
        raise ValueError(f"bad pattern {pattern!r}")
    return toks


def matches_pattern(number: int, pattern: str) -> bool:
    bound: dict[str, int] = {}
    for pos, tok in enumerate(_tokens(pattern)):
        bit = (number >> (7 - pos)) & 1
        if tok in "01":
            if bit != int(tok):
                return False
        elif bound.setdefault(tok, bit) != bit:
            return False
    return True


def in_family(number: int, family: str) -> bool:
    return any(matches_pattern(number, p) for p in PATTERN_FAMILIES[family])


def semantic_family(rule: Rule, family: str) -> bool:
    if family == "onesided0":
        return onesidedness(rule, {0}) != "none"
    if family == "star_onesided0":
        return onesidedness(rule, {0}, "star") != "none"
    if family == "spreading":
        return spreading_status(rule, {1}).semi_strong
    if family == "stagnating_pair":
        flags = spreading_status(rule, {1})
        return rule(0, 0, 0) == 0 and not flags.left_weak and not flags.right_weak
    raise KeyError(family)


def nonempty_subsets(q: int) -> list[tuple[int, ...]]:
    return [c for k in range(1, q + 1) for c in combinations(range(q), k)]


@dataclass(frozen=True)
class ClassificationReport:
    rule: str
    quiescent: tuple[int, ...]
    stagnating: tuple[tuple[int, ...], ...]
    onesided: dict = field(default_factory=dict)
    spreading: dict = field(default_factory=dict)
    permutivity: str = "none"
    legal: dict = field(default_factory=dict)
    patterns: dict = field(default_factory=dict)

    @property
    def pattern_mismatches(self) -> list[str]:
        return [name for name, (sem, pat) in self.patterns.items() if sem != pat]

    def csv_fields(self) -> dict[str, str]:
        def flag(x: bool) -> str:
            return "1" if x else "0"

        sp1 = self.spreading.get((1,))
        return {
            "quiescent": "".join(map(str, self.quiescent)),
            "stagnating": "|".join(letters_to_str(w) for w in self.stagnating),
            "onesided0": self.onesided.get(((0,), "plain"), ""),
            "star_onesided0": self.onesided.get(((0,), "star"), ""),
            "spreading1": "" if sp1 is None else "".join(
                flag(x) for x in (sp1.left_semi_strong, sp1.left_weak, sp1.right_semi_strong, sp1.right_weak)
            ),
            "permutivity": self.permutivity,
            "legal0": flag(self.legal.get(0, False)),
            "pattern_ok": flag(not self.pattern_mismatches),
        }


def classify_rule(rule: Rule) -> ClassificationReport:
    onesided = {}
    spreading = {}
    for B in nonempty_subsets(rule.q):
        for mode in ("plain", "star"):
            onesided[(B, mode)] = onesidedness(rule, B, mode)
        if len(B) < rule.q:
            spreading[B] = spreading_status(rule, B)
    patterns = {}
    if rule.q == 2:
        number = rule_to_number(rule)
        patterns = {name: (semantic_family(rule, name), in_family(number, name)) for name in PATTERN_FAMILIES}
    return ClassificationReport(
        rule=rule.label,
        quiescent=quiescent_letters(rule),
        stagnating=stagnating_words(rule),
        onesided=onesided,
        spreading=spreading,
        permutivity=permutivity(rule),
        legal={a: legal_on_full_shift(rule, a) for a in rule.letters},
        patterns=patterns,
    )
