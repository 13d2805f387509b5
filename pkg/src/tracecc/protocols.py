"""Executable one-round protocols for f-hat_z with exact bit accounting.

Every protocol has one sender.  ``side`` names the sender's half:
``right`` means Bob speaks and Alice answers, ``left`` the reverse.
Shared knowledge that depends only on (rule, z), such as the image of the
column map or the tau sets, is precomputed and costs no bits.

Half-words are handled "outward": Alice's u on [-n..-1] is read as
(u_-1, u_-2, ..., u_-n) and fed to the mirrored rule, so both halves
share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import trace_lang as tl
from .ca_core import Rule, Word, as_letters, letters_to_str
from .cc_engine import build_matrix, ceil_log2, hat_value, index_word
from .classify import onesidedness, spreading_status
from .errors import NotApplicable, check_budget

ALICE, BOB = "Alice", "Bob"


def _other(side: str) -> str:
    return "left" if side == "right" else "right"


def _player(side: str) -> str:
    return ALICE if side == "left" else BOB


def _bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


@dataclass(frozen=True)
class Transcript:
    messages: tuple[tuple[str, str], ...]
    answer: int
    answered_by: str

    @property
    def total_bits(self) -> int:
        return sum(len(bits) for _, bits in self.messages)

    def lines(self) -> list[str]:
        return [f"{sender}:{bits}" for sender, bits in self.messages] + [f"{self.answered_by}=>{self.answer}"]


@dataclass
class Context:
    rule: Rule
    z: tuple[int, ...]
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.z) - 1

    def oriented(self, side: str) -> Rule:
        key = f"rule_{side}"
        if key not in self.extra:
            self.extra[key] = self.rule if side == "right" else self.rule.mirrored()
        return self.extra[key]

    def column(self, outward: tuple[int, ...], side: str) -> tuple[int, ...]:
        return tl.forward_letters(self.oriented(side), self.z, outward)

    def consistent(self, left_col: Sequence[int], right_col: Sequence[int]) -> bool:
        rule, z = self.rule, self.z
        return all(rule(left_col[t], z[t], right_col[t]) == z[t + 1] for t in range(self.n))


class Protocol:
    """Base class; subclasses define applicability, bound and messages."""

    side = "right"

    @property
    def sender(self) -> str:
        return _player(self.side)

    @property
    def receiver(self) -> str:
        return _player(_other(self.side))

    def resolved(self, rule: Rule) -> "Protocol":
        """Concrete protocol for this rule (fills in automatic choices)."""
        return self

    def check(self, rule: Rule, z: tuple[int, ...]) -> None:
        pass

    def prepare(self, ctx: Context) -> None:
        pass

    def bound(self, ctx: Context) -> int:
        raise NotImplementedError

    def message(self, ctx: Context, outward: tuple[int, ...]) -> str:
        raise NotImplementedError

    def answer(self, ctx: Context, outward: tuple[int, ...], message: str) -> int:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.ident


def _require(cond: bool, reason: str) -> None:
    if not cond:
        raise NotApplicable(reason)


def _require_zero_target(rule: Rule, z: tuple[int, ...]) -> None:
    _require(all(a == 0 for a in z), "target must be the all-zero word")


def _half_answer(ctx: Context, outward: tuple[int, ...], side: str) -> int:
    """Simulate one half-triangle with the far neighbour of the centre
    treated as unknown (legal when the centre stays in a onesided set)."""
    # cells are laid out as (far .. near, centre): the left half in its own
    # orientation, the right half mirrored
    f = ctx.oriented(_other(side))
    z = ctx.z
    cells = list(reversed(outward)) + [z[0]]
    for t in range(1, ctx.n + 1):
        padded = cells + [0]
        cells = [f(padded[k - 1], padded[k], padded[k + 1]) for k in range(1, len(padded) - 1)]
        if cells[-1] != z[t]:
            return 1
    return 0


@dataclass(frozen=True)
class OneSided(Protocol):
    letters: tuple[int, ...]
    side: str = "left"

    @property
    def ident(self) -> str:
        return f"onesided:{letters_to_str(self.letters)}:{self.side}"

    def check(self, rule, z):
        B = set(self.letters)
        _require(all(a in B for a in z), f"target is not a word over B={sorted(B)}")
        _require(onesidedness(rule, B) != "none", f"rule is not {sorted(B)}-onesided")

    def prepare(self, ctx):
        kind = onesidedness(ctx.rule, self.letters)
        # B-leftsided: the centre ignores its right neighbour, so Alice's half
        # is self-contained; otherwise the other player answers alone
        ctx.extra["sender_alone"] = kind in ("both", self.side)

    def bound(self, ctx):
        return 1

    def message(self, ctx, outward):
        if ctx.extra["sender_alone"]:
            return str(_half_answer(ctx, outward, self.side))
        return ""

    def answer(self, ctx, outward, message):
        if message:
            return int(message)
        return _half_answer(ctx, outward, _other(self.side))


@dataclass(frozen=True)
class SpreadingConst(Protocol):
    """Target 0^{n+1}.  Non-zero letters spreading leftwards reach the
    centre from any non-zero cell of v, so Bob announces whether v is
    all-zero (side ``right``); the mirror case has Alice speak."""

    side: str = "right"

    @property
    def ident(self) -> str:
        return f"spreading:{self.side}"

    def resolved(self, rule):
        if self.side != "auto":
            return self
        flags = spreading_status(rule, set(rule.letters) - {0}) if rule.q > 1 else None
        return SpreadingConst("left" if flags and not flags.left_semi_strong and flags.right_semi_strong else "right")

    def check(self, rule, z):
        _require_zero_target(rule, z)
        _require(rule(0, 0, 0) == 0, "0 is not quiescent")
        flags = spreading_status(rule, set(rule.letters) - {0})
        if self.side == "right":
            _require(flags.left_semi_strong, "non-zero letters are not left semi-strongly spreading")
        else:
            _require(flags.right_semi_strong, "non-zero letters are not right semi-strongly spreading")

    def bound(self, ctx):
        return 1

    def message(self, ctx, outward):
        return "1" if any(outward) else "0"

    def answer(self, ctx, outward, message):
        if message == "1":
            return 1
        n = ctx.n
        quiet = (0,) * n
        mine = tuple(reversed(outward)) if self.side == "right" else outward
        u, v = (mine, quiet) if self.side == "right" else (quiet, mine)
        return hat_value(ctx.rule, ctx.z, Word(-n, u), Word(1, v))


@dataclass(frozen=True)
class StagnatingPair(Protocol):
    @property
    def ident(self) -> str:
        return "stagnating"

    def check(self, rule, z):
        _require(rule.q == 2, "binary alphabet required")
        _require_zero_target(rule, z)
        _require(rule(0, 0, 0) == 0, "0 is not quiescent")
        flags = spreading_status(rule, {1})
        _require(not flags.left_weak and not flags.right_weak, "1 is weakly spreading on some side")

    def bound(self, ctx):
        return 1

    def message(self, ctx, outward):
        return str(outward[0]) if ctx.rule(1, 0, 1) == 1 else ""

    def answer(self, ctx, outward, message):
        if not message:
            return 0
        return int(outward[0] == 1 and message == "1")


@dataclass(frozen=True)
class TraceColumn(Protocol):
    side: str = "right"

    @property
    def ident(self) -> str:
        return f"column:{self.side}"

    def prepare(self, ctx):
        image = sorted(tl.forward_image(ctx.rule, ctx.z, self.side))
        ctx.extra["table"] = image
        ctx.extra["index"] = {col: k for k, col in enumerate(image)}
        ctx.extra["width"] = ceil_log2(len(image))

    def bound(self, ctx):
        return ctx.extra["width"]

    def message(self, ctx, outward):
        return _bits(ctx.extra["index"][ctx.column(outward, self.side)], ctx.extra["width"])

    def answer(self, ctx, outward, message):
        theirs = ctx.extra["table"][int(message, 2) if message else 0]
        return _judge(ctx, self.side, theirs, ctx.column(outward, _other(self.side)))


def _judge(ctx: Context, sender_side: str, sender_col, receiver_col) -> int:
    if sender_side == "right":
        return 0 if ctx.consistent(receiver_col, sender_col) else 1
    return 0 if ctx.consistent(sender_col, receiver_col) else 1


@dataclass(frozen=True)
class TraceTau(Protocol):
    side: str = "right"

    @property
    def ident(self) -> str:
        return f"tau:{self.side}"

    def prepare(self, ctx):
        tau = sorted(tl.tau_set(ctx.rule, ctx.z, self.side))
        ctx.extra["table"] = tau
        ctx.extra["index"] = {col: k for k, col in enumerate(tau)}
        ctx.extra["width"] = ceil_log2(len(tau) + 1)

    def bound(self, ctx):
        return ctx.extra["width"]

    def message(self, ctx, outward):
        col = ctx.column(outward, self.side)
        code = ctx.extra["index"].get(col, len(ctx.extra["table"]))
        return _bits(code, ctx.extra["width"])

    def answer(self, ctx, outward, message):
        code = int(message, 2) if message else 0
        table = ctx.extra["table"]
        if code >= len(table):
            return 1
        return _judge(ctx, self.side, table[code], ctx.column(outward, _other(self.side)))


@dataclass(frozen=True)
class Grouped(Protocol):
    @property
    def ident(self) -> str:
        return "grouped"

    def check(self, rule, z):
        _require(rule.origin == "grouped", "rule is not tagged as a 2-grouped rule")

    def prepare(self, ctx):
        ctx.extra["tau"] = {s: tl.tau_set(ctx.rule, ctx.z, s) for s in ("left", "right")}

    def bound(self, ctx):
        return 1

    def message(self, ctx, outward):
        return "1" if ctx.column(outward, "right") in ctx.extra["tau"]["right"] else "0"

    def answer(self, ctx, outward, message):
        ok = message == "1" and ctx.column(outward, "left") in ctx.extra["tau"]["left"]
        return 0 if ok else 1


@dataclass(frozen=True)
class BStar(Protocol):
    letters: tuple[int, ...]
    side: str = "right"

    @property
    def ident(self) -> str:
        return f"bstar:{letters_to_str(self.letters)}:{self.side}"

    def check(self, rule, z):
        B = set(self.letters)
        _require(all(a in B for a in z), f"target is not a word over B={sorted(B)}")
        needed = "left" if self.side == "right" else "right"
        kind = onesidedness(rule, B, "star")
        _require(kind in (needed, "both"), f"rule is not {sorted(B)}*{needed}sided")

    def bound(self, ctx):
        return ceil_log2(ctx.rule.q)

    def message(self, ctx, outward):
        return _bits(outward[0], ceil_log2(ctx.rule.q))

    def answer(self, ctx, outward, message):
        f = ctx.oriented(self.side)
        z = ctx.z
        cell = int(message, 2) if message else 0
        col = [cell]
        for t in range(ctx.n - 1):
            cell = f(z[t], cell, 0)
            col.append(cell)
        return _judge(ctx, self.side, tuple(col), ctx.column(outward, _other(self.side)))


@dataclass(frozen=True)
class FirstAppearance(Protocol):
    letter: int
    side: str = "right"

    @property
    def ident(self) -> str:
        return f"first:{self.letter}:{self.side}"

    def check(self, rule, z):
        _require(rule.q == 2, "binary alphabet required")
        _require_zero_target(rule, z)
        a = self.letter
        if self.side == "right":
            _require(rule(0, a, 0) == rule(0, a, 1) == a, f"f(0{a}0) = f(0{a}1) = {a} fails")
        else:
            _require(rule(0, a, 0) == rule(1, a, 0) == a, f"f(0{a}0) = f(1{a}0) = {a} fails")

    def bound(self, ctx):
        return ceil_log2(ctx.n + 1)

    def message(self, ctx, outward):
        col = ctx.column(outward, self.side)
        first = next((t for t, x in enumerate(col) if x == self.letter), ctx.n)
        return _bits(first, ceil_log2(ctx.n + 1))

    def answer(self, ctx, outward, message):
        first = int(message, 2) if message else 0
        other = 1 - self.letter
        col = (other,) * first + (self.letter,) * (ctx.n - first)
        return _judge(ctx, self.side, col, ctx.column(outward, _other(self.side)))


# ---------------------------------------------------------------- driver


def parse_protocol(text: str) -> Protocol:
    """Parse ids such as ``onesided:0:left``, ``spreading:right``, ``stagnating``,
    ``spreading`` (side chosen from the rule), ``column:right``, ``tau:left``, ``grouped``, ``bstar:0:right``,
    ``first:1:right``."""
    from .ca_core import str_to_letters

    parts = text.strip().lower().split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "onesided":
            return OneSided(str_to_letters(args[0]), args[1] if len(args) > 1 else "left")
        if kind == "spreading":
            return SpreadingConst(args[0] if args else "auto")
        if kind == "stagnating" and not args:
            return StagnatingPair()
        if kind == "column":
            return TraceColumn(args[0] if args else "right")
        if kind == "tau":
            return TraceTau(args[0] if args else "right")
        if kind == "grouped" and not args:
            return Grouped()
        if kind == "bstar":
            return BStar(str_to_letters(args[0]), args[1] if len(args) > 1 else "right")
        if kind == "first":
            return FirstAppearance(int(args[0]), args[1] if len(args) > 1 else "right")
    except (IndexError, ValueError):
        pass
    raise ValueError(f"unknown protocol id {text!r}")


def _setup(protocol: Protocol, rule: Rule, z) -> tuple[Protocol, Context]:
    protocol = protocol.resolved(rule)
    z = as_letters(z)
    if len(z) < 2:
        raise ValueError("z must have length at least 2")
    if getattr(protocol, "side", "right") not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    protocol.check(rule, z)
    ctx = Context(rule, z)
    protocol.prepare(ctx)
    return protocol, ctx


def _outward(word: Word) -> tuple[int, ...]:
    return tuple(reversed(word.letters)) if word.end == -1 else word.letters


def run_protocol(protocol: Protocol, rule: Rule, z, u: Word, v: Word) -> Transcript:
    protocol, ctx = _setup(protocol, rule, z)
    n = ctx.n
    if u.interval != (-n, -1) or v.interval != (1, n):
        raise ValueError("u must sit on [-n..-1] and v on [1..n]")
    mine, theirs = (v, u) if protocol.side == "right" else (u, v)
    msg = protocol.message(ctx, _outward(mine))
    ans = protocol.answer(ctx, _outward(theirs), msg)
    messages = ((protocol.sender, msg),) if msg else ()
    return Transcript(messages, ans, protocol.receiver)


@dataclass(frozen=True)
class VerificationReport:
    protocol: str
    rule: str
    z: str
    correct: bool
    max_bits: int
    claimed_bound: int
    errors: int
    counterexample: tuple[str, str] | None = None

    @property
    def within_bound(self) -> bool:
        return self.max_bits <= self.claimed_bound

    @property
    def ok(self) -> bool:
        return self.correct and self.within_bound


def verify_protocol(protocol: Protocol, rule: Rule, z) -> VerificationReport:
    """Run the protocol on every input pair and compare with the exact
    f-hat_z matrix.  Messages are computed once per sender input and
    answers once per (receiver input, distinct message)."""
    protocol, ctx = _setup(protocol, rule, z)
    n, q = ctx.n, rule.q
    side = q ** n
    check_budget(side * side, "protocol verification pairs")
    oracle = build_matrix(rule, ctx.z).hat
    sender_side = protocol.side
    recv_side = _other(sender_side)
    word_side = {"left": "left", "right": "right"}
    sender_inputs = [_outward(index_word(k, q, n, word_side[sender_side])) for k in range(side)]
    receiver_inputs = [_outward(index_word(k, q, n, word_side[recv_side])) for k in range(side)]
    messages = [protocol.message(ctx, x) for x in sender_inputs]
    distinct = sorted(set(messages))
    msg_id = np.array([distinct.index(m) for m in messages], dtype=np.intp)
    table = np.array(
        [[protocol.answer(ctx, y, m) for m in distinct] for y in receiver_inputs], dtype=np.uint8
    )
    answers = table[:, msg_id]  # receiver x sender
    if sender_side == "right":
        got = answers  # rows are Alice (receiver)
    else:
        got = answers.T
    wrong = np.argwhere(got != oracle)
    example = None
    if wrong.size:
        i, j = wrong[0]
        example = (
            letters_to_str(index_word(int(i), q, n, "left").letters),
            letters_to_str(index_word(int(j), q, n, "right").letters),
        )
    return VerificationReport(
        protocol=protocol.ident,
        rule=rule.label,
        z=letters_to_str(ctx.z),
        correct=not wrong.size,
        max_bits=max(len(m) for m in messages),
        claimed_bound=protocol.bound(ctx),
        errors=int(len(wrong)),
        counterexample=example,
    )


def all_protocols(q: int) -> list[Protocol]:
    from .classify import nonempty_subsets

    out: list[Protocol] = []
    for B in nonempty_subsets(q):
        for s in ("left", "right"):
            out.append(OneSided(B, s))
            out.append(BStar(B, s))
    out += [StagnatingPair(), Grouped()]
    for s in ("left", "right"):
        out += [SpreadingConst(s), TraceColumn(s), TraceTau(s)]
        if q == 2:
            out += [FirstAppearance(0, s), FirstAppearance(1, s)]
    return out


def applicable_protocols(rule: Rule, z) -> list[Protocol]:
    z = as_letters(z)
    found = []
    for p in all_protocols(rule.q):
        try:
            p.check(rule, z)
        except NotApplicable:
            continue
        found.append(p)
    return found
