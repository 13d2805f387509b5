"""Exceptions and the enumeration budget."""

from __future__ import annotations

import os

DEFAULT_BUDGET = 1 << 26


class ResourceError(RuntimeError):
    """An enumeration or search would exceed the configured budget."""


class NotApplicable(ValueError):
    """A protocol or construction was requested outside its hypotheses."""


def budget() -> int:
    raw = os.environ.get("TRACECC_BUDGET")
    if not raw:
        return DEFAULT_BUDGET
    try:
        value = int(float(raw))
    except ValueError:
        raise ValueError(f"TRACECC_BUDGET must be a number, got {raw!r}") from None
    if value <= 0:
        raise ValueError("TRACECC_BUDGET must be positive")
    return value


def check_budget(size: int, what: str) -> None:
    cap = budget()
    if size > cap:
        raise ResourceError(f"{what}: {size} items exceed budget {cap} (set TRACECC_BUDGET)")
