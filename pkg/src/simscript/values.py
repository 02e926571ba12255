"""Text-surface value conventions.

Every value crossing the interpreter boundary is a string.  These helpers
define the numeric interpretation of those strings and the canonical
rendering of each field kind: Int as decimal, Float as the shortest
decimal that round-trips, Bool as 0/1.
"""

from __future__ import annotations

import re

from .errors import ParseError

I64_MIN = -(2 ** 63)
I64_MAX = 2 ** 63 - 1

_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_FLOAT_RE = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")


def parse_int(text: str) -> int:
    """Parse a decimal integer within signed 64-bit range."""
    if not _INT_RE.match(text):
        raise ParseError("Int", text)
    value = int(text)
    if not I64_MIN <= value <= I64_MAX:
        raise ParseError("Int", text)
    return value


def parse_float(text: str) -> float:
    """Parse a decimal real (plain or scientific notation; no nan/inf)."""
    if not _FLOAT_RE.match(text):
        raise ParseError("Float", text)
    return float(text)


def parse_bool(text: str) -> bool:
    """Numeric nonzero is true, zero is false; non-numeric text is an error."""
    n = interpret_number(text)
    if n is None:
        raise ParseError("Bool", text)
    return n != 0


def render_int(value: int) -> str:
    return str(int(value))


def render_float(value: float) -> str:
    # repr() of a float is the shortest string that round-trips exactly.
    return repr(float(value))


def render_bool(value: bool) -> str:
    return "1" if value else "0"


def interpret_number(text: str) -> int | float | None:
    """Numeric interpretation of a script value: Int first, then Float."""
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    return None


def truthy(text: str) -> bool:
    """Boolean interpretation: numeric nonzero is true, "0" is false."""
    n = interpret_number(text)
    if n is None:
        raise ParseError("Bool", text)
    return n != 0
