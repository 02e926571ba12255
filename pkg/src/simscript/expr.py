"""Infix expression evaluation over script values.

Operates on already-substituted text, so the only operands are numeric
literals.  Precedence, loosest first: ``|| &&``, comparisons, ``+ -``,
``* / %``, unary ``- !``; parentheses group.  Integer arithmetic stays
integral with truncating division; any float operand promotes the
operation to float.  Comparisons and logical operators yield "1"/"0".
"""

from __future__ import annotations

import re

from . import values
from .errors import DivisionByZero, ExprSyntaxError, ExprTypeError

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<op>\|\||&&|<=|>=|==|!=|[-+*/%<>!()])"
    r")"
)

Number = int | float


def _tokenize(text: str) -> list[str | Number]:
    tokens: list[str | Number] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ExprSyntaxError(f"unexpected {rest[0]!r} in expression {text!r}")
        if m.group("num") is not None:
            lit = m.group("num")
            tokens.append(int(lit) if re.fullmatch(r"[0-9]+", lit) else float(lit))
        else:
            tokens.append(m.group("op"))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive descent producing a nested-tuple AST."""

    def __init__(self, tokens: list[str | Number], text: str):
        self.tokens = tokens
        self.pos = 0
        self.text = text

    def peek(self) -> str | Number | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str | Number:
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError(f"unexpected end of expression {self.text!r}")
        self.pos += 1
        return tok

    def parse(self):
        node = self.or_expr()
        if self.peek() is not None:
            raise ExprSyntaxError(f"trailing {self.peek()!r} in expression {self.text!r}")
        return node

    def _binary_level(self, ops: tuple[str, ...], sub):
        node = sub()
        while isinstance(self.peek(), str) and self.peek() in ops:
            op = self.next()
            node = (op, node, sub())
        return node

    def or_expr(self):
        return self._binary_level(("||",), self.and_expr)

    def and_expr(self):
        return self._binary_level(("&&",), self.cmp_expr)

    def cmp_expr(self):
        return self._binary_level(("<", "<=", ">", ">=", "==", "!="), self.add_expr)

    def add_expr(self):
        return self._binary_level(("+", "-"), self.mul_expr)

    def mul_expr(self):
        return self._binary_level(("*", "/", "%"), self.unary_expr)

    def unary_expr(self):
        tok = self.peek()
        if tok == "-" or tok == "!":
            op = self.next()
            return ("neg" if op == "-" else "not", self.unary_expr())
        return self.atom()

    def atom(self):
        tok = self.next()
        if isinstance(tok, (int, float)):
            return tok
        if tok == "(":
            node = self.or_expr()
            if self.next() != ")":
                raise ExprSyntaxError(f"missing ')' in expression {self.text!r}")
            return node
        raise ExprSyntaxError(f"unexpected {tok!r} in expression {self.text!r}")


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _eval(node) -> Number:
    if isinstance(node, (int, float)):
        return node
    op = node[0]
    if op == "neg":
        return -_eval(node[1])
    if op == "not":
        return 0 if _eval(node[1]) != 0 else 1
    if op == "||":
        return 1 if _eval(node[1]) != 0 or _eval(node[2]) != 0 else 0
    if op == "&&":
        return 1 if _eval(node[1]) != 0 and _eval(node[2]) != 0 else 0

    a = _eval(node[1])
    b = _eval(node[2])
    if op in ("<", "<=", ">", ">=", "==", "!="):
        return int({
            "<": a < b, "<=": a <= b, ">": a > b,
            ">=": a >= b, "==": a == b, "!=": a != b,
        }[op])
    both_int = isinstance(a, int) and isinstance(b, int)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise DivisionByZero(f"{a} / {b}")
        return _trunc_div(a, b) if both_int else a / b
    # op == "%"
    if not both_int:
        raise ExprTypeError("'%' requires integer operands")
    if b == 0:
        raise DivisionByZero(f"{a} % {b}")
    return a - _trunc_div(a, b) * b


def eval_expr(text: str) -> str:
    """Evaluate a substituted expression; pure function of its text."""
    tokens = _tokenize(text)
    if not tokens:
        raise ExprSyntaxError(f"empty expression {text!r}")
    result = _eval(_Parser(tokens, text).parse())
    if isinstance(result, bool):
        result = int(result)
    return values.render_int(result) if isinstance(result, int) else values.render_float(result)
