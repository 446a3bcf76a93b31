"""Tokenizer shared by the process, formula and weight parsers."""

from __future__ import annotations

import re
from typing import NamedTuple

from qsec.errors import QsecSyntaxError

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>\|\[|\]\||\|=|//|[()\[\]{}<>,.+*&\\/!?;=~:|-])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str  # "number", "name", "sym" or "end"
    text: str
    pos: int


class Lexer:
    def __init__(self, text: str, offset: int = 0):
        self.text = text
        self.offset = offset
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise QsecSyntaxError(f"unexpected character {text[pos]!r}", offset + pos, text)
            if m.lastgroup != "ws":
                self.tokens.append(Token(m.lastgroup, m.group(), offset + pos))
            pos = m.end()
        self.tokens.append(Token("end", "", offset + len(text)))
        self.i = 0

    def peek(self, k=0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "end":
            self.i += 1
        return tok

    def at(self, text, k=0) -> bool:
        tok = self.peek(k)
        return tok.kind != "end" and tok.text == text

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        tok = self.peek()
        if tok.kind == "end" or tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def expect_name(self) -> str:
        tok = self.peek()
        if tok.kind != "name":
            self.error(f"expected a name, found {tok.text or 'end of input'!r}")
        return self.next().text

    def at_end(self) -> bool:
        return self.peek().kind == "end"

    def expect_end(self):
        if not self.at_end():
            self.error(f"unexpected {self.peek().text!r}")

    def error(self, message):
        raise QsecSyntaxError(message, self.peek().pos, self.text)


def parse_weight_tokens(lex: Lexer, spec):
    """Parse one weight literal from ``lex`` against ``spec``."""
    if lex.accept("top"):
        return spec.top
    if lex.accept("bot"):
        return spec.bot
    parts = getattr(spec, "parts", None)
    if parts is not None:
        lex.expect("(")
        first = parse_weight_tokens(lex, parts[0])
        lex.expect(",")
        second = parse_weight_tokens(lex, parts[1])
        lex.expect(")")
        return (first, second)
    tok = lex.peek()
    if tok.kind not in ("number", "name"):
        lex.error(f"expected a {spec.name} weight, found {tok.text or 'end of input'!r}")
    try:
        value = spec.atom(tok.text)
    except QsecSyntaxError as exc:
        raise QsecSyntaxError(exc.message, tok.pos, lex.text) from None
    lex.next()
    return value


def parse_name_set(lex: Lexer) -> frozenset:
    """``{a, b, ...}`` (possibly empty)."""
    lex.expect("{")
    names = []
    if not lex.at("}"):
        names.append(lex.expect_name())
        while lex.accept(","):
            names.append(lex.expect_name())
    lex.expect("}")
    return frozenset(names)
