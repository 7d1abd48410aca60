"""Tokenizer for ``.qp`` scenario files."""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int


@dataclass(frozen=True)
class Token:
    kind: str  # INT, IDENT, PUNCT, EOF
    text: str
    span: Span


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: Span
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        text = f"{self.span.line}:{self.span.col}: error: {self.message}"
        if self.expected:
            text += " (expected " + " or ".join(self.expected) + ")"
        return text


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>\.\.|[;,\[\]()=+\-*/^<>])"
)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            diags.append(Diagnostic(f"unexpected character {text[pos]!r}", Span(pos, pos + 1, line, col)))
            pos += 1
            continue
        kind = m.lastgroup
        s = m.group()
        span = Span(pos, m.end(), line, col)
        if kind == "int":
            tokens.append(Token("INT", s, span))
        elif kind == "ident":
            tokens.append(Token("IDENT", s, span))
        elif kind == "punct":
            tokens.append(Token("PUNCT", s, span))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", Span(len(text), len(text), line, len(text) - line_start + 1)))
    return tokens, diags
