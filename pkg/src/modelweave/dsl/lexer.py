from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .diagnostics import DslSyntaxError, SourceSpan

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<arrow><->)
  | (?P<range>\.\.)
  | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[{}();:,.*=])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | punct | arrow | range | eof
    text: str
    line: int
    col: int
    end_line: int
    end_col: int
    value: Optional[str] = None  # decoded string literal

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, self.end_line, self.end_col)


def unescape(literal: str) -> str:
    body = literal[1:-1]
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


def escape(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    return out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")


def _advance(line: int, col: int, text: str) -> tuple[int, int]:
    newlines = text.count("\n")
    if newlines:
        return line + newlines, len(text) - text.rfind("\n")
    return line, col + len(text)


def tokenize(text: str, file: str) -> list[Token]:
    """Split ``text`` into tokens, dropping whitespace and ``//`` comments.

    Raises :class:`DslSyntaxError` on the first character that starts no token.
    """
    tokens: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            if ch == '"':
                msg = "unterminated string literal"
            else:
                msg = f"unexpected character {ch!r}"
            raise DslSyntaxError(msg, SourceSpan(file, line, col, line, col + 1))
        kind = m.lastgroup
        chunk = m.group()
        end_line, end_col = _advance(line, col, chunk)
        if kind not in ("ws", "comment"):
            value = unescape(chunk) if kind == "string" else None
            tokens.append(Token(kind, chunk, line, col, end_line, end_col, value))
        pos, line, col = m.end(), end_line, end_col
    tokens.append(Token("eof", "", line, col, line, col))
    return tokens


def check_braces(tokens: list[Token], file: str) -> None:
    """Report the first unbalanced curly brace before any grammar work."""
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind != "punct":
            continue
        if tok.text == "{":
            stack.append(tok)
        elif tok.text == "}":
            if not stack:
                raise DslSyntaxError("unmatched '}'", tok.span(file))
            stack.pop()
    if stack:
        raise DslSyntaxError("unclosed '{'", stack[-1].span(file))
