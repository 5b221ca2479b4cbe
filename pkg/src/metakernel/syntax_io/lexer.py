"""Token scanner shared by the .mm, .mdl and .eqv readers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..constraints.parser import decode_string
from ..errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<real>-?\d+\.\d+(?:[eE][+-]?\d+)?|-?\d+[eE][+-]?\d+)
  | (?P<int>-?\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<id>\#\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>\.\.|->|[{}\[\]():=,*~])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str  # ident int real string id punct eof
    text: str
    line: int
    col: int
    offset: int
    value: object = None


def decode_source(data) -> str:
    """Accept ``str`` or UTF-8 ``bytes``; undecodable bytes are a located error."""
    if isinstance(data, str):
        return data
    if not isinstance(data, (bytes, bytearray)):
        raise ParseError(f"expected text, got {type(data).__name__}")
    try:
        return bytes(data).decode("utf-8")
    except UnicodeDecodeError as err:
        head = bytes(data[: err.start])
        line = head.count(b"\n") + 1
        col = err.start - (head.rfind(b"\n") + 1) + 1
        raise ParseError("invalid UTF-8", line, col) from None


class Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: Tok | None = None

    def _where(self, offset: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def _scan(self) -> Tok:
        while True:
            if self.pos >= len(self.text):
                line, col = self._where(self.pos)
                return Tok("eof", "", line, col, self.pos)
            m = _TOKEN_RE.match(self.text, self.pos)
            if m is None:
                line, col = self._where(self.pos)
                raise ParseError(f"unexpected character {self.text[self.pos]!r}", line, col)
            start = self.pos
            self.pos = m.end()
            kind = m.lastgroup
            if kind == "ws":
                continue
            text = m.group()
            line, col = self._where(start)
            value: object = None
            if kind == "int":
                value = int(text)
            elif kind == "real":
                value = float(text)
                if value in (float("inf"), float("-inf")):
                    raise ParseError(f"number {text} out of range", line, col)
            elif kind == "string":
                value = decode_string(text, line, col)
            elif kind == "id":
                value = int(text[1:])
            return Tok(kind, text, line, col, start, value)

    def peek(self) -> Tok:
        if self._peeked is None:
            self._peeked = self._scan()
        return self._peeked

    def next(self) -> Tok:
        t = self.peek()
        self._peeked = None
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: str | None = None) -> Tok | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Tok:
        if not self.at(kind, text):
            t = self.peek()
            want = what or (repr(text) if text else kind)
            got = "end of file" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {want}, found {got}", t.line, t.col)
        return self.next()

    def error(self, msg: str, tok: Tok | None = None) -> ParseError:
        t = tok or self.peek()
        return ParseError(msg, t.line, t.col)

    def raw_block(self) -> tuple[str, int]:
        """Raw text up to the next ``}`` outside string literals (consumed).

        Must be called right after ``{`` was returned by :meth:`next`.
        """
        assert self._peeked is None
        start = self.pos
        i = start
        n = len(self.text)
        while i < n:
            ch = self.text[i]
            if ch == '"':
                i += 1
                while i < n and self.text[i] != '"':
                    if self.text[i] == "\\":
                        i += 1
                    elif self.text[i] == "\n":
                        break
                    i += 1
            elif ch == "-" and self.text.startswith("--", i):
                j = self.text.find("\n", i)
                i = n if j < 0 else j
                continue
            elif ch == "}":
                self.pos = i + 1
                return self.text[start:i], start
            i += 1
        line, col = self._where(start)
        raise ParseError("unterminated block", line, col)

    def relocate(self, err, base_offset: int):
        """Shift an error located inside a raw block to file coordinates."""
        bline, bcol = self._where(base_offset)
        line = bline + err.line - 1
        col = err.column + (bcol - 1 if err.line == 1 else 0)
        return type(err)(err.reason, line, col)
