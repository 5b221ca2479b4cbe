"""Tokenizer, recursive-descent parser and canonical printer for constraints.

Grammar (lowest to highest precedence)::

    constraint := Ident '.' body          -- the leading Ident names the context class
    expr       := or ('implies' expr)?    -- right associative
    or         := and ('or' and)*
    and        := unary ('and' unary)*
    unary      := 'not' unary | compare
    compare    := postfix (CMP postfix)?
    postfix    := primary ('.' Ident ['(' args ')'] | '->' Ident '(' [Ident '|' expr] ')')*
    primary    := literal | Ident | 'self' | '(' expr ')'

The body begins with an implicit ``self`` receiver: ``OutPort.parent()`` is
``self.parent()`` evaluated at every ``OutPort``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import ConstraintTypeError, ParseError
from .ast import (
    BINDER_OPS,
    COMPARE_OPS,
    NAV_OPS,
    PLAIN_COLLECTION_OPS,
    AttributeAccess,
    BoolOp,
    CollectionOp,
    Compare,
    ConstraintExpr,
    Kind,
    Literal,
    NavCall,
    Not,
    Self,
    VarRef,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
KEYWORDS = {"and", "or", "not", "implies", "self", "true", "false"}
MAX_DEPTH = 100

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|<>|<=|>=|[=<>.()|,-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, int, real, string, op, eof
    text: str
    line: int
    col: int
    value: object = None


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def decode_string(raw: str, line: int, col: int) -> str:
    try:
        s = json.loads(raw)
    except ValueError:
        raise ParseError(f"bad string literal {raw}", line, col) from None
    if any(0xD800 <= ord(ch) <= 0xDFFF for ch in s):
        raise ParseError("string literal contains a lone surrogate", line, col)
    return s


def encode_string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok_text = m.group()
        if kind != "ws":
            line, col = _position(text, pos)
            value: object = None
            if kind == "ident" and tok_text in KEYWORDS:
                kind = "keyword"
            elif kind == "int":
                value = int(tok_text)
            elif kind == "real":
                value = float(tok_text)
                if value in (float("inf"), float("-inf")):
                    raise ParseError(f"real literal {tok_text} out of range", line, col)
            elif kind == "string":
                value = decode_string(tok_text, line, col)
            tokens.append(Token(kind, tok_text, line, col, value))
        pos = m.end()
    line, col = _position(text, n)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.depth = 0
        self.leading: Self | None = None

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, text):
            t = self.tok
            want = what or (repr(text) if text else kind)
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {want}, found {got}", t.line, t.col)
        return self.advance()

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        return ParseError(msg, t.line, t.col)

    # grammar

    def constraint(self) -> ConstraintExpr:
        ctx = self.expect("ident", what="context class name")
        if not self.at("op", "."):
            raise self.error("expected '.' after the context class")
        self.leading = Self((ctx.line, ctx.col))
        body = self.expr()
        if not self.at("eof"):
            raise self.error(f"unexpected {self.tok.text!r}")
        return ConstraintExpr(ctx.text, body)

    def expr(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply")
        left = self.or_expr()
        if self.at("keyword", "implies"):
            t = self.advance()
            left = BoolOp("implies", left, self.expr(), (t.line, t.col))
        self.depth -= 1
        return left

    def or_expr(self):
        left = self.and_expr()
        while self.at("keyword", "or"):
            t = self.advance()
            left = BoolOp("or", left, self.and_expr(), (t.line, t.col))
        return left

    def and_expr(self):
        left = self.unary()
        while self.at("keyword", "and"):
            t = self.advance()
            left = BoolOp("and", left, self.unary(), (t.line, t.col))
        return left

    def unary(self):
        if self.at("keyword", "not"):
            t = self.advance()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                raise self.error("expression nested too deeply")
            operand = self.unary()
            self.depth -= 1
            return Not(operand, (t.line, t.col))
        return self.compare()

    def compare(self):
        left = self.postfix()
        if self.tok.kind == "op" and self.tok.text in COMPARE_OPS:
            t = self.advance()
            right = self.postfix()
            if self.tok.kind == "op" and self.tok.text in COMPARE_OPS:
                raise self.error("comparisons do not chain; add parentheses")
            return Compare(t.text, left, right, (t.line, t.col))
        return left

    def postfix(self):
        node = self.primary()
        while True:
            if self.at("op", "."):
                self.advance()
                name = self.expect("ident", what="operation or attribute name")
                pos = (name.line, name.col)
                if self.at("op", "("):
                    if name.text not in NAV_OPS:
                        raise self.error(f"unknown operation {name.text}", name)
                    self.advance()
                    args = self.nav_args(name.text)
                    self.expect("op", ")")
                    node = NavCall(node, name.text, args, pos)
                else:
                    if name.text in NAV_OPS:
                        raise self.error(f"{name.text} needs an argument list", name)
                    node = AttributeAccess(node, name.text, pos)
            elif self.at("op", "->"):
                self.advance()
                name = self.expect("ident", what="collection operation")
                pos = (name.line, name.col)
                self.expect("op", "(")
                if name.text in BINDER_OPS:
                    var = self.expect("ident", what="iterator variable")
                    self.expect("op", "|")
                    body = self.expr()
                    self.expect("op", ")")
                    node = CollectionOp(node, name.text, var.text, body, pos)
                elif name.text in PLAIN_COLLECTION_OPS:
                    self.expect("op", ")")
                    node = CollectionOp(node, name.text, None, None, pos)
                else:
                    raise self.error(f"unknown collection operation {name.text}", name)
            else:
                return node

    def nav_args(self, op: str) -> tuple:
        arg_kind = NAV_OPS[op][1]
        if arg_kind is None:
            return ()
        t = self.tok
        if arg_kind == "kind":
            if t.kind == "ident":
                self.advance()
                return (Kind(t.text, (t.line, t.col)),)
            if t.kind == "string" and _IDENT.fullmatch(t.value) and t.value not in KEYWORDS:
                self.advance()
                return (Kind(t.value, (t.line, t.col)),)
            raise self.error(f"{op} expects an association kind name")
        # role name
        if t.kind == "string":
            self.advance()
            return (Literal(t.value, (t.line, t.col)),)
        if t.kind == "ident":
            self.advance()
            return (Literal(t.text, (t.line, t.col)),)
        raise self.error(f"{op} expects a role name")

    def primary(self):
        if self.leading is not None:
            node, self.leading = self.leading, None
            return node
        t = self.tok
        pos = (t.line, t.col)
        if t.kind in ("int", "real", "string"):
            self.advance()
            return Literal(t.value, pos)
        if t.kind == "keyword" and t.text in ("true", "false"):
            self.advance()
            return Literal(t.text == "true", pos)
        if t.kind == "keyword" and t.text == "self":
            self.advance()
            return Self(pos)
        if t.kind == "op" and t.text == "-":
            self.advance()
            num = self.tok
            if num.kind not in ("int", "real"):
                raise self.error("expected a number after '-'")
            self.advance()
            return Literal(-num.value, pos)
        if t.kind == "ident":
            self.advance()
            return VarRef(t.text, pos)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect("op", ")")
            return inner
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise self.error(f"expected an expression, found {got}")


def parse_constraint(text: str, mm=None) -> ConstraintExpr:
    """Parse constraint text; with a metamodel, names are resolved as well.

    Raises :class:`ParseError` on malformed text and
    :class:`ConstraintTypeError` when an operation is applied to a value of the
    wrong kind.
    """
    if not isinstance(text, str):
        raise ParseError("constraint text must be a string")
    expr = _Parser(text).constraint()
    from .typecheck import typecheck_located

    problems = typecheck_located(expr, mm)
    if problems:
        msg, (line, col) = problems[0]
        raise ConstraintTypeError(msg, line, col)
    return expr


# ---------------------------------------------------------------------------
# printing

_LEVEL = {"implies": 1, "or": 2, "and": 3}
_NOT, _CMP, _POSTFIX = 4, 5, 6


def _level(node) -> int:
    if isinstance(node, BoolOp):
        return _LEVEL[node.op]
    if isinstance(node, Not):
        return _NOT
    if isinstance(node, Compare):
        return _CMP
    return _POSTFIX


def _negative_number(node) -> bool:
    return (
        isinstance(node, Literal)
        and isinstance(node.value, (int, float))
        and not isinstance(node.value, bool)
        and _literal(node.value).startswith("-")
    )


def _literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return encode_string(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


class _Printer:
    def __init__(self, context: str):
        self.context = context

    def wrap(self, node, min_level: int, lead: bool) -> str:
        if _level(node) < min_level:
            if lead:
                raise ValueError("constraint body must begin with a navigation from the context")
            return "(" + self.fmt(node, False) + ")"
        return self.fmt(node, lead)

    def receiver(self, node, lead: bool) -> str:
        if lead and isinstance(node, Self):
            return self.context
        if _negative_number(node):
            # "-1.x" would read as "-(1.x)"
            return "(" + self.fmt(node, False) + ")"
        return self.wrap(node, _POSTFIX, lead)

    def fmt(self, node, lead: bool) -> str:
        if isinstance(node, Self):
            if lead:
                raise ValueError("context entity must be followed by a navigation")
            return "self"
        if lead and isinstance(node, (VarRef, Literal, Kind, Not)):
            raise ValueError("constraint body must begin with a navigation from the context")
        if isinstance(node, VarRef):
            return node.name
        if isinstance(node, Literal):
            return _literal(node.value)
        if isinstance(node, Kind):
            return node.name
        if isinstance(node, AttributeAccess):
            return f"{self.receiver(node.receiver, lead)}.{node.name}"
        if isinstance(node, NavCall):
            args = ", ".join(self.fmt(a, False) for a in node.args)
            return f"{self.receiver(node.receiver, lead)}.{node.op}({args})"
        if isinstance(node, CollectionOp):
            if lead and isinstance(node.receiver, Self):
                raise ValueError("collection operation applied directly to the context")
            recv = self.receiver(node.receiver, lead)
            if node.op in BINDER_OPS:
                return f"{recv}->{node.op}({node.var} | {self.fmt(node.body, False)})"
            return f"{recv}->{node.op}()"
        if isinstance(node, Compare):
            left = self.wrap(node.left, _POSTFIX, lead)
            right = self.wrap(node.right, _POSTFIX, False)
            return f"{left} {node.op} {right}"
        if isinstance(node, Not):
            return f"not {self.wrap(node.operand, _NOT, False)}"
        if isinstance(node, BoolOp):
            lvl = _LEVEL[node.op]
            if node.op == "implies":
                left = self.wrap(node.left, lvl + 1, lead)
                right = self.wrap(node.right, lvl, False)
            else:
                left = self.wrap(node.left, lvl, lead)
                right = self.wrap(node.right, lvl + 1, False)
            return f"{left} {node.op} {right}"
        raise TypeError(f"not an expression node: {node!r}")


def print_constraint(expr: ConstraintExpr) -> str:
    """Canonical text for ``expr``; parsing it yields an equal tree."""
    return _Printer(expr.context).fmt(expr.body, True)
