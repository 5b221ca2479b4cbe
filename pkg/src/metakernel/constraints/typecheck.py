"""Static kind checking of constraint expressions.

Kinds: ``entity`` (optionally with a known class), ``link`` and ``end``
(optionally with a known association), ``coll`` of some element kind, and the
scalars ``int``, ``real``, ``string``, ``bool``.  ``value`` is a scalar whose
type is only known at evaluation time (attribute reads without a metamodel).
Metamodel-dependent name checks run only when a metamodel is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
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


@dataclass(frozen=True)
class T:
    kind: str
    detail: str | None = None  # class name for entity, association for link/end
    elem: "T | None" = None  # element type for coll
    role: str | None = None  # role for end

    def __str__(self) -> str:
        if self.kind == "coll":
            return f"collection of {self.elem}"
        return self.kind if self.detail is None else f"{self.kind}<{self.detail}>"


BOOL = T("bool")
INT = T("int")
VALUE = T("value")
SCALARS = {"int", "real", "string", "bool", "value"}
_NUMERIC = {"int", "real", "value"}
_ATTR_KIND = {"integer": "int", "real": "real", "string": "string", "boolean": "bool", "enum": "string"}


class _Fail(Exception):
    def __init__(self, msg, pos):
        self.msg = msg
        self.pos = pos


class _Checker:
    def __init__(self, mm, context: str):
        self.mm = mm
        self.context = context

    def fail(self, msg, node):
        raise _Fail(msg, getattr(node, "pos", (1, 1)))

    def check(self, node, env: dict[str, T]) -> T:
        if isinstance(node, Self):
            return T("entity", self.context)
        if isinstance(node, VarRef):
            if node.name not in env:
                self.fail(f"unbound variable {node.name}", node)
            return env[node.name]
        if isinstance(node, Literal):
            v = node.value
            if isinstance(v, bool):
                return BOOL
            if isinstance(v, int):
                return INT
            if isinstance(v, float):
                return T("real")
            return T("string")
        if isinstance(node, Kind):
            self.fail(f"kind name {node.name} used as a value", node)
        if isinstance(node, AttributeAccess):
            recv = self.check(node.receiver, env)
            if recv.kind != "entity":
                self.fail(f"attribute {node.name} read from {recv}, expected an entity", node)
            return self.attribute_type(recv.detail, node)
        if isinstance(node, NavCall):
            return self.nav(node, env)
        if isinstance(node, CollectionOp):
            recv = self.check(node.receiver, env)
            if recv.kind != "coll":
                self.fail(f"{node.op} applied to {recv}, expected a collection", node)
            if node.op == "size":
                return INT
            if node.op == "theOnly":
                return recv.elem
            inner = dict(env)
            inner[node.var] = recv.elem
            body = self.check(node.body, inner)
            if body.kind not in ("bool", "value"):
                self.fail(f"{node.op} body is {body}, expected a boolean", node.body)
            return BOOL
        if isinstance(node, Compare):
            left = self.check(node.left, env)
            right = self.check(node.right, env)
            if node.op not in ("=", "<>"):
                for side in (left, right):
                    if side.kind not in _NUMERIC:
                        self.fail(f"ordering {node.op} needs numbers, found {side}", node)
            return BOOL
        if isinstance(node, BoolOp):
            for side in (node.left, node.right):
                t = self.check(side, env)
                if t.kind not in ("bool", "value"):
                    self.fail(f"{node.op} operand is {t}, expected a boolean", side)
            return BOOL
        if isinstance(node, Not):
            t = self.check(node.operand, env)
            if t.kind not in ("bool", "value"):
                self.fail(f"not operand is {t}, expected a boolean", node.operand)
            return BOOL
        self.fail(f"unknown node {type(node).__name__}", node)

    def nav(self, node: NavCall, env) -> T:
        recv = self.check(node.receiver, env)
        op = node.op
        if op == "attachingConnections":
            if recv.kind != "entity":
                self.fail(f"attachingConnections applied to {recv}, expected an entity", node)
            (kind,) = node.args
            assoc = kind.name
            if self.mm is not None:
                if assoc not in self.mm.associations:
                    if assoc in self.mm.classes:
                        self.fail(f"{assoc} is a class, not an association kind", kind)
                    self.fail(f"unknown association kind {assoc}", kind)
            return T("coll", elem=T("link", assoc))
        if op == "connectionPoints":
            if recv.kind != "link":
                self.fail(f"connectionPoints applied to {recv}, expected a link", node)
            (role,) = node.args
            if self.mm is not None and recv.detail in self.mm.associations:
                if self.mm.associations[recv.detail].role(role.value) is None:
                    self.fail(f"association {recv.detail} has no role {role.value!r}", role)
            return T("coll", elem=T("end", recv.detail, role=role.value))
        if op == "target":
            if recv.kind != "end":
                self.fail(f"target applied to {recv}, expected a link end", node)
            cls = None
            if self.mm is not None and recv.detail in self.mm.associations and recv.role is not None:
                r = self.mm.associations[recv.detail].role(recv.role)
                cls = r.endpoint if r is not None else None
            return T("entity", cls)
        if op == "parent":
            if recv.kind != "entity":
                self.fail(f"parent applied to {recv}, expected an entity", node)
            return T("entity")
        self.fail(f"unknown operation {op}", node)

    def attribute_type(self, cls: str | None, node: AttributeAccess) -> T:
        if self.mm is None or cls is None or cls not in self.mm.classes:
            return VALUE
        from ..meta_core import effective_attributes, supertypes

        for a in effective_attributes(self.mm, cls):
            if a.name == node.name:
                return T(_ATTR_KIND[a.value_type.kind])
        # a subclass instance may still carry it
        for other in self.mm.classes:
            if cls in supertypes(self.mm, other):
                if any(a.name == node.name for a in effective_attributes(self.mm, other)):
                    return VALUE
        self.fail(f"class {cls} has no attribute {node.name}", node)


def typecheck_located(expr: ConstraintExpr, mm=None) -> list[tuple[str, tuple[int, int]]]:
    """Problems found in ``expr`` with their source positions (at most one)."""
    if mm is not None and expr.context not in mm.classes:
        return [(f"unknown context class {expr.context}", (1, 1))]
    checker = _Checker(mm, expr.context)
    try:
        t = checker.check(expr.body, {"self": T("entity", expr.context)})
    except _Fail as f:
        return [(f.msg, f.pos)]
    if t.kind not in ("bool", "value"):
        return [(f"constraint body is {t}, expected a boolean", (1, 1))]
    return []


def typecheck(expr: ConstraintExpr, mm=None) -> list[str]:
    return [msg for msg, _ in typecheck_located(expr, mm)]
