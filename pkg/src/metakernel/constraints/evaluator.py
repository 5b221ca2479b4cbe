"""Evaluate constraints over a model.

A constraint is evaluated once per entity of its context class (subclasses
included).  When the body is a top-level ``forAll``, each failing element
is reported once as the violation's witness, so a link attached to two context
entities yields one violation, not two.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import meta_core as mc
from ..errors import EvalError
from .ast import (
    AttributeAccess,
    BoolOp,
    CollectionOp,
    Compare,
    ConstraintExpr,
    Literal,
    NavCall,
    Not,
    Self,
    VarRef,
)


@dataclass(frozen=True)
class EntityVal:
    id: int


@dataclass(frozen=True)
class LinkVal:
    id: int


@dataclass(frozen=True)
class EndVal:
    link: int
    role: str


@dataclass(frozen=True)
class Violation:
    context: int
    element: int | None = None  # offending link or entity id, if narrower than the context
    message: str | None = None


@dataclass
class ConstraintResult:
    name: str
    overall: bool
    violations: list[Violation] = field(default_factory=list)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def values_equal(a, b) -> bool:
    if _is_number(a) and _is_number(b):
        return a == b
    if type(a) is not type(b):
        return False
    return a == b


class Evaluator:
    def __init__(self, model, mm):
        self.model = model
        self.mm = mm
        by_entity: dict[int, list[int]] = {}
        for l in sorted(model.links.values(), key=lambda l: l.id):
            for eid in dict.fromkeys(l.ends.values()):
                by_entity.setdefault(eid, []).append(l.id)
        self._by_entity = by_entity
        self._defaults: dict[str, dict] = {}

    def entity(self, v, what: str):
        if not isinstance(v, EntityVal):
            raise EvalError("NotAnEntity", f"{what} applied to {v!r}")
        return self.model.entities[v.id]

    def default_of(self, cls: str, attr: str):
        table = self._defaults.get(cls)
        if table is None:
            table = {a.name: a.default for a in mc.effective_attributes(self.mm, cls)} if cls in self.mm.classes else {}
            self._defaults[cls] = table
        if attr not in table:
            raise EvalError("NoAttribute", f"{cls} has no attribute {attr}")
        return table[attr]

    def eval(self, node, env: dict):
        if isinstance(node, Self):
            return env["self"]
        if isinstance(node, VarRef):
            return env[node.name]
        if isinstance(node, Literal):
            return node.value
        if isinstance(node, AttributeAccess):
            e = self.entity(self.eval(node.receiver, env), f".{node.name}")
            if node.name in e.values:
                return e.values[node.name]
            return self.default_of(e.class_name, node.name)
        if isinstance(node, NavCall):
            return self.nav(node, env)
        if isinstance(node, CollectionOp):
            coll = self.eval(node.receiver, env)
            if not isinstance(coll, tuple):
                raise EvalError("BadOperand", f"{node.op} applied to {coll!r}")
            if node.op == "size":
                return len(coll)
            if node.op == "theOnly":
                if len(coll) != 1:
                    raise EvalError("NonSingleton", f"theOnly() on a collection of size {len(coll)}")
                return coll[0]
            want = node.op == "exists"
            for item in coll:
                inner = dict(env)
                inner[node.var] = item
                if self.truth(node.body, inner) == want:
                    return want
            return not want
        if isinstance(node, Compare):
            a = self.eval(node.left, env)
            b = self.eval(node.right, env)
            if node.op == "=":
                return values_equal(a, b)
            if node.op == "<>":
                return not values_equal(a, b)
            if not (_is_number(a) and _is_number(b)):
                raise EvalError("BadOperand", f"cannot order {a!r} and {b!r}")
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[node.op]
        if isinstance(node, BoolOp):
            left = self.truth(node.left, env)
            if node.op == "and":
                return left and self.truth(node.right, env)
            if node.op == "or":
                return left or self.truth(node.right, env)
            return (not left) or self.truth(node.right, env)
        if isinstance(node, Not):
            return not self.truth(node.operand, env)
        raise EvalError("BadOperand", f"cannot evaluate {type(node).__name__}")

    def truth(self, node, env) -> bool:
        v = self.eval(node, env)
        if not isinstance(v, bool):
            raise EvalError("BadOperand", f"expected a boolean, got {v!r}")
        return v

    def nav(self, node: NavCall, env):
        recv = self.eval(node.receiver, env)
        op = node.op
        if op == "attachingConnections":
            e = self.entity(recv, op)
            kind = node.args[0].name
            return tuple(
                LinkVal(lid)
                for lid in self._by_entity.get(e.id, ())
                if self.model.links[lid].association == kind
            )
        if op == "connectionPoints":
            if not isinstance(recv, LinkVal):
                raise EvalError("BadOperand", f"connectionPoints applied to {recv!r}")
            role = node.args[0].value
            link = self.model.links[recv.id]
            return (EndVal(recv.id, role),) if role in link.ends else ()
        if op == "target":
            if not isinstance(recv, EndVal):
                raise EvalError("BadOperand", f"target applied to {recv!r}")
            return EntityVal(self.model.links[recv.link].ends[recv.role])
        if op == "parent":
            e = self.entity(recv, op)
            if e.parent is None:
                raise EvalError("NoParent", f"{e.name} (#{e.id}) has no parent")
            return EntityVal(e.parent)
        raise EvalError("BadOperand", f"unknown operation {op}")


def _witness(item) -> int | None:
    if isinstance(item, EntityVal):
        return item.id
    if isinstance(item, LinkVal):
        return item.id
    if isinstance(item, EndVal):
        return item.link
    return None


def context_entities(model, mm, cls: str) -> list[int]:
    out = []
    for e in sorted(model.entities.values(), key=lambda e: e.id):
        if e.class_name in mm.classes and cls in mc.supertypes(mm, e.class_name):
            out.append(e.id)
    return out


def eval_constraint(model, mm, expr: ConstraintExpr, name: str = "") -> ConstraintResult:
    ev = Evaluator(model, mm)
    violations: list[Violation] = []
    reported: set[int] = set()
    body = expr.body
    for eid in context_entities(model, mm, expr.context):
        env = {"self": EntityVal(eid)}
        if isinstance(body, CollectionOp) and body.op == "forAll":
            try:
                coll = ev.eval(body.receiver, env)
                if not isinstance(coll, tuple):
                    raise EvalError("BadOperand", f"forAll applied to {coll!r}")
            except EvalError as err:
                violations.append(Violation(eid, None, str(err)))
                continue
            for item in coll:
                inner = dict(env)
                inner[body.var] = item
                w = _witness(item)
                try:
                    ok = ev.truth(body.body, inner)
                    msg = None
                except EvalError as err:
                    ok, msg = False, str(err)
                if ok:
                    continue
                if w is not None:
                    if w in reported:
                        continue
                    reported.add(w)
                violations.append(Violation(eid, w, msg))
        else:
            try:
                ok = ev.truth(body, env)
                msg = None
            except EvalError as err:
                ok, msg = False, str(err)
            if not ok:
                violations.append(Violation(eid, None, msg))
    return ConstraintResult(name, not violations, violations)


def eval_all(model, mm) -> tuple[list[ConstraintResult], bool]:
    results = [eval_constraint(model, mm, ref.expr, ref.name) for ref in mm.constraints]
    return results, all(r.overall for r in results)
