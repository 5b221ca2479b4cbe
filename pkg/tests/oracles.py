"""Independent reference implementations used to cross-check the kernel.

Nothing here imports the kernel's closure, conformance or evaluation code;
the metamodel and model are read as plain data.
"""

from __future__ import annotations

import json
import math
import re
from collections import deque

ROOT = 0

_EDGES = {
    "extends": ("superclasses",),
    "roles": ("superclasses", "interface_supers"),
    "contain": ("superclasses", "implementation_supers"),
    "attrs": ("superclasses", "interface_supers", "implementation_supers"),
}


def closure(mm, name: str, which: str) -> set[str]:
    seen = {name}
    todo = deque([name])
    while todo:
        cls = mm.classes.get(todo.popleft())
        if cls is None:
            continue
        for edge in _EDGES[which]:
            for s in getattr(cls, edge):
                if s not in seen:
                    seen.add(s)
                    todo.append(s)
    return seen


def fits(value_type, v) -> bool:
    k = value_type.kind
    if k == "string":
        return type(v) is str
    if k == "integer":
        return type(v) is int
    if k == "real":
        return type(v) in (int, float) and math.isfinite(v)
    if k == "boolean":
        return type(v) is bool
    return type(v) is str and v in value_type.literals


def _in_bounds(n: int, m) -> bool:
    return m.min <= n and (m.max is None or n <= m.max)


def structure_ok(model, mm) -> bool:
    ents = model.entities
    known = {i for i, e in ents.items() if e.class_name in mm.classes}
    if len(known) != len(ents):
        return False
    if any(mm.classes[e.class_name].is_abstract for e in ents.values()):
        return False
    cont = {i: closure(mm, e.class_name, "contain") for i, e in ents.items()}
    roles = {i: closure(mm, e.class_name, "roles") for i, e in ents.items()}

    for e in ents.values():
        attr_defs = {}
        for c in closure(mm, e.class_name, "attrs"):
            for a in mm.classes[c].attributes:
                attr_defs[a.name] = a
        for k, v in e.values.items():
            if k not in attr_defs or not fits(attr_defs[k].value_type, v):
                return False

    # every (parent, child) pair needs a rule somewhere in the parent's closure
    for e in ents.values():
        if e.parent is None:
            continue
        p = ents[e.parent]
        if not any(r.child in cont[e.id] for c in cont[p.id] for r in mm.classes[c].containments):
            return False

    # every rule reachable from a parent bounds the matching children
    for e in ents.values():
        for c in cont[e.id]:
            for r in mm.classes[c].containments:
                n = sum(1 for k in e.children if r.child in cont[k])
                if not _in_bounds(n, r.multiplicity):
                    return False

    for l in model.links.values():
        assoc = mm.associations.get(l.association)
        if assoc is None:
            return False
        if l.container != ROOT and l.container not in ents:
            return False
        if sorted(l.ends) != sorted(r.name for r in assoc.roles):
            return False
        for r in assoc.roles:
            t = l.ends[r.name]
            if t not in ents or r.endpoint not in roles[t]:
                return False

    for assoc in mm.associations.values():
        for r in assoc.roles:
            for e in ents.values():
                if r.endpoint not in roles[e.id]:
                    continue
                n = sum(1 for l in model.links.values() if l.association == assoc.name and l.ends.get(r.name) == e.id)
                if not _in_bounds(n, r.multiplicity):
                    return False
    return True


_SIZE = re.compile(r"^(\w+)\.attachingConnections\((\w+)\)->size\(\) <= (\d+)$")
_ATTR = re.compile(r"^(\w+)\.(\w+) (=|<>|<=|>=) (.+)$")


def _parse_literal(text: str):
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    if text.startswith('"'):
        return json.loads(text)
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    return float(text)


def _num(v) -> bool:
    return type(v) in (int, float)


def _equal(a, b) -> bool:
    if _num(a) and _num(b):
        return a == b
    return type(a) is type(b) and a == b


def constraint_ok(model, mm, text: str) -> bool:
    """Evaluate one of the generator's two constraint shapes by hand."""
    m = _SIZE.match(text)
    if m:
        ctx, assoc, k = m.group(1), m.group(2), int(m.group(3))
        for e in model.entities.values():
            if ctx in closure(mm, e.class_name, "extends"):
                n = sum(1 for l in model.links.values() if l.association == assoc and e.id in l.ends.values())
                if n > k:
                    return False
        return True
    m = _ATTR.match(text)
    if not m:
        raise ValueError(f"oracle cannot evaluate {text!r}")
    ctx, attr, op, lit = m.group(1), m.group(2), m.group(3), _parse_literal(m.group(4))
    for e in model.entities.values():
        if ctx not in closure(mm, e.class_name, "extends"):
            continue
        if attr in e.values:
            v = e.values[attr]
        else:
            v = next(
                a.default
                for c in closure(mm, e.class_name, "attrs")
                for a in mm.classes[c].attributes
                if a.name == attr
            )
        if op == "=":
            ok = _equal(v, lit)
        elif op == "<>":
            ok = not _equal(v, lit)
        elif op == "<=":
            ok = v <= lit
        else:
            ok = v >= lit
        if not ok:
            return False
    return True


def well_formed(model, mm) -> bool:
    if not structure_ok(model, mm):
        return False
    from metakernel.constraints import print_constraint

    return all(constraint_ok(model, mm, print_constraint(c.expr)) for c in mm.constraints)


def isomorphic_copy(model, proto_root: int, clone_root: int) -> bool:
    """Brute-force check that two subtrees match, restricted to internal links.

    Children are matched by trying every bijection between same-class
    sibling groups, so no correspondence table is consulted.
    """
    from itertools import permutations

    ents = model.entities

    def subtree(r):
        out, todo = [], [r]
        while todo:
            x = todo.pop()
            out.append(x)
            todo.extend(ents[x].children)
        return set(out)

    sp, sc = subtree(proto_root), subtree(clone_root)
    if len(sp) != len(sc):
        return False

    def internal(inside):
        return [l for l in model.links.values() if l.container in inside and all(v in inside for v in l.ends.values())]

    lp, lc = internal(sp), internal(sc)
    if len(lp) != len(lc):
        return False

    def match(a, b, mapping):
        if ents[a].class_name != ents[b].class_name:
            return []
        ca, cb = ents[a].children, ents[b].children
        if len(ca) != len(cb):
            return []
        results = []
        for perm in permutations(cb):
            partial = [{**mapping, a: b}]
            for x, y in zip(ca, perm):
                nxt = []
                for m in partial:
                    nxt.extend(match(x, y, m))
                partial = nxt
                if not partial:
                    break
            results.extend(partial)
            if len(results) > 50:
                break
        return results

    def link_sig(l, f):
        return (l.association, f[l.container], tuple(sorted((r, f[v]) for r, v in l.ends.items())))

    target = sorted(link_sig(l, {x: x for x in sc}) for l in lc)
    for f in match(proto_root, clone_root, {}):
        if sorted(link_sig(l, f) for l in lp) == target:
            return True
    return False
