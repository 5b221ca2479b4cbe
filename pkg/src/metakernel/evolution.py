"""Metamodel diffs and their impact on existing models.

Versions are matched by name only; a renamed class shows up as one removal
plus one addition.  Nothing here edits a model: the report says which
elements stop conforming and why, and migration is left to the user.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import print_constraint
from .meta_core import Metamodel
from .model_store import Model, check_conformance

ORPHANED = "Orphaned"
ATTRIBUTE_INVALID = "AttributeInvalid"
CONTAINMENT_INVALID = "ContainmentInvalid"
LINK_INVALID = "LinkInvalid"
NEW_CONSTRAINT_VIOLATION = "NewConstraintViolation"
IMPACT_KINDS = (ORPHANED, ATTRIBUTE_INVALID, CONTAINMENT_INVALID, LINK_INVALID, NEW_CONSTRAINT_VIOLATION)

_IMPACT_OF_CODE = {
    "unknown-class": ORPHANED,
    "abstract-class": ORPHANED,
    "unknown-attribute": ATTRIBUTE_INVALID,
    "attribute-type": ATTRIBUTE_INVALID,
    "illegal-containment": CONTAINMENT_INVALID,
    "containment-multiplicity": CONTAINMENT_INVALID,
    "unknown-association": LINK_INVALID,
    "link-roles": LINK_INVALID,
    "role-multiplicity": LINK_INVALID,
    "constraint": NEW_CONSTRAINT_VIOLATION,
}


@dataclass(frozen=True)
class Change:
    kind: str  # ClassAdded, AttributeRetyped, RoleChanged, ...
    subject: str  # class, association or constraint name
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} {self.subject}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class Impact:
    element: int
    path: str
    kind: str
    message: str


def _attr_sig(a) -> str:
    return f"{a.value_type} = {a.default!r}"


def _diff_class(c1, c2, out: list[Change]) -> None:
    n = c1.name
    if c1.is_abstract != c2.is_abstract:
        out.append(Change("AbstractnessChanged", n, "abstract" if c2.is_abstract else "concrete"))
    if (c1.superclasses, c1.interface_supers, c1.implementation_supers) != (
        c2.superclasses,
        c2.interface_supers,
        c2.implementation_supers,
    ):
        out.append(Change("SuperclassesChanged", n, f"{c1.all_supers()} -> {c2.all_supers()}"))
    a1 = {a.name: a for a in c1.attributes}
    a2 = {a.name: a for a in c2.attributes}
    for k, a in a1.items():
        if k not in a2:
            out.append(Change("AttributeRemoved", n, k))
        elif a2[k] != a:
            out.append(Change("AttributeRetyped", n, f"{k}: {_attr_sig(a)} -> {_attr_sig(a2[k])}"))
    for k, a in a2.items():
        if k not in a1:
            out.append(Change("AttributeAdded", n, f"{k}: {_attr_sig(a)}"))
    r1 = {r.child: r.multiplicity for r in c1.containments}
    r2 = {r.child: r.multiplicity for r in c2.containments}
    for child in list(r1) + [c for c in r2 if c not in r1]:
        before, after = r1.get(child), r2.get(child)
        if before != after:
            b = f"{child} {before}" if before else "none"
            a = f"{child} {after}" if after else "none"
            out.append(Change("ContainmentChanged", n, f"{b} -> {a}"))
    if c1.glyph != c2.glyph:
        out.append(Change("GlyphChanged", n, f"{c1.glyph!r} -> {c2.glyph!r}"))


def diff_metamodels(v1: Metamodel, v2: Metamodel) -> list[Change]:
    out: list[Change] = []
    for name, c1 in v1.classes.items():
        if name not in v2.classes:
            out.append(Change("ClassRemoved", name))
        else:
            _diff_class(c1, v2.classes[name], out)
    out += [Change("ClassAdded", n) for n in v2.classes if n not in v1.classes]

    for name, a1 in v1.associations.items():
        a2 = v2.associations.get(name)
        if a2 is None:
            out.append(Change("AssociationRemoved", name))
            continue
        roles1 = {r.name: r for r in a1.roles}
        roles2 = {r.name: r for r in a2.roles}
        for rn in list(roles1) + [r for r in roles2 if r not in roles1]:
            x, y = roles1.get(rn), roles2.get(rn)
            if x != y:
                b = f"{x.endpoint} {x.multiplicity}" if x else "none"
                a = f"{y.endpoint} {y.multiplicity}" if y else "none"
                out.append(Change("RoleChanged", name, f"{rn}: {b} -> {a}"))
    out += [Change("AssociationAdded", n) for n in v2.associations if n not in v1.associations]

    k1 = {c.name: c for c in v1.constraints}
    k2 = {c.name: c for c in v2.constraints}
    for name, c in k1.items():
        if name not in k2:
            out.append(Change("ConstraintRemoved", name))
        elif print_constraint(c.expr) != print_constraint(k2[name].expr):
            out.append(Change("ConstraintTextChanged", name))
    out += [Change("ConstraintAdded", n) for n in k2 if n not in k1]
    return out


def evolution_report(model: Model, v1: Metamodel, v2: Metamodel) -> list[Impact]:
    """One impact per conformance diagnostic of ``model`` against ``v2``.

    ``v1`` is the version the model was written for; only ``v2`` decides
    the impacts.  Entries are grouped by impact kind in the order of
    :data:`IMPACT_KINDS`.
    """
    diags = check_conformance(model, v2, check_reference=False)
    impacts = [Impact(d.element, d.location, _IMPACT_OF_CODE[d.code], d.message) for d in diags]
    order = {k: i for i, k in enumerate(IMPACT_KINDS)}
    return sorted(impacts, key=lambda i: order[i.kind])
