"""Merging two metamodels under an equivalence specification.

The result starts as the disjoint union of both inputs.  Each spec entry then
relates one class of the left metamodel to one class of the right:

``identity``
    both classes collapse into one merged class whose features are the union
    of the two definitions; every reference is renamed.
``interface``
    a new class inherits the association participation (and attributes) of
    both, but none of their containment rules.
``implementation``
    a new class inherits the containment rules, as container and as
    containee, of both, but none of their association participation.

Identity merging can make a class subject to rules it never had before (a
``State`` now carries the containment rules of ``System`` and vice versa).
To keep merging conservative, lower bounds of rules that become shared that
way are relaxed to 0, and upper bounds of containment rules whose child class
gained new instances are lifted.  Every relaxation is listed in the report.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field

from . import meta_core as mc
from .constraints import print_constraint
from .errors import (
    DuplicateSpecEntry,
    MergeConflict,
    NameCollision,
    UnknownClassInSpec,
)
from .meta_core import (
    AssociationDef,
    ConstraintRef,
    ContainmentRule,
    MetaClass,
    Metamodel,
    Multiplicity,
    RoleDef,
)
from .model_store import Model, check_conformance

IDENTITY = "identity"
INTERFACE = "interface"
IMPLEMENTATION = "implementation"
MODES = (IDENTITY, INTERFACE, IMPLEMENTATION)


@dataclass(frozen=True)
class EquivalenceEntry:
    left: str
    right: str
    mode: str = IDENTITY
    new_name: str | None = None  # merged name for identity; defaults to ``left``


@dataclass
class EquivalenceSpec:
    entries: list[EquivalenceEntry] = field(default_factory=list)

    def mirrored(self) -> "EquivalenceSpec":
        return EquivalenceSpec(
            [EquivalenceEntry(e.right, e.left, e.mode, e.new_name or e.left) for e in self.entries]
        )


@dataclass
class MergeReport:
    produced_classes: list[str] = field(default_factory=list)
    rewritten: list[tuple[str, list[tuple[str, str]]]] = field(default_factory=list)
    flagged: list[tuple[str, str]] = field(default_factory=list)
    relaxed: list[str] = field(default_factory=list)
    renames: dict[str, str] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"PRODUCED {c}" for c in self.produced_classes]
        for name, subs in self.rewritten:
            detail = ", ".join(f"{a} -> {b}" for a, b in subs) or "unchanged"
            out.append(f"REWRITTEN {name}: {detail}")
        out += [f"FLAGGED {name}: {reason}" for name, reason in self.flagged]
        out += [f"RELAXED {r}" for r in self.relaxed]
        return out


def _check_spec(mm1: Metamodel, mm2: Metamodel, spec: EquivalenceSpec) -> None:
    left_seen: set[str] = set()
    right_seen: set[str] = set()
    for e in spec.entries:
        if e.mode not in MODES:
            raise MergeConflict(f"unknown merge mode {e.mode!r}")
        if e.left not in mm1.classes:
            raise UnknownClassInSpec(f"{e.left} is not a class of {mm1.name}")
        if e.right not in mm2.classes:
            raise UnknownClassInSpec(f"{e.right} is not a class of {mm2.name}")
        if e.left in left_seen or e.right in right_seen:
            raise DuplicateSpecEntry(f"{e.left} ~ {e.right}: class already used by another entry")
        if e.mode != IDENTITY and not e.new_name:
            raise MergeConflict(f"{e.mode} entry {e.left} ~ {e.right} needs a new class name")
        left_seen.add(e.left)
        right_seen.add(e.right)


def _check_disjoint(mm1: Metamodel, mm2: Metamodel) -> None:
    names1 = set(mm1.classes) | set(mm1.associations)
    names2 = set(mm2.classes) | set(mm2.associations)
    shared = sorted(names1 & names2)
    if shared:
        raise NameCollision(f"{mm1.name} and {mm2.name} share names: {', '.join(shared)}")
    dup = sorted({c.name for c in mm1.constraints} & {c.name for c in mm2.constraints})
    if dup:
        raise NameCollision(f"{mm1.name} and {mm2.name} share constraint names: {', '.join(dup)}")


def _rename_class(cls: MetaClass, ren: dict[str, str], name: str | None = None) -> MetaClass:
    def r(names):
        return list(dict.fromkeys(ren.get(n, n) for n in names))

    return MetaClass(
        name=name or ren.get(cls.name, cls.name),
        is_abstract=cls.is_abstract,
        attributes=list(cls.attributes),
        superclasses=r(cls.superclasses),
        containments=[ContainmentRule(ren.get(c.child, c.child), c.multiplicity) for c in cls.containments],
        glyph=cls.glyph,
        interface_supers=r(cls.interface_supers),
        implementation_supers=r(cls.implementation_supers),
    )


def _union_class(name: str, a: MetaClass, b: MetaClass, labels: tuple[str, str]) -> MetaClass:
    attrs = {x.name: x for x in a.attributes}
    for x in b.attributes:
        prev = attrs.get(x.name)
        if prev is None:
            attrs[x.name] = x
        elif prev != x:
            raise MergeConflict(
                f"attribute {x.name} differs between {labels[0]} ({prev.value_type} = {prev.default!r}) "
                f"and {labels[1]} ({x.value_type} = {x.default!r})"
            )
    rules: dict[str, Multiplicity] = {}
    for rule in a.containments + b.containments:
        m = rules.get(rule.child)
        if m is None:
            rules[rule.child] = rule.multiplicity
        else:
            hi = None if m.max is None or rule.multiplicity.max is None else max(m.max, rule.multiplicity.max)
            rules[rule.child] = Multiplicity(min(m.min, rule.multiplicity.min), hi)

    def union(x, y):
        return [n for n in dict.fromkeys(x + y) if n != name]

    return MetaClass(
        name=name,
        is_abstract=a.is_abstract and b.is_abstract,
        attributes=list(attrs.values()),
        superclasses=union(a.superclasses, b.superclasses),
        containments=[ContainmentRule(c, m) for c, m in rules.items()],
        glyph=a.glyph if a.glyph is not None else b.glyph,
        interface_supers=union(a.interface_supers, b.interface_supers),
        implementation_supers=union(a.implementation_supers, b.implementation_supers),
    )


def _relax(mm: Metamodel, merged_names: list[str], report: MergeReport) -> None:
    shared: set[str] = set()
    for n in merged_names:
        shared.update(mc.attribute_sources(mm, n))
    for cname in mm.classes:
        if cname not in shared:
            continue
        cls = mm.classes[cname]
        new_rules = []
        for rule in cls.containments:
            m = rule.multiplicity
            hi = None if rule.child in shared else m.max
            if m.min != 0 or hi != m.max:
                report.relaxed.append(f"{cname} contains {rule.child} {m} -> {Multiplicity(0, hi)}")
                rule = ContainmentRule(rule.child, Multiplicity(0, hi))
            new_rules.append(rule)
        cls.containments = new_rules
    for assoc in mm.associations.values():
        roles = []
        for r in assoc.roles:
            if r.endpoint in shared and r.multiplicity.min != 0:
                m = Multiplicity(0, r.multiplicity.max)
                report.relaxed.append(f"{assoc.name}.{r.name} {r.multiplicity} -> {m}")
                r = RoleDef(r.name, r.endpoint, m)
            roles.append(r)
        assoc.roles = roles


def merge(
    mm1: Metamodel,
    mm2: Metamodel,
    spec: EquivalenceSpec,
    name: str | None = None,
    version: int = 1,
) -> tuple[Metamodel, MergeReport]:
    """Merge ``mm1`` and ``mm2`` under ``spec``; inputs are left untouched."""
    _check_disjoint(mm1, mm2)
    _check_spec(mm1, mm2, spec)
    report = MergeReport()

    ren: dict[str, str] = {}
    identity = [e for e in spec.entries if e.mode == IDENTITY]
    for e in identity:
        target = e.new_name or e.left
        ren[e.left] = target
        ren[e.right] = target
    report.renames = dict(ren)

    taken = (set(mm1.classes) | set(mm1.associations) | set(mm2.classes) | set(mm2.associations)) - set(ren)
    produced: list[str] = []
    for e in spec.entries:
        new = ren[e.left] if e.mode == IDENTITY else e.new_name
        if new in taken or new in produced:
            raise NameCollision(f"merged class name {new} is already in use")
        produced.append(new)
    report.produced_classes = produced

    merged = Metamodel(name or f"{mm1.name}_{mm2.name}", version)
    right_of = {e.left: e.right for e in identity}
    right_merged = set(right_of.values())
    for src in (mm1, mm2):
        for cls in src.classes.values():
            if cls.name in right_merged:
                continue
            if cls.name in right_of:
                a = _rename_class(cls, ren)
                b = _rename_class(mm2.classes[right_of[cls.name]], ren)
                merged.add_class(_union_class(ren[cls.name], a, b, (cls.name, right_of[cls.name])))
            else:
                merged.add_class(_rename_class(cls, ren))
    for e in spec.entries:
        if e.mode == INTERFACE:
            merged.add_class(MetaClass(e.new_name, interface_supers=[e.left, e.right]))
        elif e.mode == IMPLEMENTATION:
            merged.add_class(MetaClass(e.new_name, implementation_supers=[e.left, e.right]))
    for src in (mm1, mm2):
        for assoc in src.associations.values():
            merged.add_association(
                AssociationDef(
                    assoc.name,
                    [RoleDef(r.name, ren.get(r.endpoint, r.endpoint), r.multiplicity) for r in assoc.roles],
                )
            )

    inherit = {}
    for e in spec.entries:
        if e.mode != IDENTITY:
            inherit[e.left] = inherit[e.right] = e
    for src in (mm1, mm2):
        for c in src.constraints:
            ctx = c.expr.context
            if ctx in inherit:
                e = inherit[ctx]
                merged.constraints.append(copy.deepcopy(c))
                report.flagged.append(
                    (c.name, f"context {ctx} is inherited by {e.new_name} ({e.mode} mode); review whether it should apply")
                )
            elif ctx in ren:
                expr = dataclasses.replace(c.expr, context=ren[ctx])
                merged.constraints.append(ConstraintRef(c.name, print_constraint(expr), expr))
                subs = [(ctx, ren[ctx])] if ren[ctx] != ctx else []
                report.rewritten.append((c.name, subs))
            else:
                merged.constraints.append(copy.deepcopy(c))
                report.rewritten.append((c.name, []))

    if identity:
        _relax(merged, [ren[e.left] for e in identity], report)

    diags = mc.validate_metamodel(merged)
    if diags:
        raise MergeConflict("merged metamodel is invalid: " + "; ".join(str(d) for d in diags))
    return merged, report


def check_merged_conformance(model: Model, merged: Metamodel, **kw):
    return check_conformance(model, merged, **kw)


def translate_model(model: Model, merged: Metamodel, renames: dict[str, str]) -> Model:
    """Copy of ``model`` retargeted at ``merged`` with class names substituted."""
    out = copy.deepcopy(model)
    out.metamodel_name = merged.name
    out.metamodel_version = merged.version
    for e in out.entities.values():
        e.class_name = renames.get(e.class_name, e.class_name)
    return out
