"""Instance graphs: entities in a containment forest, links between them.

Entity and link ids come from one monotone counter per model and are never
reused.  Links live inside a container entity; links at model scope use the
synthetic container :data:`ROOT`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import meta_core as mc
from .errors import (
    AbstractInstantiation,
    DuplicateName,
    IllegalContainment,
    MetamodelMismatch,
    MissingRole,
    RoleTypeMismatch,
    TypeMismatch,
    UnknownAssociation,
    UnknownAttribute,
    UnknownClass,
    UnknownEntity,
    UnknownRole,
)
from .meta_core import Diagnostic, Metamodel

ROOT = 0


@dataclass
class CloneInfo:
    origin: int
    modified: set[str] = field(default_factory=set)


@dataclass
class Entity:
    id: int
    class_name: str
    name: str
    values: dict[str, Any] = field(default_factory=dict)
    extensions: dict[str, str] = field(default_factory=dict)
    parent: int | None = None
    children: list[int] = field(default_factory=list)
    clone_info: CloneInfo | None = None


@dataclass
class Link:
    id: int
    association: str
    ends: dict[str, int]
    container: int = ROOT


@dataclass
class Model:
    id: str
    metamodel_name: str
    metamodel_version: int
    entities: dict[int, Entity] = field(default_factory=dict)
    links: dict[int, Link] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)
    next_id: int = 1
    # clones.CorrespondenceMap instances, in registration order
    correspondences: list = field(default_factory=list)

    def entity(self, eid: int) -> Entity:
        try:
            return self.entities[eid]
        except KeyError:
            raise UnknownEntity(f"#{eid}") from None

    def link(self, lid: int) -> Link:
        try:
            return self.links[lid]
        except KeyError:
            raise UnknownEntity(f"link #{lid}") from None

    def fresh_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def siblings(self, parent: int | None) -> list[int]:
        return self.roots if parent is None else self.entities[parent].children


def new_model(mm: Metamodel, model_id: str = "model") -> Model:
    return Model(model_id, mm.name, mm.version)


# ---------------------------------------------------------------------------
# names and paths


def valid_entity_name(name: str) -> bool:
    return (
        isinstance(name, str)
        and name != ""
        and "/" not in name
        and not name.startswith("#")
        and name.isprintable()
        and name.strip() == name
    )


def _unique_name(model: Model, parent: int | None, base: str) -> str:
    taken = {model.entities[c].name for c in model.siblings(parent)}
    if base not in taken:
        return base
    k = 2
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def _claim_name(model: Model, parent: int | None, name: str | None, default: str) -> str:
    if name is None:
        return _unique_name(model, parent, default)
    if not valid_entity_name(name):
        raise DuplicateName(f"invalid entity name {name!r}")
    if any(model.entities[c].name == name for c in model.siblings(parent)):
        raise DuplicateName(f"{name!r} already exists here")
    return name


def entity_path(model: Model, eid: int) -> str:
    parts = []
    cur: int | None = eid
    while cur is not None:
        e = model.entities.get(cur)
        if e is None:
            break
        parts.append(e.name)
        cur = e.parent
    return "/" + "/".join(reversed(parts))


def link_path(model: Model, lid: int) -> str:
    link = model.links[lid]
    base = "" if link.container == ROOT or link.container not in model.entities else entity_path(model, link.container)
    return f"{base}/{link.association}#{lid}"


def element_path(model: Model, element: int | None) -> str:
    if element is None:
        return "/"
    if element in model.entities:
        return entity_path(model, element)
    if element in model.links:
        return link_path(model, element)
    return f"#{element}"


def resolve(model: Model, ref: str) -> int:
    """Entity id for ``/A/B`` style paths or ``#12`` ids."""
    ref = ref.strip()
    if ref.startswith("#"):
        try:
            eid = int(ref[1:])
        except ValueError:
            raise UnknownEntity(ref) from None
        model.entity(eid)
        return eid
    parts = [p for p in ref.split("/") if p]
    if not parts:
        raise UnknownEntity(ref)
    level = model.roots
    found: int | None = None
    for p in parts:
        found = next((c for c in level if model.entities[c].name == p), None)
        if found is None:
            raise UnknownEntity(ref)
        level = model.entities[found].children
    return found


def subtree(model: Model, eid: int) -> list[int]:
    """Pre-order ids of ``eid`` and all its descendants."""
    out = []
    stack = [eid]
    while stack:
        cur = stack.pop()
        out.append(cur)
        stack.extend(reversed(model.entities[cur].children))
    return out


def ancestors(model: Model, eid: int) -> list[int]:
    """``eid`` followed by its ancestors up to the root."""
    out = []
    cur: int | None = eid
    while cur is not None:
        out.append(cur)
        cur = model.entities[cur].parent
    return out


# ---------------------------------------------------------------------------
# editing


def _check_value(mm: Metamodel, cls: str, attr: str, value: Any) -> Any:
    for a in mc.effective_attributes(mm, cls):
        if a.name == attr:
            if not a.value_type.accepts(value):
                raise TypeMismatch(f"{cls}.{attr} expects {a.value_type}, got {value!r}")
            return a.value_type.coerce(value)
    raise UnknownAttribute(f"{cls}.{attr}")


def instantiate(
    model: Model,
    mm: Metamodel,
    class_name: str,
    parent: int | None = None,
    name: str | None = None,
) -> int:
    cls = mm.classes.get(class_name)
    if cls is None:
        raise UnknownClass(class_name)
    if cls.is_abstract:
        raise AbstractInstantiation(class_name)
    if parent is not None:
        p = model.entity(parent)
        if p.class_name not in mm.classes:
            raise UnknownClass(p.class_name)
        if not mc.can_contain(mm, p.class_name, class_name):
            raise IllegalContainment(f"{p.class_name} cannot contain {class_name}")
    eid = model.next_id
    ename = _claim_name(model, parent, name, f"{class_name}{eid}")
    model.fresh_id()
    values = {a.name: a.default for a in mc.effective_attributes(mm, class_name)}
    model.entities[eid] = Entity(eid, class_name, ename, values, parent=parent)
    model.siblings(parent).append(eid)
    return eid


def connect(
    model: Model,
    mm: Metamodel,
    association: str,
    ends: dict[str, int],
    container: int = ROOT,
) -> int:
    assoc = mm.associations.get(association)
    if assoc is None:
        raise UnknownAssociation(association)
    if container != ROOT:
        model.entity(container)
    for r in assoc.roles:
        if r.name not in ends:
            raise MissingRole(f"{association} link lacks role {r.name}")
    for role_name, eid in ends.items():
        r = assoc.role(role_name)
        if r is None:
            raise UnknownRole(f"{association} has no role {role_name}")
        e = model.entity(eid)
        if e.class_name not in mm.classes or not mc.plays_role(mm, e.class_name, r.endpoint):
            raise RoleTypeMismatch(f"{e.class_name} cannot play {association}.{role_name} ({r.endpoint})")
    lid = model.fresh_id()
    model.links[lid] = Link(lid, association, {r.name: ends[r.name] for r in assoc.roles}, container)
    return lid


def set_attribute(model: Model, mm: Metamodel, eid: int, attr: str, value: Any) -> None:
    """Store a value; on a clone the attribute becomes locally modified."""
    e = model.entity(eid)
    if e.class_name not in mm.classes:
        raise UnknownClass(e.class_name)
    e.values[attr] = _check_value(mm, e.class_name, attr, value)
    if e.clone_info is not None:
        e.clone_info.modified.add(attr)


def get_attribute(model: Model, mm: Metamodel, eid: int, attr: str) -> Any:
    e = model.entity(eid)
    if attr in e.values:
        return e.values[attr]
    for a in mc.effective_attributes(mm, e.class_name):
        if a.name == attr:
            return a.default
    raise UnknownAttribute(f"{e.class_name}.{attr}")


def annotate(model: Model, eid: int, name: str, value: str) -> None:
    e = model.entity(eid)
    if not isinstance(name, str) or not mc.IDENT_RE.match(name):
        raise TypeMismatch(f"extension name must be an identifier, got {name!r}")
    if not isinstance(value, str):
        raise TypeMismatch(f"extension values are strings, got {value!r}")
    e.extensions[name] = value


def reflect(model: Model, mm: Metamodel, eid: int) -> mc.FlattenedClass:
    e = model.entity(eid)
    if e.class_name not in mm.classes:
        raise UnknownClass(e.class_name)
    return mc.effective_features(mm, e.class_name)


def links_touching(model: Model, eids: set[int]) -> list[int]:
    return [
        l.id
        for l in model.links.values()
        if l.container in eids or any(v in eids for v in l.ends.values())
    ]


def delete_entity(model: Model, eid: int) -> tuple[list[int], list[int]]:
    """Remove ``eid``'s subtree and every link touching it."""
    e = model.entity(eid)
    doomed = subtree(model, eid)
    doomed_set = set(doomed)
    dead_links = links_touching(model, doomed_set)
    for lid in dead_links:
        del model.links[lid]
    model.siblings(e.parent).remove(eid)
    for d in doomed:
        del model.entities[d]
    return doomed, dead_links


def delete_link(model: Model, lid: int) -> None:
    model.link(lid)
    del model.links[lid]


def check_forest(model: Model) -> list[str]:
    """Structural invariants of the instance graph itself."""
    problems = []
    seen: set[int] = set()
    stack = [(r, None) for r in model.roots]
    while stack:
        eid, parent = stack.pop()
        if eid in seen:
            problems.append(f"#{eid} reached twice in the containment walk")
            continue
        seen.add(eid)
        e = model.entities.get(eid)
        if e is None:
            problems.append(f"#{eid} listed as child but missing")
            continue
        if e.parent != parent:
            problems.append(f"#{eid} parent is {e.parent}, walk says {parent}")
        names = [model.entities[c].name for c in e.children if c in model.entities]
        if len(names) != len(set(names)):
            problems.append(f"#{eid} has duplicate child names")
        stack.extend((c, eid) for c in e.children)
    if seen != set(model.entities):
        problems.append(f"entities outside the forest: {sorted(set(model.entities) - seen)}")
    for l in model.links.values():
        if l.container != ROOT and l.container not in model.entities:
            problems.append(f"link #{l.id} container #{l.container} missing")
        for role, eid in l.ends.items():
            if eid not in model.entities:
                problems.append(f"link #{l.id} end {role} -> missing #{eid}")
    ids = set(model.entities) | set(model.links)
    if ids and max(ids) >= model.next_id:
        problems.append("id counter behind existing ids")
    if set(model.entities) & set(model.links):
        problems.append("entity and link ids overlap")
    return problems


# ---------------------------------------------------------------------------
# conformance


def check_conformance(
    model: Model,
    mm: Metamodel,
    *,
    skip_constraints: bool = False,
    check_reference: bool = True,
) -> list[Diagnostic]:
    """Diagnostics for every broken structural rule, then constraint violations.

    Constraints are only evaluated once the structure is clean.  Entities of
    unknown classes are reported once and otherwise ignored.
    """
    if check_reference and (model.metamodel_name, model.metamodel_version) != (mm.name, mm.version):
        raise MetamodelMismatch(
            f"model conforms to {model.metamodel_name} v{model.metamodel_version}, "
            f"not {mm.name} v{mm.version}"
        )
    diags: list[Diagnostic] = []
    ents = sorted(model.entities.values(), key=lambda e: e.id)
    path = {e.id: entity_path(model, e.id) for e in ents}
    known = {e.id for e in ents if e.class_name in mm.classes}

    def add(code, eid, msg):
        loc = path.get(eid) if eid in path else (link_path(model, eid) if eid in model.links else f"#{eid}")
        diags.append(Diagnostic("error", loc, msg, code, eid))

    for e in ents:
        if e.id not in known:
            add("unknown-class", e.id, f"unknown class {e.class_name}")
        elif mm.classes[e.class_name].is_abstract:
            add("abstract-class", e.id, f"abstract class {e.class_name} instantiated")

    for e in ents:
        if e.id not in known:
            continue
        attrs = {a.name: a for a in mc.effective_attributes(mm, e.class_name)}
        for k, v in e.values.items():
            a = attrs.get(k)
            if a is None:
                add("unknown-attribute", e.id, f"{e.class_name} has no attribute {k}")
            elif not a.value_type.accepts(v):
                add("attribute-type", e.id, f"{k}={v!r} is not a {a.value_type}")

    for e in ents:
        if e.id not in known or e.parent is None or e.parent not in known:
            continue
        p = model.entities[e.parent]
        if not mc.can_contain(mm, p.class_name, e.class_name):
            add("illegal-containment", e.id, f"{p.class_name} may not contain {e.class_name}")

    ctypes = {eid: set(mc.containment_types(mm, model.entities[eid].class_name)) for eid in known}
    for e in ents:
        if e.id not in known:
            continue
        for rule in mc.effective_containments(mm, e.class_name):
            n = sum(1 for c in e.children if c in known and rule.child in ctypes[c])
            if not rule.multiplicity.admits(n):
                add(
                    "containment-multiplicity",
                    e.id,
                    f"contains {n} {rule.child}, allowed {rule.multiplicity}",
                )

    rtypes = {eid: set(mc.role_types(mm, model.entities[eid].class_name)) for eid in known}
    links = sorted(model.links.values(), key=lambda l: l.id)
    for l in links:
        assoc = mm.associations.get(l.association)
        if assoc is None:
            add("unknown-association", l.id, f"unknown association {l.association}")
            continue
        problems = []
        if l.container != ROOT and l.container not in model.entities:
            problems.append(f"container #{l.container} missing")
        if set(l.ends) != set(assoc.role_names):
            problems.append(f"roles {sorted(l.ends)} do not match {assoc.role_names}")
        for r in assoc.roles:
            eid = l.ends.get(r.name)
            if eid is None:
                continue
            if eid not in model.entities:
                problems.append(f"{r.name} end #{eid} missing")
            elif eid not in known:
                problems.append(f"{r.name} end {path[eid]} has unknown class")
            elif r.endpoint not in rtypes[eid]:
                problems.append(f"{r.name} end {path[eid]} is not a {r.endpoint}")
        if problems:
            add("link-roles", l.id, "; ".join(problems))

    for assoc in mm.associations.values():
        for r in assoc.roles:
            counts: dict[int, int] = {}
            for l in links:
                if l.association == assoc.name and l.ends.get(r.name) is not None:
                    counts[l.ends[r.name]] = counts.get(l.ends[r.name], 0) + 1
            for e in ents:
                if e.id in known and r.endpoint in rtypes[e.id]:
                    n = counts.get(e.id, 0)
                    if not r.multiplicity.admits(n):
                        add(
                            "role-multiplicity",
                            e.id,
                            f"plays {assoc.name}.{r.name} {n} times, allowed {r.multiplicity}",
                        )

    if diags or skip_constraints:
        return diags

    from .constraints import eval_all

    results, _ = eval_all(model, mm)
    for res in results:
        for v in res.violations:
            element = v.element if v.element is not None else v.context
            loc = element_path(model, element)
            msg = f"constraint {res.name} violated at {path.get(v.context, '#?')}"
            if v.message:
                msg += f": {v.message}"
            diags.append(Diagnostic("error", loc, msg, "constraint", element))
    return diags


def is_well_formed(model: Model, mm: Metamodel, **kw) -> bool:
    return not check_conformance(model, mm, **kw)
