"""Prototypes, clones and subprototypes inside a model.

Cloning deep-copies a prototype's containment subtree together with its
internal links (links whose container and every end lie inside the subtree)
and records the entity and link correspondence in a
:class:`CorrespondenceMap` stored on the model.  Afterwards:

* clone attributes may be set locally; such attributes are marked modified and
  keep their value when the prototype changes, every other attribute tracks
  the prototype (copy-on-write per attribute);
* entities and internal links added to or removed from a prototype are added
  to or removed from every clone and subprototype, transitively through
  chains of derivation;
* a clone is closed: nothing can be added to or removed from it directly.  A
  subprototype may gain local content, so its correspondence is only
  injective.

Extension annotations are per-object and never copied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import meta_core as mc
from . import model_store as ms
from .errors import (
    CloneRestriction,
    CorruptCorrespondence,
    DerivationCycle,
    IllegalContainment,
    PrototypeInUse,
    UnknownAttribute,
    UnknownClass,
)
from .meta_core import Metamodel
from .model_store import ROOT, CloneInfo, Entity, Link, Model

CLONE = "Clone"
SUBPROTOTYPE = "Subprototype"


@dataclass
class CorrespondenceMap:
    prototype_root: int
    clone_root: int
    kind: str
    pairs: dict[int, int] = field(default_factory=dict)
    link_pairs: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class AddEntity:
    entity: int


@dataclass(frozen=True)
class AddLink:
    link: int


@dataclass(frozen=True)
class DeleteEntity:
    """Entities (whole subtrees) and links already removed from a prototype."""

    entities: tuple[int, ...]
    links: tuple[int, ...] = ()


@dataclass(frozen=True)
class DeleteLink:
    link: int


@dataclass
class PropagationSummary:
    added_entities: list[int] = field(default_factory=list)
    added_links: list[int] = field(default_factory=list)
    removed_entities: list[int] = field(default_factory=list)
    removed_links: list[int] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not (self.added_entities or self.added_links or self.removed_entities or self.removed_links)

    def merge(self, other: "PropagationSummary") -> None:
        self.added_entities += other.added_entities
        self.added_links += other.added_links
        self.removed_entities += other.removed_entities
        self.removed_links += other.removed_links


# ---------------------------------------------------------------------------
# queries


def maps_from(model: Model, eid: int) -> list[CorrespondenceMap]:
    """Maps in which ``eid`` sits on the prototype side."""
    return [m for m in model.correspondences if eid in m.pairs]


def inside_clone(model: Model, eid: int | None) -> bool:
    if eid is None or eid == ROOT:
        return False
    roots = {m.clone_root for m in model.correspondences if m.kind == CLONE}
    return any(a in roots for a in ms.ancestors(model, eid))


def add_entity_in_clone_guard(model: Model, target_parent: int | None, class_name: str | None = None) -> bool:
    """True (permit) unless the target lies inside a clone."""
    return not inside_clone(model, target_parent)


def derived_copies(model: Model, eid: int) -> list[int]:
    """``eid`` followed by every entity that mirrors it, transitively."""
    out = [eid]
    seen = {eid}
    i = 0
    while i < len(out):
        for m in maps_from(model, out[i]):
            t = m.pairs[out[i]]
            if t not in seen:
                seen.add(t)
                out.append(t)
        i += 1
    return out


def derivation_tree(model: Model) -> list[tuple[int, int, str]]:
    """(prototype root, clone root, kind) edges in registration order."""
    return [(m.prototype_root, m.clone_root, m.kind) for m in model.correspondences]


# ---------------------------------------------------------------------------
# copying


def _copy_entity(model: Model, src: Entity, parent: int | None, name: str) -> Entity:
    eid = model.fresh_id()
    e = Entity(
        eid,
        src.class_name,
        name,
        dict(src.values),
        parent=parent,
        clone_info=CloneInfo(src.id),
    )
    model.entities[eid] = e
    model.siblings(parent).append(eid)
    return e


def _copy_subtree(model: Model, root: int, parent: int | None, name: str, pairs: dict[int, int]) -> int:
    src = model.entities[root]
    top = _copy_entity(model, src, parent, name)
    pairs[root] = top.id
    stack = [(c, top.id) for c in reversed(src.children)]
    while stack:
        cur, new_parent = stack.pop()
        s = model.entities[cur]
        e = _copy_entity(model, s, new_parent, s.name)
        pairs[cur] = e.id
        stack.extend((c, e.id) for c in reversed(s.children))
    return top.id


def _copy_link(model: Model, src: Link, pairs: dict[int, int]) -> int:
    lid = model.fresh_id()
    model.links[lid] = Link(
        lid,
        src.association,
        {r: pairs[e] for r, e in src.ends.items()},
        pairs[src.container],
    )
    return lid


def _internal(link: Link, inside) -> bool:
    return link.container in inside and all(e in inside for e in link.ends.values())


# ---------------------------------------------------------------------------
# cloning


def clone(
    model: Model,
    mm: Metamodel,
    prototype: int,
    parent: int | None,
    name: str | None = None,
    kind: str = CLONE,
) -> int:
    """Instantiate ``prototype`` under ``parent``; returns the new root id."""
    proto = model.entity(prototype)
    if parent is not None:
        p = model.entity(parent)
        if not add_entity_in_clone_guard(model, parent, proto.class_name):
            raise CloneRestriction(f"{ms.entity_path(model, parent)} is inside a clone")
        if p.class_name not in mm.classes or proto.class_name not in mm.classes:
            raise UnknownClass(p.class_name if p.class_name not in mm.classes else proto.class_name)
        if not mc.can_contain(mm, p.class_name, proto.class_name):
            raise IllegalContainment(f"{p.class_name} cannot contain {proto.class_name}")
        inside = set(ms.subtree(model, prototype))
        hit = next((t for t in derived_copies(model, parent) if t in inside), None)
        if hit is not None:
            raise DerivationCycle(
                f"cloning {ms.entity_path(model, prototype)} under {ms.entity_path(model, parent)} "
                f"would feed back into the prototype at {ms.entity_path(model, hit)}"
            )
    new_name = ms._claim_name(model, parent, name, proto.name if name is None else name)
    m = CorrespondenceMap(prototype, -1, kind)
    inside_list = ms.subtree(model, prototype)
    inside = set(inside_list)
    internal = [l for l in sorted(model.links.values(), key=lambda l: l.id) if _internal(l, inside)]
    m.clone_root = _copy_subtree(model, prototype, parent, new_name, m.pairs)
    for l in internal:
        m.link_pairs[l.id] = _copy_link(model, l, m.pairs)
    model.correspondences.append(m)
    if parent is not None:
        _propagate_add_entity(model, m.clone_root, PropagationSummary())
    return m.clone_root


def create_subprototype(model: Model, mm: Metamodel, prototype: int, parent: int | None, name: str | None = None) -> int:
    return clone(model, mm, prototype, parent, name, kind=SUBPROTOTYPE)


# ---------------------------------------------------------------------------
# propagation


def _propagate_add_entity(model: Model, root: int, summary: PropagationSummary) -> None:
    work = [root]
    while work:
        x = work.pop(0)
        ent = model.entities[x]
        if ent.parent is None:
            continue
        for m in maps_from(model, ent.parent):
            if x in m.pairs:
                continue
            target_parent = m.pairs[ent.parent]
            copy_name = ms._unique_name(model, target_parent, ent.name)
            added: dict[int, int] = {}
            new_root = _copy_subtree(model, x, target_parent, copy_name, added)
            m.pairs.update(added)
            summary.added_entities.extend(added.values())
            inside = set(added)
            for l in sorted(model.links.values(), key=lambda l: l.id):
                if l.container in inside and l.id not in m.link_pairs and all(e in m.pairs for e in l.ends.values()):
                    m.link_pairs[l.id] = _copy_link(model, l, m.pairs)
                    summary.added_links.append(m.link_pairs[l.id])
            work.append(new_root)


def _propagate_add_link(model: Model, lid: int, summary: PropagationSummary) -> None:
    work = [lid]
    while work:
        cur = model.links[work.pop(0)]
        for m in model.correspondences:
            if cur.id in m.link_pairs:
                continue
            if cur.container in m.pairs and all(e in m.pairs for e in cur.ends.values()):
                new = _copy_link(model, cur, m.pairs)
                m.link_pairs[cur.id] = new
                summary.added_links.append(new)
                work.append(new)


def _deletion_closure(model: Model, entities, links) -> tuple[set[int], set[int]]:
    """Everything that disappears once ``entities``/``links`` are gone."""
    dead_e: set[int] = set()
    dead_l: set[int] = set(links)
    work = list(entities)
    link_work = list(links)
    while work or link_work:
        while work:
            x = work.pop()
            if x in dead_e:
                continue
            group = ms.subtree(model, x) if x in model.entities else [x]
            for d in group:
                if d in dead_e:
                    continue
                dead_e.add(d)
                for m in model.correspondences:
                    t = m.pairs.get(d)
                    if t is not None and t not in dead_e:
                        work.append(t)
        for l in model.links.values():
            if l.id not in dead_l and (l.container in dead_e or any(e in dead_e for e in l.ends.values())):
                dead_l.add(l.id)
                link_work.append(l.id)
        while link_work:
            l = link_work.pop()
            for m in model.correspondences:
                t = m.link_pairs.get(l)
                if t is not None and t not in dead_l:
                    dead_l.add(t)
                    link_work.append(t)
    return dead_e, dead_l


def _remove(model: Model, dead_e: set[int], dead_l: set[int], summary: PropagationSummary) -> None:
    for lid in sorted(dead_l):
        if lid in model.links:
            del model.links[lid]
            summary.removed_links.append(lid)
    for eid in sorted(dead_e):
        e = model.entities.get(eid)
        if e is None:
            continue
        if e.parent is None or e.parent not in dead_e:
            sibs = model.siblings(e.parent) if (e.parent is None or e.parent in model.entities) else []
            if eid in sibs:
                sibs.remove(eid)
    for eid in sorted(dead_e):
        if eid in model.entities:
            del model.entities[eid]
            summary.removed_entities.append(eid)
    kept = []
    for m in model.correspondences:
        if m.clone_root in dead_e or m.prototype_root in dead_e:
            continue
        m.pairs = {k: v for k, v in m.pairs.items() if k not in dead_e and v not in dead_e}
        m.link_pairs = {k: v for k, v in m.link_pairs.items() if k not in dead_l and v not in dead_l}
        kept.append(m)
    model.correspondences[:] = kept


def propagate_structure(model: Model, change) -> PropagationSummary:
    """Mirror a structural change already applied inside a prototype."""
    summary = PropagationSummary()
    if isinstance(change, AddEntity):
        _propagate_add_entity(model, change.entity, summary)
    elif isinstance(change, AddLink):
        _propagate_add_link(model, change.link, summary)
    elif isinstance(change, (DeleteEntity, DeleteLink)):
        if isinstance(change, DeleteEntity):
            seeds_e, seeds_l = set(change.entities), set(change.links)
        else:
            seeds_e, seeds_l = set(), {change.link}
        dead_e, dead_l = _deletion_closure(model, seeds_e, seeds_l)
        _remove(model, dead_e, dead_l, summary)
        summary.removed_entities = [e for e in summary.removed_entities if e not in seeds_e]
        summary.removed_links = [l for l in summary.removed_links if l not in seeds_l]
    else:
        raise TypeError(f"unknown change {change!r}")
    problems = audit(model)
    if problems:
        raise CorruptCorrespondence("; ".join(problems[:5]))
    return summary


def propagate_attribute(model: Model, mm: Metamodel, eid: int, attr: str) -> list[int]:
    """Push ``attr`` of ``eid`` to every correspondent that has not overridden it."""
    src = model.entity(eid)
    if src.class_name in mm.classes and attr not in {a.name for a in mc.effective_attributes(mm, src.class_name)}:
        raise UnknownAttribute(f"{src.class_name}.{attr}")
    updated: list[int] = []
    work = [eid]
    while work:
        cur = model.entities[work.pop(0)]
        for m in maps_from(model, cur.id):
            t = model.entities[m.pairs[cur.id]]
            if t.clone_info is not None and attr in t.clone_info.modified:
                continue
            if attr in cur.values:
                t.values[attr] = cur.values[attr]
            else:
                t.values.pop(attr, None)
            updated.append(t.id)
            work.append(t.id)
    return updated


# ---------------------------------------------------------------------------
# guarded edits that keep every correspondence intact


def update_attribute(model: Model, mm: Metamodel, eid: int, attr: str, value) -> list[int]:
    """Set a value, then let unmodified correspondents follow it."""
    ms.set_attribute(model, mm, eid, attr, value)
    return propagate_attribute(model, mm, eid, attr)


def add_entity(model: Model, mm: Metamodel, parent: int | None, class_name: str, name: str | None = None) -> int:
    if not add_entity_in_clone_guard(model, parent, class_name):
        raise CloneRestriction(f"cannot add to {ms.entity_path(model, parent)}: it is inside a clone")
    eid = ms.instantiate(model, mm, class_name, parent, name)
    propagate_structure(model, AddEntity(eid))
    return eid


def add_link(model: Model, mm: Metamodel, association: str, ends: dict[str, int], container: int = ROOT) -> int:
    if inside_clone(model, container):
        raise CloneRestriction(f"cannot add a link inside clone {ms.entity_path(model, container)}")
    lid = ms.connect(model, mm, association, ends, container)
    propagate_structure(model, AddLink(lid))
    return lid


def _correspondent_owner(model: Model, eid: int) -> CorrespondenceMap | None:
    for m in model.correspondences:
        if eid != m.clone_root and eid in m.pairs.values():
            return m
    return None


def delete_entity(model: Model, eid: int) -> PropagationSummary:
    model.entity(eid)
    for m in model.correspondences:
        if m.kind == CLONE and eid != m.clone_root and eid in ms.subtree(model, m.clone_root):
            raise CloneRestriction(f"{ms.entity_path(model, eid)} belongs to a clone")
    owner = _correspondent_owner(model, eid)
    if owner is not None:
        raise CloneRestriction(f"{ms.entity_path(model, eid)} mirrors prototype content")
    # judged on the requested subtree: the deletion closure would sweep the clones away too
    inside = set(ms.subtree(model, eid))
    dependents = [m.clone_root for m in model.correspondences if m.prototype_root in inside and m.clone_root not in inside]
    if dependents:
        raise PrototypeInUse(
            f"{ms.entity_path(model, eid)} is (or contains) the prototype of "
            + ", ".join(ms.entity_path(model, d) for d in dependents),
            dependents,
        )
    removed_e, removed_l = ms.delete_entity(model, eid)
    summary = propagate_structure(model, DeleteEntity(tuple(removed_e), tuple(removed_l)))
    summary.removed_entities[:0] = removed_e
    summary.removed_links[:0] = removed_l
    return summary


def delete_link(model: Model, lid: int) -> PropagationSummary:
    model.link(lid)
    for m in model.correspondences:
        if lid in m.link_pairs.values():
            raise CloneRestriction(f"link #{lid} mirrors a prototype link")
    ms.delete_link(model, lid)
    summary = propagate_structure(model, DeleteLink(lid))
    summary.removed_links.insert(0, lid)
    return summary


# ---------------------------------------------------------------------------
# audit


def audit(model: Model) -> list[str]:
    """Every broken correspondence invariant, as readable strings."""
    problems: list[str] = []
    owner: dict[int, int] = {}
    edges: dict[int, list[int]] = {}
    for idx, m in enumerate(model.correspondences):
        tag = f"map{idx}({m.kind} #{m.prototype_root}->#{m.clone_root})"
        if m.prototype_root not in model.entities or m.clone_root not in model.entities:
            problems.append(f"{tag}: root missing")
            continue
        sp = set(ms.subtree(model, m.prototype_root))
        sc = set(ms.subtree(model, m.clone_root))
        if sp & sc:
            problems.append(f"{tag}: prototype and clone subtrees overlap")
        if set(m.pairs) != sp:
            problems.append(f"{tag}: pairs do not cover the prototype subtree")
        values = list(m.pairs.values())
        if len(set(values)) != len(values):
            problems.append(f"{tag}: correspondence not injective")
        if not set(values) <= sc:
            problems.append(f"{tag}: correspondents outside the clone subtree")
        if m.kind == CLONE and set(values) != sc:
            problems.append(f"{tag}: clone correspondence not bijective")
        if m.pairs.get(m.prototype_root) != m.clone_root:
            problems.append(f"{tag}: roots do not correspond")
        for k, v in m.pairs.items():
            a, b = model.entities.get(k), model.entities.get(v)
            if a is None or b is None:
                problems.append(f"{tag}: #{k}->#{v} dangling")
                continue
            if a.class_name != b.class_name:
                problems.append(f"{tag}: #{k} is {a.class_name} but #{v} is {b.class_name}")
            if k != m.prototype_root and m.pairs.get(a.parent) != b.parent:
                problems.append(f"{tag}: parent of #{v} does not correspond to parent of #{k}")
            if b.clone_info is None or b.clone_info.origin != k:
                problems.append(f"{tag}: #{v} does not record #{k} as its origin")
            if v in owner:
                problems.append(f"#{v} mirrors two prototypes")
            owner[v] = idx
            edges.setdefault(k, []).append(v)
        internal_p = {l.id for l in model.links.values() if _internal(l, sp)}
        if set(m.link_pairs) != internal_p:
            problems.append(f"{tag}: link pairs do not match the prototype's internal links")
        lvalues = list(m.link_pairs.values())
        if len(set(lvalues)) != len(lvalues):
            problems.append(f"{tag}: link correspondence not injective")
        for k, v in m.link_pairs.items():
            a, b = model.links.get(k), model.links.get(v)
            if a is None or b is None:
                problems.append(f"{tag}: link #{k}->#{v} dangling")
                continue
            if a.association != b.association:
                problems.append(f"{tag}: link #{k} and #{v} differ in association")
            if m.pairs.get(a.container) != b.container:
                problems.append(f"{tag}: link #{v} container does not correspond")
            if set(a.ends) != set(b.ends) or any(m.pairs.get(a.ends[r]) != b.ends.get(r) for r in a.ends):
                problems.append(f"{tag}: link #{v} ends do not correspond to #{k}")
        if m.kind == CLONE:
            internal_c = {l.id for l in model.links.values() if _internal(l, sc)}
            if set(lvalues) != internal_c:
                problems.append(f"{tag}: clone has links without a prototype counterpart")
    for e in model.entities.values():
        if e.clone_info is not None and e.id not in owner:
            problems.append(f"#{e.id} carries clone info but mirrors nothing")
    # derivation must be acyclic
    state: dict[int, int] = {}
    for start in edges:
        if state.get(start):
            continue
        stack = [(start, iter(edges.get(start, ())))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state.get(nxt) == 1:
                problems.append(f"derivation cycle through #{nxt}")
                break
            elif not state.get(nxt):
                state[nxt] = 1
                stack.append((nxt, iter(edges.get(nxt, ()))))
    return problems


def verify(model: Model) -> None:
    problems = audit(model) + ms.check_forest(model)
    if problems:
        raise CorruptCorrespondence("; ".join(problems[:5]))
