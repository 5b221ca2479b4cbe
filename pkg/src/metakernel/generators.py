"""Seeded random metamodels, models and clone-editing sessions.

Used by the property tests, the acceptance suite and the soak scripts.  All
randomness comes from the ``random.Random`` passed in, so a seed reproduces a
case exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import clones
from . import meta_core as mc
from . import model_store as ms
from .errors import (
    AbstractInstantiation,
    CloneRestriction,
    DerivationCycle,
    DuplicateName,
    IllegalContainment,
    PrototypeInUse,
    RoleTypeMismatch,
)
from .meta_core import (
    AssociationDef,
    AttributeDef,
    ContainmentRule,
    MetaClass,
    Metamodel,
    Multiplicity,
    RoleDef,
    ValueType,
)
from .model_store import ROOT, Entity, Link, Model


@dataclass
class GenConfig:
    max_classes: int = 8
    max_attributes: int = 3
    max_associations: int = 3
    max_roles: int = 3
    p_abstract: float = 0.2
    p_super: float = 0.35
    p_partial: float = 0.1  # interface/implementation inheritance edges
    p_containment: float = 0.3
    p_required: float = 0.15  # chance a multiplicity gets a lower bound > 0
    p_bounded: float = 0.3
    p_glyph: float = 0.3
    max_constraints: int = 2
    prefix: str = ""  # keeps generated names disjoint across metamodels


@dataclass
class ModelGenConfig:
    max_entities: int = 20
    max_links: int = 8
    p_root: float = 0.3
    p_unset: float = 0.2  # drop a stored value so the default applies
    p_extension: float = 0.15
    p_fault: float = 0.3
    max_clones: int = 0


_WORDS = ["gain", "tau", "label", "mode", "rate", "x", "ok", "size", "note"]
_TEXT = ["", "a", "hello world", 'quote " inside', "back\\slash", "tab\tnew\nline", "ünïcødé", "λ→∞", "🙂", "#7", "/x/y"]


def random_name(rng: random.Random, stem: str) -> str:
    return stem + "".join(rng.choice("abcdefghXYZ_0123") for _ in range(rng.randint(0, 3)))


def random_text(rng: random.Random) -> str:
    if rng.random() < 0.6:
        return rng.choice(_TEXT)
    return "".join(chr(rng.choice([rng.randint(32, 126), rng.randint(0xA0, 0x2FFF), 0x1F600])) for _ in range(rng.randint(0, 6)))


def random_value(rng: random.Random, vt: ValueType):
    if vt.kind == "string":
        return random_text(rng)
    if vt.kind == "integer":
        return rng.choice([0, 1, -1, rng.randint(-10**6, 10**6), 2**40])
    if vt.kind == "real":
        return rng.choice([0.0, -2.5, 1e-7, 3.25e12, rng.uniform(-1e3, 1e3), float(rng.randint(-5, 5))])
    if vt.kind == "boolean":
        return rng.random() < 0.5
    return rng.choice(vt.literals)


def _value_type(rng: random.Random) -> ValueType:
    kind = rng.choice(["string", "integer", "real", "boolean", "enum"])
    if kind == "enum":
        lits = rng.sample(["red", "green", "blue", "on", "off", "idle"], rng.randint(1, 3))
        return ValueType("enum", tuple(lits))
    return ValueType(kind)


def _multiplicity(rng: random.Random, cfg: GenConfig) -> Multiplicity:
    lo = rng.randint(1, 2) if rng.random() < cfg.p_required else 0
    if rng.random() < cfg.p_bounded:
        return Multiplicity(lo, lo + rng.randint(0, 3))
    return Multiplicity(lo, None)


def gen_metamodel(rng: random.Random, cfg: GenConfig | None = None, name: str | None = None) -> Metamodel:
    """A valid metamodel; specialization only points at earlier classes, so it is acyclic."""
    cfg = cfg or GenConfig()
    p = cfg.prefix
    mm = Metamodel(name or f"{p}M{rng.randint(0, 999)}", rng.randint(0, 5))
    n = rng.randint(1, cfg.max_classes)
    names = [f"{p}K{i}" for i in range(n)]
    for i, cname in enumerate(names):
        cls = MetaClass(cname, is_abstract=rng.random() < cfg.p_abstract)
        for j in range(i):
            r = rng.random()
            if r < cfg.p_super:
                cls.superclasses.append(names[j])
            elif r < cfg.p_super + cfg.p_partial:
                (cls.interface_supers if rng.random() < 0.5 else cls.implementation_supers).append(names[j])
        for k in range(rng.randint(0, cfg.max_attributes)):
            vt = _value_type(rng)
            cls.attributes.append(AttributeDef(f"{p.lower()}{rng.choice(_WORDS)}_{i}_{k}", vt, random_value(rng, vt)))
        for child in names:
            if rng.random() < cfg.p_containment:
                cls.containments.append(ContainmentRule(child, _multiplicity(rng, cfg)))
        if rng.random() < cfg.p_glyph:
            cls.glyph = random_text(rng)
        mm.add_class(cls)
    for a in range(rng.randint(0, cfg.max_associations)):
        roles = [
            RoleDef(f"r{k}", rng.choice(names), _multiplicity(rng, cfg))
            for k in range(rng.randint(2, max(2, cfg.max_roles)))
        ]
        mm.add_association(AssociationDef(f"{p}A{a}", roles))
    for c in range(rng.randint(0, cfg.max_constraints)):
        text = _constraint_text(rng, mm)
        if text is not None:
            mm.add_constraint(f"{p}Rule{c}", text)
    problems = mc.validate_metamodel(mm)
    assert not problems, problems
    return mm


def _constraint_text(rng: random.Random, mm: Metamodel) -> str | None:
    """One of two shapes the test oracle knows how to evaluate on its own."""
    from .constraints.parser import _literal

    cls = rng.choice(list(mm.classes))
    attrs = mc.effective_attributes(mm, cls)
    if mm.associations and (not attrs or rng.random() < 0.5):
        assoc = rng.choice(list(mm.associations))
        return f"{cls}.attachingConnections({assoc})->size() <= {rng.randint(0, 3)}"
    if attrs:
        a = rng.choice(attrs)
        lit = a.default if rng.random() < 0.7 else random_value(rng, a.value_type)
        op = rng.choice(["=", "<>"]) if rng.random() < 0.3 else "="
        if a.value_type.kind in ("integer", "real") and rng.random() < 0.3:
            op = rng.choice(["<=", ">="])
        text = f"{cls}.{a.name} {op} "
        if isinstance(lit, (int, float)) and not isinstance(lit, bool) and lit < 0:
            return text + f"({_literal(lit)})"
        return text + _literal(lit)
    return None


def gen_identity_spec(rng: random.Random, left: Metamodel, right: Metamodel, max_entries: int = 3):
    """Random identity entries pairing classes in declaration order.

    Generated specialization edges always point at earlier classes, so an
    order-preserving pairing can never close a specialization cycle.
    """
    from .merge import IDENTITY, EquivalenceEntry, EquivalenceSpec

    ln, rn = list(left.classes), list(right.classes)
    k = rng.randint(0, min(max_entries, len(ln), len(rn)))
    li = sorted(rng.sample(range(len(ln)), k))
    ri = sorted(rng.sample(range(len(rn)), k))
    entries = []
    for n, (i, j) in enumerate(zip(li, ri)):
        new = rng.choice([None, rn[j], f"Merged{n}"])
        entries.append(EquivalenceEntry(ln[i], rn[j], IDENTITY, new))
    return EquivalenceSpec(entries)


def _concrete(mm: Metamodel) -> list[str]:
    return [c.name for c in mm.classes.values() if not c.is_abstract]


def gen_model(rng: random.Random, mm: Metamodel, cfg: ModelGenConfig | None = None) -> Model:
    """A model that mostly follows ``mm``; with ``p_fault`` one defect is planted."""
    cfg = cfg or ModelGenConfig()
    model = ms.new_model(mm, f"m{rng.randint(0, 9999)}")
    concrete = _concrete(mm)
    if concrete:
        for _ in range(rng.randint(0, cfg.max_entities)):
            cls = rng.choice(concrete)
            hosts = [e.id for e in model.entities.values() if mc.can_contain(mm, e.class_name, cls)]
            parent = None if not hosts or rng.random() < cfg.p_root else rng.choice(hosts)
            eid = ms.instantiate(model, mm, cls, parent)
            e = model.entities[eid]
            for a in mc.effective_attributes(mm, cls):
                r = rng.random()
                if r < cfg.p_unset:
                    del e.values[a.name]
                elif r < 0.6:
                    e.values[a.name] = a.value_type.coerce(random_value(rng, a.value_type))
            if rng.random() < cfg.p_extension:
                ms.annotate(model, eid, rng.choice(["glyph", "note", "reviewed"]), random_text(rng))
    if mm.associations and model.entities:
        for _ in range(rng.randint(0, cfg.max_links)):
            assoc = mm.associations[rng.choice(list(mm.associations))]
            ends = {}
            for r in assoc.roles:
                players = [e.id for e in model.entities.values() if mc.plays_role(mm, e.class_name, r.endpoint)]
                if not players:
                    break
                ends[r.name] = rng.choice(players)
            else:
                container = rng.choice([ROOT] + list(model.entities))
                ms.connect(model, mm, assoc.name, ends, container)
    for _ in range(cfg.max_clones):
        random_clone_op(rng, model, mm)
    if rng.random() < cfg.p_fault:
        plant_fault(rng, model, mm)
    return model


def plant_fault(rng: random.Random, model: Model, mm: Metamodel) -> str:
    """Break the model in one random way, bypassing the editing checks."""
    kinds = ["abstract", "unknown-class", "attr-type", "unknown-attr", "containment", "link-end", "unknown-assoc", "link-roles"]
    kind = rng.choice(kinds)
    ents = list(model.entities.values())

    def raw_entity(cls: str, parent: int | None) -> Entity:
        eid = model.fresh_id()
        e = Entity(eid, cls, f"fault{eid}", parent=parent)
        model.entities[eid] = e
        model.siblings(parent).append(eid)
        return e

    if kind == "abstract":
        abstract = [c.name for c in mm.classes.values() if c.is_abstract]
        if abstract:
            raw_entity(rng.choice(abstract), None)
            return kind
        kind = "unknown-class"
    if kind == "unknown-class":
        raw_entity("NoSuchClass", rng.choice([None] + [e.id for e in ents]))
        return kind
    if kind in ("attr-type", "unknown-attr") and ents:
        e = rng.choice(ents)
        attrs = mc.effective_attributes(mm, e.class_name) if e.class_name in mm.classes else []
        if kind == "attr-type" and attrs:
            a = rng.choice(attrs)
            bad = {"string": 1, "integer": "one", "real": True, "boolean": 0, "enum": "not_a_literal"}
            e.values[a.name] = bad[a.value_type.kind]
        else:
            e.values["no_such_attr"] = 1
        return kind
    if kind == "containment" and ents:
        concrete = _concrete(mm)
        parent = rng.choice(ents)
        if concrete:
            raw_entity(rng.choice(concrete), parent.id)
            return kind
    if kind in ("link-end", "unknown-assoc", "link-roles") and ents and mm.associations:
        assoc = mm.associations[rng.choice(list(mm.associations))]
        ends = {r.name: rng.choice(ents).id for r in assoc.roles}
        name = assoc.name
        if kind == "unknown-assoc":
            name = "NoSuchAssociation"
        elif kind == "link-roles":
            ends.pop(assoc.roles[0].name)
            ends["bogus"] = rng.choice(ents).id
        lid = model.fresh_id()
        model.links[lid] = Link(lid, name, ends, ROOT)
        return kind
    raw_entity("NoSuchClass", None)
    return "unknown-class"


# ---------------------------------------------------------------------------
# clone sessions

EXPECTED_REFUSALS = (
    CloneRestriction,
    DerivationCycle,
    PrototypeInUse,
    IllegalContainment,
    DuplicateName,
    RoleTypeMismatch,
    AbstractInstantiation,
)

OPS = ("clone", "subprototype", "add_entity", "delete_entity", "add_link", "delete_link", "set_attribute")


def random_clone_op(rng: random.Random, model: Model, mm: Metamodel, max_entities: int = 250, max_copy: int = 12) -> tuple[str, str]:
    """Apply one random editing operation through the clone-aware API.

    Returns ``(op, outcome)`` where outcome is ``"ok"``, ``"refused"`` (a
    documented restriction fired) or ``"skipped"`` (no candidate).
    """
    weights = [3, 2, 5, 3, 4, 2, 5]
    if len(model.entities) > max_entities:
        weights = [0, 0, 1, 8, 1, 3, 3]
    op = rng.choices(OPS, weights)[0]
    ents = sorted(model.entities)
    concrete = _concrete(mm)
    try:
        if op in ("clone", "subprototype"):
            small = [e for e in ents if len(ms.subtree(model, e)) <= max_copy]
            if not small:
                return op, "skipped"
            proto = rng.choice(small)
            pcls = model.entities[proto].class_name
            hosts = [e for e in ents if mc.can_contain(mm, model.entities[e].class_name, pcls)]
            parent = None if not hosts or rng.random() < 0.2 else rng.choice(hosts)
            kind = clones.CLONE if op == "clone" else clones.SUBPROTOTYPE
            clones.clone(model, mm, proto, parent, kind=kind)
        elif op == "add_entity":
            if not concrete:
                return op, "skipped"
            cls = rng.choice(concrete)
            hosts = [e for e in ents if mc.can_contain(mm, model.entities[e].class_name, cls)]
            parent = None if not hosts or rng.random() < 0.1 else rng.choice(hosts)
            clones.add_entity(model, mm, parent, cls)
        elif op == "delete_entity":
            if not ents:
                return op, "skipped"
            clones.delete_entity(model, rng.choice(ents))
        elif op == "add_link":
            if not mm.associations or not ents:
                return op, "skipped"
            assoc = mm.associations[rng.choice(sorted(mm.associations))]
            ends = {}
            for r in assoc.roles:
                players = [e for e in ents if mc.plays_role(mm, model.entities[e].class_name, r.endpoint)]
                if not players:
                    return op, "skipped"
                ends[r.name] = rng.choice(players)
            # favour containers that make the link internal to some subtree
            anc = None
            for eid in ends.values():
                chain = set(ms.ancestors(model, eid)) | {eid}
                anc = chain if anc is None else anc & chain
            candidates = sorted(anc or ())
            container = rng.choice(candidates) if candidates and rng.random() < 0.8 else rng.choice([ROOT] + ents)
            clones.add_link(model, mm, assoc.name, ends, container)
        elif op == "delete_link":
            if not model.links:
                return op, "skipped"
            clones.delete_link(model, rng.choice(sorted(model.links)))
        else:
            with_attrs = [e for e in ents if mc.effective_attributes(mm, model.entities[e].class_name)]
            if not with_attrs:
                return op, "skipped"
            eid = rng.choice(with_attrs)
            a = rng.choice(mc.effective_attributes(mm, model.entities[eid].class_name))
            clones.update_attribute(model, mm, eid, a.name, random_value(rng, a.value_type))
    except EXPECTED_REFUSALS:
        return op, "refused"
    return op, "ok"
