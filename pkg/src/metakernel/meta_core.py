"""Meta-metamodel: the archetypes a language definition is built from.

A :class:`Metamodel` holds meta-classes (with attributes, containment rules,
specialization links and an optional glyph hint), named n-ary associations and
well-formedness constraints.  Besides ordinary specialization a class may
inherit only the *interface* (association participation) or only the
*implementation* (containment rules) of other classes; merged languages use
those two edges.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import UnknownClass

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# words the constraint language treats as keywords
RESERVED = frozenset({"and", "or", "not", "implies", "self", "true", "false"})

UNBOUNDED = None

PRIMITIVE_TYPES = ("string", "integer", "real", "boolean")


@dataclass(frozen=True)
class ValueType:
    kind: str  # one of PRIMITIVE_TYPES or "enum"
    literals: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.kind == "enum":
            return "enum(" + ", ".join(self.literals) + ")"
        return self.kind

    def accepts(self, value: Any) -> bool:
        if self.kind == "string":
            return isinstance(value, str)
        if self.kind == "integer":
            return isinstance(value, int) and not isinstance(value, bool)
        if self.kind == "real":
            return (
                isinstance(value, (int, float))
                and not isinstance(value, bool)
                and math.isfinite(value)
            )
        if self.kind == "boolean":
            return isinstance(value, bool)
        if self.kind == "enum":
            return isinstance(value, str) and value in self.literals
        return False

    def coerce(self, value: Any) -> Any:
        """Normalise an accepted value (integers stored in real slots become floats)."""
        if self.kind == "real":
            return float(value)
        return value


STRING = ValueType("string")
INTEGER = ValueType("integer")
REAL = ValueType("real")
BOOLEAN = ValueType("boolean")


def enum_type(*literals: str) -> ValueType:
    return ValueType("enum", tuple(literals))


@dataclass(frozen=True)
class Multiplicity:
    min: int = 0
    max: int | None = UNBOUNDED

    def admits(self, n: int) -> bool:
        return n >= self.min and (self.max is None or n <= self.max)

    def __str__(self) -> str:
        return f"[{self.min}..{'*' if self.max is None else self.max}]"


@dataclass(frozen=True)
class AttributeDef:
    name: str
    value_type: ValueType
    default: Any


@dataclass(frozen=True)
class ContainmentRule:
    child: str
    multiplicity: Multiplicity = Multiplicity()


@dataclass(frozen=True)
class RoleDef:
    name: str
    endpoint: str
    multiplicity: Multiplicity = Multiplicity()


@dataclass
class AssociationDef:
    name: str
    roles: list[RoleDef] = field(default_factory=list)

    def role(self, name: str) -> RoleDef | None:
        for r in self.roles:
            if r.name == name:
                return r
        return None

    @property
    def role_names(self) -> list[str]:
        return [r.name for r in self.roles]


@dataclass
class MetaClass:
    name: str
    is_abstract: bool = False
    attributes: list[AttributeDef] = field(default_factory=list)
    superclasses: list[str] = field(default_factory=list)
    containments: list[ContainmentRule] = field(default_factory=list)
    glyph: str | None = None
    # partial inheritance: association participation only / containment only
    interface_supers: list[str] = field(default_factory=list)
    implementation_supers: list[str] = field(default_factory=list)

    @property
    def effective_glyph(self) -> str:
        return self.glyph if self.glyph is not None else self.name

    def all_supers(self) -> list[str]:
        return self.superclasses + self.interface_supers + self.implementation_supers


@dataclass
class ConstraintRef:
    """A named constraint; equality ignores the raw source text."""

    name: str
    text: str = field(compare=False)
    expr: Any = None  # constraints.ast.ConstraintExpr


@dataclass
class Metamodel:
    name: str
    version: int = 1
    classes: dict[str, MetaClass] = field(default_factory=dict)
    associations: dict[str, AssociationDef] = field(default_factory=dict)
    constraints: list[ConstraintRef] = field(default_factory=list)

    # construction helpers -------------------------------------------------

    def add_class(self, cls: MetaClass) -> MetaClass:
        self.classes[cls.name] = cls
        return cls

    def add_association(self, assoc: AssociationDef) -> AssociationDef:
        self.associations[assoc.name] = assoc
        return assoc

    def add_constraint(self, name: str, text: str) -> ConstraintRef:
        from .constraints import parse_constraint

        ref = ConstraintRef(name, text, parse_constraint(text))
        self.constraints.append(ref)
        return ref

    def get_class(self, name: str) -> MetaClass:
        try:
            return self.classes[name]
        except KeyError:
            raise UnknownClass(name) from None

    def constraint(self, name: str) -> ConstraintRef | None:
        for c in self.constraints:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    location: str
    message: str
    code: str = ""
    element: int | None = None

    def __str__(self) -> str:
        return f"{self.severity} {self.location}: {self.message}"


@dataclass
class FlattenedClass:
    """Everything an instance of ``name`` carries once inheritance is resolved."""

    name: str
    is_abstract: bool
    attributes: list[AttributeDef]
    containments: list[ContainmentRule]
    roles: list[tuple[str, RoleDef]]  # (association name, role)


# ---------------------------------------------------------------------------
# closures


def _closure(mm: Metamodel, start: str, edges: Iterable[str]) -> list[str]:
    """Linearised reflexive closure, supers first, declaration order."""
    edges = tuple(edges)
    order: list[str] = []
    seen: set[str] = set()
    on_stack: set[str] = set()

    def visit(name: str) -> None:
        if name in seen or name in on_stack:
            return
        on_stack.add(name)
        cls = mm.classes.get(name)
        if cls is not None:
            for e in edges:
                for sup in getattr(cls, e):
                    visit(sup)
        on_stack.discard(name)
        seen.add(name)
        order.append(name)

    visit(start)
    return order


def supertypes(mm: Metamodel, name: str) -> list[str]:
    """Reflexive specialization closure (ordinary ``extends`` only)."""
    return _closure(mm, name, ("superclasses",))


def role_types(mm: Metamodel, name: str) -> list[str]:
    """Classes whose association roles an instance of ``name`` may play."""
    return _closure(mm, name, ("superclasses", "interface_supers"))


def containment_types(mm: Metamodel, name: str) -> list[str]:
    """Classes whose containment rules (both directions) apply to ``name``."""
    return _closure(mm, name, ("superclasses", "implementation_supers"))


def attribute_sources(mm: Metamodel, name: str) -> list[str]:
    return _closure(mm, name, ("superclasses", "interface_supers", "implementation_supers"))


def _require(mm: Metamodel, *names: str) -> None:
    for n in names:
        if n not in mm.classes:
            raise UnknownClass(n)


def is_subtype(mm: Metamodel, sub: str, sup: str) -> bool:
    _require(mm, sub, sup)
    return sup in supertypes(mm, sub)


def plays_role(mm: Metamodel, cls: str, endpoint: str) -> bool:
    return endpoint in role_types(mm, cls)


def fits_containment(mm: Metamodel, cls: str, child_rule_class: str) -> bool:
    return child_rule_class in containment_types(mm, cls)


def effective_attributes(mm: Metamodel, name: str) -> list[AttributeDef]:
    out: dict[str, AttributeDef] = {}
    for c in attribute_sources(mm, name):
        cls = mm.classes.get(c)
        if cls is None:
            continue
        for a in cls.attributes:
            out.setdefault(a.name, a)
    return list(out.values())


def effective_containments(mm: Metamodel, name: str) -> list[ContainmentRule]:
    out: list[ContainmentRule] = []
    for c in containment_types(mm, name):
        cls = mm.classes.get(c)
        if cls is None:
            continue
        for r in cls.containments:
            if r not in out:
                out.append(r)
    return out


def effective_roles(mm: Metamodel, name: str) -> list[tuple[str, RoleDef]]:
    out: list[tuple[str, RoleDef]] = []
    for c in role_types(mm, name):
        for assoc in mm.associations.values():
            for r in assoc.roles:
                if r.endpoint == c:
                    out.append((assoc.name, r))
    return out


def effective_features(mm: Metamodel, name: str) -> FlattenedClass:
    cls = mm.get_class(name)
    return FlattenedClass(
        name=name,
        is_abstract=cls.is_abstract,
        attributes=effective_attributes(mm, name),
        containments=effective_containments(mm, name),
        roles=effective_roles(mm, name),
    )


def can_contain(mm: Metamodel, parent: str, child: str) -> bool:
    child_types = set(containment_types(mm, child))
    return any(r.child in child_types for r in effective_containments(mm, parent))


# ---------------------------------------------------------------------------
# validation


def _check_ident(name: str, what: str, diags: list[Diagnostic], loc: str) -> None:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        diags.append(Diagnostic("error", loc, f"invalid {what} name {name!r}", "name"))
    elif name in RESERVED:
        diags.append(Diagnostic("error", loc, f"{what} name {name!r} is a reserved word", "name"))


def _check_mult(m: Multiplicity, loc: str, diags: list[Diagnostic]) -> None:
    if m.min < 0 or (m.max is not None and m.max < 0):
        diags.append(Diagnostic("error", loc, f"negative multiplicity {m}", "multiplicity"))
    elif m.max is not None and m.min > m.max:
        diags.append(Diagnostic("error", loc, f"multiplicity {m} has min > max", "multiplicity"))


def _find_cycles(mm: Metamodel) -> list[str]:
    """Classes at which a specialization cycle is detected, in declaration order."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in mm.classes}
    hits: list[str] = []

    def visit(n: str) -> None:
        color[n] = GREY
        for s in mm.classes[n].all_supers():
            if s not in color:
                continue
            if color[s] == GREY:
                if s not in hits:
                    hits.append(s)
            elif color[s] == WHITE:
                visit(s)
        color[n] = BLACK

    for n in mm.classes:
        if color[n] == WHITE:
            visit(n)
    return hits


def validate_metamodel(mm: Metamodel) -> list[Diagnostic]:
    """Return one diagnostic per broken well-formedness rule (empty if valid)."""
    diags: list[Diagnostic] = []
    _check_ident(mm.name, "metamodel", diags, mm.name or "<metamodel>")
    if not isinstance(mm.version, int) or mm.version < 0:
        diags.append(Diagnostic("error", mm.name, "version must be a non-negative integer", "version"))

    for key, cls in mm.classes.items():
        if key != cls.name:
            diags.append(Diagnostic("error", key, f"class registered under {key!r} is named {cls.name!r}", "name"))
        _check_ident(cls.name, "class", diags, cls.name)

    for key, assoc in mm.associations.items():
        if key != assoc.name:
            diags.append(Diagnostic("error", key, f"association registered under {key!r} is named {assoc.name!r}", "name"))
        _check_ident(assoc.name, "association", diags, assoc.name)
        if assoc.name in mm.classes:
            diags.append(Diagnostic("error", assoc.name, f"association name {assoc.name} collides with a class", "name"))

    for cls in mm.classes.values():
        loc = cls.name
        for label, refs in (
            ("superclass", cls.superclasses),
            ("interface superclass", cls.interface_supers),
            ("implementation superclass", cls.implementation_supers),
        ):
            seen: set[str] = set()
            for s in refs:
                if s not in mm.classes:
                    diags.append(Diagnostic("error", loc, f"unknown {label} {s}", "reference"))
                if s in seen:
                    diags.append(Diagnostic("error", loc, f"duplicate {label} {s}", "reference"))
                seen.add(s)
        own: set[str] = set()
        for a in cls.attributes:
            aloc = f"{loc}.{a.name}"
            _check_ident(a.name, "attribute", diags, aloc)
            if a.name in own:
                diags.append(Diagnostic("error", aloc, f"duplicate attribute {a.name}", "attribute"))
            own.add(a.name)
            vt = a.value_type
            if vt.kind not in PRIMITIVE_TYPES and vt.kind != "enum":
                diags.append(Diagnostic("error", aloc, f"unknown value type {vt.kind}", "attribute"))
                continue
            if vt.kind == "enum":
                if not vt.literals:
                    diags.append(Diagnostic("error", aloc, "enum has no literals", "attribute"))
                if len(set(vt.literals)) != len(vt.literals):
                    diags.append(Diagnostic("error", aloc, "enum literals are not unique", "attribute"))
                for lit in vt.literals:
                    if not IDENT_RE.match(lit) or lit in RESERVED:
                        diags.append(Diagnostic("error", aloc, f"invalid enum literal {lit!r}", "attribute"))
            if not vt.accepts(a.default):
                diags.append(Diagnostic("error", aloc, f"default {a.default!r} is not a {vt}", "attribute"))
        children: set[str] = set()
        for r in cls.containments:
            rloc = f"{loc} contains {r.child}"
            if r.child not in mm.classes:
                diags.append(Diagnostic("error", rloc, f"unknown contained class {r.child}", "reference"))
            if r.child in children:
                diags.append(Diagnostic("error", rloc, f"duplicate containment rule for {r.child}", "containment"))
            children.add(r.child)
            _check_mult(r.multiplicity, rloc, diags)

    for assoc in mm.associations.values():
        if len(assoc.roles) < 2:
            diags.append(Diagnostic("error", assoc.name, "association needs at least two roles", "association"))
        names: set[str] = set()
        for r in assoc.roles:
            rloc = f"{assoc.name}.{r.name}"
            _check_ident(r.name, "role", diags, rloc)
            if r.name in names:
                diags.append(Diagnostic("error", rloc, f"duplicate role {r.name}", "association"))
            names.add(r.name)
            if r.endpoint not in mm.classes:
                diags.append(Diagnostic("error", rloc, f"unknown endpoint class {r.endpoint}", "reference"))
            _check_mult(r.multiplicity, rloc, diags)

    cycles = _find_cycles(mm)
    for c in cycles:
        diags.append(Diagnostic("error", c, f"specialization cycle at {c}", "cycle"))

    if not cycles:
        for cls in mm.classes.values():
            seen_defs: dict[str, AttributeDef] = {}
            for src in attribute_sources(mm, cls.name):
                owner = mm.classes.get(src)
                if owner is None:
                    continue
                for a in owner.attributes:
                    prev = seen_defs.get(a.name)
                    if prev is None:
                        seen_defs[a.name] = a
                    elif prev != a:
                        diags.append(
                            Diagnostic(
                                "error",
                                f"{cls.name}.{a.name}",
                                f"attribute {a.name} inherited with conflicting definitions",
                                "attribute",
                            )
                        )

    cnames: set[str] = set()
    for ref in mm.constraints:
        loc = f"constraint {ref.name}"
        _check_ident(ref.name, "constraint", diags, loc)
        if ref.name in cnames:
            diags.append(Diagnostic("error", loc, f"duplicate constraint {ref.name}", "constraint"))
        cnames.add(ref.name)
        if ref.expr is None:
            diags.append(Diagnostic("error", loc, "constraint was not parsed", "constraint"))
            continue
        from .constraints import typecheck

        for msg in typecheck(ref.expr, mm):
            diags.append(Diagnostic("error", loc, msg, "constraint"))
    return diags
