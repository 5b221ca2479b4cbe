"""Reader and writer for ``.mm`` metamodel files.

::

    metamodel SignalFlow version 1

    class Component {
      attr name: string = ""
      contains Port [0..*]
      glyph "block"
    }
    abstract class Port {
    }
    class OutPort extends Port {
    }
    association BufferedConnection {
      role src: Port [0..*]
      role dst: Port [0..*]
    }
    constraint NoOutputShortCircuit {
      OutPort.attachingConnections(BufferedConnection)->size() = 0
    }

Class members: ``attr``, ``contains``, ``glyph``, ``extends`` (also allowed in
the header) and ``inherits interface|implementation``.  Omitted multiplicities
are ``[0..*]``.  ``//`` starts a comment.
"""

from __future__ import annotations

from ..constraints import parse_constraint, print_constraint
from ..constraints.parser import encode_string
from ..errors import ConstraintTypeError, ParseError, ValidationError
from ..meta_core import (
    AssociationDef,
    AttributeDef,
    ConstraintRef,
    ContainmentRule,
    MetaClass,
    Metamodel,
    Multiplicity,
    RoleDef,
    ValueType,
    validate_metamodel,
)
from .lexer import Scanner, decode_source

_TYPES = ("string", "integer", "real", "boolean")


def _multiplicity(sc: Scanner) -> Multiplicity:
    if not sc.accept("punct", "["):
        return Multiplicity()
    if sc.accept("punct", "*"):
        sc.expect("punct", "]")
        return Multiplicity(0, None)
    lo = sc.expect("int", what="lower bound")
    if lo.value < 0:
        raise sc.error("negative bound", lo)
    if sc.accept("punct", ".."):
        if sc.accept("punct", "*"):
            hi = None
        else:
            t = sc.expect("int", what="upper bound or '*'")
            if t.value < 0:
                raise sc.error("negative bound", t)
            hi = t.value
    else:
        hi = lo.value
    sc.expect("punct", "]")
    return Multiplicity(lo.value, hi)


def _value_type(sc: Scanner) -> ValueType:
    t = sc.expect("ident", what="value type")
    if t.text in _TYPES:
        return ValueType(t.text)
    if t.text == "enum":
        sc.expect("punct", "(")
        lits = [sc.expect("ident", what="enum literal").text]
        while sc.accept("punct", ","):
            lits.append(sc.expect("ident", what="enum literal").text)
        sc.expect("punct", ")")
        return ValueType("enum", tuple(lits))
    raise sc.error(f"unknown value type {t.text}", t)


def read_literal(sc: Scanner, value_type: ValueType | None = None):
    t = sc.next()
    if t.kind == "string":
        return t.value
    if t.kind == "int":
        if value_type is not None and value_type.kind == "real":
            return float(t.value)
        return t.value
    if t.kind == "real":
        return t.value
    if t.kind == "ident":
        if t.text == "true":
            return True
        if t.text == "false":
            return False
        return t.text  # enum literal
    raise sc.error("expected a literal value", t)


def write_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return encode_string(value)
    raise TypeError(f"cannot write literal {value!r}")


def _names(sc: Scanner) -> list[str]:
    out = [sc.expect("ident", what="class name").text]
    while sc.accept("punct", ","):
        out.append(sc.expect("ident", what="class name").text)
    return out


def _class(sc: Scanner, is_abstract: bool) -> MetaClass:
    name = sc.expect("ident", what="class name")
    cls = MetaClass(name.text, is_abstract)
    if sc.accept("ident", "extends"):
        cls.superclasses.extend(_names(sc))
    sc.expect("punct", "{")
    while not sc.accept("punct", "}"):
        t = sc.expect("ident", what="class member or '}'")
        if t.text == "attr":
            aname = sc.expect("ident", what="attribute name").text
            sc.expect("punct", ":")
            vt = _value_type(sc)
            sc.expect("punct", "=")
            if vt.kind == "enum" and sc.at("ident") and sc.peek().text in ("true", "false"):
                lit = sc.next().text
            else:
                lit = read_literal(sc, vt)
            cls.attributes.append(AttributeDef(aname, vt, lit))
        elif t.text == "contains":
            child = sc.expect("ident", what="contained class").text
            cls.containments.append(ContainmentRule(child, _multiplicity(sc)))
        elif t.text == "glyph":
            g = sc.expect("string", what="glyph string")
            if cls.glyph is not None:
                raise sc.error("glyph given twice", g)
            cls.glyph = g.value
        elif t.text == "extends":
            cls.superclasses.extend(_names(sc))
        elif t.text == "inherits":
            mode = sc.expect("ident", what="'interface' or 'implementation'")
            if mode.text == "interface":
                cls.interface_supers.extend(_names(sc))
            elif mode.text == "implementation":
                cls.implementation_supers.extend(_names(sc))
            else:
                raise sc.error("expected 'interface' or 'implementation'", mode)
        else:
            raise sc.error(f"unknown class member {t.text!r}", t)
    return cls


def _association(sc: Scanner) -> AssociationDef:
    name = sc.expect("ident", what="association name")
    assoc = AssociationDef(name.text)
    sc.expect("punct", "{")
    while not sc.accept("punct", "}"):
        sc.expect("ident", "role", what="'role' or '}'")
        rname = sc.expect("ident", what="role name").text
        sc.expect("punct", ":")
        endpoint = sc.expect("ident", what="endpoint class").text
        assoc.roles.append(RoleDef(rname, endpoint, _multiplicity(sc)))
    return assoc


def parse_metamodel(data, validate: bool = True) -> Metamodel:
    """Parse ``.mm`` text (str or UTF-8 bytes) into a validated metamodel."""
    text = decode_source(data)
    sc = Scanner(text)
    sc.expect("ident", "metamodel", what="'metamodel' header")
    name = sc.expect("ident", what="metamodel name").text
    sc.expect("ident", "version", what="'version'")
    version = sc.expect("int", what="version number")
    if version.value < 0:
        raise sc.error("version must be non-negative", version)
    mm = Metamodel(name, version.value)
    taken: set[str] = set()
    while not sc.at("eof"):
        t = sc.expect("ident", what="'class', 'abstract class', 'association' or 'constraint'")
        if t.text in ("class", "abstract"):
            if t.text == "abstract":
                sc.expect("ident", "class")
            head = sc.peek()
            cls = _class(sc, t.text == "abstract")
            if cls.name in taken:
                raise sc.error(f"duplicate name {cls.name}", head)
            taken.add(cls.name)
            mm.classes[cls.name] = cls
        elif t.text == "association":
            head = sc.peek()
            assoc = _association(sc)
            if assoc.name in taken:
                raise sc.error(f"duplicate name {assoc.name}", head)
            taken.add(assoc.name)
            mm.associations[assoc.name] = assoc
        elif t.text == "constraint":
            cname = sc.expect("ident", what="constraint name")
            if mm.constraint(cname.text) is not None:
                raise sc.error(f"duplicate constraint {cname.text}", cname)
            sc.expect("punct", "{")
            raw, base = sc.raw_block()
            try:
                expr = parse_constraint(raw)
            except (ParseError, ConstraintTypeError) as err:
                raise sc.relocate(err, base) from None
            mm.constraints.append(ConstraintRef(cname.text, raw.strip(), expr))
        else:
            raise sc.error(f"unexpected {t.text!r}", t)
    if validate:
        diags = validate_metamodel(mm)
        if diags:
            raise ValidationError(diags)
    return mm


def serialize_metamodel(mm: Metamodel) -> str:
    out = [f"metamodel {mm.name} version {mm.version}", ""]
    for cls in mm.classes.values():
        head = ("abstract class " if cls.is_abstract else "class ") + cls.name
        if cls.superclasses:
            head += " extends " + ", ".join(cls.superclasses)
        out.append(head + " {")
        if cls.interface_supers:
            out.append("  inherits interface " + ", ".join(cls.interface_supers))
        if cls.implementation_supers:
            out.append("  inherits implementation " + ", ".join(cls.implementation_supers))
        for a in cls.attributes:
            default = a.default if a.value_type.kind == "enum" else write_literal(a.default)
            out.append(f"  attr {a.name}: {a.value_type} = {default}")
        for r in cls.containments:
            out.append(f"  contains {r.child} {r.multiplicity}")
        if cls.glyph is not None:
            out.append(f"  glyph {encode_string(cls.glyph)}")
        out.append("}")
    if mm.associations:
        out.append("")
    for assoc in mm.associations.values():
        out.append(f"association {assoc.name} {{")
        for r in assoc.roles:
            out.append(f"  role {r.name}: {r.endpoint} {r.multiplicity}")
        out.append("}")
    if mm.constraints:
        out.append("")
    for c in mm.constraints:
        out.append(f"constraint {c.name} {{")
        out.append("  " + print_constraint(c.expr))
        out.append("}")
    while out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"
