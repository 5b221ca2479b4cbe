"""Reader and writer for ``.mdl`` model files.

::

    model nested_clone conforms SignalFlow version 1 next 7

    entity #1 Component "Top" {
      set name = "top"
      ext glyph = "box"
      entity #2 InPort "in" {
      }
      entity #3 Component "Inner" {
        origin #9
        modified (name)
        ...
      }
      link #6 BufferedConnection { src = #2 dst = #4 }
    }
    link #8 BufferedConnection { src = #2 dst = #5 }

    clone #3 -> #10 {
      #4 -> #11
      link #6 -> #12
    }

Links written inside an entity block live in that entity; top-level links
live in the model-scope container.  ``next`` is the id counter, kept so ids
stay unique across save/load even after deletions.
"""

from __future__ import annotations

from .. import meta_core as mc
from ..clones import CLONE, SUBPROTOTYPE, CorrespondenceMap
from ..constraints.parser import encode_string
from ..errors import DanglingReference, MetamodelMismatch
from ..meta_core import Metamodel
from ..model_store import ROOT, CloneInfo, Entity, Link, Model, valid_entity_name
from .lexer import Scanner, Tok, decode_source
from .metamodel_format import read_literal, write_literal

_MAP_KINDS = {"clone": CLONE, "subprototype": SUBPROTOTYPE}
MAX_NESTING = 200


class _ModelReader:
    def __init__(self, sc: Scanner, mm: Metamodel | None):
        self.sc = sc
        self.mm = mm
        self.model: Model | None = None
        self.where: dict[int, Tok] = {}  # id -> declaring token
        self.refs: list[tuple[int, Tok]] = []  # id uses to resolve at the end

    def _new_id(self, tok: Tok) -> int:
        if tok.value == ROOT:
            raise self.sc.error("id #0 is reserved", tok)
        if tok.value in self.where:
            raise self.sc.error(f"duplicate id #{tok.value}", tok)
        self.where[tok.value] = tok
        return tok.value

    def _ref(self) -> int:
        t = self.sc.expect("id", what="'#id' reference")
        self.refs.append((t.value, t))
        return t.value

    def _value_type(self, cls: str, attr: str):
        if self.mm is None or cls not in self.mm.classes:
            return None
        for a in mc.effective_attributes(self.mm, cls):
            if a.name == attr:
                return a.value_type
        return None

    def entity(self, parent: int | None, depth: int = 0) -> int:
        sc = self.sc
        idtok = sc.expect("id", what="entity id")
        if depth >= MAX_NESTING:
            raise sc.error(f"entities nested deeper than {MAX_NESTING}", idtok)
        eid = self._new_id(idtok)
        cls = sc.expect("ident", what="class name").text
        ntok = sc.expect("string", what="entity name")
        if not valid_entity_name(ntok.value):
            raise sc.error(f"invalid entity name {ntok.text}", ntok)
        model = self.model
        if any(model.entities[c].name == ntok.value for c in model.siblings(parent)):
            raise sc.error(f"duplicate sibling name {ntok.text}", ntok)
        e = Entity(eid, cls, ntok.value, parent=parent)
        model.entities[eid] = e
        model.siblings(parent).append(eid)
        sc.expect("punct", "{")
        while not sc.accept("punct", "}"):
            t = sc.expect("ident", what="entity member or '}'")
            if t.text == "set":
                a = sc.expect("ident", what="attribute name")
                if a.text in e.values:
                    raise sc.error(f"attribute {a.text} set twice", a)
                sc.expect("punct", "=")
                vt = self._value_type(cls, a.text)
                if vt is not None and vt.kind == "enum" and sc.at("ident"):
                    e.values[a.text] = sc.next().text
                else:
                    e.values[a.text] = read_literal(sc, vt)
            elif t.text == "ext":
                a = sc.expect("ident", what="extension name")
                if a.text in e.extensions:
                    raise sc.error(f"extension {a.text} set twice", a)
                sc.expect("punct", "=")
                e.extensions[a.text] = sc.expect("string", what="extension string").value
            elif t.text == "origin":
                if e.clone_info is not None:
                    raise sc.error("origin given twice", t)
                e.clone_info = CloneInfo(self._ref())
            elif t.text == "modified":
                if e.clone_info is None:
                    raise sc.error("'modified' needs a preceding 'origin'", t)
                sc.expect("punct", "(")
                if not sc.accept("punct", ")"):
                    e.clone_info.modified.add(sc.expect("ident", what="attribute name").text)
                    while sc.accept("punct", ","):
                        e.clone_info.modified.add(sc.expect("ident", what="attribute name").text)
                    sc.expect("punct", ")")
            elif t.text == "entity":
                self.entity(eid, depth + 1)
            elif t.text == "link":
                self.link(eid)
            else:
                raise sc.error(f"unknown entity member {t.text!r}", t)
        return eid

    def link(self, container: int) -> int:
        sc = self.sc
        lid = self._new_id(sc.expect("id", what="link id"))
        assoc = sc.expect("ident", what="association name").text
        ends: dict[str, int] = {}
        sc.expect("punct", "{")
        while not sc.accept("punct", "}"):
            r = sc.expect("ident", what="role name or '}'")
            if r.text in ends:
                raise sc.error(f"role {r.text} given twice", r)
            sc.expect("punct", "=")
            ends[r.text] = self._ref()
        self.model.links[lid] = Link(lid, assoc, ends, container)
        return lid

    def correspondence(self, kind: str) -> CorrespondenceMap:
        sc = self.sc
        proto = self._ref()
        sc.expect("punct", "->")
        copy = self._ref()
        cmap = CorrespondenceMap(proto, copy, kind)
        sc.expect("punct", "{")
        while not sc.accept("punct", "}"):
            table = cmap.pairs
            if sc.accept("ident", "link"):
                table = cmap.link_pairs
            at = sc.peek()
            a = self._ref()
            sc.expect("punct", "->")
            b = self._ref()
            if a in table:
                raise sc.error(f"#{a} mapped twice", at)
            table[a] = b
        return cmap

    def run(self) -> Model:
        sc = self.sc
        sc.expect("ident", "model", what="'model' header")
        mid = sc.expect("ident", what="model id").text
        sc.expect("ident", "conforms")
        mm_name = sc.expect("ident", what="metamodel name")
        sc.expect("ident", "version")
        ver = sc.expect("int", what="metamodel version")
        sc.expect("ident", "next")
        nxt = sc.expect("int", what="next id")
        if self.mm is not None and (mm_name.text, ver.value) != (self.mm.name, self.mm.version):
            raise MetamodelMismatch(
                f"model conforms to {mm_name.text} version {ver.value}, "
                f"metamodel is {self.mm.name} version {self.mm.version}"
            )
        self.model = Model(mid, mm_name.text, ver.value, next_id=nxt.value)
        while not sc.at("eof"):
            t = sc.expect("ident", what="'entity', 'link', 'clone' or 'subprototype'")
            if t.text == "entity":
                self.entity(None)
            elif t.text == "link":
                self.link(ROOT)
            elif t.text in _MAP_KINDS:
                self.model.correspondences.append(self.correspondence(_MAP_KINDS[t.text]))
            else:
                raise sc.error(f"unexpected {t.text!r}", t)
        for ref, tok in self.refs:
            if ref not in self.where:
                raise DanglingReference(f"#{ref} is not declared (line {tok.line}, column {tok.col})")
        top = max(self.where, default=0)
        if nxt.value <= top:
            raise sc.error(f"next id {nxt.value} must exceed every declared id (max #{top})", nxt)
        return self.model


def parse_model(data, mm: Metamodel | None = None) -> Model:
    """Parse ``.mdl`` text; with ``mm`` the header must name that metamodel."""
    return _ModelReader(Scanner(decode_source(data)), mm).run()


def _entity_lines(model: Model, eid: int, depth: int, links_by_container, out: list[str]) -> None:
    e = model.entities[eid]
    pad = "  " * depth
    out.append(f"{pad}entity #{e.id} {e.class_name} {encode_string(e.name)} {{")
    inner = pad + "  "
    if e.clone_info is not None:
        out.append(f"{inner}origin #{e.clone_info.origin}")
        if e.clone_info.modified:
            out.append(f"{inner}modified ({', '.join(sorted(e.clone_info.modified))})")
    for k in sorted(e.values):
        out.append(f"{inner}set {k} = {write_literal(e.values[k])}")
    for k in sorted(e.extensions):
        out.append(f"{inner}ext {k} = {encode_string(e.extensions[k])}")
    for c in e.children:
        _entity_lines(model, c, depth + 1, links_by_container, out)
    for l in links_by_container.get(eid, ()):
        out.append(inner + _link_line(l))
    out.append(pad + "}")


def _link_line(l: Link) -> str:
    ends = " ".join(f"{r} = #{v}" for r, v in sorted(l.ends.items()))
    return f"link #{l.id} {l.association} {{ {ends} }}"


def serialize_model(model: Model) -> str:
    links_by_container: dict[int, list[Link]] = {}
    for l in sorted(model.links.values(), key=lambda l: l.id):
        links_by_container.setdefault(l.container, []).append(l)
    out = [
        f"model {model.id} conforms {model.metamodel_name} "
        f"version {model.metamodel_version} next {model.next_id}",
        "",
    ]
    for r in model.roots:
        _entity_lines(model, r, 0, links_by_container, out)
    for l in links_by_container.get(ROOT, ()):
        out.append(_link_line(l))
    for m in model.correspondences:
        kw = "clone" if m.kind == CLONE else "subprototype"
        out.append("")
        out.append(f"{kw} #{m.prototype_root} -> #{m.clone_root} {{")
        for a in sorted(m.pairs):
            out.append(f"  #{a} -> #{m.pairs[a]}")
        for a in sorted(m.link_pairs):
            out.append(f"  link #{a} -> #{m.link_pairs[a]}")
        out.append("}")
    return "\n".join(out) + "\n"
