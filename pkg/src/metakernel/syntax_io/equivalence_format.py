"""Reader and writer for ``.eqv`` equivalence specifications.

One entry per line::

    identity Behavior ~ System as System
    interface Sensor ~ Probe as Instrument
    implementation Block ~ Subsystem as Unit

``as`` is optional for identity entries (the left name is kept).
"""

from __future__ import annotations

from ..merge import MODES, EquivalenceEntry, EquivalenceSpec
from .lexer import Scanner, decode_source


def parse_equivalence(data) -> EquivalenceSpec:
    sc = Scanner(decode_source(data))
    spec = EquivalenceSpec()
    while not sc.at("eof"):
        mode = sc.expect("ident", what="'identity', 'interface' or 'implementation'")
        if mode.text not in MODES:
            raise sc.error(f"unknown mode {mode.text!r}", mode)
        left = sc.expect("ident", what="left class").text
        sc.expect("punct", "~")
        right = sc.expect("ident", what="right class").text
        new = None
        if sc.accept("ident", "as"):
            new = sc.expect("ident", what="merged class name").text
        elif mode.text != "identity":
            raise sc.error(f"{mode.text} entries need 'as <NewClass>'")
        spec.entries.append(EquivalenceEntry(left, right, mode.text, new))
    return spec


def serialize_equivalence(spec: EquivalenceSpec) -> str:
    lines = []
    for e in spec.entries:
        tail = f" as {e.new_name}" if e.new_name else ""
        lines.append(f"{e.mode} {e.left} ~ {e.right}{tail}")
    return "".join(l + "\n" for l in lines)
