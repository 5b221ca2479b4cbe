"""Warnings for per-entity concrete-syntax overrides.

An entity may carry an extension ``glyph`` that replaces its class's glyph
for that one instance.  That is legal, but a reader of the diagram sees two
instances of one class drawn differently, so each real override is reported.
"""

from __future__ import annotations

from ..meta_core import Diagnostic, Metamodel
from ..model_store import Model, entity_path

GLYPH_KEY = "glyph"


def lint_syntax_overrides(model: Model, mm: Metamodel) -> list[Diagnostic]:
    out = []
    for e in sorted(model.entities.values(), key=lambda e: e.id):
        override = e.extensions.get(GLYPH_KEY)
        cls = mm.classes.get(e.class_name)
        if override is None or cls is None:
            continue
        default = cls.effective_glyph
        if override == default:
            continue
        out.append(
            Diagnostic(
                "warning",
                entity_path(model, e.id),
                f"glyph overridden: class {cls.name} uses {default!r}, this entity uses {override!r}",
                "glyph-override",
                e.id,
            )
        )
    return out
