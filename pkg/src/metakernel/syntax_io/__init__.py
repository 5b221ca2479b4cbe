"""Text formats: ``.mm`` metamodels, ``.mdl`` models, ``.eqv`` merge specs."""

from .equivalence_format import parse_equivalence, serialize_equivalence
from .lint import lint_syntax_overrides
from .metamodel_format import parse_metamodel, serialize_metamodel
from .model_format import parse_model, serialize_model

__all__ = [
    "lint_syntax_overrides",
    "parse_equivalence",
    "parse_metamodel",
    "parse_model",
    "serialize_equivalence",
    "serialize_metamodel",
    "serialize_model",
]
