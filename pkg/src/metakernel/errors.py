"""Exception hierarchy shared by every kernel module."""

from __future__ import annotations


class MetakernelError(Exception):
    """Base class for all kernel errors."""


# lookups


class UnknownClass(MetakernelError):
    pass


class UnknownAssociation(MetakernelError):
    pass


class UnknownAttribute(MetakernelError):
    pass


class UnknownEntity(MetakernelError):
    pass


# model editing


class AbstractInstantiation(MetakernelError):
    pass


class IllegalContainment(MetakernelError):
    pass


class RoleTypeMismatch(MetakernelError):
    pass


class MissingRole(MetakernelError):
    pass


class UnknownRole(MetakernelError):
    pass


class TypeMismatch(MetakernelError):
    """A literal does not fit the declared attribute type."""


class DuplicateName(MetakernelError):
    """Two siblings in a containment tree share a name."""


class MetamodelMismatch(MetakernelError):
    """A model refers to a different metamodel name or version."""


# text formats


class ParseError(MetakernelError):
    """Located syntax error in any of the textual formats."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


class DanglingReference(MetakernelError):
    pass


class ValidationError(MetakernelError):
    """Carries the diagnostics that made a metamodel invalid."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics[:5])
        more = "" if len(self.diagnostics) <= 5 else f" (+{len(self.diagnostics) - 5} more)"
        super().__init__(f"invalid metamodel: {lines}{more}")


# constraints


class ConstraintTypeError(MetakernelError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


class EvalError(MetakernelError):
    """Runtime failure while evaluating a constraint at one context entity.

    ``kind`` is one of ``NonSingleton``, ``NoParent``, ``NotAnEntity``,
    ``NoAttribute`` or ``BadOperand``.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


# prototypes and clones


class CloneRestriction(MetakernelError):
    """Content may not be added to, or removed from, a clone directly."""


class DerivationCycle(MetakernelError):
    pass


class PrototypeInUse(MetakernelError):
    def __init__(self, message: str, dependents=()):
        super().__init__(message)
        self.dependents = list(dependents)


class CorruptCorrespondence(MetakernelError):
    pass


# merging


class NameCollision(MetakernelError):
    pass


class UnknownClassInSpec(MetakernelError):
    pass


class DuplicateSpecEntry(MetakernelError):
    pass


class MergeConflict(MetakernelError):
    pass
