"""Expression tree for well-formedness constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Pos = tuple[int, int]


@dataclass(frozen=True)
class Self:
    """The context entity the constraint is evaluated at."""

    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class VarRef:
    name: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Literal:
    value: Union[str, int, float, bool]
    pos: Pos = field(default=(0, 0), compare=False, repr=False)

    def __eq__(self, other):
        # 1 == 1.0 == True in Python; literals must keep their type
        return (
            isinstance(other, Literal)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    def __hash__(self):
        return hash((type(self.value), self.value))


@dataclass(frozen=True)
class Kind:
    """Bare identifier argument naming an association kind."""

    name: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class AttributeAccess:
    receiver: "Expr"
    name: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class NavCall:
    receiver: "Expr"
    op: str  # attachingConnections | connectionPoints | target | parent
    args: tuple["Expr", ...] = ()
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class CollectionOp:
    receiver: "Expr"
    op: str  # forAll | exists | theOnly | size
    var: str | None = None
    body: "Expr | None" = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Compare:
    op: str  # = <> < <= > >=
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BoolOp:
    op: str  # and | or | implies
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


Expr = Union[Self, VarRef, Literal, Kind, AttributeAccess, NavCall, CollectionOp, Compare, BoolOp, Not]

NAV_OPS = {
    # op: (receiver kind, argument kind or None)
    "attachingConnections": ("entity", "kind"),
    "connectionPoints": ("link", "string"),
    "target": ("end", None),
    "parent": ("entity", None),
}
BINDER_OPS = ("forAll", "exists")
PLAIN_COLLECTION_OPS = ("theOnly", "size")
COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class ConstraintExpr:
    context: str
    body: Expr

    def __str__(self) -> str:
        from .parser import print_constraint

        return print_constraint(self)


def walk(node):
    """Pre-order traversal over every sub-expression."""
    yield node
    if isinstance(node, (AttributeAccess,)):
        yield from walk(node.receiver)
    elif isinstance(node, NavCall):
        yield from walk(node.receiver)
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, CollectionOp):
        yield from walk(node.receiver)
        if node.body is not None:
            yield from walk(node.body)
    elif isinstance(node, (Compare, BoolOp)):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Not):
        yield from walk(node.operand)
