"""Tree types: rose-tree ASTs and strictly binary trees.

Both kinds of tree are immutable; every transformation builds new nodes.
``EMPTY`` is the placeholder label used for synthetic binarization nodes
and for "no unary label" on leaves. It doubles as the reserved symbol at
id 0 of every label vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

EMPTY = "∅"

# Separator used when unary chains are merged into a single label.
MERGE_SEP = "-"


@dataclass(frozen=True, slots=True)
class Terminal:
    token_index: int
    text: str


@dataclass(frozen=True, slots=True)
class NonTerminal:
    label: str
    children: tuple["AstNode", ...]

    def __post_init__(self):
        if not self.label:
            raise ValueError("non-terminal label must be a nonempty string")
        if not self.children:
            raise ValueError(f"non-terminal {self.label!r} must have >= 1 child")


AstNode = Union[Terminal, NonTerminal]


@dataclass(frozen=True, slots=True)
class Ast:
    """A labeled rose tree over an ordered sequence of code tokens."""

    root: AstNode

    def leaves(self) -> list[Terminal]:
        return list(iter_terminals(self.root))

    def tokens(self) -> list[str]:
        return [leaf.text for leaf in self.leaves()]

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in iter_terminals(self.root))

    def validate(self) -> None:
        """Check that leaves are numbered 0..n-1 left to right."""
        for want, leaf in enumerate(iter_terminals(self.root)):
            if leaf.token_index != want:
                raise ValueError(
                    f"leaf {want} carries token_index {leaf.token_index}"
                )


@dataclass(frozen=True, slots=True)
class BtLeaf:
    token_index: int
    text: str
    unary_label: str = EMPTY


@dataclass(frozen=True, slots=True)
class BtInternal:
    label: str
    left: "BtNode"
    right: "BtNode"


BtNode = Union[BtLeaf, BtInternal]


@dataclass(frozen=True, slots=True)
class BinaryTree:
    """Strictly binary tree with merged/EMPTY labels and per-leaf unary labels."""

    root: BtNode

    def leaves(self) -> list[BtLeaf]:
        return list(iter_bt_leaves(self.root))

    def tokens(self) -> list[str]:
        return [leaf.text for leaf in self.leaves()]

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in iter_bt_leaves(self.root))


def iter_terminals(node: AstNode) -> Iterator[Terminal]:
    if isinstance(node, Terminal):
        yield node
    else:
        for child in node.children:
            yield from iter_terminals(child)


def iter_nonterminals(node: AstNode) -> Iterator[NonTerminal]:
    if isinstance(node, NonTerminal):
        yield node
        for child in node.children:
            yield from iter_nonterminals(child)


def iter_bt_leaves(node: BtNode) -> Iterator[BtLeaf]:
    if isinstance(node, BtLeaf):
        yield node
    else:
        yield from iter_bt_leaves(node.left)
        yield from iter_bt_leaves(node.right)


def iter_bt_internals(node: BtNode) -> Iterator[BtInternal]:
    if isinstance(node, BtInternal):
        yield node
        yield from iter_bt_internals(node.left)
        yield from iter_bt_internals(node.right)


def ast_depth(node: AstNode) -> int:
    if isinstance(node, Terminal):
        return 0
    return 1 + max(ast_depth(c) for c in node.children)


def format_ast(node: AstNode, indent: int = 0) -> str:
    """Readable multi-line rendering, one node per line."""
    pad = "  " * indent
    if isinstance(node, Terminal):
        return f"{pad}{node.token_index}:{node.text!r}"
    lines = [f"{pad}{node.label}"]
    lines += [format_ast(c, indent + 1) for c in node.children]
    return "\n".join(lines)


def ast_fingerprint(ast: Ast) -> str:
    """Stable hex digest of the tree's structure, labels, and tokens."""
    import hashlib

    parts: list[str] = []

    def walk(node: AstNode) -> None:
        if isinstance(node, Terminal):
            parts.append(f"t{node.token_index}\x1f{node.text}\x1e")
        else:
            parts.append(f"n{node.label}\x1f{len(node.children)}\x1e")
            for child in node.children:
                walk(child)

    walk(ast.root)
    return hashlib.sha256("".join(parts).encode("utf-8")).hexdigest()
