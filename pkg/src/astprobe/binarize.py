"""AST <-> strictly binary tree conversion.

Three rewrite rules turn a rose tree into a binary tree, applied in one
bottom-up post-order pass:

1. a unary non-terminal over an internal node is merged with its child,
   labels joined with "-";
2. an n-ary node is split right-branching, the extra internal nodes
   labeled with the EMPTY placeholder;
3. a non-terminal chain that ends in a unique terminal is deleted and
   its "-"-joined labels become the terminal's unary label. Rule 3 wins
   over rule 1 whenever the chain bottoms out in a terminal, and it
   swallows chains of any length.

`unbinarize` inverts all three: EMPTY internals are spliced out, merged
labels are re-expanded into unary chains, and leaf unary labels become
chains above the terminal.
"""

from __future__ import annotations

from .errors import MalformedLabel
from .trees import (
    EMPTY,
    MERGE_SEP,
    Ast,
    AstNode,
    BinaryTree,
    BtInternal,
    BtLeaf,
    BtNode,
    NonTerminal,
    Terminal,
)


def binarize(ast: Ast) -> BinaryTree:
    return BinaryTree(root=_binarize_node(ast.root))


def _binarize_node(node: AstNode) -> BtNode:
    if isinstance(node, Terminal):
        return BtLeaf(node.token_index, node.text, EMPTY)

    if len(node.children) == 1:
        child = _binarize_node(node.children[0])
        if isinstance(child, BtLeaf):
            # rule 3: fold this label onto the terminal
            unary = (
                node.label
                if child.unary_label == EMPTY
                else node.label + MERGE_SEP + child.unary_label
            )
            return BtLeaf(child.token_index, child.text, unary)
        # rule 1: merge with the child internal node
        return BtInternal(node.label + MERGE_SEP + child.label, child.left, child.right)

    if len(node.children) == 2:
        left, right = node.children
        return BtInternal(node.label, _binarize_node(left), _binarize_node(right))

    # rule 2: right-branching EMPTY chain over children 1..n-1
    return BtInternal(
        node.label,
        _binarize_node(node.children[0]),
        _empty_chain(node.children[1:]),
    )


def _empty_chain(children: tuple[AstNode, ...]) -> BtNode:
    if len(children) == 1:
        return _binarize_node(children[0])
    return BtInternal(EMPTY, _binarize_node(children[0]), _empty_chain(children[1:]))


def unbinarize(tree: BinaryTree) -> Ast:
    nodes = _unbinarize_node(tree.root)
    if len(nodes) == 1:
        return Ast(root=nodes[0])
    # The root was an EMPTY node; splicing it out would leave a forest.
    # Binarize never emits this, but trees decoded from predicted labels
    # can. Keep an explicit EMPTY root so the result is still one tree
    # (it scores as a miss against any real label).
    return Ast(root=NonTerminal(EMPTY, tuple(nodes)))


def _unbinarize_node(node: BtNode) -> list[AstNode]:
    """Return the expansion of `node` as a list of siblings."""
    if isinstance(node, BtLeaf):
        result: AstNode = Terminal(node.token_index, node.text)
        if node.unary_label != EMPTY:
            for label in reversed(_split_merged(node.unary_label)):
                result = NonTerminal(label, (result,))
        return [result]

    children = _unbinarize_node(node.left) + _unbinarize_node(node.right)
    if node.label == EMPTY:
        return children
    labels = _split_merged(node.label)
    result = NonTerminal(labels[-1], tuple(children))
    for label in reversed(labels[:-1]):
        result = NonTerminal(label, (result,))
    return [result]


def _split_merged(label: str) -> list[str]:
    parts = label.split(MERGE_SEP)
    if any(not p for p in parts):
        raise MalformedLabel(f"empty segment after splitting {label!r}")
    return parts
