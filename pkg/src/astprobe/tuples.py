"""Binary tree <-> (d, c, u) tuple codec.

A binary tree with n+1 leaves compresses into three vectors:

* ``d`` (length n): gold syntactic distances. d[i] is the height of the
  lowest common ancestor of leaves i and i+1, with leaves at height 0
  and internal nodes at max(child heights) + 1.
* ``c`` (length n): label id of that lowest common ancestor.
* ``u`` (length n+1): unary-label id per leaf.

Decoding splits recursively at the argmax of ``d`` (leftmost on ties)
and only uses the ranking of ``d``, so any rank-equivalent vector
decodes to the same tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch
from .trees import BinaryTree, BtInternal, BtLeaf, BtNode
from .vocab import LabelVocab


@dataclass(frozen=True, slots=True)
class TupleDCU:
    """The (d, c, u) vectors compressing one binarized AST.

    ``d`` holds gold integer distances after encoding and real-valued
    predicted distances after probing; only its ranking matters.
    """

    d: np.ndarray
    c: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        if not (len(self.d) == len(self.c) == len(self.u) - 1):
            raise LengthMismatch(
                f"need len(d) == len(c) == len(u) - 1, got "
                f"{len(self.d)}/{len(self.c)}/{len(self.u)}"
            )

    @property
    def n_tokens(self) -> int:
        return len(self.u)


def tree_to_tuple(
    tree: BinaryTree, cvocab: LabelVocab, uvocab: LabelVocab
) -> tuple[TupleDCU, int]:
    """Encode a binary tree; returns the tuple and the tree height."""
    d: list[int] = []
    c: list[int] = []
    u: list[int] = []

    def walk(node: BtNode) -> int:
        if isinstance(node, BtLeaf):
            u.append(uvocab.id_of(node.unary_label))
            return 0
        h_left = walk(node.left)
        # both d and c receive this node's entry between the two subtrees
        pos = len(d)
        d.append(0)
        c.append(cvocab.id_of(node.label))
        h_right = walk(node.right)
        h = max(h_left, h_right) + 1
        d[pos] = h
        return h

    height = walk(tree.root)
    return (
        TupleDCU(
            d=np.asarray(d, dtype=np.int64),
            c=np.asarray(c, dtype=np.int64),
            u=np.asarray(u, dtype=np.int64),
        ),
        height,
    )


def tuple_to_tree(
    d: Sequence[float] | np.ndarray,
    c: Sequence[int] | np.ndarray,
    u: Sequence[int] | np.ndarray,
    cvocab: LabelVocab,
    uvocab: LabelVocab,
    tokens: Sequence[str] | None = None,
) -> BinaryTree:
    """Decode a (d, c, u) tuple back into a binary tree.

    ``tokens`` supplies the leaf texts (they are not part of the tuple);
    when omitted, leaves carry empty strings.
    """
    d = np.asarray(d, dtype=np.float64)
    c = np.asarray(c, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    if not (len(d) == len(c) == len(u) - 1):
        raise LengthMismatch(
            f"need len(d) == len(c) == len(u) - 1, got {len(d)}/{len(c)}/{len(u)}"
        )
    if tokens is None:
        tokens = [""] * len(u)
    elif len(tokens) != len(u):
        raise LengthMismatch(f"got {len(tokens)} tokens for {len(u)} leaves")

    def build(lo: int, hi: int) -> BtNode:
        # leaves lo..hi inclusive; gaps lo..hi-1 index into d and c
        if lo == hi:
            return BtLeaf(lo, tokens[lo], uvocab.label_of(int(u[lo])))
        split = lo + int(np.argmax(d[lo:hi]))  # leftmost maximum
        return BtInternal(
            cvocab.label_of(int(c[split])),
            build(lo, split),
            build(split + 1, hi),
        )

    return BinaryTree(root=build(0, len(u) - 1))


def rank_equivalent(
    d1: Sequence[float] | np.ndarray, d2: Sequence[float] | np.ndarray
) -> bool:
    """True iff d1 and d2 order every pair of positions identically."""
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    if d1.shape != d2.shape or d1.ndim != 1:
        raise LengthMismatch(f"shapes {d1.shape} and {d2.shape} differ")
    s1 = np.sign(d1[:, None] - d1[None, :])
    s2 = np.sign(d2[:, None] - d2[None, :])
    return bool(np.array_equal(s1, s2))
