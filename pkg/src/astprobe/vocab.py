"""Label vocabularies for the c and u heads."""

from __future__ import annotations

import hashlib
import json
from typing import Iterable, Iterator

from .errors import UnknownLabel
from .trees import EMPTY, BinaryTree, iter_bt_internals, iter_bt_leaves


class LabelVocab:
    """Bidirectional label <-> id map with the EMPTY symbol fixed at id 0.

    Starts unfrozen: unknown labels are assigned fresh ids on lookup.
    After `freeze()`, unknown labels raise UnknownLabel instead.
    """

    def __init__(self, labels: Iterable[str] = ()):
        self._labels: list[str] = [EMPTY]
        self._ids: dict[str, int] = {EMPTY: 0}
        self.frozen = False
        for label in labels:
            self.id_of(label)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelVocab) and self._labels == other._labels

    def freeze(self) -> "LabelVocab":
        self.frozen = True
        return self

    def id_of(self, label: str) -> int:
        got = self._ids.get(label)
        if got is not None:
            return got
        if self.frozen:
            raise UnknownLabel(f"label {label!r} not in frozen vocabulary")
        self._ids[label] = len(self._labels)
        self._labels.append(label)
        return self._ids[label]

    def label_of(self, idx: int) -> str:
        if not 0 <= idx < len(self._labels):
            raise UnknownLabel(f"id {idx} outside vocabulary of size {len(self)}")
        return self._labels[idx]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)

    def digest(self) -> bytes:
        """32-byte content hash, stable across processes."""
        joined = "\x1e".join(self._labels).encode("utf-8")
        return hashlib.sha256(joined).digest()


def build_vocabs(trees: Iterable[BinaryTree]) -> tuple[LabelVocab, LabelVocab]:
    """Collect c and u vocabularies from training-split binary trees.

    Labels are inserted in sorted order so the result is independent of
    sample order. Both vocabularies come back frozen.
    """
    c_labels: set[str] = set()
    u_labels: set[str] = set()
    for tree in trees:
        for node in iter_bt_internals(tree.root):
            c_labels.add(node.label)
        for leaf in iter_bt_leaves(tree.root):
            u_labels.add(leaf.unary_label)
    cvocab = LabelVocab(sorted(c_labels - {EMPTY}))
    uvocab = LabelVocab(sorted(u_labels - {EMPTY}))
    return cvocab.freeze(), uvocab.freeze()


def save_vocabs(path, cvocab: LabelVocab, uvocab: LabelVocab) -> None:
    payload = {"c": list(cvocab.labels), "u": list(uvocab.labels)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=None, separators=(",", ":"))


def load_vocabs(path) -> tuple[LabelVocab, LabelVocab]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    cvocab = LabelVocab(payload["c"][1:])
    uvocab = LabelVocab(payload["u"][1:])
    return cvocab.freeze(), uvocab.freeze()
