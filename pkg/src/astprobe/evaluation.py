"""Constituent extraction and precision/recall/F1 scoring.

A constituent is one (non-terminal label, first token, last token)
triple per non-terminal node. Duplicate triples are possible (a unary
chain repeats the span), so scoring intersects multisets: each
duplicate must be matched separately to count as a hit.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import LeafMismatch
from .trees import Ast, AstNode, NonTerminal, Terminal


@dataclass(frozen=True, slots=True)
class Constituent:
    label: str
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad span {self.start}..{self.end}")


@dataclass(frozen=True, slots=True)
class PrfScore:
    precision: float
    recall: float
    f1: float
    hits: int
    n_pred: int
    n_gold: int

    def as_record(self, sample_id: str | None = None) -> dict:
        record = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "hits": self.hits,
            "n_pred": self.n_pred,
            "n_gold": self.n_gold,
        }
        if sample_id is not None:
            record = {"sample_id": sample_id, **record}
        return record

    def to_json(self, sample_id: str | None = None) -> str:
        return json.dumps(self.as_record(sample_id), separators=(",", ":"))


def constituents(ast: Ast) -> Counter:
    """Multiset of (label, span) pairs, one per non-terminal node."""
    result: Counter = Counter()

    def walk(node: AstNode) -> tuple[int, int]:
        if isinstance(node, Terminal):
            return node.token_index, node.token_index
        start = end = -1
        for child in node.children:
            c_start, c_end = walk(child)
            if start < 0:
                start = c_start
            end = c_end
        result[Constituent(node.label, start, end)] += 1
        return start, end

    walk(ast.root)
    return result


def _prf(hits: int, n_pred: int, n_gold: int) -> PrfScore:
    if n_pred == 0 and n_gold == 0:
        return PrfScore(1.0, 1.0, 1.0, 0, 0, 0)
    precision = hits / n_pred if n_pred else 0.0
    recall = hits / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PrfScore(precision, recall, f1, hits, n_pred, n_gold)


def score(pred: Ast, gold: Ast) -> PrfScore:
    """Constituent precision/recall/F1 of one predicted tree."""
    if pred.n_leaves != gold.n_leaves:
        raise LeafMismatch(
            f"prediction covers {pred.n_leaves} tokens, gold {gold.n_leaves}"
        )
    pred_consts = constituents(pred)
    gold_consts = constituents(gold)
    hits = sum((pred_consts & gold_consts).values())
    return _prf(hits, sum(pred_consts.values()), sum(gold_consts.values()))


def micro_average(scores: Iterable[PrfScore]) -> PrfScore:
    """Corpus score from summed hit/prediction/gold counts."""
    hits = n_pred = n_gold = 0
    for s in scores:
        hits += s.hits
        n_pred += s.n_pred
        n_gold += s.n_gold
    return _prf(hits, n_pred, n_gold)


def macro_average(scores: Iterable[PrfScore]) -> PrfScore:
    """Corpus score as the plain mean of per-sample metrics."""
    scores = list(scores)
    if not scores:
        return PrfScore(1.0, 1.0, 1.0, 0, 0, 0)
    n = len(scores)
    precision = sum(s.precision for s in scores) / n
    recall = sum(s.recall for s in scores) / n
    f1 = sum(s.f1 for s in scores) / n
    return PrfScore(
        precision,
        recall,
        f1,
        sum(s.hits for s in scores),
        sum(s.n_pred for s in scores),
        sum(s.n_gold for s in scores),
    )
