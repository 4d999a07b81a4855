"""Turn probe outputs back into whole ASTs."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .binarize import unbinarize
from .probe import ProbeParams, forward
from .trees import Ast
from .tuples import tuple_to_tree
from .vocab import LabelVocab


def predict_tuple(params: ProbeParams, hidden: np.ndarray):
    """Predicted (d_hat, c ids, u ids) for one token sequence.

    Argmax ties resolve to the lowest id (numpy argmax is leftmost).
    """
    out = forward(params, hidden)
    c_ids = np.argmax(out.c_logits, axis=1)
    u_ids = np.argmax(out.u_logits, axis=1)
    return out.d_hat, c_ids, u_ids


def predict_ast(
    params: ProbeParams,
    hidden: np.ndarray,
    cvocab: LabelVocab,
    uvocab: LabelVocab,
    tokens: Sequence[str] | None = None,
) -> Ast:
    """Recover the AST encoded in `hidden`: predict the tuple, decode the
    binary tree, then expand it back into a rose tree."""
    d_hat, c_ids, u_ids = predict_tuple(params, hidden)
    tree = tuple_to_tree(d_hat, c_ids, u_ids, cvocab, uvocab, tokens=tokens)
    return unbinarize(tree)
