"""Recover whole ASTs from hidden token representations.

The pipeline: parse source into an AST, binarize it, compress it into a
(d, c, u) tuple, then train an orthogonal-projection probe that predicts
the tuple from per-token hidden vectors. Decoding the predicted tuple
and expanding the binary tree yields the recovered AST, scored against
the ground truth with constituent precision/recall/F1.
"""

from .binarize import binarize, unbinarize
from .decode import predict_ast
from .errors import AstProbeError
from .evaluation import PrfScore, constituents, score
from .probe import ProbeParams, forward, init_probe, project
from .trees import EMPTY, Ast, BinaryTree, NonTerminal, Terminal
from .tuples import TupleDCU, rank_equivalent, tree_to_tuple, tuple_to_tree
from .vocab import LabelVocab, build_vocabs

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "Ast",
    "AstProbeError",
    "BinaryTree",
    "LabelVocab",
    "NonTerminal",
    "PrfScore",
    "ProbeParams",
    "Terminal",
    "TupleDCU",
    "binarize",
    "build_vocabs",
    "constituents",
    "forward",
    "init_probe",
    "predict_ast",
    "project",
    "rank_equivalent",
    "score",
    "tree_to_tuple",
    "tuple_to_tree",
    "unbinarize",
    "__version__",
]
