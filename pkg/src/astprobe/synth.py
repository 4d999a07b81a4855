"""Synthetic data: random ASTs and planted-subspace corpora.

The planted corpus embeds each token sequence so that its (d, c, u)
tuple is exactly linearly decodable from a known low-dimensional
subspace:

* a fixed random orthonormal basis Q (true_dim x m1) defines the
  subspace;
* inside it, one axis per c label carries a walk whose step at gap i
  points along the gold c-label axis with squared length
  DISTANCE_SCALE * gold_distance, and one axis per u label carries a
  UNARY_SCALE one-hot of the token's unary label. Squared step norms
  then rank exactly like the gold distances: the one-hot block shifts
  each squared norm by at most 2 * UNARY_SCALE**2, which is smaller
  than DISTANCE_SCALE, the gap between consecutive gold distances;
* Gaussian noise (sigma 0.1) is added in the orthogonal complement, so
  a probe that finds span(Q) recovers every tree exactly.

`oracle_params` returns the probe that reads this construction off by
construction; it certifies decodability independently of training.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .binarize import binarize
from .containers import EmbeddingContainer, write_embeddings
from .manifest import SPLITS, CorpusManifest, ManifestSample
from .probe import ProbeParams
from .sidecar import TupleSidecar, save_sidecar
from .trees import Ast, AstNode, NonTerminal, Terminal, ast_fingerprint
from .tuples import TupleDCU, tree_to_tuple
from .vocab import LabelVocab, build_vocabs, save_vocabs

DISTANCE_SCALE = 25.0
UNARY_SCALE = 3.0


def random_ast(
    rng: np.random.Generator,
    max_leaves: int = 50,
    max_arity: int = 6,
    labels: tuple[str, ...] = ("block", "call", "args", "pair", "item", "cond", "loop", "expr"),
    unary_labels: tuple[str, ...] | None = None,
    unary_prob: float = 0.2,
    max_unary: int = 2,
    min_leaves: int = 1,
    wrap_internal_prob: float | None = None,
) -> Ast:
    """Seeded random rose tree with n-ary nodes and unary chains."""
    if unary_labels is None:
        unary_labels = labels
    if wrap_internal_prob is None:
        wrap_internal_prob = unary_prob / 2
    n_leaves = int(rng.integers(min_leaves, max_leaves + 1))
    counter = iter(range(n_leaves))

    def pick(pool):
        return str(pool[rng.integers(0, len(pool))])

    def subtree(m: int) -> AstNode:
        if m == 1:
            node: AstNode = Terminal(next(counter), f"w{rng.integers(0, 100)}")
            if rng.random() < unary_prob:
                for _ in range(int(rng.integers(1, max_unary + 1))):
                    node = NonTerminal(pick(unary_labels), (node,))
            return node
        arity = int(rng.integers(2, min(max_arity, m) + 1))
        cuts = np.sort(rng.choice(m - 1, size=arity - 1, replace=False)) + 1
        sizes = np.diff(np.concatenate(([0], cuts, [m])))
        children = tuple(subtree(int(s)) for s in sizes)
        node = NonTerminal(pick(labels), children)
        if rng.random() < wrap_internal_prob:
            node = NonTerminal(pick(labels), (node,))
        return node

    root = subtree(n_leaves)
    if isinstance(root, Terminal):
        root = NonTerminal(pick(labels), (root,))
    return Ast(root=root)


# Label alphabets for the planted corpus: no unary chains over internal
# nodes (merged labels would blow up the vocabulary) and single-label
# chains over terminals, so |C|+|U| stays within the planted subspace.
_PLANT_NT = ("block", "call", "args", "pair", "item", "cond", "loop")
_PLANT_UNARY = ("ident", "literal", "key", "op")


def planted_ast(rng: np.random.Generator, min_leaves: int = 8, max_leaves: int = 20) -> Ast:
    return random_ast(
        rng,
        max_leaves=max_leaves,
        min_leaves=min_leaves,
        max_arity=3,
        labels=_PLANT_NT,
        unary_labels=_PLANT_UNARY,
        unary_prob=0.3,
        max_unary=1,
        wrap_internal_prob=0.0,
    )


@dataclass
class PlantedSample:
    sample_id: str
    split: str
    ast: Ast
    gold: TupleDCU
    tokens: tuple[str, ...]
    hidden: np.ndarray  # (n+1, m1) float32


@dataclass
class PlantedCorpus:
    basis: np.ndarray  # (true_dim, m1), orthonormal rows
    cvocab: LabelVocab
    uvocab: LabelVocab
    samples: list[PlantedSample]
    m1: int
    true_dim: int

    def split(self, name: str) -> list[PlantedSample]:
        return [s for s in self.samples if s.split == name]


def _planted_coords(
    gold: TupleDCU, n_c: int, n_u: int, true_dim: int
) -> np.ndarray:
    """Exact geometric encoding of one tuple inside the subspace."""
    n_tokens = gold.n_tokens
    coords = np.zeros((n_tokens, true_dim))
    walk = np.zeros(n_c)
    coords[0, n_c + gold.u[0]] = UNARY_SCALE
    for i in range(n_tokens - 1):
        step = np.sqrt(DISTANCE_SCALE * float(gold.d[i]))
        walk[gold.c[i]] -= step
        coords[i + 1, :n_c] = walk
        coords[i + 1, n_c + gold.u[i + 1]] = UNARY_SCALE
    return coords


def oracle_params(corpus: "PlantedCorpus", dtype=np.float64) -> ProbeParams:
    """The probe that reads the planted construction off exactly."""
    n_c = len(corpus.cvocab)
    n_u = len(corpus.uvocab)
    c = np.zeros((n_c, corpus.true_dim))
    c[:, :n_c] = np.eye(n_c)
    u = np.zeros((n_u, corpus.true_dim))
    u[:, n_c : n_c + n_u] = np.eye(n_u)
    return ProbeParams(
        B=corpus.basis.astype(dtype), C=c.astype(dtype), U=u.astype(dtype)
    )


def make_planted_corpus(
    n_train: int = 600,
    n_test: int = 100,
    n_validation: int = 100,
    m1: int = 64,
    true_dim: int = 16,
    noise_sigma: float = 0.1,
    seed: int = 7,
    embeddings: str = "planted",
) -> PlantedCorpus:
    """Generate the synthetic corpus with linearly decodable embeddings.

    ``embeddings="noise"`` replaces every hidden vector with seeded
    Gaussian noise while keeping the same trees, the uninformative
    baseline for the probe-validity gap.
    """
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((m1, true_dim))
    q, r = np.linalg.qr(gauss)
    basis = (q * np.sign(np.diag(r))).T  # (true_dim, m1), orthonormal rows

    sizes = {"train": n_train, "test": n_test, "validation": n_validation}
    asts: list[tuple[str, str, Ast]] = []
    for split in SPLITS:
        for i in range(sizes[split]):
            asts.append((f"{split}-{i:04d}", split, planted_ast(rng)))

    trees = {sid: binarize(ast) for sid, _, ast in asts}
    cvocab, uvocab = build_vocabs(
        trees[sid] for sid, split, _ in asts if split == "train"
    )
    n_c, n_u = len(cvocab), len(uvocab)
    if n_c + n_u > true_dim:
        raise ValueError(
            f"planted subspace too small: |C|+|U| = {n_c + n_u} > {true_dim}"
        )

    complement = np.eye(m1) - basis.T @ basis
    samples: list[PlantedSample] = []
    for sample_id, split, ast in asts:
        gold, _ = tree_to_tuple(trees[sample_id], cvocab, uvocab)
        if embeddings == "planted":
            coords = _planted_coords(gold, n_c, n_u, true_dim)
            noise = rng.standard_normal((gold.n_tokens, m1)) * noise_sigma
            hidden = coords @ basis + noise @ complement.T
        elif embeddings == "noise":
            hidden = rng.standard_normal((gold.n_tokens, m1))
        else:
            raise ValueError(f"unknown embeddings mode {embeddings!r}")
        samples.append(
            PlantedSample(
                sample_id=sample_id,
                split=split,
                ast=ast,
                gold=gold,
                tokens=tuple(ast.tokens()),
                hidden=hidden.astype(np.float32),
            )
        )
    return PlantedCorpus(
        basis=basis,
        cvocab=cvocab,
        uvocab=uvocab,
        samples=samples,
        m1=m1,
        true_dim=true_dim,
    )


def write_planted_corpus(corpus: PlantedCorpus, out_dir: str | Path) -> Path:
    """Materialize a planted corpus in the on-disk layout the CLI reads:
    containers, tuple sidecars, vocabularies, and a manifest."""
    out_dir = Path(out_dir)
    (out_dir / "embeddings").mkdir(parents=True, exist_ok=True)
    (out_dir / "tuples").mkdir(parents=True, exist_ok=True)

    manifest = CorpusManifest(
        language="synthetic",
        split_sizes={s: len(corpus.split(s)) for s in SPLITS},
        seed=0,
    )
    for sample in corpus.samples:
        n_tokens = len(sample.tokens)
        container = EmbeddingContainer(
            sample_id=sample.sample_id,
            m1=corpus.m1,
            layers={0: sample.hidden},
            word_spans=[(i, i) for i in range(n_tokens)],
        )
        write_embeddings(out_dir / "embeddings" / f"{sample.sample_id}.astp", container)
        save_sidecar(
            out_dir / "tuples" / f"{sample.sample_id}.json",
            TupleSidecar(
                sample_id=sample.sample_id,
                tokens=list(sample.tokens),
                token_ranges=None,
                d=[int(x) for x in sample.gold.d],
                c=[int(x) for x in sample.gold.c],
                u=[int(x) for x in sample.gold.u],
            ),
        )
        manifest.samples.append(
            ManifestSample(
                sample_id=sample.sample_id,
                split=sample.split,
                source_path="",
                embedding_path=f"embeddings/{sample.sample_id}.astp",
                ast_fingerprint=ast_fingerprint(sample.ast),
                n_tokens=n_tokens,
            )
        )
    save_vocabs(out_dir / "vocabs.json", corpus.cvocab, corpus.uvocab)
    manifest.save(out_dir / "manifest.jsonl")
    return out_dir / "manifest.jsonl"
